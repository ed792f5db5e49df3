// Monte Carlo latency races.
//
// Player i's earliest copy arrives at an Exp(k_i * lambda) time; with an
// express lane, the advantaged player's arrival is shifted earlier by T.
// Replications are split into fixed-size blocks, each with its own generator
// seeded from (seed, block index), so results do not depend on how many
// worker threads run the blocks.
#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "tbspam/game_core.hpp"

namespace tbspam::sim {

inline constexpr std::uint64_t kBlockSize = 1u << 16;

struct RaceConfig {
  std::vector<double> copy_profile;
  double lambda = 1.0;
  double T = 0.0;
  std::optional<std::size_t> winner_index;  // set iff T > 0
  std::uint64_t replications = 1'000'000;
  std::uint64_t seed = 0;
  /// Sample min of ceil(k) unit-rate draws instead of one Exp(k lambda) draw.
  bool integer_copies = false;
  /// Payoff of player i is prize * 1{i wins} - copy_cost * k_i.
  double prize = 1.0;
  double copy_cost = 0.0;
  unsigned workers = 0;  // 0 = hardware concurrency
};

struct RaceOutcome {
  std::uint64_t replications = 0;
  std::vector<std::uint64_t> win_counts;
  std::vector<double> win_freqs;
  std::vector<double> analytic_probs;
  std::vector<double> z_scores;
  std::vector<double> mean_payoffs;
  std::vector<double> payoff_std_errors;
};

/// FCFS race; requires T == 0.
RaceOutcome simulate_baseline_race(const RaceConfig& config);

/// Express-lane race; requires T > 0 and a winner index. Exact ties go to the
/// express-lane holder.
RaceOutcome simulate_timeboost_race(const RaceConfig& config);

struct FullGameOutcome {
  std::uint64_t replications = 0;
  std::vector<double> mean_payoffs;
  std::vector<double> std_errors;
  std::vector<std::uint64_t> auction_wins;
  std::vector<std::uint64_t> race_wins;
};

/// Second-price auction over `bids` (uniform tie-breaking), then the
/// express-lane race with the auction winner playing k_w and every loser k_l.
/// Payoffs: V to the race winner, C per copy to everyone, second-highest bid
/// from the auction winner. Requires T > 0.
FullGameOutcome simulate_full_game(const GameParams& params, std::span<const double> bids,
                                   double k_w, double k_l, std::uint64_t replications,
                                   std::uint64_t seed, unsigned workers = 0);

/// Deterministic 64-bit seed for block `block` of stream `seed`.
std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t block);

}  // namespace tbspam::sim
