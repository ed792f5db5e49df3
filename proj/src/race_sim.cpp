#include "tbspam/race_sim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <random>
#include <thread>

#include <fmt/core.h>

namespace tbspam::sim {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

class Stream {
 public:
  explicit Stream(std::uint64_t seed) : engine_(seed) {}

  // Uniform on (0, 1].
  double unit() { return (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53; }

  double exponential(double rate) { return rate > 0.0 ? -std::log(unit()) / rate : kInf; }

  std::size_t index(std::size_t count) {
    const auto i = static_cast<std::size_t>((unit() - 0x1.0p-53) * static_cast<double>(count));
    return std::min(i, count - 1);
  }

 private:
  std::mt19937_64 engine_;
};

// Runs `block_fn(stream, first_rep, reps)` for every block and returns the
// per-block results in block order.
template <typename Result, typename BlockFn>
std::vector<Result> run_blocks(std::uint64_t replications, std::uint64_t seed,
                               unsigned workers, BlockFn block_fn) {
  const std::uint64_t blocks = (replications + kBlockSize - 1) / kBlockSize;
  std::vector<Result> results(blocks);
  std::atomic<std::uint64_t> next{0};
  const auto work = [&] {
    for (std::uint64_t b = next++; b < blocks; b = next++) {
      Stream stream(substream_seed(seed, b));
      const std::uint64_t reps = std::min(kBlockSize, replications - b * kBlockSize);
      results[b] = block_fn(stream, reps);
    }
  };
  unsigned count = workers == 0 ? std::max(1u, std::thread::hardware_concurrency()) : workers;
  count = static_cast<unsigned>(std::min<std::uint64_t>(count, blocks));
  if (count <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned i = 0; i < count; ++i) pool.emplace_back(work);
  }
  return results;
}

void require(bool ok, const char* field, const std::string& message) {
  if (!ok) throw DomainError(field, fmt::format("{}: {}", field, message));
}

void validate(const RaceConfig& c) {
  require(c.replications >= 1, "replications", "need at least one replication");
  require(!c.copy_profile.empty(), "copy_profile", "empty profile");
  bool any_positive = false;
  for (double k : c.copy_profile) {
    require(std::isfinite(k) && k >= 0.0, "copy_profile",
            fmt::format("intensities must be finite and nonnegative, got {}", k));
    any_positive = any_positive || k > 0.0;
  }
  require(any_positive, "copy_profile", "at least one intensity must be positive");
  require(std::isfinite(c.lambda) && c.lambda > 0.0, "lambda",
          fmt::format("must be positive, got {}", c.lambda));
  require(std::isfinite(c.T) && c.T >= 0.0, "T", fmt::format("must be nonnegative, got {}", c.T));
  require(c.winner_index.has_value() == (c.T > 0.0), "winner_index",
          "must be set exactly when T > 0");
  if (c.winner_index) {
    require(*c.winner_index < c.copy_profile.size(), "winner_index",
            fmt::format("{} out of range for {} players", *c.winner_index, c.copy_profile.size()));
  }
}

std::vector<double> effective_copies(const RaceConfig& c) {
  std::vector<double> k = c.copy_profile;
  if (c.integer_copies) {
    for (double& x : k) x = std::ceil(x);
  }
  return k;
}

// Arrival of one player's earliest copy.
double arrival(Stream& s, double copies, double lambda, bool integer_copies) {
  if (!integer_copies) return s.exponential(copies * lambda);
  double best = kInf;
  for (int i = 0; i < static_cast<int>(copies); ++i) best = std::min(best, s.exponential(lambda));
  return best;
}

// Index of the race winner. The express-lane holder (if any) wins exact ties;
// otherwise the lowest index does.
std::size_t race_once(Stream& s, std::span<const double> copies, double lambda, double T,
                      std::optional<std::size_t> lane, bool integer_copies) {
  std::size_t best = copies.size();
  double best_time = kInf;
  for (std::size_t i = 0; i < copies.size(); ++i) {
    double t = arrival(s, copies[i], lambda, integer_copies);
    if (t == kInf) continue;
    if (lane && *lane == i) t -= T;
    if (t < best_time || (t == best_time && lane && *lane == i)) {
      best_time = t;
      best = i;
    }
  }
  return best;
}

RaceOutcome run_race(const RaceConfig& c, std::vector<double> analytic) {
  const auto k = effective_copies(c);
  const std::size_t players = k.size();
  const auto blocks = run_blocks<std::vector<std::uint64_t>>(
      c.replications, c.seed, c.workers, [&](Stream& s, std::uint64_t reps) {
        std::vector<std::uint64_t> wins(players, 0);
        for (std::uint64_t i = 0; i < reps; ++i) {
          ++wins[race_once(s, k, c.lambda, c.T, c.winner_index, c.integer_copies)];
        }
        return wins;
      });

  RaceOutcome out;
  out.replications = c.replications;
  out.win_counts.assign(players, 0);
  for (const auto& b : blocks) {
    for (std::size_t i = 0; i < players; ++i) out.win_counts[i] += b[i];
  }
  const double N = static_cast<double>(c.replications);
  for (std::size_t i = 0; i < players; ++i) {
    const double freq = static_cast<double>(out.win_counts[i]) / N;
    const double p = analytic[i];
    const double sd = std::sqrt(p * (1.0 - p) / N);
    double z = 0.0;
    if (sd > 0.0) {
      z = (freq - p) / sd;
    } else if (freq != p) {
      z = std::copysign(kInf, freq - p);
    }
    out.win_freqs.push_back(freq);
    out.z_scores.push_back(z);
    out.mean_payoffs.push_back(c.prize * freq - c.copy_cost * k[i]);
    out.payoff_std_errors.push_back(c.prize * std::sqrt(freq * (1.0 - freq) / N));
  }
  out.analytic_probs = std::move(analytic);
  return out;
}

}  // namespace

std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t block) {
  return splitmix64(splitmix64(seed) ^ splitmix64(block + 0x632BE59BD9B4E019ULL));
}

RaceOutcome simulate_baseline_race(const RaceConfig& config) {
  validate(config);
  require(config.T == 0.0, "T", "baseline race needs T = 0");
  const auto k = effective_copies(config);
  double total = 0.0;
  for (double x : k) total += x;
  std::vector<double> analytic;
  for (double x : k) analytic.push_back(x / total);
  return run_race(config, std::move(analytic));
}

RaceOutcome simulate_timeboost_race(const RaceConfig& config) {
  validate(config);
  require(config.T > 0.0, "T", "express-lane race needs T > 0");
  const auto k = effective_copies(config);
  const std::size_t w = *config.winner_index;
  double losers = 0.0;
  for (std::size_t i = 0; i < k.size(); ++i) {
    if (i != w) losers += k[i];
  }
  const double lane_discount = std::exp(-k[w] * config.lambda * config.T);
  const double total = k[w] + losers;
  std::vector<double> analytic(k.size());
  for (std::size_t i = 0; i < k.size(); ++i) {
    analytic[i] = i == w ? 1.0 - losers / total * lane_discount : k[i] / total * lane_discount;
  }
  return run_race(config, std::move(analytic));
}

FullGameOutcome simulate_full_game(const GameParams& params, std::span<const double> bids,
                                   double k_w, double k_l, std::uint64_t replications,
                                   std::uint64_t seed, unsigned workers) {
  const auto n = static_cast<std::size_t>(params.n());
  require(bids.size() == n, "bids", fmt::format("expected {} bids, got {}", n, bids.size()));
  for (double b : bids) require(std::isfinite(b), "bids", "bids must be finite");
  require(std::isfinite(k_w) && k_w >= 0.0, "k_w", "copies must be finite and nonnegative");
  require(std::isfinite(k_l) && k_l >= 0.0, "k_l", "copies must be finite and nonnegative");
  require(k_w > 0.0 || k_l > 0.0, "k_w", "someone must submit copies");
  require(params.T() > 0.0, "T", "full game needs T > 0");
  require(replications >= 1, "replications", "need at least one replication");

  const double top = *std::max_element(bids.begin(), bids.end());
  std::vector<std::size_t> top_bidders;
  for (std::size_t i = 0; i < n; ++i) {
    if (bids[i] == top) top_bidders.push_back(i);
  }

  struct Sums {
    std::vector<double> sum, sum_sq;
    std::vector<std::uint64_t> auction_wins, race_wins;
  };
  const double V = params.V();
  const double C = params.C();
  const auto blocks = run_blocks<Sums>(replications, seed, workers, [&](Stream& s,
                                                                        std::uint64_t reps) {
    Sums acc{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0),
             std::vector<std::uint64_t>(n, 0), std::vector<std::uint64_t>(n, 0)};
    std::vector<double> copies(n);
    for (std::uint64_t r = 0; r < reps; ++r) {
      const std::size_t lane = top_bidders.size() == 1 ? top_bidders.front()
                                                       : top_bidders[s.index(top_bidders.size())];
      double price = -kInf;
      for (std::size_t i = 0; i < n; ++i) {
        if (i != lane) price = std::max(price, bids[i]);
      }
      for (std::size_t i = 0; i < n; ++i) copies[i] = i == lane ? k_w : k_l;
      const std::size_t winner = race_once(s, copies, params.lambda(), params.T(), lane, false);
      ++acc.auction_wins[lane];
      ++acc.race_wins[winner];
      for (std::size_t i = 0; i < n; ++i) {
        double payoff = -C * copies[i];
        if (i == winner) payoff += V;
        if (i == lane) payoff -= price;
        acc.sum[i] += payoff;
        acc.sum_sq[i] += payoff * payoff;
      }
    }
    return acc;
  });

  FullGameOutcome out;
  out.replications = replications;
  std::vector<double> sum(n, 0.0), sum_sq(n, 0.0);
  out.auction_wins.assign(n, 0);
  out.race_wins.assign(n, 0);
  for (const auto& b : blocks) {
    for (std::size_t i = 0; i < n; ++i) {
      sum[i] += b.sum[i];
      sum_sq[i] += b.sum_sq[i];
      out.auction_wins[i] += b.auction_wins[i];
      out.race_wins[i] += b.race_wins[i];
    }
  }
  const double N = static_cast<double>(replications);
  for (std::size_t i = 0; i < n; ++i) {
    const double mean = sum[i] / N;
    const double var = N > 1 ? std::max(0.0, (sum_sq[i] - N * mean * mean) / (N - 1.0)) : 0.0;
    out.mean_payoffs.push_back(mean);
    out.std_errors.push_back(std::sqrt(var / N));
  }
  return out;
}

}  // namespace tbspam::sim
