// Brute-force checks that do not share code paths with the closed forms or the
// scalar reduction: grid-search best responses, best-response dynamics, and
// the symmetric auction-stage utility.
#pragma once

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tbspam/game_core.hpp"
#include "tbspam/timeboost_solver.hpp"

namespace tbspam::oracle {

/// Grid used to locate a best response. Unset fields default to the bracket
/// [0, 5 V / C] with 10^5 intervals, then one 100x refinement around the
/// coarse argmax.
struct GridSpec {
  std::optional<double> lo;
  std::optional<double> hi;
  std::optional<double> spacing;
  int refine_factor = 100;
};

struct BestResponseResult {
  double argmax_k;
  double payoff_at_argmax;
  double grid_spacing;  // finest spacing used
  std::pair<double, double> bracket;
  bool at_boundary;  // argmax sits on a bracket edge
};

/// Maximises f over an evenly spaced grid on [lo, hi], then once more over
/// [argmax - h, argmax + h] with spacing h / refine_factor.
BestResponseResult grid_argmax(const std::function<double(double)>& f, double lo,
                               double hi, double spacing, int refine_factor);

/// FCFS best response against k_others_total opposing copies.
BestResponseResult best_response_baseline(double k_others_total,
                                          const GameParams& params,
                                          const GridSpec& grid = {});

BestResponseResult best_response_winner(double k_l_each, const GameParams& params,
                                        const GridSpec& grid = {});

BestResponseResult best_response_loser(double k_w, double k_l_others_each,
                                       const GameParams& params,
                                       const GridSpec& grid = {});

struct BRDynamicsTrace {
  std::vector<std::pair<double, double>> iterates;  // (k_w, k_l), init first
  bool converged = false;
  double final_gap = 0;
  bool damping_used = false;
};

struct BRDynamicsOptions {
  /// Defaults to twice the finest grid spacing.
  std::optional<double> tolerance;
  int max_iterations = 200;
  double damping = 0.5;
  GridSpec grid;
};

/// Alternating best-response updates: the winner responds to the losers'
/// copies, then the losers respond to the new winner value. Once either
/// coordinate's step flips sign, this and all later steps are scaled by
/// `damping`.
BRDynamicsTrace iterated_best_response(std::pair<double, double> init,
                                       const GameParams& params,
                                       const BRDynamicsOptions& options = {});

/// Expected utility when all n bidders bid b, ties are broken uniformly and
/// the express lane is worth v_A more than losing: u_l + (v_A - b) / n.
double auction_utility_symmetric(double b, double v_A, double u_l, int n);

/// Utility of one bidder deviating to `deviation` while the other n - 1 bid
/// `common_bid` in a second-price auction.
double auction_deviation_utility(double deviation, double common_bid, double u_w,
                                 double u_l, int n);

struct Check {
  std::string name;
  bool passed;
  double value;      // measured discrepancy or quantity
  double tolerance;  // gate it was compared against
};

/// Best-response and identity checks on the FCFS closed form.
std::vector<Check> verify_baseline(const GameParams& params, const GridSpec& grid = {});

/// Root, first-order-condition, ordering, identity and grid best-response
/// checks on a solved express-lane equilibrium.
std::vector<Check> verify_timeboost(const GameParams& params, const TimeboostEquilibrium& eq,
                                    const GridSpec& grid = {});

/// verify_baseline + verify_timeboost + ratio identity and revenue/spam
/// comparisons.
std::vector<Check> verify_comparison(const GameParams& params, const ComparisonReport& report,
                                     const GridSpec& grid = {});

}  // namespace tbspam::oracle
