// Express-lane (Timeboost) game: a sealed-bid second-price auction awards a
// fixed timestamp advantage T, then the auction winner and the n - 1 losers
// play a copy-submission race.
//
// The symmetric submission equilibrium reduces to one scalar unknown
//
//     x = (n - 1) * k_l * lambda * T,   x in (0, 1),
//
// with k_w / k_l = r(x) and k_w * lambda * T = a(x). The loser first-order
// condition becomes (n - 1) * lambda * T * H(x) = C / V where H is strictly
// decreasing, so bisection on x finds the unique root.
//
// C is the per-copy revert cost throughout; R always means auction plus gas
// revenue.
#pragma once

#include <stdexcept>
#include <string>

#include "tbspam/game_core.hpp"

namespace tbspam {

/// Bisection failed to shrink the bracket within the iteration cap.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(double lo, double hi, int iterations);

  double lo() const noexcept { return lo_; }
  double hi() const noexcept { return hi_; }
  int iterations() const noexcept { return iterations_; }

 private:
  double lo_;
  double hi_;
  int iterations_;
};

/// An analytic identity or ordering failed beyond its tolerance.
class VerificationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// k_w / k_l as a function of x: (1 + (n - 1) x) / (1 - x).
double ratio_r(double x, int n);

/// k_w * lambda * T as a function of x: x (1 + (n - 1) x) / ((n - 1)(1 - x)).
double a_function(double x, int n);

/// H(x) = ((n - 1 + x)(1 - x) / (x n^2)) * exp(-a(x)).
double h_function(double x, int n);

struct SolverOptions {
  /// Bisection bracket is [edge, 1 - edge].
  double bracket_edge = 1e-12;
  /// Stop when the bracket width falls below x_tolerance * x.
  double x_tolerance = 1e-14;
  int max_iterations = 400;
  /// Gate on both first-order-condition residuals, relative to C.
  double foc_tolerance = 1e-10;
};

struct TimeboostEquilibrium {
  double x_star;
  double k_l_star;
  double k_w_star;
  double D_star;  // k_w* + (n - 1) k_l*
  double u_l_star;
  double u_w_star;  // excludes the auction payment
  double b_star;    // u_w* - u_l*
  double K_tb;
  double W_tb;
  double R_tb;
  double residual_w;  // |d u_w / d k_w| at the solution
  double residual_l;  // |d u_l / d k_l| at the solution
  int iterations;
};

/// Winner's expected payoff excluding the auction payment, with every loser
/// playing k_l_each. With no loser copies the winner always wins, so the
/// payoff is V - C k_w.
double winner_payoff(double k_w, double k_l_each, const GameParams& params);

/// Payoff of loser j submitting k_j while the winner submits k_w and the other
/// n - 2 losers submit k_l_others_each.
double loser_payoff(double k_j, double k_w, double k_l_others_each,
                    const GameParams& params);

/// Partial derivatives of the symmetric payoffs: d u_w / d k_w and
/// d u_l / d k_l, both at the symmetric profile (k_w, k_l).
struct FocValues {
  double winner;
  double loser;
};
FocValues symmetric_focs(double k_w, double k_l, const GameParams& params);

/// Solves the submission subgame and assembles the SPNE bid. Requires T > 0.
TimeboostEquilibrium solve_subgame(const GameParams& params,
                                   const SolverOptions& options = {});

struct ComparisonReport {
  BaselineEquilibrium baseline;
  TimeboostEquilibrium timeboost;
  double spam_ratio;     // K_tb / K*
  double revenue_delta;  // R_tb - R*
  double ratio_identity_residual;
};

/// Baseline vs. express-lane equilibrium for the same parameters. Throws
/// VerificationError if fewer copies or more revenue fail to materialise.
ComparisonReport compare(const GameParams& params,
                         const SolverOptions& options = {});

}  // namespace tbspam
