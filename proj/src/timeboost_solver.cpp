#include "tbspam/timeboost_solver.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/core.h>

namespace tbspam {

ConvergenceError::ConvergenceError(double lo, double hi, int iterations)
    : std::runtime_error(fmt::format(
          "bisection did not converge: bracket [{:.17g}, {:.17g}] after {} iterations",
          lo, hi, iterations)),
      lo_(lo),
      hi_(hi),
      iterations_(iterations) {}

namespace {

void check_x(double x, int n) {
  if (!(x > 0.0 && x < 1.0)) {
    throw DomainError("x", fmt::format("x must lie in (0, 1), got {}", x));
  }
  if (n < 2) throw DomainError("n", fmt::format("need n >= 2, got {}", n));
}

void check_copies(double k, const char* name) {
  if (!(k >= 0.0) || !std::isfinite(k)) {
    throw DomainError(name, fmt::format("{}: copies must be finite and nonnegative, got {}", name, k));
  }
}

// log H(x); stays finite where exp(-a(x)) underflows near x = 1.
double log_h(double x, int n) {
  const double nn = n;
  return std::log(nn - 1.0 + x) + std::log1p(-x) - std::log(x) - a_function(x, n) -
         2.0 * std::log(nn);
}

}  // namespace

double ratio_r(double x, int n) {
  check_x(x, n);
  return (1.0 + (n - 1.0) * x) / (1.0 - x);
}

double a_function(double x, int n) {
  check_x(x, n);
  return x * (1.0 + (n - 1.0) * x) / ((n - 1.0) * (1.0 - x));
}

double h_function(double x, int n) {
  check_x(x, n);
  const double nn = n;
  return (nn - 1.0 + x) * (1.0 - x) / (x * nn * nn) * std::exp(-a_function(x, n));
}

double winner_payoff(double k_w, double k_l_each, const GameParams& params) {
  check_copies(k_w, "k_w");
  check_copies(k_l_each, "k_l_each");
  const double losers = (params.n() - 1.0) * k_l_each;
  // Nobody else racing: the lane holder takes the prize outright.
  if (losers == 0.0) return params.V() - params.C() * k_w;
  const double loser_wins = losers / (k_w + losers) * std::exp(-k_w * params.lambda_T());
  return params.V() * (1.0 - loser_wins) - params.C() * k_w;
}

double loser_payoff(double k_j, double k_w, double k_l_others_each,
                    const GameParams& params) {
  check_copies(k_j, "k_j");
  check_copies(k_w, "k_w");
  check_copies(k_l_others_each, "k_l_others_each");
  if (k_j == 0.0) return 0.0;
  const double total = k_w + k_j + (params.n() - 2.0) * k_l_others_each;
  return params.V() * (k_j / total) * std::exp(-k_w * params.lambda_T()) -
         params.C() * k_j;
}

FocValues symmetric_focs(double k_w, double k_l, const GameParams& params) {
  const double m = params.n() - 1.0;
  const double lt = params.lambda_T();
  const double D = k_w + m * k_l;
  const double discounted = std::exp(-k_w * lt) * params.V();
  FocValues f{};
  f.winner = (m * k_l / (D * D) + m * k_l / D * lt) * discounted - params.C();
  f.loser = (k_w + (m - 1.0) * k_l) / (D * D) * discounted - params.C();
  return f;
}

TimeboostEquilibrium solve_subgame(const GameParams& params, const SolverOptions& options) {
  const double lt = params.lambda_T();
  if (!(lt > 0.0)) {
    throw DomainError("T", "express-lane solve needs T > 0; use baseline_equilibrium for T = 0");
  }
  const int n = params.n();
  const double m = n - 1.0;
  const double V = params.V();
  const double C = params.C();

  // g(x) = log((n-1) lambda T H(x)) - log(C / V), strictly decreasing.
  const double offset = std::log(m * lt) - std::log(C / V);
  const auto g = [&](double x) { return offset + log_h(x, n); };

  double lo = options.bracket_edge;
  double hi = 1.0 - options.bracket_edge;
  if (!(g(lo) > 0.0 && g(hi) < 0.0)) throw ConvergenceError(lo, hi, 0);

  int iterations = 0;
  while (hi - lo > options.x_tolerance * lo) {
    const double mid = lo + 0.5 * (hi - lo);
    if (mid <= lo || mid >= hi) break;  // adjacent doubles
    if (iterations >= options.max_iterations) throw ConvergenceError(lo, hi, iterations);
    (g(mid) > 0.0 ? lo : hi) = mid;
    ++iterations;
  }

  TimeboostEquilibrium eq{};
  eq.iterations = iterations;
  eq.x_star = lo + 0.5 * (hi - lo);
  eq.k_l_star = eq.x_star / (m * lt);
  eq.k_w_star = ratio_r(eq.x_star, n) * eq.k_l_star;
  eq.D_star = eq.k_w_star + m * eq.k_l_star;

  const auto focs = symmetric_focs(eq.k_w_star, eq.k_l_star, params);
  eq.residual_w = std::abs(focs.winner);
  eq.residual_l = std::abs(focs.loser);
  if (eq.residual_w > options.foc_tolerance * C || eq.residual_l > options.foc_tolerance * C) {
    throw VerificationError(fmt::format(
        "first-order conditions not met at x*={:.17g}: winner residual {:.3e}, loser residual {:.3e}, gate {:.3e}",
        eq.x_star, eq.residual_w, eq.residual_l, options.foc_tolerance * C));
  }

  eq.u_l_star = loser_payoff(eq.k_l_star, eq.k_w_star, eq.k_l_star, params);
  eq.u_w_star = winner_payoff(eq.k_w_star, eq.k_l_star, params);

  // Second route for u_w*: eliminate C with the winner FOC.
  const double loser_share = m * eq.k_l_star / eq.D_star * std::exp(-eq.k_w_star * lt);
  const double u_w_via_foc =
      V - V * loser_share * (1.0 + eq.k_w_star / eq.D_star + eq.k_w_star * lt);
  const double gap = std::abs(u_w_via_foc - eq.u_w_star);
  if (gap > options.foc_tolerance * std::max(V, C * eq.k_w_star)) {
    throw VerificationError(fmt::format(
        "winner payoff mismatch: direct {:.17g} vs FOC route {:.17g}", eq.u_w_star, u_w_via_foc));
  }

  eq.b_star = eq.u_w_star - eq.u_l_star;
  eq.K_tb = eq.D_star;
  eq.W_tb = n * eq.u_l_star;
  eq.R_tb = V - eq.W_tb;
  return eq;
}

ComparisonReport compare(const GameParams& params, const SolverOptions& options) {
  ComparisonReport report{};
  report.baseline = baseline_equilibrium(params);
  report.timeboost = solve_subgame(params, options);
  const auto& tb = report.timeboost;
  report.spam_ratio = tb.K_tb / report.baseline.K_star;
  report.revenue_delta = tb.R_tb - report.baseline.R_star;
  const int n = params.n();
  const double predicted = (1.0 + tb.x_star / (n - 1.0)) * std::exp(-a_function(tb.x_star, n));
  report.ratio_identity_residual = std::abs(report.spam_ratio - predicted);

  if (!(report.spam_ratio < 1.0) || !(report.revenue_delta > 0.0)) {
    throw VerificationError(fmt::format(
        "express lane failed to cut spam or raise revenue: spam_ratio={:.17g} revenue_delta={:.17g}",
        report.spam_ratio, report.revenue_delta));
  }
  return report;
}

}  // namespace tbspam
