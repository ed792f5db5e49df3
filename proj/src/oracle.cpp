#include "tbspam/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/core.h>

#include "tbspam/timeboost_solver.hpp"

namespace tbspam::oracle {

namespace {

constexpr double kDefaultBracketMultiple = 5.0;
constexpr double kDefaultIntervals = 1e5;

struct ResolvedGrid {
  double lo, hi, spacing;
  int refine;
};

ResolvedGrid resolve(const GridSpec& grid, const GameParams& params) {
  ResolvedGrid r{};
  r.lo = grid.lo.value_or(0.0);
  r.hi = grid.hi.value_or(kDefaultBracketMultiple * params.V() / params.C());
  r.spacing = grid.spacing.value_or((r.hi - r.lo) / kDefaultIntervals);
  r.refine = grid.refine_factor;
  return r;
}

// Best value over lo + i * h, i = 0..count, clamped to hi at the end.
std::pair<double, double> scan(const std::function<double(double)>& f, double lo,
                               double hi, double h) {
  const auto count = static_cast<long long>(std::floor((hi - lo) / h + 1e-9));
  double best_k = lo;
  double best = f(lo);
  for (long long i = 1; i <= count + 1; ++i) {
    const double k = std::min(lo + static_cast<double>(i) * h, hi);
    const double value = f(k);
    if (value > best) {
      best = value;
      best_k = k;
    }
    if (k >= hi) break;
  }
  return {best_k, best};
}

}  // namespace

BestResponseResult grid_argmax(const std::function<double(double)>& f, double lo,
                               double hi, double spacing, int refine_factor) {
  if (!(spacing > 0.0)) {
    throw DomainError("spacing", fmt::format("grid spacing must be positive, got {}", spacing));
  }
  if (!(hi > lo)) {
    throw DomainError("bracket", fmt::format("empty bracket [{}, {}]", lo, hi));
  }
  auto [k, value] = scan(f, lo, hi, spacing);
  double finest = spacing;
  if (refine_factor > 1) {
    finest = spacing / refine_factor;
    const double sub_lo = std::max(lo, k - spacing);
    const double sub_hi = std::min(hi, k + spacing);
    auto [k2, value2] = scan(f, sub_lo, sub_hi, finest);
    if (value2 > value) {
      k = k2;
      value = value2;
    }
  }
  return {k, value, finest, {lo, hi}, k <= lo || k >= hi};
}

BestResponseResult best_response_baseline(double k_others_total, const GameParams& params,
                                          const GridSpec& grid) {
  const auto g = resolve(grid, params);
  const double V = params.V();
  const double C = params.C();
  return grid_argmax([&](double k) { return baseline_payoff(k, k_others_total, V, C); },
                     g.lo, g.hi, g.spacing, g.refine);
}

BestResponseResult best_response_winner(double k_l_each, const GameParams& params,
                                        const GridSpec& grid) {
  const auto g = resolve(grid, params);
  return grid_argmax([&](double k) { return winner_payoff(k, k_l_each, params); }, g.lo,
                     g.hi, g.spacing, g.refine);
}

BestResponseResult best_response_loser(double k_w, double k_l_others_each,
                                       const GameParams& params, const GridSpec& grid) {
  const auto g = resolve(grid, params);
  return grid_argmax(
      [&](double k) { return loser_payoff(k, k_w, k_l_others_each, params); }, g.lo, g.hi,
      g.spacing, g.refine);
}

BRDynamicsTrace iterated_best_response(std::pair<double, double> init,
                                       const GameParams& params,
                                       const BRDynamicsOptions& options) {
  if (!(params.lambda_T() > 0.0)) {
    throw DomainError("T", "best-response dynamics need T > 0");
  }
  BRDynamicsTrace trace;
  trace.iterates.push_back(init);

  double tol = 0.0;
  double prev_dw = 0.0;
  double prev_dl = 0.0;
  auto [k_w, k_l] = init;
  for (int it = 0; it < options.max_iterations; ++it) {
    const auto bw = best_response_winner(k_l, params, options.grid);
    if (it == 0) tol = options.tolerance.value_or(2.0 * bw.grid_spacing);
    const double dw = bw.argmax_k - k_w;
    if (prev_dw * dw < 0.0) trace.damping_used = true;
    k_w += (trace.damping_used ? options.damping : 1.0) * dw;

    const auto bl = best_response_loser(k_w, k_l, params, options.grid);
    const double dl = bl.argmax_k - k_l;
    if (prev_dl * dl < 0.0) trace.damping_used = true;
    k_l += (trace.damping_used ? options.damping : 1.0) * dl;

    trace.final_gap = std::max(std::abs(dw), std::abs(dl));
    prev_dw = dw;
    prev_dl = dl;
    trace.iterates.emplace_back(k_w, k_l);

    if (trace.final_gap < tol) {
      trace.converged = true;
      break;
    }
  }
  return trace;
}

double auction_utility_symmetric(double b, double v_A, double u_l, int n) {
  if (n < 2) throw DomainError("n", fmt::format("need n >= 2, got {}", n));
  return u_l + (v_A - b) / n;
}

double auction_deviation_utility(double deviation, double common_bid, double u_w,
                                 double u_l, int n) {
  if (deviation > common_bid) return u_w - common_bid;
  if (deviation < common_bid) return u_l;
  return auction_utility_symmetric(common_bid, u_w - u_l, u_l, n);
}

namespace {

Check at_most(std::string name, double value, double tolerance) {
  return {std::move(name), value <= tolerance, value, tolerance};
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

}  // namespace

std::vector<Check> verify_baseline(const GameParams& params, const GridSpec& grid) {
  const auto eq = baseline_equilibrium(params);
  const double n = params.n();
  const auto br = best_response_baseline((n - 1.0) * eq.k_star, params, grid);
  return {
      at_most("baseline best response vs k*", std::abs(br.argmax_k - eq.k_star), br.grid_spacing),
      at_most("baseline W* + R* = V", std::abs(eq.W_star + eq.R_star - params.V()),
              4.0 * std::numeric_limits<double>::epsilon() * params.V()),
  };
}

std::vector<Check> verify_timeboost(const GameParams& params, const TimeboostEquilibrium& eq,
                                    const GridSpec& grid) {
  const int n = params.n();
  const double V = params.V();
  const double C = params.C();
  const double lt = params.lambda_T();
  std::vector<Check> checks;

  const double lhs = (n - 1.0) * lt * h_function(eq.x_star, n);
  checks.push_back(at_most("scalar root residual (relative)", rel(lhs, C / V), 1e-12));
  checks.push_back(at_most("winner FOC residual", eq.residual_w, 1e-10 * C));
  checks.push_back(at_most("loser FOC residual", eq.residual_l, 1e-10 * C));
  checks.push_back({"0 < x* < 1", eq.x_star > 0 && eq.x_star < 1, eq.x_star, 1.0});
  checks.push_back({"0 < k_l* < k_w*", eq.k_l_star > 0 && eq.k_l_star < eq.k_w_star,
                    eq.k_w_star - eq.k_l_star, 0.0});
  checks.push_back({"0 < u_l* < u_w*", eq.u_l_star > 0 && eq.u_l_star < eq.u_w_star,
                    eq.u_w_star - eq.u_l_star, 0.0});
  checks.push_back({"u_l* < V/n^2", eq.u_l_star < V / (n * n), V / (n * n) - eq.u_l_star, 0.0});
  const double ratio = eq.k_l_star / eq.D_star;
  checks.push_back(at_most("u_l* identity (relative)",
                           rel(eq.u_l_star, std::exp(-eq.k_w_star * lt) * V * ratio * ratio),
                           1e-10));

  const auto bw = best_response_winner(eq.k_l_star, params, grid);
  checks.push_back(at_most("winner grid best response vs k_w*",
                           std::abs(bw.argmax_k - eq.k_w_star), bw.grid_spacing));
  const auto bl = best_response_loser(eq.k_w_star, eq.k_l_star, params, grid);
  checks.push_back(at_most("loser grid best response vs k_l*",
                           std::abs(bl.argmax_k - eq.k_l_star), bl.grid_spacing));
  return checks;
}

std::vector<Check> verify_comparison(const GameParams& params, const ComparisonReport& report,
                                     const GridSpec& grid) {
  auto checks = verify_baseline(params, grid);
  const auto tb = verify_timeboost(params, report.timeboost, grid);
  checks.insert(checks.end(), tb.begin(), tb.end());
  checks.push_back(at_most("spam ratio identity", report.ratio_identity_residual, 1e-10));
  checks.push_back({"K_tb < K*", report.spam_ratio < 1.0, report.spam_ratio, 1.0});
  checks.push_back({"R_tb > R*", report.revenue_delta > 0.0, report.revenue_delta, 0.0});
  return checks;
}

}  // namespace tbspam::oracle
