#include "tbspam/game_core.hpp"

#include <cmath>

#include <fmt/core.h>

namespace tbspam {

namespace {

void require(bool ok, const char* parameter, const std::string& message) {
  if (!ok) throw DomainError(parameter, fmt::format("{}: {}", parameter, message));
}

void check_common(int n, double lambda, double T) {
  require(n >= 2, "n", fmt::format("need at least 2 arbitrageurs, got {}", n));
  require(std::isfinite(lambda) && lambda > 0, "lambda",
          fmt::format("latency rate must be positive, got {}", lambda));
  require(std::isfinite(T) && T >= 0, "T",
          fmt::format("time advantage must be nonnegative, got {}", T));
}

}  // namespace

EffectiveParams derive_effective_params(double v, double g, double r) {
  require(std::isfinite(v) && v > 0, "v", fmt::format("must be positive, got {}", v));
  require(std::isfinite(g) && g > 0 && g < v, "g",
          fmt::format("must satisfy 0 < g < v, got g={} v={}", g, v));
  require(std::isfinite(r) && r > 0 && r < 1, "r",
          fmt::format("must lie in (0, 1), got {}", r));
  return {v - (1.0 - r) * g, r * g};
}

GameParams GameParams::from_primitives(int n, double v, double g, double r,
                                       double lambda, double T) {
  check_common(n, lambda, T);
  const auto eff = derive_effective_params(v, g, r);
  GameParams p;
  p.n_ = n;
  p.V_ = eff.V;
  p.C_ = eff.C;
  p.lambda_ = lambda;
  p.T_ = T;
  p.primitives_ = Primitives{v, g, r};
  return p;
}

GameParams GameParams::from_effective(int n, double V, double C, double lambda,
                                      double T) {
  check_common(n, lambda, T);
  require(std::isfinite(V) && V > 0, "V", fmt::format("must be positive, got {}", V));
  require(std::isfinite(C) && C > 0, "C", fmt::format("must be positive, got {}", C));
  GameParams p;
  p.n_ = n;
  p.V_ = V;
  p.C_ = C;
  p.lambda_ = lambda;
  p.T_ = T;
  return p;
}

GameParams GameParams::with_T(double T) const {
  check_common(n_, lambda_, T);
  GameParams p = *this;
  p.T_ = T;
  return p;
}

double baseline_win_prob(double k_i, double k_others_total) {
  require(k_i >= 0, "k_i", fmt::format("copies must be nonnegative, got {}", k_i));
  require(k_others_total >= 0, "k_others_total",
          fmt::format("copies must be nonnegative, got {}", k_others_total));
  require(k_i + k_others_total > 0, "k_i",
          "win probability undefined when nobody submits");
  return k_i / (k_i + k_others_total);
}

double baseline_payoff(double k_i, double k_others_total, double V, double C) {
  require(V > 0, "V", fmt::format("must be positive, got {}", V));
  require(C > 0, "C", fmt::format("must be positive, got {}", C));
  if (k_i == 0) return 0.0;
  return V * baseline_win_prob(k_i, k_others_total) - C * k_i;
}

BaselineEquilibrium baseline_equilibrium(const GameParams& params) {
  const double n = params.n();
  const double V = params.V();
  const double ratio = V / params.C();
  BaselineEquilibrium eq{};
  eq.k_star = (n - 1.0) / (n * n) * ratio;
  eq.K_star = n * eq.k_star;
  eq.u_star = V / (n * n);
  eq.W_star = n * eq.u_star;
  eq.R_star = V - eq.W_star;
  return eq;
}

}  // namespace tbspam
