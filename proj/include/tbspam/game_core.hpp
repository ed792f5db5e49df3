// Contest model shared by the FCFS baseline and the express-lane game.
//
// n arbitrageurs race for one opportunity worth v. Each submits k (real,
// nonnegative) copies of a transaction; the earliest copy of player i lands at
// an Exp(k_i * lambda) time. A successful transaction pays gas g, reverted
// copies pay r * g each. Everything below works with the effective prize
// V = v - (1 - r) g and the per-copy cost C = r g.
#pragma once

#include <optional>
#include <stdexcept>
#include <string>

namespace tbspam {

/// Raised when a model input lies outside its domain. `parameter()` names the
/// offending input.
class DomainError : public std::invalid_argument {
 public:
  DomainError(std::string parameter, const std::string& what)
      : std::invalid_argument(what), parameter_(std::move(parameter)) {}

  const std::string& parameter() const noexcept { return parameter_; }

 private:
  std::string parameter_;
};

struct EffectiveParams {
  double V;
  double C;
};

/// Returns (V, C) = (v - (1 - r) g, r g). Requires 0 < g < v and 0 < r < 1.
EffectiveParams derive_effective_params(double v, double g, double r);

struct Primitives {
  double v;
  double g;
  double r;
};

/// Game parameters. Build through `from_primitives` or `from_effective`; both
/// validate. When constructed from primitives, V and C are recomputed from
/// (v, g, r) and never set independently.
class GameParams {
 public:
  static GameParams from_primitives(int n, double v, double g, double r,
                                    double lambda, double T);
  static GameParams from_effective(int n, double V, double C, double lambda,
                                   double T);

  int n() const noexcept { return n_; }
  double V() const noexcept { return V_; }
  double C() const noexcept { return C_; }
  double lambda() const noexcept { return lambda_; }
  double T() const noexcept { return T_; }
  double lambda_T() const noexcept { return lambda_ * T_; }
  const std::optional<Primitives>& primitives() const noexcept {
    return primitives_;
  }

  /// Same game with a different express-lane advantage.
  GameParams with_T(double T) const;

 private:
  GameParams() = default;

  int n_ = 2;
  double V_ = 0;
  double C_ = 0;
  double lambda_ = 1;
  double T_ = 0;
  std::optional<Primitives> primitives_;
};

/// Probability that a player with k_i copies lands first against
/// k_others_total copies from everyone else.
double baseline_win_prob(double k_i, double k_others_total);

/// Expected FCFS payoff V * P(win) - C * k_i. A player facing no copies at all
/// while submitting none earns 0.
double baseline_payoff(double k_i, double k_others_total, double V, double C);

struct BaselineEquilibrium {
  double k_star;  // copies per player
  double K_star;  // total copies
  double u_star;  // payoff per player
  double W_star;  // user surplus
  double R_star;  // sequencer revenue
};

/// Closed-form unique symmetric equilibrium of the FCFS race.
BaselineEquilibrium baseline_equilibrium(const GameParams& params);

}  // namespace tbspam
