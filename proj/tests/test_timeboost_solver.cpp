#include <doctest.h>

#include <cmath>
#include <random>

#include "tbspam/timeboost_solver.hpp"

using namespace tbspam;

namespace {

GameParams game(int n, double V, double C, double lambda_T) {
  return GameParams::from_effective(n, V, C, 1.0, lambda_T);
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

// Reference equilibria from tests/oracle/subgame_oracle.py: the two symmetric
// first-order conditions solved jointly in (k_w, k_l) at 50 digits with
// mpmath, without the scalar reduction.
struct Reference {
  int n;
  double V, C, lambda_T;
  double x, k_l, k_w, u_l, u_w, b, K_tb;
};
constexpr Reference kReferences[] = {
    {2, 10, 1, 1, 0.48227692131585228072, 0.48227692131585228072, 1.3807921253320742819,
     0.168447534257163929, 7.9684834190949095084, 7.8000358848377455794,
     1.8630690466479265626},
    {3, 10, 1, 0.1, 0.27396412454390272336, 1.3698206227195135408, 2.9204948540022959274,
     0.43735910531722071275, 3.4651456899242355655, 3.0277865846070148528,
     5.660136099441323009},
    {5, 100, 1, 0.01, 0.33912178028878067195, 8.4780445072195166223, 30.230081878886223319,
     1.2912647407169161326, 30.692681129368045661, 29.401416388651129528,
     64.142259907764289809},
    {10, 1, 1, 1, 0.38317714200652036816, 0.042575238000724485351, 0.30705729805981296505,
     0.0027987726956355512733, 0.28457660567294670533, 0.28177783297731115406,
     0.69023444006633333321},
};

}  // namespace

TEST_CASE("ratio_r") {
  CHECK(ratio_r(0.5, 2) == 3.0);
  CHECK(ratio_r(0.9, 2) == doctest::Approx(19.0).epsilon(1e-14));
  CHECK(ratio_r(1e-15, 3) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(ratio_r(0.3, 4) > 1.0);
  CHECK_THROWS_AS(ratio_r(0.0, 2), DomainError);
  CHECK_THROWS_AS(ratio_r(1.0, 2), DomainError);
  CHECK_THROWS_AS(ratio_r(-0.5, 2), DomainError);
}

TEST_CASE("a_function") {
  CHECK(a_function(0.5, 2) == 1.5);
  CHECK(a_function(1e-15, 5) < 1e-14);
  CHECK_THROWS_AS(a_function(1.5, 2), DomainError);

  // Central differences at 100 interior points.
  for (int n : {2, 3, 10}) {
    for (int i = 1; i <= 100; ++i) {
      const double x = i / 101.0;
      const double h = 1e-6 * std::min(x, 1 - x);
      const double slope = (a_function(x + h, n) - a_function(x - h, n)) / (2 * h);
      INFO("n=", n, " x=", x);
      CHECK(slope > 0);
      CHECK(a_function(x, n) > 0);
    }
  }
}

TEST_CASE("h_function boundary behaviour and monotonicity") {
  for (int n : {2, 3, 7}) {
    const double x = 1e-9;
    CHECK(rel(x * h_function(x, n), (n - 1.0) / (n * n)) < 1e-6);
    CHECK(h_function(1 - 1e-6, n) < 1e-100);
  }
  CHECK(h_function(0.6, 2) < h_function(0.4, 2));
  CHECK_THROWS_AS(h_function(0.0, 2), DomainError);

  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> unit(1e-6, 1 - 1e-6);
  for (int i = 0; i < 5000; ++i) {
    double a = unit(rng), b = unit(rng);
    if (a == b) continue;
    if (a > b) std::swap(a, b);
    const int n = 2 + static_cast<int>(rng() % 9);
    INFO("n=", n, " x1=", a, " x2=", b);
    REQUIRE(h_function(b, n) < h_function(a, n));
  }
}

TEST_CASE("winner_payoff") {
  CHECK(winner_payoff(1, 1, game(2, 10, 1, 0)) == 4.0);
  CHECK(winner_payoff(50, 1, game(2, 10, 1, 1)) == doctest::Approx(-40.0).epsilon(1e-12));
  CHECK(winner_payoff(0, 1, game(2, 10, 1, 1)) == 0.0);
  CHECK(winner_payoff(0, 0, game(2, 10, 1, 1)) == 10.0);
  CHECK(winner_payoff(3, 0, game(2, 10, 1, 1)) == 7.0);
  CHECK_THROWS_AS(winner_payoff(-1, 1, game(2, 10, 1, 1)), DomainError);
}

TEST_CASE("loser_payoff") {
  CHECK(loser_payoff(1, 1, 0, game(2, 10, 1, 0)) == 4.0);
  CHECK(loser_payoff(1, 1, 0, game(2, 10, 1, std::log(2.0))) == doctest::Approx(1.5).epsilon(1e-14));
  CHECK(loser_payoff(0, 1, 1, game(3, 10, 1, 1)) == 0.0);
  CHECK(loser_payoff(0, 0, 0, game(2, 10, 1, 1)) == 0.0);
}

TEST_CASE("solve_subgame matches the jointly solved reference equilibria") {
  for (const auto& ref : kReferences) {
    INFO("n=", ref.n, " V=", ref.V, " lambdaT=", ref.lambda_T);
    const auto eq = solve_subgame(game(ref.n, ref.V, ref.C, ref.lambda_T));
    CHECK(rel(eq.x_star, ref.x) < 1e-12);
    CHECK(rel(eq.k_l_star, ref.k_l) < 1e-12);
    CHECK(rel(eq.k_w_star, ref.k_w) < 1e-12);
    CHECK(rel(eq.u_l_star, ref.u_l) < 1e-10);
    CHECK(rel(eq.u_w_star, ref.u_w) < 1e-12);
    CHECK(rel(eq.b_star, ref.b) < 1e-12);
    CHECK(rel(eq.K_tb, ref.K_tb) < 1e-12);
  }
}

TEST_CASE("solve_subgame degenerates to the baseline as lambda T -> 0") {
  const auto eq = solve_subgame(game(2, 10, 1, 1e-8));
  CHECK(rel(eq.k_l_star, 2.5) < 1e-4);
  CHECK(rel(eq.k_w_star, 2.5) < 1e-4);
}

TEST_CASE("solve_subgame depends on lambda and T only through their product") {
  const auto a = solve_subgame(GameParams::from_effective(3, 10, 1, 2.0, 0.25));
  const auto b = solve_subgame(GameParams::from_effective(3, 10, 1, 1.0, 0.5));
  CHECK(a.x_star == b.x_star);
  CHECK(a.k_w_star == b.k_w_star);
}

TEST_CASE("solve_subgame rejects T = 0 and reports convergence failures") {
  CHECK_THROWS_AS(solve_subgame(game(2, 10, 1, 0)), DomainError);

  SolverOptions few;
  few.max_iterations = 5;
  try {
    solve_subgame(game(2, 10, 1, 1), few);
    FAIL("expected ConvergenceError");
  } catch (const ConvergenceError& e) {
    CHECK(e.iterations() == 5);
    CHECK(e.lo() < e.hi());
  }

  // Root below the bracket edge: (n-1) lambda T H(1e-12) < C / V.
  CHECK_THROWS_AS(solve_subgame(game(2, 1, 1, 1e-14)), ConvergenceError);
}

TEST_CASE("property: solved equilibria satisfy every analytic identity") {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> log_lt(-3.0, 1.0);
  std::uniform_real_distribution<double> log_ratio(0.0, 2.0);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 9);
    const double lt = std::pow(10.0, log_lt(rng));
    const double C = 0.7;
    const double V = C * std::pow(10.0, log_ratio(rng));
    const auto params = game(n, V, C, lt);
    const auto eq = solve_subgame(params);
    INFO("n=", n, " V=", V, " lambdaT=", lt);

    // Root correctness.
    CHECK(std::abs((n - 1) * lt * h_function(eq.x_star, n) - C / V) < 1e-12 * (C / V));
    // Both first-order conditions.
    const auto focs = symmetric_focs(eq.k_w_star, eq.k_l_star, params);
    CHECK(std::abs(focs.winner) < 1e-10 * C);
    CHECK(std::abs(focs.loser) < 1e-10 * C);
    // Ordering.
    CHECK(0 < eq.x_star);
    CHECK(eq.x_star < 1);
    CHECK(0 < eq.k_l_star);
    CHECK(eq.k_l_star < eq.k_w_star);
    CHECK(0 < eq.u_l_star);
    CHECK(eq.u_l_star < eq.u_w_star);
    CHECK(eq.b_star > 0);
    // Recovery and bookkeeping.
    CHECK(rel(eq.k_l_star, eq.x_star / ((n - 1) * lt)) < 1e-15);
    CHECK(rel(eq.k_w_star, ratio_r(eq.x_star, n) * eq.k_l_star) < 1e-15);
    CHECK(eq.K_tb == eq.k_w_star + (n - 1) * eq.k_l_star);
    CHECK(eq.W_tb + eq.R_tb == doctest::Approx(V).epsilon(1e-15));
    // u_l* identity and revenue bound.
    const double share = eq.k_l_star / eq.D_star;
    CHECK(rel(eq.u_l_star, std::exp(-eq.k_w_star * lt) * V * share * share) < 1e-10);
    CHECK(eq.u_l_star < V / (n * n));
  }
}

TEST_CASE("property: payoffs are strictly concave in own copies") {
  const auto params = game(4, 10, 1, 0.7);
  const double h = 1e-3;
  for (double other : {0.1, 0.5, 2.0}) {
    for (double k = h; k < 10; k += 0.05) {
      const double dw = winner_payoff(k + h, other, params) - 2 * winner_payoff(k, other, params) +
                        winner_payoff(k - h, other, params);
      const double dl = loser_payoff(k + h, other, other, params) -
                        2 * loser_payoff(k, other, other, params) +
                        loser_payoff(k - h, other, other, params);
      INFO("k=", k, " other=", other);
      CHECK(dw < 0);
      CHECK(dl < 0);
    }
  }
}

TEST_CASE("compare: fewer copies and more revenue under the express lane") {
  const auto report = compare(game(2, 10, 1, 1));
  CHECK(report.spam_ratio < 1);
  CHECK(report.revenue_delta > 0);
  CHECK(report.ratio_identity_residual < 1e-10);
  CHECK(rel(report.spam_ratio, 1.8630690466479265626 / 5.0) < 1e-12);

  const auto tiny = compare(game(2, 10, 1, 1e-8));
  CHECK(tiny.spam_ratio < 1);
  CHECK(tiny.spam_ratio > 1 - 1e-6);
  CHECK(tiny.revenue_delta > 0);
  CHECK(tiny.revenue_delta < 1e-6);
}

TEST_CASE("compare: inequalities and ratio identity across the sweep grid") {
  for (int n = 2; n <= 10; ++n) {
    for (double lt : {0.01, 0.1, 1.0, 10.0}) {
      for (double ratio : {1.0, 10.0, 100.0}) {
        INFO("n=", n, " lambdaT=", lt, " V/C=", ratio);
        const auto params = game(n, ratio, 1, lt);
        const auto report = compare(params);
        CHECK(report.spam_ratio < 1);
        CHECK(report.revenue_delta > 0);
        const double x = report.timeboost.x_star;
        const double predicted = (1 + x / (n - 1)) * std::exp(-a_function(x, n));
        CHECK(std::abs(report.spam_ratio - predicted) < 1e-10);
        CHECK(report.ratio_identity_residual < 1e-10);
      }
    }
  }
}
