// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/core.h>

#include "tbspam/game_core.hpp"
#include "tbspam/oracle.hpp"
#include "tbspam/race_sim.hpp"
#include "tbspam/spam_metrics.hpp"
#include "tbspam/timeboost_solver.hpp"

using namespace tbspam;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

int failures = 0;

void report(int id, bool passed, const std::string& detail) {
  if (!passed) ++failures;
  fmt::print("criterion {} {}: {}\n", id, passed ? "PASS" : "FAIL", detail);
}

void baseline_grid() {
  const auto start = Clock::now();
  bool ok = true;
  double worst = 0;
  int points = 0;
  for (int n : {2, 5, 10}) {
    for (double ratio : {1.0, 10.0, 100.0}) {
      const auto params = GameParams::from_effective(n, ratio, 1, 1, 0);
      const auto eq = baseline_equilibrium(params);
      const auto br = oracle::best_response_baseline((n - 1) * eq.k_star, params);
      const double err = std::abs(br.argmax_k - eq.k_star) / ratio;
      worst = std::max(worst, err);
      ok = ok && err < 1e-4;
      ++points;
    }
  }
  const double elapsed = seconds_since(start);
  report(1, ok && elapsed < 10,
         fmt::format("FCFS grid best response vs k* at {} points, worst |dk|/(V/C) = {:.3g} "
                     "(< 1e-4), {:.2f} s (< 10 s)",
                     points, worst, elapsed));
}

constexpr int kNs[] = {2, 3, 5, 10};
constexpr double kLambdaTs[] = {0.01, 0.1, 1.0};
constexpr double kRatios[] = {1.0, 10.0, 100.0};

void subgame_grid() {
  const auto start = Clock::now();
  bool ok = true;
  double worst_foc = 0, worst_identity = 0;
  int points = 0;
  for (int n : kNs) {
    for (double lt : kLambdaTs) {
      for (double ratio : kRatios) {
        const double C = 1;
        const auto params = GameParams::from_effective(n, ratio * C, C, 1, lt);
        const auto eq = solve_subgame(params);
        const auto focs = symmetric_focs(eq.k_w_star, eq.k_l_star, params);
        const double foc = std::max(std::abs(focs.winner), std::abs(focs.loser));
        const double share = eq.k_l_star / eq.D_star;
        const double identity =
            rel(eq.u_l_star, std::exp(-eq.k_w_star * lt) * params.V() * share * share);
        worst_foc = std::max(worst_foc, foc / C);
        worst_identity = std::max(worst_identity, identity);
        ok = ok && foc < 1e-10 * C && eq.x_star > 0 && eq.x_star < 1 &&
             eq.k_l_star < eq.k_w_star && eq.u_l_star < eq.u_w_star && identity < 1e-10;
        ++points;
      }
    }
  }
  const double elapsed = seconds_since(start);
  report(2, ok && elapsed < 5,
         fmt::format("subgame solver at {} points, worst FOC/C = {:.3g}, worst u_l* identity = "
                     "{:.3g}, orderings hold = {}, {:.3f} s (< 5 s)",
                     points, worst_foc, worst_identity, ok, elapsed));
}

void comparison_grid() {
  bool ok = true;
  double max_ratio = 0, min_delta = INFINITY, worst_identity = 0;
  for (int n : kNs) {
    for (double lt : kLambdaTs) {
      for (double ratio : kRatios) {
        const auto report = compare(GameParams::from_effective(n, ratio, 1, 1, lt));
        max_ratio = std::max(max_ratio, report.spam_ratio);
        min_delta = std::min(min_delta, report.revenue_delta);
        worst_identity = std::max(worst_identity, report.ratio_identity_residual);
        ok = ok && report.spam_ratio < 1 && report.revenue_delta > 0 &&
             report.ratio_identity_residual < 1e-10;
      }
    }
  }
  report(3, ok,
         fmt::format("express lane lowers spam and raises revenue at all 36 points: max K_tb/K* = "
                     "{:.6f}, min R_tb - R* = {:.3g}, worst ratio identity residual = {:.3g}",
                     max_ratio, min_delta, worst_identity));
}

void vanishing_lane() {
  bool ok = true;
  double worst = 0;
  for (int n : {2, 5}) {
    for (double ratio : {10.0, 100.0}) {
      const auto params = GameParams::from_effective(n, ratio, 1, 1, 1e-8);
      const double k = baseline_equilibrium(params).k_star;
      const auto eq = solve_subgame(params);
      const double err = std::max(rel(eq.k_l_star, k), rel(eq.k_w_star, k));
      worst = std::max(worst, err);
      ok = ok && err < 1e-3;
    }
  }
  report(4, ok, fmt::format("lambda T = 1e-8 recovers k*, worst relative gap = {:.3g} (< 1e-3)",
                            worst));
}

void monte_carlo() {
  const auto start = Clock::now();
  sim::RaceConfig base;
  base.copy_profile = {2, 6};
  base.replications = 1'000'000;
  base.seed = 20240101;
  const auto fcfs = sim::simulate_baseline_race(base);

  sim::RaceConfig lane = base;
  lane.copy_profile = {1, 1};
  lane.T = std::log(2.0);
  lane.winner_index = 0;
  const auto tb = sim::simulate_timeboost_race(lane);
  const double elapsed = seconds_since(start);

  double worst_z = 0;
  for (double z : fcfs.z_scores) worst_z = std::max(worst_z, std::abs(z));
  for (double z : tb.z_scores) worst_z = std::max(worst_z, std::abs(z));
  const bool ok = worst_z < 4 && std::abs(tb.analytic_probs[0] - 0.75) < 1e-15 &&
                  fcfs.analytic_probs[0] == 0.25 && elapsed < 30;
  report(5, ok,
         fmt::format("races at 1e6 replications: FCFS (2,6) freq {:.5f} vs 0.25, lane holder "
                     "freq {:.5f} vs 0.75, worst |z| = {:.2f} (< 4), {:.2f} s (< 30 s)",
                     fcfs.win_freqs[0], tb.win_freqs[0], worst_z, elapsed));
}

void full_game() {
  const auto params = GameParams::from_effective(2, 10, 1, 1, 1);
  const auto eq = solve_subgame(params);
  constexpr std::uint64_t reps = 1'000'000;
  constexpr std::uint64_t seed = 77;
  const std::vector<double> bids{eq.b_star, eq.b_star};
  const auto at = sim::simulate_full_game(params, bids, eq.k_w_star, eq.k_l_star, reps, seed);

  bool ok = true;
  double worst_se = 0;
  for (std::size_t i = 0; i < 2; ++i) {
    const double gap = std::abs(at.mean_payoffs[i] - eq.u_l_star) / at.std_errors[i];
    worst_se = std::max(worst_se, gap);
    ok = ok && gap < 3;
  }

  double worst_gain = -INFINITY;
  for (double scale : {0.9, 1.1}) {
    const std::vector<double> dev{scale * eq.b_star, eq.b_star};
    const auto out = sim::simulate_full_game(params, dev, eq.k_w_star, eq.k_l_star, reps, seed);
    const double se = std::hypot(out.std_errors[0], at.std_errors[0]);
    const double gain = (out.mean_payoffs[0] - at.mean_payoffs[0]) / se;
    worst_gain = std::max(worst_gain, gain);
    ok = ok && gain <= 3;
  }
  report(6, ok,
         fmt::format("full game at (b*, k_w*, k_l*): payoffs {:.5f}, {:.5f} vs u_l* = {:.5f}, "
                     "worst gap {:.2f} SE (< 3); best +-10% bid deviation gain {:.2f} SE (<= 3)",
                     at.mean_payoffs[0], at.mean_payoffs[1], eq.u_l_star, worst_se, worst_gain));
}

std::vector<metrics::TransactionRecord> load(const std::string& text) {
  std::istringstream in(text);
  auto result = metrics::ingest_transactions(in);
  if (!result.ok()) throw std::runtime_error("fixture rejected: " + result.errors[0].message);
  return result.records;
}

std::string tx_row(const std::string& chain, std::int64_t ts, int id, int key,
                   const std::string& gas, bool failed, bool boosted) {
  return fmt::format("{},{},0x{:x},0x{:04x},0xd0,0,0xa9059cbb,0x{:064x},{},{},{}\n", chain, ts,
                     id, key, key, gas, failed ? "failed" : "success", boosted);
}

std::string export_text(std::span<const metrics::PanelRow> rows) {
  std::ostringstream out;
  metrics::export_panel(rows, out);
  return out.str();
}

void spam_metrics() {
  using namespace metrics;
  const std::string header = std::string(kTransactionHeader) + "\n";
  constexpr std::int64_t t0 = 1'704'067'200'000;
  std::vector<std::string> notes;
  bool ok = true;

  // Window rule fixtures.
  const auto labels = [&](std::vector<std::int64_t> offsets, bool distinct_keys) {
    std::string text = header;
    int id = 1;
    for (auto off : offsets) {
      text += tx_row("arbitrum", t0 + off, id, distinct_keys ? id : 1, "0", false, false);
      ++id;
    }
    return detect_repeats(load(text));
  };
  const bool windows = labels({0, 500, 1500}, false) == std::vector<bool>{false, true, true} &&
                       labels({0, 2500}, false) == std::vector<bool>{false, false} &&
                       labels({0, 0}, true) == std::vector<bool>{false, false};
  ok = ok && windows;
  notes.push_back(fmt::format("window fixtures {}", windows ? "exact" : "MISMATCH"));

  // Aggregation fixtures: opener + 4 repeats, 2 failed at 0.05.
  std::string day = header;
  day += tx_row("arbitrum", t0, 1, 1, "0.01", false, false);
  day += tx_row("arbitrum", t0 + 100, 2, 1, "0.05", true, false);
  day += tx_row("arbitrum", t0 + 200, 3, 1, "0.05", true, false);
  day += tx_row("arbitrum", t0 + 300, 4, 1, "0.01", false, false);
  day += tx_row("arbitrum", t0 + 400, 5, 1, "0.01", false, false);
  const auto records = load(day);
  const auto flags = detect_repeats(records);
  const auto plain = aggregate_daily(records, flags, {}, "arbitrum");
  const std::vector<AuctionRound> auctions{{1, t0 + 60'000, EthAmount::parse("0.3")},
                                           {2, t0 + 86'400'000, EthAmount::parse("0.3")}};
  const auto with_auction = aggregate_daily(records, flags, auctions, "arbitrum");
  const bool aggregates =
      plain.size() == 1 && plain[0].rep_txs == 4 && plain[0].failed_rep_txs == 2 &&
      plain[0].pct_failed == 0.5 && plain[0].rep_gas == EthAmount::parse("0.1") &&
      with_auction.size() == 2 && with_auction[0].revenue == EthAmount::parse("0.4") &&
      with_auction[1].rep_txs == 0 && !with_auction[1].pct_failed &&
      with_auction[1].revenue == EthAmount::parse("0.3");
  ok = ok && aggregates;
  notes.push_back(fmt::format("aggregation fixtures {}", aggregates ? "exact" : "MISMATCH"));

  // Checked-in end-to-end fixture.
  {
    std::ifstream txs(TBSPAM_FIXTURES "/txs.csv");
    std::ifstream rounds(TBSPAM_FIXTURES "/auctions.csv");
    std::ifstream expected(TBSPAM_FIXTURES "/expected_panel.csv");
    std::stringstream want;
    want << expected.rdbuf();
    const auto tx = ingest_transactions(txs);
    const auto au = ingest_auctions(rounds);
    const auto rows =
        aggregate_daily(tx.records, detect_repeats(tx.records), au.records, "arbitrum");
    const bool matches = tx.ok() && au.ok() && export_text(rows) == want.str();
    ok = ok && matches;
    notes.push_back(fmt::format("panel fixture {}", matches ? "exact" : "MISMATCH"));
  }

  // Randomized 1000-row fixture: bursts of identical transactions over three days.
  {
    std::mt19937_64 rng(1000);
    std::uniform_int_distribution<std::int64_t> when(0, 3 * 86'400'000LL);
    std::uniform_int_distribution<std::int64_t> spread(0, 8000);
    std::string text = header;
    int id = 1;
    while (id <= 1000) {
      const std::int64_t start = t0 + when(rng);
      const int key = static_cast<int>(rng() % 50);
      const std::string chain = rng() % 2 ? "arbitrum" : "base";
      const int size = 1 + static_cast<int>(rng() % 6);
      for (int i = 0; i < size && id <= 1000; ++i, ++id) {
        text += tx_row(chain, start + spread(rng), id, key, "0.001", rng() % 3 == 0,
                       rng() % 4 == 0);
      }
    }
    const auto random_records = load(text);
    std::map<std::pair<std::string, std::chrono::sys_days>, std::uint64_t> narrow;
    for (const auto& row : aggregate_daily(random_records,
                                           detect_repeats(random_records, kDefaultWindowMs), {},
                                           "arbitrum")) {
      narrow[{row.chain, row.date}] = row.rep_txs;
    }
    std::size_t cells = 0, violations = 0;
    std::uint64_t total_narrow = 0, total_wide = 0;
    for (const auto& row : aggregate_daily(random_records,
                                           detect_repeats(random_records, kRobustnessWindowMs),
                                           {}, "arbitrum")) {
      ++cells;
      total_wide += row.rep_txs;
      const auto n = narrow[{row.chain, row.date}];
      total_narrow += n;
      if (row.rep_txs < n) ++violations;
    }
    ok = ok && random_records.size() == 1000 && violations == 0;
    notes.push_back(fmt::format("1000-row window monotonicity: {} violations over {} (chain, day) "
                                "cells, repeats {} at 2000 ms vs {} at 5000 ms",
                                violations, cells, total_narrow, total_wide));
  }

  // Export/ingest round trip.
  {
    std::istringstream in(export_text(with_auction));
    const auto back = read_panel(in);
    const bool round_trip = back.ok() && back.records == with_auction &&
                            export_text(back.records) == export_text(with_auction);
    ok = ok && round_trip;
    notes.push_back(fmt::format("round trip {}", round_trip ? "lossless" : "LOSSY"));
  }

  std::string detail;
  for (const auto& note : notes) detail += (detail.empty() ? "" : "; ") + note;
  report(7, ok, detail);
}

void out_of_scope() {
  report(8, true,
         "empirical magnitudes estimated from proprietary chain data (summary statistics, "
         "difference-in-differences coefficients) are not reproduced; the metric definitions are "
         "covered by criterion 7 and the panel CSV contract");
}

}  // namespace

int main() {
  try {
    baseline_grid();
    subgame_grid();
    comparison_grid();
    vanishing_lane();
    monte_carlo();
    full_game();
    spam_metrics();
    out_of_scope();
  } catch (const std::exception& e) {
    fmt::print("acceptance aborted: {}\n", e.what());
    return 1;
  }
  return failures == 0 ? 0 : 1;
}
