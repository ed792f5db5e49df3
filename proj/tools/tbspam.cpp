// tbspam: equilibrium solver, Monte Carlo checks, and spam-metric panels.
//
//   tbspam solve    --n 2 --V 10 --C 1 --lambdaT 1 [--format json|csv] [--verify]
//   tbspam compare  --n 2 --v 10 --g 2 --r 0.5 --lambda 2 --T 0.5
//   tbspam sweep    --ns 2,3,5 --lambdaTs 0.01,0.1,1 --VCs 1,10,100
//   tbspam simulate --mode baseline --profile 2,6 --reps 1000000 --seed 7
//   tbspam metrics  --txs txs.csv --auctions auctions.csv --treated arbitrum
//
// Exit codes: 0 success, 1 usage or input error, 2 verification failure.
#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "tbspam/csv.hpp"
#include "tbspam/game_core.hpp"
#include "tbspam/oracle.hpp"
#include "tbspam/race_sim.hpp"
#include "tbspam/report.hpp"
#include "tbspam/spam_metrics.hpp"
#include "tbspam/timeboost_solver.hpp"

namespace {

using tbspam::GameParams;
using tbspam::report::Json;

constexpr int kExitUsage = 1;
constexpr int kExitVerify = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct VerifyFailed : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct GameOptions {
  int n = 0;
  std::optional<double> v, g, r, V, C;
  std::optional<double> lambda, T, lambdaT;

  void add_to(CLI::App* app, bool with_time = true) {
    auto* on = app->add_option("--n", n, "number of arbitrageurs (>= 2)");
    if (with_time) on->required();
    auto* ov = app->add_option("--v", v, "opportunity value");
    auto* og = app->add_option("--g", g, "gas cost of a successful transaction");
    auto* orr = app->add_option("--r", r, "revert fee as a fraction of g");
    auto* oV = app->add_option("--V", V, "net prize v - (1 - r) g");
    auto* oC = app->add_option("--C", C, "per-copy cost r g");
    for (auto* p : {ov, og, orr}) {
      p->excludes(oV)->excludes(oC);
    }
    if (!with_time) return;
    auto* ol = app->add_option("--lambda", lambda, "latency rate (default 1)");
    auto* oT = app->add_option("--T", T, "express-lane time advantage");
    auto* olt = app->add_option("--lambdaT", lambdaT,
                                "product lambda * T; only the product affects equilibria");
    olt->excludes(ol)->excludes(oT);
  }

  GameParams build() const {
    if (lambdaT) return build(1.0, *lambdaT);
    return build(lambda.value_or(1.0), T.value_or(0.0));
  }

  GameParams build(double lam, double t) const {
    const bool primitives = v || g || r;
    if (primitives) {
      if (!(v && g && r)) throw UsageError("--v, --g and --r must be given together");
      return GameParams::from_primitives(n, *v, *g, *r, lam, t);
    }
    if (!(V && C)) throw UsageError("give either --v/--g/--r or --V/--C");
    return GameParams::from_effective(n, *V, *C, lam, t);
  }

  bool has_time() const { return T.has_value() || lambdaT.has_value(); }
};

struct Output {
  std::string path;
  std::string format = "json";

  void add_to(CLI::App* app, bool csv_allowed = true) {
    app->add_option("--out", path, "write to this file instead of standard output");
    if (csv_allowed) {
      app->add_option("--format", format, "json or csv")
          ->check(CLI::IsMember({"json", "csv"}));
    }
  }

  void write(const std::string& text) const {
    if (path.empty()) {
      std::cout << text;
      std::cout.flush();
      return;
    }
    std::ofstream out(path, std::ios::binary);
    out << text;
    if (!out) throw std::runtime_error("cannot write " + path);
  }
};

std::string dump(Json j) { return j.dump(2) + "\n"; }

Json envelope(const char* kind) {
  Json j;
  j["schema"] = tbspam::report::kSchemaVersion;
  j["kind"] = kind;
  return j;
}

std::string csv_text(const std::vector<std::vector<std::string>>& rows) {
  std::ostringstream out;
  tbspam::csv::write_record(out, tbspam::report::equilibrium_columns());
  for (const auto& row : rows) tbspam::csv::write_record(out, row);
  return out.str();
}

bool all_passed(const std::vector<tbspam::oracle::Check>& checks) {
  return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.passed; });
}

Json checks_json(const std::vector<tbspam::oracle::Check>& checks) {
  Json arr = Json::array();
  for (const auto& c : checks) {
    arr.push_back(Json{{"name", c.name}, {"passed", c.passed}, {"value", c.value},
                       {"tolerance", c.tolerance}});
  }
  return arr;
}

void report_failures(const std::vector<tbspam::oracle::Check>& checks) {
  for (const auto& c : checks) {
    if (!c.passed) {
      std::cerr << "verification failed: " << c.name << " value=" << c.value
                << " tolerance=" << c.tolerance << "\n";
    }
  }
}

// ---------------------------------------------------------------- solve

void run_solve(const GameOptions& game, const Output& out, bool verify) {
  if (!game.has_time()) throw UsageError("solve needs --T or --lambdaT (0 for the FCFS baseline)");
  const auto params = game.build();
  const auto base = tbspam::baseline_equilibrium(params);

  std::optional<tbspam::ComparisonReport> cmp;
  std::vector<tbspam::oracle::Check> checks;
  if (params.lambda_T() > 0.0) {
    cmp = tbspam::compare(params);
    if (verify) checks = tbspam::oracle::verify_timeboost(params, cmp->timeboost);
  } else if (verify) {
    checks = tbspam::oracle::verify_baseline(params);
  }

  if (out.format == "csv") {
    out.write(csv_text({tbspam::report::equilibrium_row(params, base, cmp)}));
  } else {
    Json j = envelope(cmp ? "timeboost_equilibrium" : "baseline_equilibrium");
    j["params"] = tbspam::report::to_json(params);
    j["baseline"] = tbspam::report::to_json(base);
    if (cmp) j["equilibrium"] = tbspam::report::to_json(cmp->timeboost);
    if (verify) j["checks"] = checks_json(checks);
    out.write(dump(std::move(j)));
  }
  if (verify && !all_passed(checks)) {
    report_failures(checks);
    throw VerifyFailed("solve verification failed");
  }
}

// ---------------------------------------------------------------- compare

void run_compare(const GameOptions& game, const Output& out, bool verify) {
  if (!game.has_time()) throw UsageError("compare needs --T or --lambdaT");
  const auto params = game.build();
  if (!(params.lambda_T() > 0.0)) {
    throw UsageError(
        "compare needs T > 0; use `solve --lambdaT 0` for the FCFS baseline on its own");
  }
  const auto report = tbspam::compare(params);
  std::vector<tbspam::oracle::Check> checks;
  if (verify) checks = tbspam::oracle::verify_comparison(params, report);

  if (out.format == "csv") {
    out.write(csv_text({tbspam::report::equilibrium_row(params, report.baseline, report)}));
  } else {
    Json j = envelope("comparison");
    j["params"] = tbspam::report::to_json(params);
    j["report"] = tbspam::report::to_json(report);
    if (verify) j["checks"] = checks_json(checks);
    out.write(dump(std::move(j)));
  }
  if (verify && !all_passed(checks)) {
    report_failures(checks);
    throw VerifyFailed("compare verification failed");
  }
}

// ---------------------------------------------------------------- sweep

struct SweepOptions {
  std::vector<int> ns;
  std::vector<double> lambdaTs;
  std::vector<double> ratios;
  double C = 1.0;
  unsigned workers = 0;
};

void run_sweep(const SweepOptions& s, const Output& out, bool verify) {
  if (s.ns.empty() || s.lambdaTs.empty() || s.ratios.empty()) {
    throw UsageError("sweep needs nonempty --ns, --lambdaTs and --VCs");
  }
  struct Point {
    GameParams params;
    std::optional<tbspam::ComparisonReport> report;
    std::vector<tbspam::oracle::Check> checks;
    std::string error;
    bool verify_error = false;
  };
  std::vector<Point> points;
  for (int n : s.ns) {
    for (double ratio : s.ratios) {
      for (double lt : s.lambdaTs) {
        if (!(lt > 0.0)) throw UsageError("sweep --lambdaTs entries must be > 0");
        points.push_back({GameParams::from_effective(n, ratio * s.C, s.C, 1.0, lt), {}, {}, {}});
      }
    }
  }

  std::atomic<std::size_t> next{0};
  const auto work = [&] {
    for (std::size_t i = next++; i < points.size(); i = next++) {
      auto& p = points[i];
      try {
        p.report = tbspam::compare(p.params);
        if (verify) p.checks = tbspam::oracle::verify_comparison(p.params, *p.report);
      } catch (const tbspam::VerificationError& e) {
        p.error = e.what();
        p.verify_error = true;
      } catch (const std::exception& e) {
        p.error = e.what();
      }
    }
  };
  unsigned workers = s.workers ? s.workers : std::max(1u, std::thread::hardware_concurrency());
  {
    std::vector<std::jthread> pool;
    for (unsigned i = 0; i < workers; ++i) pool.emplace_back(work);
  }

  bool passed = true;
  for (const auto& p : points) {
    if (!p.error.empty()) {
      if (p.verify_error) throw VerifyFailed(p.error);
      throw std::runtime_error(p.error);
    }
    if (!all_passed(p.checks)) {
      report_failures(p.checks);
      passed = false;
    }
  }

  if (out.format == "csv") {
    std::vector<std::vector<std::string>> rows;
    for (const auto& p : points) {
      rows.push_back(tbspam::report::equilibrium_row(p.params, p.report->baseline, p.report));
    }
    out.write(csv_text(rows));
  } else {
    Json j = envelope("sweep");
    Json arr = Json::array();
    // K_tb as a function of lambda*T, per (n, V/C) series, in grid order.
    bool monotone_decreasing = true;
    for (std::size_t i = 0; i < points.size(); ++i) {
      const auto& p = points[i];
      Json entry{{"params", tbspam::report::to_json(p.params)},
                 {"report", tbspam::report::to_json(*p.report)}};
      if (verify) entry["checks"] = checks_json(p.checks);
      arr.push_back(std::move(entry));
      if (i % s.lambdaTs.size() != 0) {
        const auto& prev = points[i - 1];
        const bool up = p.params.lambda_T() > prev.params.lambda_T();
        const bool drop = p.report->timeboost.K_tb < prev.report->timeboost.K_tb;
        if (up != drop) monotone_decreasing = false;
      }
    }
    j["points"] = std::move(arr);
    j["K_tb_decreasing_in_lambdaT"] = monotone_decreasing;
    out.write(dump(std::move(j)));
  }
  if (!passed) throw VerifyFailed("sweep verification failed");
}

// ---------------------------------------------------------------- simulate

struct SimOptions {
  std::string mode = "baseline";
  std::vector<double> profile;
  std::optional<std::size_t> winner;
  double lambda = 1.0;
  double T = 0.0;
  std::uint64_t reps = 1'000'000;
  std::uint64_t seed = 0;
  bool integer_copies = false;
  double prize = 1.0;
  double cost = 0.0;
  std::vector<double> bids;
  std::optional<double> k_w, k_l;
  unsigned workers = 0;
};

void run_simulate(const SimOptions& s, const GameOptions& game, const Output& out, bool verify) {
  Json j = envelope("simulation");
  j["mode"] = s.mode;
  j["seed"] = s.seed;
  if (s.mode == "full") {
    if (game.n == 0) throw UsageError("full-game simulation needs --n");
    const auto params = game.build(s.lambda, s.T);
    const auto eq = tbspam::solve_subgame(params);
    std::vector<double> bids = s.bids;
    if (bids.empty()) bids.assign(static_cast<std::size_t>(params.n()), eq.b_star);
    const double k_w = s.k_w.value_or(eq.k_w_star);
    const double k_l = s.k_l.value_or(eq.k_l_star);
    const auto outcome =
        tbspam::sim::simulate_full_game(params, bids, k_w, k_l, s.reps, s.seed, s.workers);
    j["params"] = tbspam::report::to_json(params);
    j["bids"] = bids;
    j["k_w"] = k_w;
    j["k_l"] = k_l;
    j["u_l_star"] = eq.u_l_star;
    j["outcome"] = tbspam::report::to_json(outcome);
    out.write(dump(std::move(j)));
    return;
  }

  tbspam::sim::RaceConfig config;
  config.copy_profile = s.profile;
  config.lambda = s.lambda;
  config.T = s.T;
  config.winner_index = s.winner;
  config.replications = s.reps;
  config.seed = s.seed;
  config.integer_copies = s.integer_copies;
  config.prize = s.prize;
  config.copy_cost = s.cost;
  config.workers = s.workers;
  const auto outcome = s.mode == "baseline" ? tbspam::sim::simulate_baseline_race(config)
                                            : tbspam::sim::simulate_timeboost_race(config);
  j["outcome"] = tbspam::report::to_json(outcome);
  out.write(dump(std::move(j)));
  if (verify) {
    for (std::size_t i = 0; i < outcome.z_scores.size(); ++i) {
      if (!(std::abs(outcome.z_scores[i]) <= 4.0)) {
        std::cerr << "verification failed: player " << i << " win frequency "
                  << outcome.win_freqs[i] << " vs analytic " << outcome.analytic_probs[i]
                  << " (z = " << outcome.z_scores[i] << ")\n";
        throw VerifyFailed("simulation disagrees with analytic win probabilities");
      }
    }
  }
}

// ---------------------------------------------------------------- metrics

struct MetricsOptions {
  std::string txs;
  std::string auctions;
  std::string treated;
  std::int64_t window_ms = tbspam::metrics::kDefaultWindowMs;
};

template <typename T>
std::vector<T> load_or_fail(const std::string& path,
                            tbspam::metrics::IngestResult<T> (*ingest)(std::istream&)) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot open " + path);
  auto result = ingest(in);
  if (!result.ok()) {
    for (const auto& e : result.errors) {
      std::cerr << path << ":" << e.line << ": " << e.message << "\n";
    }
    throw UsageError(path + ": " + std::to_string(result.errors.size()) + " invalid row(s)");
  }
  return std::move(result.records);
}

void run_metrics(const MetricsOptions& m, const Output& out) {
  namespace mx = tbspam::metrics;
  const auto txs = load_or_fail<mx::TransactionRecord>(m.txs, &mx::ingest_transactions);
  std::vector<mx::AuctionRound> auctions;
  if (!m.auctions.empty()) {
    if (m.treated.empty()) throw UsageError("--auctions requires --treated");
    auctions = load_or_fail<mx::AuctionRound>(m.auctions, &mx::ingest_auctions);
  }
  if (m.window_ms <= 0) throw UsageError("--window-ms must be positive");
  const auto repeated = mx::detect_repeats(txs, m.window_ms);
  const auto rows = mx::aggregate_daily(txs, repeated, auctions, m.treated);
  std::ostringstream text;
  mx::export_panel(rows, text);
  out.write(text.str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Express-lane spam game: equilibria, simulation, and spam metrics"};
  app.require_subcommand(1);
  bool verify = false;

  GameOptions solve_game, compare_game, sim_game;
  Output solve_out, compare_out, sweep_out, sim_out, metrics_out;
  SweepOptions sweep;
  SimOptions sim;
  MetricsOptions metrics;

  auto* solve = app.add_subcommand("solve", "equilibrium for one parameter point");
  solve_game.add_to(solve);
  solve_out.add_to(solve);
  solve->add_flag("--verify", verify, "cross-check against grid best responses and identities");

  auto* compare = app.add_subcommand("compare", "FCFS baseline vs. express lane");
  compare_game.add_to(compare);
  compare_out.add_to(compare);
  compare->add_flag("--verify", verify, "cross-check against grid best responses and identities");

  auto* sweep_cmd = app.add_subcommand("sweep", "comparison over a parameter grid (C fixed)");
  sweep_cmd->add_option("--ns", sweep.ns, "arbitrageur counts")->delimiter(',')->required();
  sweep_cmd->add_option("--lambdaTs", sweep.lambdaTs, "lambda * T values")
      ->delimiter(',')
      ->required();
  sweep_cmd->add_option("--VCs", sweep.ratios, "V / C ratios")->delimiter(',')->required();
  sweep_cmd->add_option("--C", sweep.C, "per-copy cost (default 1)");
  sweep_cmd->add_option("--workers", sweep.workers, "threads (default: all cores)");
  sweep_out.format = "csv";
  sweep_out.add_to(sweep_cmd);
  sweep_cmd->add_flag("--verify", verify, "run oracle checks at every point");

  auto* simulate = app.add_subcommand("simulate", "Monte Carlo latency race or full game");
  simulate->add_option("--mode", sim.mode, "baseline, timeboost or full")
      ->check(CLI::IsMember({"baseline", "timeboost", "full"}));
  simulate->add_option("--profile", sim.profile, "copy intensity per player")->delimiter(',');
  simulate->add_option("--winner", sim.winner, "index of the express-lane holder");
  simulate->add_option("--lambda", sim.lambda, "latency rate (race modes)");
  simulate->add_option("--T", sim.T, "time advantage (race modes)");
  simulate->add_option("--reps", sim.reps, "replications (default 1000000)");
  simulate->add_option("--seed", sim.seed, "64-bit seed");
  simulate->add_flag("--integer-copies", sim.integer_copies, "race ceil(k) unit-rate copies");
  simulate->add_option("--prize", sim.prize, "prize for the race winner (race modes)");
  simulate->add_option("--cost", sim.cost, "cost per copy (race modes)");
  simulate->add_option("--bids", sim.bids, "bids per player (full mode; default b*)")
      ->delimiter(',');
  simulate->add_option("--k-w", sim.k_w, "winner copies (full mode; default k_w*)");
  simulate->add_option("--k-l", sim.k_l, "loser copies (full mode; default k_l*)");
  simulate->add_option("--workers", sim.workers, "threads (default: all cores)");
  sim_game.add_to(simulate, false);
  sim_out.add_to(simulate, false);
  simulate->add_flag("--verify", verify, "fail if any |z| > 4 (race modes)");

  auto* metrics_cmd = app.add_subcommand("metrics", "daily spam panel from transaction logs");
  metrics_cmd->add_option("--txs", metrics.txs, "transaction CSV")->required();
  metrics_cmd->add_option("--auctions", metrics.auctions, "auction-round CSV");
  metrics_cmd->add_option("--treated", metrics.treated, "chain that runs the express lane");
  metrics_cmd->add_option("--window-ms", metrics.window_ms, "burst window (default 2000)");
  metrics_out.add_to(metrics_cmd, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (solve->parsed()) run_solve(solve_game, solve_out, verify);
    if (compare->parsed()) run_compare(compare_game, compare_out, verify);
    if (sweep_cmd->parsed()) run_sweep(sweep, sweep_out, verify);
    if (simulate->parsed()) run_simulate(sim, sim_game, sim_out, verify);
    if (metrics_cmd->parsed()) run_metrics(metrics, metrics_out);
  } catch (const VerifyFailed& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitVerify;
  } catch (const tbspam::VerificationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitVerify;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return 0;
}
