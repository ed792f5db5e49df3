#include "tbspam/report.hpp"

#include <fmt/format.h>

namespace tbspam::report {

Json to_json(const GameParams& params) {
  Json j;
  j["n"] = params.n();
  if (const auto& p = params.primitives()) {
    j["v"] = p->v;
    j["g"] = p->g;
    j["r"] = p->r;
  }
  j["lambda"] = params.lambda();
  j["T"] = params.T();
  j["V"] = params.V();
  j["C"] = params.C();
  return j;
}

Json to_json(const BaselineEquilibrium& eq) {
  return Json{{"k_star", eq.k_star},
              {"K_star", eq.K_star},
              {"u_star", eq.u_star},
              {"W_star", eq.W_star},
              {"R_star", eq.R_star}};
}

Json to_json(const TimeboostEquilibrium& eq) {
  return Json{{"x_star", eq.x_star},         {"k_l_star", eq.k_l_star},
              {"k_w_star", eq.k_w_star},     {"D_star", eq.D_star},
              {"u_l_star", eq.u_l_star},     {"u_w_star", eq.u_w_star},
              {"b_star", eq.b_star},         {"K_tb", eq.K_tb},
              {"W_tb", eq.W_tb},             {"R_tb", eq.R_tb},
              {"residual_w", eq.residual_w}, {"residual_l", eq.residual_l},
              {"iterations", eq.iterations}};
}

Json to_json(const ComparisonReport& report) {
  return Json{{"baseline", to_json(report.baseline)},
              {"timeboost", to_json(report.timeboost)},
              {"spam_ratio", report.spam_ratio},
              {"revenue_delta", report.revenue_delta},
              {"ratio_identity_residual", report.ratio_identity_residual}};
}

Json to_json(const sim::RaceOutcome& o) {
  return Json{{"replications", o.replications},
              {"win_counts", o.win_counts},
              {"win_freqs", o.win_freqs},
              {"analytic_probs", o.analytic_probs},
              {"z_scores", o.z_scores},
              {"mean_payoffs", o.mean_payoffs},
              {"payoff_std_errors", o.payoff_std_errors}};
}

Json to_json(const sim::FullGameOutcome& o) {
  return Json{{"replications", o.replications},
              {"mean_payoffs", o.mean_payoffs},
              {"std_errors", o.std_errors},
              {"auction_wins", o.auction_wins},
              {"race_wins", o.race_wins}};
}

const std::vector<std::string>& equilibrium_columns() {
  static const std::vector<std::string> columns{
      "n",        "v",        "g",        "r",        "lambda", "T",      "V",
      "C",        "x_star",   "k_l_star", "k_w_star", "u_l_star", "u_w_star", "b_star",
      "K_base",   "K_tb",     "R_base",   "R_tb",     "spam_ratio", "revenue_delta"};
  return columns;
}

std::string format_number(double value) { return fmt::format("{}", value); }

std::vector<std::string> equilibrium_row(const GameParams& params,
                                         const BaselineEquilibrium& base,
                                         const std::optional<ComparisonReport>& report) {
  const auto num = [](double x) { return format_number(x); };
  const auto& prim = params.primitives();
  std::vector<std::string> row{std::to_string(params.n()),
                               prim ? num(prim->v) : "",
                               prim ? num(prim->g) : "",
                               prim ? num(prim->r) : "",
                               num(params.lambda()),
                               num(params.T()),
                               num(params.V()),
                               num(params.C())};
  if (report) {
    const auto& tb = report->timeboost;
    for (double x : {tb.x_star, tb.k_l_star, tb.k_w_star, tb.u_l_star, tb.u_w_star, tb.b_star,
                     base.K_star, tb.K_tb, base.R_star, tb.R_tb, report->spam_ratio,
                     report->revenue_delta}) {
      row.push_back(num(x));
    }
  } else {
    row.emplace_back();
    for (double x : {base.k_star, base.k_star, base.u_star, base.u_star, 0.0, base.K_star,
                     base.K_star, base.R_star, base.R_star, 1.0, 0.0}) {
      row.push_back(num(x));
    }
  }
  return row;
}

}  // namespace tbspam::report
