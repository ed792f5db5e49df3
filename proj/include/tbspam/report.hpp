// Flat JSON / CSV records for solver, comparison, and simulation results.
#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "tbspam/game_core.hpp"
#include "tbspam/race_sim.hpp"
#include "tbspam/timeboost_solver.hpp"

namespace tbspam::report {

using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

Json to_json(const GameParams& params);
Json to_json(const BaselineEquilibrium& eq);
Json to_json(const TimeboostEquilibrium& eq);
Json to_json(const ComparisonReport& report);
Json to_json(const sim::RaceOutcome& outcome);
Json to_json(const sim::FullGameOutcome& outcome);

/// Column order of the equilibrium CSV row.
const std::vector<std::string>& equilibrium_columns();

/// CSV row for one parameter point. With no express-lane solution (T = 0) the
/// express-lane columns carry the baseline values and x_star is empty.
std::vector<std::string> equilibrium_row(const GameParams& params,
                                         const BaselineEquilibrium& baseline,
                                         const std::optional<ComparisonReport>& report);

/// Shortest round-trip decimal form of a double.
std::string format_number(double value);

}  // namespace tbspam::report
