#pragma once

#include <optional>
#include <string>
#include <vector>

#include "schedsec/attack.hpp"
#include "schedsec/lti_estimation.hpp"
#include "schedsec/protocol_sequences.hpp"
#include "schedsec/scheduling.hpp"
#include "schedsec/simulation.hpp"

namespace schedsec {

// Text formats. Systems: {"systems": [{"A": [[..],..], "C": .., "Q": .., "R": ..,
// "Pi": ..}, ...]} or the bare array; matrices are lists of rows, a bare
// number is 1x1, Pi defaults to the identity. Schedule: {"T": 3, "rows":
// [[0,0,1], ...]}. PolicySet: a schedule plus "factors": [{"n": 1, "d": 3}, ...].
// ShiftTuple: {"taus": [0, 0, 2]}. Parse failures throw a validation error
// naming the offending index and field.

std::vector<LinearSystem> systems_from_json(const std::string &text);
std::string systems_to_json(const std::vector<LinearSystem> &systems);

Schedule schedule_from_json(const std::string &text);
std::string schedule_to_json(const Schedule &sched);

PolicySet policy_set_from_json(const std::string &text);
std::string policy_set_to_json(const PolicySet &ps);

ShiftTuple shift_from_json(const std::string &text);
std::string shift_to_json(const ShiftTuple &attack);

/// Columns sensor_index, average_trace, divergent; a final "total" row.
std::string cost_report_csv(const CostReport &report);
std::string cost_report_json(const CostReport &report);

/// Per-system P̄, its trace, spectral radius, iterations and the first
/// `ladder_entries` ladder values.
std::string steady_state_json(const std::vector<PreparedSystem> &prepared, std::size_t ladder_entries);

/// Columns k, sensor, trace, running_mean, divergent_flag. Overflowed entries
/// are written as "overflow".
std::string series_csv(const CovarianceSeries &series);

/// Summary: horizon, period, divergence flags, growth factors, overflow slots,
/// periodic average (or "transient-only") and final running means.
std::string series_json(const CovarianceSeries &series);

/// Columns k, mean_running_cost, half_width.
std::string monte_carlo_csv(const MonteCarloResult &result);
/// Summary with the mean cost, its half-width and optional bound values.
std::string monte_carlo_json(const MonteCarloResult &result, const std::optional<BoundsReport> &bounds = std::nullopt);

std::string bounds_json(const BoundsReport &bounds);

std::string attack_json(const OptimalAttack &result, const std::string &method);

/// Shortest round-trip decimal form used by every writer.
std::string format_double(double v);

std::string read_text_file(const std::string &path);
/// Creates parent directories as needed; throws an io error on failure.
void write_text_file(const std::string &path, const std::string &content);

} // namespace schedsec
