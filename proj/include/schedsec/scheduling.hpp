#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "schedsec/errors.hpp"
#include "schedsec/lti_estimation.hpp"
#include "schedsec/rational.hpp"

namespace schedsec {

/// One period of a binary sequence.
using Bits = std::vector<std::uint8_t>;

/// N binary periodic transmission sequences with a common period T.
/// Row i is sensor i's policy s_i(0..T-1).
class Schedule {
public:
    Schedule() = default;
    /// Throws invalid-argument on empty input, ragged rows or non-binary entries.
    explicit Schedule(std::vector<Bits> rows);

    std::size_t sensors() const noexcept { return rows_.size(); }
    std::size_t period() const noexcept { return rows_.empty() ? 0 : rows_.front().size(); }
    const Bits &row(std::size_t i) const { return rows_.at(i); }
    const std::vector<Bits> &rows() const noexcept { return rows_; }

    /// Exactly one transmitter in every slot.
    bool is_exclusive() const;

    /// Rows concatenated in sensor order; used for deterministic tie-breaks.
    Bits flattened() const;

    friend bool operator==(const Schedule &, const Schedule &) = default;

private:
    std::vector<Bits> rows_;
};

/// Per-slot gap counts of one reception sequence, read cyclically.
/// counts[t] is the number of slots in a period at which the last successful
/// reception happened exactly t slots earlier (counts[0] = receptions).
struct GapHistogram {
    std::vector<std::size_t> counts; // empty when never received
    std::size_t period = 0;

    bool never_received() const noexcept { return counts.empty(); }
    std::size_t received() const noexcept { return counts.empty() ? 0 : counts.front(); }
    std::size_t max_gap() const noexcept { return counts.empty() ? 0 : counts.size() - 1; }
};

/// Infinite-horizon average of Σ_i Tr P_i(k). A sensor that never receives is
/// represented by nullopt ("divergent"), as is the total if any sensor is.
struct CostReport {
    std::vector<std::optional<double>> per_sensor;
    std::optional<double> total;

    bool divergent() const noexcept { return !total.has_value(); }
};

/// (#ones)/T in lowest terms.
Rational duty_factor(std::span<const std::uint8_t> row);

GapHistogram gap_histogram(std::span<const std::uint8_t> reception);

/// Max cyclic distance between consecutive ones minus the min is at most one.
/// Rows with fewer than one transmission count as uniform.
bool is_uniform(std::span<const std::uint8_t> row);

/// Collision-channel outcome: λ_i(k) = 1 iff sensor i is the only transmitter in slot k.
std::vector<Bits> reception_from_rows(const std::vector<Bits> &rows);
std::vector<Bits> reception_from_schedule(const Schedule &sched);

/// J_i = (1/T) Σ_t a_t Tr[h_i^t(P̄_i)] over the cyclic gap histogram.
CostReport average_cost(const std::vector<Bits> &receptions, std::span<const TraceLadder> ladders);

struct ScheduleSearchResult {
    Schedule schedule;
    CostReport cost;
    std::uint64_t evaluated = 0; // canonical candidates costed
};

/// Exhaustive search over exclusive schedules (one transmitter per slot) for
/// each candidate period. Candidates equal up to a cyclic rotation are costed
/// once. Ties (relative 1e-12) go to the lexicographically smallest flattened
/// schedule, then the smaller period.
ScheduleSearchResult optimal_schedule_search(std::span<const TraceLadder> ladders,
                                             std::span<const std::size_t> periods,
                                             const Budget &budget = {});

/// Every exclusive schedule of N sensors and period T (N^T of them), in
/// label-counter order. Intended for property tests at desk scale.
std::vector<Schedule> all_exclusive_schedules(std::size_t sensors, std::size_t period,
                                              const Budget &budget = {});

} // namespace schedsec
