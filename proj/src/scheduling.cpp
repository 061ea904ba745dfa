#include "schedsec/scheduling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace schedsec {

Schedule::Schedule(std::vector<Bits> rows) : rows_(std::move(rows)) {
    if (rows_.empty())
        throw_invalid("schedule needs at least one sensor");
    const std::size_t T = rows_.front().size();
    if (T == 0)
        throw_invalid("schedule period must be positive");
    for (std::size_t i = 0; i < rows_.size(); ++i) {
        if (rows_[i].size() != T)
            throw_invalid("schedule row " + std::to_string(i) + " has length " +
                          std::to_string(rows_[i].size()) + ", expected " + std::to_string(T));
        for (auto b : rows_[i])
            if (b > 1)
                throw_invalid("schedule row " + std::to_string(i) + " has a non-binary entry");
    }
}

bool Schedule::is_exclusive() const {
    for (std::size_t k = 0; k < period(); ++k) {
        std::size_t on = 0;
        for (const auto &r : rows_)
            on += r[k];
        if (on != 1)
            return false;
    }
    return true;
}

Bits Schedule::flattened() const {
    Bits out;
    out.reserve(sensors() * period());
    for (const auto &r : rows_)
        out.insert(out.end(), r.begin(), r.end());
    return out;
}

Rational duty_factor(std::span<const std::uint8_t> row) {
    if (row.empty())
        throw_invalid("duty factor of an empty sequence");
    const auto ones = std::count(row.begin(), row.end(), std::uint8_t{1});
    return Rational(static_cast<std::int64_t>(ones), static_cast<std::int64_t>(row.size()));
}

GapHistogram gap_histogram(std::span<const std::uint8_t> reception) {
    if (reception.empty())
        throw_invalid("gap histogram of an empty sequence");
    GapHistogram h;
    h.period = reception.size();
    const std::size_t T = reception.size();
    std::size_t last = T;
    for (std::size_t k = 0; k < T; ++k)
        if (reception[k])
            last = k;
    if (last == T)
        return h;

    // Start from the last reception of the previous period.
    std::size_t gap = T - 1 - last;
    for (std::size_t k = 0; k < T; ++k) {
        gap = reception[k] ? 0 : gap + 1;
        if (h.counts.size() <= gap)
            h.counts.resize(gap + 1, 0);
        ++h.counts[gap];
    }
    return h;
}

bool is_uniform(std::span<const std::uint8_t> row) {
    std::vector<std::size_t> ones;
    for (std::size_t k = 0; k < row.size(); ++k)
        if (row[k])
            ones.push_back(k);
    if (ones.size() < 2)
        return true;
    std::size_t lo = row.size(), hi = 0;
    for (std::size_t j = 0; j < ones.size(); ++j) {
        const std::size_t next = j + 1 < ones.size() ? ones[j + 1] : ones.front() + row.size();
        const std::size_t d = next - ones[j];
        lo = std::min(lo, d);
        hi = std::max(hi, d);
    }
    return hi - lo <= 1;
}

std::vector<Bits> reception_from_rows(const std::vector<Bits> &rows) {
    const std::size_t T = rows.empty() ? 0 : rows.front().size();
    std::vector<Bits> lambda(rows.size(), Bits(T, 0));
    for (std::size_t k = 0; k < T; ++k) {
        std::size_t on = 0, who = 0;
        for (std::size_t i = 0; i < rows.size(); ++i)
            if (rows[i][k]) {
                ++on;
                who = i;
            }
        if (on == 1)
            lambda[who][k] = 1;
    }
    return lambda;
}

std::vector<Bits> reception_from_schedule(const Schedule &sched) { return reception_from_rows(sched.rows()); }

namespace {

std::optional<double> sensor_cost(std::span<const std::uint8_t> reception, const TraceLadder &ladder) {
    const GapHistogram h = gap_histogram(reception);
    if (h.never_received())
        return std::nullopt;
    double acc = 0.0;
    for (std::size_t t = 0; t < h.counts.size(); ++t)
        if (h.counts[t])
            acc += static_cast<double>(h.counts[t]) * ladder.at(t);
    return acc / static_cast<double>(h.period);
}

} // namespace

CostReport average_cost(const std::vector<Bits> &receptions, std::span<const TraceLadder> ladders) {
    if (receptions.size() != ladders.size())
        throw_invalid("average_cost: " + std::to_string(receptions.size()) + " sequences but " +
                      std::to_string(ladders.size()) + " ladders");
    if (receptions.empty())
        throw_invalid("average_cost: no sensors");
    const std::size_t T = receptions.front().size();
    CostReport report;
    double total = 0.0;
    bool divergent = false;
    for (std::size_t i = 0; i < receptions.size(); ++i) {
        if (receptions[i].size() != T)
            throw_invalid("average_cost: sequences do not share a period");
        auto c = sensor_cost(receptions[i], ladders[i]);
        if (c)
            total += *c;
        else
            divergent = true;
        report.per_sensor.push_back(c);
    }
    if (!divergent)
        report.total = total;
    return report;
}

namespace {

// Column labels c[k] = transmitting sensor in slot k.
Bits flatten_labels(const std::vector<std::size_t> &c, std::size_t sensors, std::size_t rotation) {
    const std::size_t T = c.size();
    Bits out(sensors * T, 0);
    for (std::size_t k = 0; k < T; ++k)
        out[c[(k + rotation) % T] * T + k] = 1;
    return out;
}

bool is_canonical_rotation(const std::vector<std::size_t> &c, std::size_t sensors) {
    const Bits base = flatten_labels(c, sensors, 0);
    for (std::size_t r = 1; r < c.size(); ++r)
        if (flatten_labels(c, sensors, r) < base)
            return false;
    return true;
}

Schedule schedule_from_labels(const std::vector<std::size_t> &c, std::size_t sensors) {
    std::vector<Bits> rows(sensors, Bits(c.size(), 0));
    for (std::size_t k = 0; k < c.size(); ++k)
        rows[c[k]][k] = 1;
    return Schedule(std::move(rows));
}

bool next_labels(std::vector<std::size_t> &c, std::size_t base) {
    for (std::size_t k = c.size(); k-- > 0;) {
        if (++c[k] < base)
            return true;
        c[k] = 0;
    }
    return false;
}

} // namespace

ScheduleSearchResult optimal_schedule_search(std::span<const TraceLadder> ladders,
                                             std::span<const std::size_t> periods, const Budget &budget) {
    if (periods.empty())
        throw_invalid("optimal_schedule_search: no candidate periods");
    const std::size_t N = ladders.size();
    if (N == 0)
        throw_invalid("optimal_schedule_search: no systems");
    std::uint64_t needed = 0;
    for (auto T : periods) {
        if (T < N)
            throw_invalid("optimal_schedule_search: period " + std::to_string(T) + " is shorter than the " +
                          std::to_string(N) + " sensors");
        const std::uint64_t n = saturating_pow(N, T);
        needed = n > std::numeric_limits<std::uint64_t>::max() - needed ? std::numeric_limits<std::uint64_t>::max()
                                                                       : needed + n;
    }
    require_budget(budget, needed, "schedule search");

    std::optional<ScheduleSearchResult> best;
    Bits best_flat;
    std::uint64_t evaluated = 0;
    for (auto T : periods) {
        std::vector<std::size_t> c(T, 0);
        do {
            if (!is_canonical_rotation(c, N))
                continue;
            Schedule s = schedule_from_labels(c, N);
            CostReport cost = average_cost(s.rows(), ladders);
            ++evaluated;
            if (cost.divergent())
                continue;
            const double J = *cost.total;
            Bits flat = s.flattened();
            bool take = !best;
            if (best) {
                const double Jb = *best->cost.total;
                const double tie = 1e-12 * std::max(std::abs(J), std::abs(Jb));
                if (J < Jb - tie)
                    take = true;
                else if (std::abs(J - Jb) <= tie)
                    take = flat < best_flat || (flat == best_flat && T < best->schedule.period());
            }
            if (take) {
                best = ScheduleSearchResult{std::move(s), std::move(cost), 0};
                best_flat = std::move(flat);
            }
        } while (next_labels(c, N));
    }
    if (!best)
        throw Error(ErrorCode::infeasible, "no schedule with finite cost among the candidate periods");
    best->evaluated = evaluated;
    return std::move(*best);
}

std::vector<Schedule> all_exclusive_schedules(std::size_t sensors, std::size_t period, const Budget &budget) {
    if (sensors == 0 || period == 0)
        throw_invalid("all_exclusive_schedules: sensors and period must be positive");
    require_budget(budget, saturating_pow(sensors, period), "exclusive schedule enumeration");
    std::vector<Schedule> out;
    std::vector<std::size_t> c(period, 0);
    do {
        out.push_back(schedule_from_labels(c, sensors));
    } while (next_labels(c, sensors));
    return out;
}

} // namespace schedsec
