#include "schedsec/attack.hpp"

#include <algorithm>
#include <string>

namespace schedsec {

std::size_t ShiftTuple::spoofed_count() const noexcept {
    return static_cast<std::size_t>(std::count_if(taus.begin(), taus.end(), [](std::size_t t) { return t != 0; }));
}

Bits apply_shift(std::span<const std::uint8_t> row, std::size_t tau) {
    const std::size_t T = row.size();
    if (T == 0)
        throw_invalid("apply_shift: empty sequence");
    if (tau >= T)
        throw_invalid("apply_shift: offset " + std::to_string(tau) + " outside [0, " + std::to_string(T) + ")");
    Bits out(T);
    for (std::size_t k = 0; k < T; ++k)
        out[k] = row[(k + tau) % T];
    return out;
}

std::vector<Bits> shifted_rows(const Schedule &sched, const ShiftTuple &attack) {
    if (attack.size() != sched.sensors())
        throw_invalid("shift tuple has " + std::to_string(attack.size()) + " offsets for " +
                      std::to_string(sched.sensors()) + " sensors");
    std::vector<Bits> rows;
    rows.reserve(sched.sensors());
    for (std::size_t i = 0; i < sched.sensors(); ++i)
        rows.push_back(apply_shift(sched.row(i), attack.taus[i]));
    return rows;
}

std::vector<Bits> attacked_reception(const Schedule &sched, const ShiftTuple &attack) {
    return reception_from_rows(shifted_rows(sched, attack));
}

std::vector<std::size_t> blocked_sensors(const std::vector<Bits> &receptions) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < receptions.size(); ++i)
        if (std::none_of(receptions[i].begin(), receptions[i].end(), [](std::uint8_t b) { return b != 0; }))
            out.push_back(i);
    return out;
}

ShiftTuple isolation_shift(std::size_t sensors, std::size_t target) {
    if (target >= sensors)
        throw_invalid("target sensor " + std::to_string(target) + " out of range");
    ShiftTuple t{std::vector<std::size_t>(sensors, 1)};
    t.taus[target] = 0;
    return t;
}

namespace {

bool target_blocked(const Schedule &sched, const ShiftTuple &attack, std::size_t target) {
    const auto lambda = attacked_reception(sched, attack);
    return std::none_of(lambda[target].begin(), lambda[target].end(), [](std::uint8_t b) { return b != 0; });
}

// Advances a base-T counter; returns false after the last tuple.
bool next_tuple(std::vector<std::size_t> &taus, std::size_t T) {
    for (std::size_t k = taus.size(); k-- > 0;) {
        if (++taus[k] < T)
            return true;
        taus[k] = 0;
    }
    return false;
}

} // namespace

ShiftTuple isolate_sensor_attack(const Schedule &sched, std::size_t target, const Budget &budget) {
    if (target >= sched.sensors())
        throw_invalid("target sensor " + std::to_string(target) + " out of range");
    if (!sched.is_exclusive())
        throw_invalid("isolate_sensor_attack needs an exclusive schedule");
    const Rational f = duty_factor(sched.row(target));
    if (2 * f.num() > f.den())
        throw_invalid("isolate_sensor_attack: sensor " + std::to_string(target) + " has duty factor above 1/2");

    if (sched.sensors() >= 2 && sched.period() >= 2) {
        ShiftTuple constructive = isolation_shift(sched.sensors(), target);
        if (target_blocked(sched, constructive, target))
            return constructive;
    }

    // Fallback: every tuple with the target unshifted, lexicographic order.
    const std::size_t N = sched.sensors(), T = sched.period();
    require_budget(budget, saturating_pow(T, N - 1), "isolation fallback search");
    ShiftTuple t{std::vector<std::size_t>(N, 0)};
    do {
        if (t.taus[target] != 0)
            continue;
        if (target_blocked(sched, t, target))
            return t;
    } while (next_tuple(t.taus, T));
    throw Error(ErrorCode::infeasible, "no shift tuple blocks sensor " + std::to_string(target));
}

ShiftTuple random_attack(std::size_t period, std::size_t sensors, Engine &engine) {
    if (period == 0)
        throw_invalid("random_attack: period must be positive");
    ShiftTuple t{std::vector<std::size_t>(sensors, 0)};
    for (auto &tau : t.taus)
        tau = static_cast<std::size_t>(uniform_below(engine, period));
    return t;
}

ShiftTuple random_attack(std::size_t period, std::size_t sensors, std::uint64_t seed) {
    Engine eng(splitmix64(seed));
    return random_attack(period, sensors, eng);
}

MipInstance build_mip(const Schedule &sched, std::size_t target) {
    const std::size_t N = sched.sensors(), T = sched.period();
    if (N < 2)
        throw_invalid("build_mip: need at least two sensors");
    if (target >= N)
        throw_invalid("build_mip: target sensor " + std::to_string(target) + " out of range");
    if (!sched.is_exclusive())
        throw_invalid("build_mip: schedule is not exclusive");

    MipInstance inst;
    inst.target = target;
    inst.period = T;
    inst.s_target = sched.row(target);
    for (std::size_t j = 0; j < N; ++j)
        if (j != target)
            inst.others.push_back(j);
    const std::size_t cols = inst.variables();
    inst.S_minus.assign(T, Bits(cols, 0));
    inst.E.assign(inst.blocks(), Bits(cols, 0));
    for (std::size_t b = 0; b < inst.blocks(); ++b) {
        for (std::size_t s = 1; s < T; ++s) {
            const std::size_t c = b * (T - 1) + (s - 1);
            const Bits shifted = apply_shift(sched.row(inst.others[b]), s);
            for (std::size_t k = 0; k < T; ++k)
                inst.S_minus[k][c] = shifted[k];
            inst.E[b][c] = 1;
        }
    }
    return inst;
}

void MipInstance::stacked(std::vector<std::vector<int>> &D, std::vector<int> &b) const {
    const std::size_t cols = variables();
    D.assign(period + blocks(), std::vector<int>(cols, 0));
    b.assign(period + blocks(), 0);
    for (std::size_t k = 0; k < period; ++k) {
        for (std::size_t c = 0; c < cols; ++c)
            D[k][c] = -static_cast<int>(S_minus[k][c]);
        b[k] = -static_cast<int>(s_target[k]);
    }
    for (std::size_t r = 0; r < blocks(); ++r) {
        for (std::size_t c = 0; c < cols; ++c)
            D[period + r][c] = E[r][c];
        b[period + r] = 1;
    }
}

bool MipInstance::is_feasible(std::span<const std::uint8_t> gamma) const {
    if (gamma.size() != variables())
        return false;
    for (auto g : gamma)
        if (g > 1)
            return false;
    for (std::size_t r = 0; r < blocks(); ++r) {
        std::size_t sum = 0;
        for (std::size_t c = 0; c < variables(); ++c)
            sum += E[r][c] * gamma[c];
        if (sum > 1)
            return false;
    }
    for (std::size_t k = 0; k < period; ++k) {
        std::size_t cover = 0;
        for (std::size_t c = 0; c < variables(); ++c)
            cover += S_minus[k][c] * gamma[c];
        if (cover < s_target[k])
            return false;
    }
    return true;
}

ShiftTuple MipInstance::decode(std::span<const std::uint8_t> gamma) const {
    if (gamma.size() != variables())
        throw_invalid("decode: indicator has the wrong length");
    ShiftTuple t{std::vector<std::size_t>(blocks() + 1, 0)};
    for (std::size_t b = 0; b < blocks(); ++b)
        for (std::size_t s = 1; s < period; ++s)
            if (gamma[b * (period - 1) + (s - 1)]) {
                if (t.taus[others[b]] != 0)
                    throw_invalid("decode: block " + std::to_string(b) + " selects more than one shift");
                t.taus[others[b]] = s;
            }
    return t;
}

std::optional<Bits> MipInstance::encode(const ShiftTuple &attack) const {
    if (attack.size() != blocks() + 1)
        throw_invalid("encode: shift tuple has the wrong length");
    if (attack.taus[target] != 0)
        return std::nullopt;
    Bits gamma(variables(), 0);
    for (std::size_t b = 0; b < blocks(); ++b) {
        const std::size_t s = attack.taus[others[b]];
        if (s >= period)
            throw_invalid("encode: offset out of range");
        if (s != 0)
            gamma[b * (period - 1) + (s - 1)] = 1;
    }
    return gamma;
}

OptimalAttack brute_force_optimal_attack(const Schedule &sched, const Budget &budget,
                                         const BruteForceOptions &opts) {
    const std::size_t N = sched.sensors(), T = sched.period();
    require_budget(budget, saturating_pow(T, N), "brute-force attack search");

    OptimalAttack out;
    out.per_target_costs.assign(N, std::nullopt);
    ShiftTuple t{std::vector<std::size_t>(N, 0)};
    do {
        const std::size_t cost = t.spoofed_count();
        const auto lambda = attacked_reception(sched, t);
        for (std::size_t i : blocked_sensors(lambda)) {
            if (!opts.allow_target_shift && t.taus[i] != 0)
                continue;
            if (!out.per_target_costs[i] || cost < *out.per_target_costs[i])
                out.per_target_costs[i] = cost;
            if (!out.spoofed_count || cost < *out.spoofed_count) {
                out.spoofed_count = cost;
                out.attack = t;
                out.target = i;
            }
        }
    } while (next_tuple(t.taus, T));
    return out;
}

} // namespace schedsec
