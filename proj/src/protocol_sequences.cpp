#include "schedsec/protocol_sequences.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "schedsec/attack.hpp"

namespace schedsec {

DutyFactor::DutyFactor(std::int64_t n, std::int64_t d) : n_(n), d_(d) {
    if (!(0 < n && n < d))
        throw_invalid("duty factor " + std::to_string(n) + "/" + std::to_string(d) + " must satisfy 0 < n < d");
    if (std::gcd(n, d) != 1)
        throw_invalid("duty factor " + std::to_string(n) + "/" + std::to_string(d) + " is not in lowest terms");
}

namespace {

std::uint64_t product_of_denominators(std::span<const DutyFactor> factors) {
    std::uint64_t D = 1;
    for (const auto &f : factors) {
        if (D > (std::uint64_t{1} << 40) / static_cast<std::uint64_t>(f.d()))
            throw Error(ErrorCode::budget_exceeded, "policy period overflows");
        D *= static_cast<std::uint64_t>(f.d());
    }
    return D;
}

void check_tuple(const Schedule &rows, std::span<const std::size_t> tuple, std::span<const std::size_t> shifts) {
    if (tuple.empty())
        throw_invalid("sensor tuple is empty");
    if (tuple.size() != shifts.size())
        throw_invalid("sensor tuple and shift list differ in length");
    for (std::size_t k = 0; k < tuple.size(); ++k) {
        if (tuple[k] >= rows.sensors())
            throw_invalid("sensor " + std::to_string(tuple[k]) + " out of range");
        if (k > 0 && tuple[k] <= tuple[k - 1])
            throw_invalid("sensor tuple must be strictly ascending");
        if (shifts[k] >= rows.period())
            throw_invalid("shift " + std::to_string(shifts[k]) + " out of range");
    }
}

} // namespace

PolicySet::PolicySet(Schedule policies, std::vector<DutyFactor> factors)
    : policies_(std::move(policies)), factors_(std::move(factors)) {
    if (factors_.size() != policies_.sensors())
        throw_invalid("policy set has " + std::to_string(policies_.sensors()) + " rows but " +
                      std::to_string(factors_.size()) + " duty factors");
    const std::uint64_t D = product_of_denominators(factors_);
    const std::uint64_t T = policies_.period();
    if (T % D != 0)
        throw_invalid("policy period " + std::to_string(T) + " is not a multiple of the denominator product " +
                      std::to_string(D));
    for (std::size_t i = 0; i < factors_.size(); ++i) {
        const auto &row = policies_.row(i);
        const auto w = static_cast<std::uint64_t>(std::count(row.begin(), row.end(), std::uint8_t{1}));
        if (w * static_cast<std::uint64_t>(factors_[i].d()) != T * static_cast<std::uint64_t>(factors_[i].n()))
            throw_invalid("policy row " + std::to_string(i) + " has weight " + std::to_string(w) +
                          ", inconsistent with duty factor " + std::to_string(factors_[i].n()) + "/" +
                          std::to_string(factors_[i].d()));
    }
}

std::size_t hamming_cross_correlation(const Schedule &rows, std::span<const std::size_t> tuple,
                                      std::span<const std::size_t> shifts) {
    check_tuple(rows, tuple, shifts);
    const std::size_t T = rows.period();
    std::size_t count = 0;
    for (std::size_t k = 0; k < T; ++k) {
        bool all = true;
        for (std::size_t j = 0; j < tuple.size() && all; ++j)
            all = rows.row(tuple[j])[(k + shifts[j]) % T] != 0;
        count += all ? 1 : 0;
    }
    return count;
}

Rational throughput(const Schedule &rows, std::span<const std::size_t> tuple, std::span<const std::size_t> shifts,
                    std::size_t position) {
    check_tuple(rows, tuple, shifts);
    if (position >= tuple.size())
        throw_invalid("throughput position out of range");
    const std::size_t T = rows.period();
    std::int64_t count = 0;
    for (std::size_t k = 0; k < T; ++k) {
        if (!rows.row(tuple[position])[(k + shifts[position]) % T])
            continue;
        bool others_silent = true;
        for (std::size_t j = 0; j < tuple.size() && others_silent; ++j)
            if (j != position)
                others_silent = rows.row(tuple[j])[(k + shifts[j]) % T] == 0;
        count += others_silent ? 1 : 0;
    }
    return Rational(count, static_cast<std::int64_t>(T));
}

namespace {

// Visits ascending tuples of size `size` over n sensors in lexicographic order.
template <class F> bool for_each_tuple(std::size_t n, std::size_t size, F &&f) {
    std::vector<std::size_t> t(size);
    std::iota(t.begin(), t.end(), std::size_t{0});
    for (;;) {
        if (!f(t))
            return false;
        std::size_t k = size;
        while (k-- > 0) {
            if (t[k] < n - size + k) {
                ++t[k];
                for (std::size_t j = k + 1; j < size; ++j)
                    t[j] = t[j - 1] + 1;
                break;
            }
        }
        if (k == static_cast<std::size_t>(-1))
            return true;
    }
}

} // namespace

InvarianceReport is_shift_invariant(const Schedule &rows, const InvarianceOptions &opts) {
    InvarianceReport report;
    const std::size_t N = rows.sensors(), T = rows.period();
    Engine eng(splitmix64(opts.seed));

    for (std::size_t size = 1; size <= N && report.invariant; ++size) {
        for_each_tuple(N, size, [&](const std::vector<std::size_t> &tuple) {
            std::vector<std::size_t> shifts(size, 0);
            const std::size_t expected = hamming_cross_correlation(rows, tuple, shifts);
            auto check = [&]() {
                const std::size_t h = hamming_cross_correlation(rows, tuple, shifts);
                if (h != expected) {
                    report.invariant = false;
                    report.witness = InvarianceWitness{tuple, shifts, h, expected};
                }
                return h == expected;
            };
            const std::uint64_t combos = saturating_pow(T, size - 1);
            if (combos <= opts.exhaustive_cap) {
                // shifts[0] stays 0; count the rest in base T
                for (;;) {
                    if (!check())
                        return false;
                    std::size_t k = size;
                    while (k-- > 1) {
                        if (++shifts[k] < T)
                            break;
                        shifts[k] = 0;
                    }
                    if (k == 0 || k == static_cast<std::size_t>(-1))
                        break;
                }
                return true;
            }
            if (opts.samples == 0)
                throw Error(ErrorCode::budget_exceeded,
                            "invariance check for a " + std::to_string(size) + "-tuple needs " +
                                std::to_string(combos) + " evaluations; enable sampling");
            report.sampled = true;
            for (std::size_t s = 0; s < opts.samples; ++s) {
                for (std::size_t k = 1; k < size; ++k)
                    shifts[k] = static_cast<std::size_t>(uniform_below(eng, T));
                if (!check())
                    return false;
            }
            return true;
        });
    }
    return report;
}

SigmaChoice default_sigma(std::span<const DutyFactor> factors) {
    SigmaChoice sigma;
    std::uint64_t prefix = 1;
    for (const auto &f : factors) {
        const auto d = static_cast<std::size_t>(f.d());
        Bits base(d, 0);
        std::fill(base.end() - f.n(), base.end(), std::uint8_t{1});
        std::vector<Bits> vs;
        vs.reserve(prefix);
        for (std::uint64_t j = 0; j < prefix; ++j)
            vs.push_back(apply_shift(base, static_cast<std::size_t>(j % d)));
        sigma.push_back(std::move(vs));
        prefix *= d;
    }
    return sigma;
}

SigmaChoice random_sigma(std::span<const DutyFactor> factors, Engine &engine) {
    SigmaChoice sigma;
    std::uint64_t prefix = 1;
    for (const auto &f : factors) {
        const auto d = static_cast<std::size_t>(f.d());
        std::vector<Bits> vs;
        vs.reserve(prefix);
        for (std::uint64_t j = 0; j < prefix; ++j) {
            // partial Fisher-Yates: the first n picks become the ones
            std::vector<std::size_t> idx(d);
            std::iota(idx.begin(), idx.end(), std::size_t{0});
            Bits v(d, 0);
            for (std::int64_t k = 0; k < f.n(); ++k) {
                const auto kk = static_cast<std::size_t>(k);
                const std::size_t pick = kk + static_cast<std::size_t>(uniform_below(engine, d - kk));
                std::swap(idx[kk], idx[pick]);
                v[idx[kk]] = 1;
            }
            vs.push_back(std::move(v));
        }
        sigma.push_back(std::move(vs));
        prefix *= d;
    }
    return sigma;
}

PolicySet construct_shift_invariant(std::span<const DutyFactor> factors, const std::optional<SigmaChoice> &sigma) {
    if (factors.empty())
        throw_invalid("construct_shift_invariant: no duty factors");
    const std::uint64_t D = product_of_denominators(factors);
    const SigmaChoice chosen = sigma ? *sigma : default_sigma(factors);
    if (chosen.size() != factors.size())
        throw_invalid("construct_shift_invariant: sigma covers " + std::to_string(chosen.size()) + " sensors, expected " +
                      std::to_string(factors.size()));

    std::vector<Bits> rows;
    std::uint64_t prefix = 1; // D_{i-1}
    for (std::size_t i = 0; i < factors.size(); ++i) {
        const auto d = static_cast<std::size_t>(factors[i].d());
        const auto &vs = chosen[i];
        if (vs.size() != prefix)
            throw_invalid("construct_shift_invariant: sensor " + std::to_string(i) + " needs " +
                          std::to_string(prefix) + " sigma vectors, got " + std::to_string(vs.size()));
        for (std::size_t j = 0; j < vs.size(); ++j) {
            const auto w = std::count(vs[j].begin(), vs[j].end(), std::uint8_t{1});
            if (vs[j].size() != d || w != factors[i].n() ||
                std::any_of(vs[j].begin(), vs[j].end(), [](std::uint8_t b) { return b > 1; }))
                throw_invalid("construct_shift_invariant: sigma (" + std::to_string(i) + "," + std::to_string(j) +
                              ") must be binary with length " + std::to_string(d) + " and weight " +
                              std::to_string(factors[i].n()));
        }
        const std::uint64_t own = prefix * d; // D_i
        Bits one_period(own);
        for (std::size_t t = 0; t < d; ++t)
            for (std::uint64_t j = 0; j < prefix; ++j)
                one_period[t * prefix + j] = vs[j][t];
        Bits row(D);
        for (std::uint64_t k = 0; k < D; ++k)
            row[k] = one_period[k % own];
        rows.push_back(std::move(row));
        prefix = own;
    }

    PolicySet ps(Schedule(std::move(rows)), std::vector<DutyFactor>(factors.begin(), factors.end()));
    InvarianceOptions check;
    check.exhaustive_cap = 4096;
    check.samples = 1024;
    const InvarianceReport r = is_shift_invariant(ps.schedule(), check);
    if (!r.invariant)
        throw Error(ErrorCode::numerical, "constructed policy set failed the shift-invariance check");
    return ps;
}

PolicySet shortest_period_policies(std::size_t sensors) {
    if (sensors == 0)
        throw_invalid("shortest_period_policies: need at least one sensor");
    if (sensors > 20)
        throw Error(ErrorCode::budget_exceeded, "period 2^" + std::to_string(sensors) + " is too large");
    const std::vector<DutyFactor> f(sensors, DutyFactor(1, 2));
    return construct_shift_invariant(f);
}

std::vector<DutyFactor> factors_of(const Schedule &sched) {
    std::vector<DutyFactor> out;
    for (std::size_t i = 0; i < sched.sensors(); ++i) {
        const Rational r = duty_factor(sched.row(i));
        if (r.num() == 0 || r.num() == r.den())
            throw_invalid("sensor " + std::to_string(i) + " has duty factor " + std::to_string(r.num()) + "/" +
                          std::to_string(r.den()) + "; a shift-invariant set needs 0 < f < 1");
        out.emplace_back(r.num(), r.den());
    }
    return out;
}

BoundsReport bounds(std::span<const DutyFactor> factors, std::span<const TraceLadder> ladders) {
    if (factors.size() != ladders.size())
        throw_invalid("bounds: factor and ladder counts differ");
    if (factors.empty())
        throw_invalid("bounds: no sensors");
    BoundsReport report;
    report.period = product_of_denominators(factors);
    const std::uint64_t D = report.period;
    double lower = 0.0, upper = 0.0;
    for (std::size_t i = 0; i < factors.size(); ++i) {
        std::uint64_t Ni = static_cast<std::uint64_t>(factors[i].n());
        for (std::size_t j = 0; j < factors.size(); ++j)
            if (j != i)
                Ni *= static_cast<std::uint64_t>(factors[j].d() - factors[j].n());
        report.per_sensor_receptions.push_back(Ni);

        const std::uint64_t q = D / Ni;
        double lo = 0.0;
        for (std::uint64_t t = 0; t < q; ++t)
            lo += static_cast<double>(Ni) * ladders[i].at(t);
        lo += static_cast<double>(D % Ni) * ladders[i].at(q);

        double hi = static_cast<double>(Ni) * ladders[i].at(0);
        for (std::uint64_t t = 1; t <= D - Ni; ++t)
            hi += ladders[i].at(t);

        lower += lo / static_cast<double>(D);
        upper += hi / static_cast<double>(D);
    }
    report.lower = lower;
    report.upper = upper;
    return report;
}

} // namespace schedsec
