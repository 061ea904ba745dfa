#include <doctest.h>

#include <array>

#include "helpers.hpp"
#include "schedsec/attack.hpp"

using namespace schedsec;
using testing::bits;

namespace {

// Independent of the library: λ_i(k) = 1 iff i is the only transmitter after shifting.
std::vector<Bits> reception_oracle(const Schedule &s, const std::vector<std::size_t> &taus) {
    const std::size_t N = s.sensors(), T = s.period();
    std::vector<Bits> out(N, Bits(T, 0));
    for (std::size_t k = 0; k < T; ++k) {
        std::size_t count = 0, who = 0;
        for (std::size_t i = 0; i < N; ++i)
            if (s.row(i)[(k + taus[i]) % T]) {
                ++count;
                who = i;
            }
        if (count == 1)
            out[who][k] = 1;
    }
    return out;
}

bool blocks_something(const Schedule &s, const std::vector<std::size_t> &taus) {
    for (const Bits &r : reception_oracle(s, taus))
        if (std::all_of(r.begin(), r.end(), [](std::uint8_t b) { return b == 0; }))
            return true;
    return false;
}

std::size_t nonzero(const std::vector<std::size_t> &taus) {
    return static_cast<std::size_t>(std::count_if(taus.begin(), taus.end(), [](std::size_t t) { return t != 0; }));
}

bool all_zero(const Bits &r) {
    return std::all_of(r.begin(), r.end(), [](std::uint8_t b) { return b == 0; });
}

const Schedule &reference_schedule() {
    static const Schedule s = testing::schedule({"001", "010", "100"});
    return s;
}

} // namespace

TEST_CASE("apply_shift follows the modulo definition") {
    CHECK(apply_shift(bits("100"), 2) == bits("010"));
    CHECK(apply_shift(bits("1101"), 0) == bits("1101"));
    CHECK(apply_shift(bits("0110111"), 1) == bits("1101110"));
    CHECK_THROWS_AS(apply_shift(bits("100"), 3), Error);
    CHECK_THROWS_AS(apply_shift(Bits{}, 0), Error);
}

TEST_CASE("shift group laws and weight preservation") {
    Engine eng(11);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t T = 1 + uniform_below(eng, 12);
        Bits r(T);
        for (auto &b : r)
            b = static_cast<std::uint8_t>(uniform_below(eng, 2));
        const std::size_t a = uniform_below(eng, T), b = uniform_below(eng, T);
        CHECK(apply_shift(apply_shift(r, a), b) == apply_shift(r, (a + b) % T));
        CHECK(apply_shift(apply_shift(r, a), (T - a) % T) == r);
        const Bits shifted = apply_shift(r, a);
        CHECK(std::count(r.begin(), r.end(), 1) == std::count(shifted.begin(), shifted.end(), 1));
    }
}

TEST_CASE("attacked reception matches an independent collision oracle") {
    Engine eng(5);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t N = 1 + uniform_below(eng, 4), T = 1 + uniform_below(eng, 7);
        std::vector<Bits> rows(N, Bits(T));
        for (auto &r : rows)
            for (auto &b : r)
                b = static_cast<std::uint8_t>(uniform_below(eng, 2));
        const Schedule s(rows);
        const ShiftTuple a = random_attack(T, N, eng);
        CHECK(attacked_reception(s, a) == reception_oracle(s, a.taus));
    }
    const Schedule s = reference_schedule();
    CHECK(attacked_reception(s, ShiftTuple{{0, 0, 0}}) == s.rows());
    CHECK_THROWS_AS(attacked_reception(s, ShiftTuple{{0, 0}}), Error);
}

TEST_CASE("offset (0,0,2) on the three-slot schedule silences sensors 2 and 3") {
    const auto lam = attacked_reception(reference_schedule(), ShiftTuple{{0, 0, 2}});
    CHECK(lam[0] == bits("001"));
    CHECK(all_zero(lam[1]));
    CHECK(all_zero(lam[2]));
    CHECK(blocked_sensors(lam) == std::vector<std::size_t>{1, 2});
    CHECK(ShiftTuple{{0, 0, 2}}.spoofed_count() == 1);
}

TEST_CASE("isolation attack") {
    SUBCASE("three-slot schedule, first sensor") {
        const ShiftTuple a = isolate_sensor_attack(reference_schedule(), 0);
        CHECK(a.taus == std::vector<std::size_t>{0, 1, 1});
        CHECK(all_zero(attacked_reception(reference_schedule(), a)[0]));
    }
    SUBCASE("two alternating sensors") {
        const Schedule s = testing::schedule({"01", "10"});
        const ShiftTuple a = isolate_sensor_attack(s, 0);
        CHECK(a.taus == std::vector<std::size_t>{0, 1});
        const auto lam = attacked_reception(s, a);
        CHECK(all_zero(lam[0]));
        CHECK(all_zero(lam[1]));
    }
    SUBCASE("two sensors with T = 7") {
        const Schedule s = testing::schedule({"1001000", "0110111"});
        const ShiftTuple a = isolate_sensor_attack(s, 0);
        CHECK(a.taus == std::vector<std::size_t>{0, 1});
        CHECK(all_zero(attacked_reception(s, a)[0]));
    }
    SUBCASE("adjacent ones fall back to a search") {
        // sensor 1 owns two adjacent slots; isolation alone leaves one of them
        const Schedule s = testing::schedule({"110000", "001100", "000011"});
        CHECK_FALSE(all_zero(attacked_reception(s, isolation_shift(3, 0))[0]));
        const ShiftTuple a = isolate_sensor_attack(s, 0);
        CHECK(a.taus[0] == 0);
        CHECK(all_zero(attacked_reception(s, a)[0]));
    }
    SUBCASE("preconditions") {
        CHECK_THROWS_AS(isolate_sensor_attack(testing::schedule({"110", "001"}), 0), Error);
        CHECK_THROWS_AS(isolate_sensor_attack(testing::schedule({"011", "010"}), 1), Error);
        CHECK_THROWS_AS(isolate_sensor_attack(reference_schedule(), 3), Error);
    }
}

TEST_CASE("isolation blocks every uniform sensor with duty factor at most one half") {
    std::size_t checked = 0;
    for (std::size_t N = 2; N <= 4; ++N)
        for (std::size_t T = N; T <= 8; ++T)
            for (const Schedule &s : all_exclusive_schedules(N, T))
                for (std::size_t i = 0; i < N; ++i) {
                    const Bits &r = s.row(i);
                    const auto w = static_cast<std::size_t>(std::count(r.begin(), r.end(), 1));
                    if (w == 0 || 2 * w > T || !is_uniform(r))
                        continue;
                    const ShiftTuple a = isolation_shift(N, i);
                    REQUIRE(all_zero(reception_oracle(s, a.taus)[i]));
                    ++checked;
                }
    CHECK(checked > 1000);
}

TEST_CASE("random attack") {
    CHECK(random_attack(1, 4, 3).taus == std::vector<std::size_t>(4, 0));
    CHECK(random_attack(9, 5, 42) == random_attack(9, 5, 42));
    CHECK_THROWS_AS(random_attack(0, 2, 1), Error);
    Engine eng(2024);
    std::array<std::size_t, 3> counts{};
    const std::size_t draws = 100000;
    for (std::size_t k = 0; k < draws; ++k)
        ++counts[random_attack(3, 1, eng).taus[0]];
    for (std::size_t c : counts)
        CHECK(static_cast<double>(c) / draws == doctest::Approx(1.0 / 3).epsilon(0.03));
}

TEST_CASE("cover program construction") {
    const MipInstance m = build_mip(reference_schedule(), 1);
    CHECK(m.variables() == 4);
    CHECK(m.others == std::vector<std::size_t>{0, 2});
    CHECK(m.s_target == bits("010"));
    // sensor 3 shifted by two is the last column
    Bits gamma{0, 0, 0, 1};
    CHECK(m.is_feasible(gamma));
    CHECK(m.decode(gamma).taus == std::vector<std::size_t>{0, 0, 2});
    CHECK_FALSE(m.is_feasible(Bits{0, 0, 0, 0}));
    CHECK_FALSE(m.is_feasible(Bits{0, 0, 1, 1}));
    CHECK_THROWS_AS(m.decode(Bits{0, 0, 1, 1}), Error);

    std::vector<std::vector<int>> D;
    std::vector<int> b;
    m.stacked(D, b);
    REQUIRE(D.size() == 3 + 2);
    CHECK(b == std::vector<int>{0, -1, 0, 1, 1});
    for (std::size_t r = 0; r < 3; ++r)
        for (std::size_t c = 0; c < 4; ++c)
            CHECK(D[r][c] == -static_cast<int>(m.S_minus[r][c]));
    CHECK(D[3] == std::vector<int>{1, 1, 0, 0});
    CHECK(D[4] == std::vector<int>{0, 0, 1, 1});

    const MipInstance two = build_mip(testing::schedule({"01", "10"}), 0);
    CHECK(two.variables() == 1);
    CHECK(two.is_feasible(Bits{1}));

    const MipInstance idle = build_mip(testing::schedule({"000", "111"}), 0);
    CHECK(idle.is_feasible(Bits{0, 0}));

    CHECK_THROWS_AS(build_mip(testing::schedule({"111"}), 0), Error);
    CHECK_THROWS_AS(build_mip(testing::schedule({"110", "011"}), 0), Error);
}

TEST_CASE("cover program is sound and complete for target-fixed tuples") {
    Engine eng(17);
    for (int trial = 0; trial < 60; ++trial) {
        const std::size_t N = 2 + uniform_below(eng, 2), T = 2 + uniform_below(eng, 4);
        const Schedule s = testing::random_exclusive(N, T, eng);
        const std::size_t target = uniform_below(eng, N);
        const MipInstance m = build_mip(s, target);
        std::vector<std::size_t> taus(N, 0);
        const std::uint64_t total = saturating_pow(T, N - 1);
        for (std::uint64_t code = 0; code < total; ++code) {
            std::uint64_t c = code;
            for (std::size_t i = 0; i < N; ++i) {
                if (i == target) {
                    taus[i] = 0;
                    continue;
                }
                taus[i] = c % T;
                c /= T;
            }
            const auto gamma = m.encode(ShiftTuple{taus});
            REQUIRE(gamma.has_value());
            CHECK(m.decode(*gamma).taus == taus);
            CHECK(m.is_feasible(*gamma) == all_zero(reception_oracle(s, taus)[target]));
        }
        taus.assign(N, 0);
        taus[target] = 1;
        CHECK_FALSE(m.encode(ShiftTuple{taus}).has_value());
    }
}

TEST_CASE("optimal attack on the three-slot schedule") {
    const OptimalAttack bf = brute_force_optimal_attack(reference_schedule());
    REQUIRE(bf.attack.has_value());
    CHECK(bf.attack->taus == std::vector<std::size_t>{0, 0, 1});
    CHECK(bf.spoofed_count == 1u);

    BnbStats stats;
    const OptimalAttack bb = bnb_optimal_attack(reference_schedule(), &stats);
    REQUIRE(bb.attack.has_value());
    CHECK(bb.spoofed_count == 1u);
    CHECK(bb.attack->spoofed_count() == 1);
    CHECK_FALSE(blocked_sensors(attacked_reception(reference_schedule(), *bb.attack)).empty());
    for (std::size_t i = 0; i < 3; ++i)
        CHECK(bb.per_target_costs[i] == 1u);
    CHECK(bb.per_target_costs == bf.per_target_costs);
    CHECK(stats.nodes > 0);
}

TEST_CASE("optimal attack corner cases") {
    const OptimalAttack single = brute_force_optimal_attack(testing::schedule({"111"}));
    CHECK_FALSE(single.attack.has_value());
    CHECK_THROWS_AS(bnb_optimal_attack(testing::schedule({"111"})), Error);

    const OptimalAttack two = bnb_optimal_attack(testing::schedule({"01", "10"}));
    REQUIRE(two.attack.has_value());
    CHECK(two.spoofed_count == 1u);

    // an idle sensor is blocked for free
    const OptimalAttack idle = bnb_optimal_attack(testing::schedule({"000", "111"}));
    CHECK(idle.spoofed_count == 0u);
    CHECK(idle.target == 0u);
    CHECK(brute_force_optimal_attack(testing::schedule({"000", "111"})).spoofed_count == 0u);

    CHECK_THROWS_AS(bnb_optimal_attack(testing::schedule({"011", "010"})), Error);
    Budget tiny;
    tiny.max_enumeration = 10;
    CHECK_THROWS_AS(brute_force_optimal_attack(reference_schedule(), tiny), Error);
}

TEST_CASE("brute force agrees with a direct enumeration") {
    Engine eng(23);
    for (int trial = 0; trial < 80; ++trial) {
        const std::size_t N = 2 + uniform_below(eng, 2), T = 2 + uniform_below(eng, 4);
        const Schedule s = testing::random_exclusive(N, T, eng);
        std::optional<std::size_t> best;
        std::vector<std::size_t> taus(N, 0);
        const std::uint64_t total = saturating_pow(T, N);
        for (std::uint64_t code = 0; code < total; ++code) {
            std::uint64_t c = code;
            for (std::size_t i = N; i-- > 0;) {
                taus[i] = c % T;
                c /= T;
            }
            if (!blocks_something(s, taus))
                continue;
            const auto blocked = blocked_sensors(reception_oracle(s, taus));
            // restricted space: some blocked sensor is itself unshifted
            const bool ok = std::any_of(blocked.begin(), blocked.end(), [&](std::size_t i) { return taus[i] == 0; });
            if (ok && (!best || nonzero(taus) < *best))
                best = nonzero(taus);
        }
        const OptimalAttack bf = brute_force_optimal_attack(s);
        CHECK(bf.spoofed_count == best);
        BruteForceOptions any;
        any.allow_target_shift = true;
        const OptimalAttack free = brute_force_optimal_attack(s, {}, any);
        if (bf.spoofed_count && free.spoofed_count)
            CHECK(*free.spoofed_count <= *bf.spoofed_count);
    }
}

TEST_CASE("branch-and-bound matches brute force on random exclusive schedules") {
    Engine eng(99);
    for (int trial = 0; trial < 150; ++trial) {
        const std::size_t N = 2 + uniform_below(eng, 3), T = 2 + uniform_below(eng, 5);
        const Schedule s = testing::random_exclusive(N, T, eng);
        BnbStats stats;
        const OptimalAttack bb = bnb_optimal_attack(s, &stats);
        const OptimalAttack bf = brute_force_optimal_attack(s);
        REQUIRE(bb.spoofed_count == bf.spoofed_count);
        CHECK(bb.per_target_costs == bf.per_target_costs);
        if (bb.attack) {
            CHECK(bb.attack->spoofed_count() == *bb.spoofed_count);
            CHECK(all_zero(reception_oracle(s, bb.attack->taus)[*bb.target]));
        }
        for (std::size_t i = 0; i < N; ++i) {
            const auto &path = stats.accepting_path_bounds[i];
            for (std::size_t k = 1; k < path.size(); ++k)
                CHECK(path[k] >= path[k - 1] - 1e-9);
            if (!path.empty() && bb.per_target_costs[i])
                CHECK(static_cast<double>(*bb.per_target_costs[i]) >= path.back() - 1e-9);
        }
    }
}

TEST_CASE("linear relaxation") {
    const MipInstance m = build_mip(reference_schedule(), 1);
    BnbState root = BnbState::all_live(m);
    const Relaxation r = lp_relaxation(m, root);
    REQUIRE(r.feasible);
    CHECK(r.objective <= 1.0 + 1e-9);
    CHECK(r.objective > 0.0);

    BnbState pinned = root;
    pinned.assignment = {0, 2};
    const Relaxation p = lp_relaxation(m, pinned);
    REQUIRE(p.feasible);
    CHECK(p.objective == doctest::Approx(1.0));

    // pinning both blocks to zero leaves sensor 2's slot uncovered
    pinned.assignment = {0, 0};
    CHECK_FALSE(lp_relaxation(m, pinned).feasible);

    pinned.assignment = {0, 5};
    CHECK_THROWS_AS(lp_relaxation(m, pinned), Error);
}
