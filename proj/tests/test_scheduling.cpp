#include <doctest.h>

#include "helpers.hpp"
#include "schedsec/scheduling.hpp"

using namespace schedsec;
using testing::bits;

TEST_CASE("duty factor is reduced") {
    CHECK(duty_factor(bits("001")) == Rational(1, 3));
    CHECK(duty_factor(bits("00000")) == Rational(0, 1));
    CHECK(duty_factor(bits("000000111100")) == Rational(1, 3));
    CHECK_THROWS_AS(duty_factor(Bits{}), Error);
}

TEST_CASE("schedule validation") {
    CHECK_THROWS_AS(Schedule(std::vector<Bits>{}), Error);
    CHECK_THROWS_AS(Schedule({bits("01"), bits("011")}), Error);
    CHECK_THROWS_AS(Schedule({Bits{0, 2}}), Error);
    const Schedule s = testing::schedule({"001", "010", "100"});
    CHECK(s.is_exclusive());
    CHECK_FALSE(testing::schedule({"011", "010"}).is_exclusive());
    CHECK(s.flattened() == bits("001010100"));
}

TEST_CASE("gap histogram of a two-sensor pattern with T = 7") {
    // sensor 1 transmits twice per period, sensor 2 in the remaining five slots
    const Bits s1 = bits("1001000"), s2 = bits("0110111");
    const GapHistogram a = gap_histogram(s1), b = gap_histogram(s2);
    CHECK(a.counts == std::vector<std::size_t>{2, 2, 2, 1});
    CHECK(b.counts == std::vector<std::size_t>{5, 2});
    CHECK(a.received() == 2);
    CHECK(a.max_gap() == 3);
}

TEST_CASE("gap histogram corner cases") {
    CHECK(gap_histogram(bits("1111")).counts == std::vector<std::size_t>{4});
    CHECK(gap_histogram(bits("100")).counts == std::vector<std::size_t>{1, 1, 1});
    // the gap before the first one wraps around from the end of the period
    CHECK(gap_histogram(bits("0010")).counts == std::vector<std::size_t>{1, 1, 1, 1});
    const GapHistogram none = gap_histogram(bits("000"));
    CHECK(none.never_received());
    CHECK(none.received() == 0);
}

TEST_CASE("gap histograms sum to T and are nonincreasing") {
    Engine eng(7);
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t T = 1 + uniform_below(eng, 16);
        Bits r(T);
        for (auto &b : r)
            b = static_cast<std::uint8_t>(uniform_below(eng, 2));
        const GapHistogram h = gap_histogram(r);
        if (h.never_received())
            continue;
        std::size_t total = 0;
        for (std::size_t t = 0; t < h.counts.size(); ++t) {
            total += h.counts[t];
            if (t > 0)
                CHECK(h.counts[t] <= h.counts[t - 1]);
        }
        CHECK(total == T);
    }
}

TEST_CASE("collision channel") {
    const Schedule excl = testing::schedule({"001", "010", "100"});
    CHECK(reception_from_schedule(excl) == excl.rows());
    const auto both = reception_from_rows({bits("111"), bits("111")});
    CHECK(both == std::vector<Bits>{bits("000"), bits("000")});
    const auto partial = reception_from_rows({bits("110"), bits("011")});
    CHECK(partial == std::vector<Bits>{bits("100"), bits("001")});
}

TEST_CASE("average cost by direct substitution") {
    const auto &ladders = testing::three_process_ladders();
    const auto &l0 = ladders[0];
    SUBCASE("single reception per period") {
        const CostReport r = average_cost({bits("100")}, std::span(&l0, 1));
        CHECK(*r.per_sensor[0] == doctest::Approx((l0.at(0) + l0.at(1) + l0.at(2)) / 3.0).epsilon(1e-15));
    }
    SUBCASE("every slot") {
        const CostReport r = average_cost({bits("1111")}, std::span(&l0, 1));
        CHECK(*r.per_sensor[0] == doctest::Approx(l0.at(0)).epsilon(1e-15));
    }
    SUBCASE("a silent sensor diverges") {
        const CostReport r = average_cost({bits("110"), bits("001"), bits("000")}, ladders);
        CHECK(r.per_sensor[0].has_value());
        CHECK_FALSE(r.per_sensor[2].has_value());
        CHECK(r.divergent());
    }
    SUBCASE("mismatched inputs") {
        CHECK_THROWS_AS(average_cost({bits("10")}, ladders), Error);
        CHECK_THROWS_AS(average_cost({bits("10"), bits("01"), bits("011")}, ladders), Error);
    }
    SUBCASE("gaps longer than the precomputed ladder") {
        Bits r(200, 0);
        r[0] = 1;
        double expected = 0.0;
        for (std::size_t t = 0; t < 200; ++t)
            expected += l0.at(t);
        CHECK(*average_cost({r}, std::span(&l0, 1)).total == doctest::Approx(expected / 200.0).epsilon(1e-12));
    }
}

TEST_CASE("schedule search on the bundled systems") {
    const auto &ladders = testing::three_process_ladders();
    const std::size_t T3[] = {3};
    const ScheduleSearchResult r = optimal_schedule_search(ladders, T3);
    CHECK(r.schedule == testing::schedule({"001", "010", "100"}));
    CHECK(r.schedule.is_exclusive());
    for (std::size_t i = 0; i < 3; ++i)
        CHECK(is_uniform(r.schedule.row(i)));
    // the only gap pattern is (0, 1, 2) for every sensor
    double expected = 0.0;
    for (const auto &l : ladders)
        expected += (l.at(0) + l.at(1) + l.at(2)) / 3.0;
    CHECK(*r.cost.total == doctest::Approx(expected).epsilon(1e-14));
    CHECK(*r.cost.total == doctest::Approx(2.02504).epsilon(1e-5));
}

TEST_CASE("schedule search matches exhaustive costing without rotation dedupe") {
    const auto &all_ladders = testing::three_process_ladders();
    for (std::size_t N = 1; N <= 3; ++N) {
        const std::span<const TraceLadder> ladders(all_ladders.data(), N);
        for (std::size_t T = N; T <= 6; ++T) {
            const std::size_t Ts[] = {T};
            const ScheduleSearchResult r = optimal_schedule_search(ladders, Ts);
            std::optional<double> best;
            std::optional<Schedule> arg;
            for (const Schedule &s : all_exclusive_schedules(N, T)) {
                const CostReport c = average_cost(s.rows(), ladders);
                if (!c.total)
                    continue;
                const bool better = !best || *c.total < *best * (1 - 1e-12);
                const bool tie = best && std::abs(*c.total - *best) <= 1e-12 * *best;
                if (better || (tie && s.flattened() < arg->flattened())) {
                    if (better)
                        best = c.total;
                    arg = s;
                }
            }
            REQUIRE(best);
            CHECK(*r.cost.total == doctest::Approx(*best).epsilon(1e-12));
            CHECK(r.schedule == *arg);
        }
    }
}

TEST_CASE("schedule search corner cases") {
    const auto &ladders = testing::three_process_ladders();
    SUBCASE("a single sensor always transmits") {
        const std::size_t Ts[] = {4};
        const auto r = optimal_schedule_search(std::span(ladders.data(), 1), Ts);
        CHECK(r.schedule.row(0) == bits("1111"));
    }
    SUBCASE("two identical systems alternate") {
        const std::vector<TraceLadder> same{ladders[0], ladders[0]};
        const std::size_t Ts[] = {2};
        const auto r = optimal_schedule_search(same, Ts);
        CHECK(r.schedule == testing::schedule({"01", "10"}));
        CHECK(*r.cost.per_sensor[0] == doctest::Approx(*r.cost.per_sensor[1]));
        const CostReport rotated = average_cost({bits("10"), bits("01")}, same);
        CHECK(*rotated.total == doctest::Approx(*r.cost.total));
    }
    SUBCASE("a longer period list never does worse") {
        const std::size_t T3[] = {3}, more[] = {3, 4, 5, 6};
        const double c3 = *optimal_schedule_search(ladders, T3).cost.total;
        CHECK(*optimal_schedule_search(ladders, more).cost.total <= c3 * (1 + 1e-12));
    }
    SUBCASE("errors") {
        CHECK_THROWS_AS(optimal_schedule_search(ladders, std::span<const std::size_t>{}), Error);
        const std::size_t T2[] = {2};
        CHECK_THROWS_AS(optimal_schedule_search(ladders, T2), Error);
        const std::size_t T8[] = {8};
        try {
            optimal_schedule_search(ladders, T8, Budget{100});
            FAIL("expected a budget error");
        } catch (const Error &e) {
            CHECK(e.code() == ErrorCode::budget_exceeded);
        }
    }
}

TEST_CASE("exclusive schedule enumeration") {
    CHECK(all_exclusive_schedules(3, 4).size() == 81);
    CHECK(all_exclusive_schedules(2, 5).size() == 32);
    for (const auto &s : all_exclusive_schedules(2, 3))
        CHECK(s.is_exclusive());
}

TEST_CASE("uniformity") {
    CHECK(is_uniform(bits("100100")));
    CHECK(is_uniform(bits("1010100")));
    CHECK_FALSE(is_uniform(bits("110000")));
    CHECK(is_uniform(bits("0000")));
}
