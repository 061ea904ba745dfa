#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "schedsec/attack.hpp"
#include "schedsec/protocol_sequences.hpp"
#include "schedsec/simulation.hpp"

using namespace schedsec;

namespace {

const Schedule &reference_schedule() {
    static const Schedule s = testing::schedule({"001", "010", "100"});
    return s;
}

SimConfig horizon(std::size_t K) {
    SimConfig cfg;
    cfg.horizon = K;
    return cfg;
}

double trace_p_bar(std::size_t i) { return testing::three_process()[i].steady.P_bar.trace(); }

} // namespace

TEST_CASE("exact series agrees with the gap-histogram cost") {
    const auto &sys = testing::three_process();
    const auto &ladders = testing::three_process_ladders();
    Engine eng(101);
    for (int trial = 0; trial < 60; ++trial) {
        const std::size_t T = 3 + uniform_below(eng, 8);
        const Schedule s = testing::random_covering(3, T, eng);
        const CovarianceSeries series = exact_covariance_series(sys, s, ShiftTuple{{0, 0, 0}}, horizon(40 * T));
        const CostReport direct = average_cost(reception_from_schedule(s), ladders);
        REQUIRE(series.periodic_average.has_value());
        REQUIRE(series.periodic_average->total.has_value());
        CHECK(*series.periodic_average->total == doctest::Approx(*direct.total).epsilon(1e-9));
        for (std::size_t i = 0; i < 3; ++i)
            CHECK(*series.periodic_average->per_sensor[i] == doctest::Approx(*direct.per_sensor[i]).epsilon(1e-9));
        // the running mean approaches the periodic average
        CHECK(series.total_running_mean.back() == doctest::Approx(*direct.total).epsilon(0.05));
    }
}

TEST_CASE("traces are periodic after the first reception and grow during gaps") {
    const auto &sys = testing::three_process();
    const Schedule s = testing::schedule({"1000100", "0110000", "0001011"});
    const CovarianceSeries series = exact_covariance_series(sys, s, ShiftTuple{{0, 0, 0}}, horizon(70));
    for (std::size_t i = 0; i < 3; ++i) {
        const auto &tr = series.per_sensor_traces[i];
        for (std::size_t k = 7; k + 7 < tr.size(); ++k)
            CHECK(tr[k + 7] == doctest::Approx(tr[k]).epsilon(1e-12));
        for (std::size_t k = 1; k < tr.size(); ++k) {
            if (s.row(i)[k % 7])
                CHECK(tr[k] == doctest::Approx(trace_p_bar(i)).epsilon(1e-12));
            else
                CHECK(tr[k] >= tr[k - 1] - 1e-12);
        }
    }
}

TEST_CASE("receiving every slot keeps the steady trace") {
    const auto &sys = testing::three_process();
    const std::vector<Bits> always(3, Bits{1});
    const CovarianceSeries series = exact_covariance_series(sys, always, horizon(25));
    for (std::size_t i = 0; i < 3; ++i)
        for (double tr : series.per_sensor_traces[i])
            CHECK(tr == doctest::Approx(trace_p_bar(i)).epsilon(1e-12));
    CHECK(series.total_running_mean.back() ==
          doctest::Approx(trace_p_bar(0) + trace_p_bar(1) + trace_p_bar(2)).epsilon(1e-12));
}

TEST_CASE("offset (0,0,2) makes sensors 2 and 3 diverge") {
    const auto &sys = testing::three_process();
    const CovarianceSeries series = exact_covariance_series(sys, reference_schedule(), ShiftTuple{{0, 0, 2}},
                                                            horizon(3000));
    CHECK(series.divergent == std::vector<bool>{false, true, true});
    CHECK_FALSE(series.periodic_average->total.has_value());
    for (std::size_t i : {1u, 2u}) {
        const auto k = first_exceeding(series, i, 1e6 * trace_p_bar(i));
        REQUIRE(k.has_value());
        CHECK(*k < 3000);
        REQUIRE(series.overflow_at[i].has_value());
        CHECK(std::isinf(series.per_sensor_traces[i].back()));
        REQUIRE(series.growth_factor[i].has_value());
        // three slots of h per period: growth close to ρ(A)^6
        const double rho = spectral_radius(sys[i].system.A);
        CHECK(*series.growth_factor[i] == doctest::Approx(std::pow(rho, 6)).epsilon(1e-3));
    }
    const auto &tr0 = series.per_sensor_traces[0];
    for (std::size_t k = 3; k < tr0.size(); ++k)
        CHECK(tr0[k] == doctest::Approx(tr0[k - 3]).epsilon(1e-12));
    CHECK_FALSE(series.overflow_at[0].has_value());
    CHECK(*series.periodic_average->per_sensor[0] ==
          doctest::Approx(*average_cost(attacked_reception(reference_schedule(), ShiftTuple{{0, 0, 2}}),
                                        testing::three_process_ladders())
                               .per_sensor[0])
              .epsilon(1e-9));
}

TEST_CASE("series edge cases") {
    const auto &sys = testing::three_process();
    SUBCASE("horizon shorter than a period is transient-only") {
        const CovarianceSeries s = exact_covariance_series(sys, reference_schedule(), ShiftTuple{{0, 0, 0}},
                                                           horizon(2));
        CHECK_FALSE(s.periodic_average.has_value());
    }
    SUBCASE("custom initial covariance") {
        SimConfig cfg = horizon(6);
        cfg.initial_covariance.assign(3, Matrix::Zero(2, 2));
        const CovarianceSeries s = exact_covariance_series(sys, reference_schedule(), ShiftTuple{{0, 0, 0}}, cfg);
        // sensor 1 drops at k = 0: h(0) = Q
        CHECK(s.per_sensor_traces[0][0] == doctest::Approx(sys[0].system.Q.trace()));
        CHECK(s.per_sensor_traces[2][0] == doctest::Approx(trace_p_bar(2)));
    }
    SUBCASE("validation") {
        CHECK_THROWS_AS(exact_covariance_series(sys, reference_schedule(), ShiftTuple{{0, 0, 0}}, horizon(0)), Error);
        SimConfig bad = horizon(5);
        bad.initial_covariance.push_back(Matrix::Zero(2, 2));
        CHECK_THROWS_AS(exact_covariance_series(sys, reference_schedule(), ShiftTuple{{0, 0, 0}}, bad), Error);
        CHECK_THROWS_AS(exact_covariance_series(std::span(sys.data(), 2), reference_schedule(),
                                                ShiftTuple{{0, 0, 0}}, horizon(5)),
                        Error);
        CHECK_THROWS_AS(first_exceeding(exact_covariance_series(sys, reference_schedule(), ShiftTuple{{0, 0, 0}},
                                                                horizon(5)),
                                        3, 1.0),
                        Error);
    }
}

TEST_CASE("one Monte Carlo trial equals the exact series") {
    const auto &sys = testing::three_process();
    AttackModel model;
    model.kind = AttackModel::Kind::fixed;
    model.fixed = ShiftTuple{{0, 1, 0}};
    SimConfig cfg = horizon(50);
    const MonteCarloResult mc = monte_carlo_expected_cost(sys, reference_schedule(), model, cfg);
    const CovarianceSeries s = exact_covariance_series(sys, reference_schedule(), model.fixed, cfg);
    REQUIRE(mc.mean_running_cost.size() == 50);
    for (std::size_t k = 0; k < 50; ++k) {
        CHECK(mc.mean_running_cost[k] == s.total_running_mean[k]);
        CHECK(mc.half_width[k] == 0.0);
    }
}

TEST_CASE("Monte Carlo is reproducible across thread counts") {
    const auto &sys = testing::three_process();
    const PolicySet ps = construct_shift_invariant(std::vector<DutyFactor>{{1, 3}, {1, 3}, {1, 3}});
    AttackModel model;
    model.resample_sigma = true;
    SimConfig cfg = horizon(80);
    cfg.trials = 64;
    cfg.seed = 12345;
    cfg.threads = 1;
    const MonteCarloResult a = monte_carlo_expected_cost(sys, ps, model, cfg);
    cfg.threads = 4;
    const MonteCarloResult b = monte_carlo_expected_cost(sys, ps, model, cfg);
    CHECK(a.mean_running_cost == b.mean_running_cost);
    CHECK(a.half_width == b.half_width);
    CHECK(a.trial_costs == b.trial_costs);
    CHECK(a.mean_cost == b.mean_cost);
    cfg.seed = 54321;
    const MonteCarloResult c = monte_carlo_expected_cost(sys, ps, model, cfg);
    CHECK(c.trial_costs != a.trial_costs);

    model.resample_sigma = false;
    cfg.threads = 0;
    const MonteCarloResult d = monte_carlo_expected_cost(sys, ps, model, cfg);
    const BoundsReport br = bounds(ps.factors(), testing::three_process_ladders());
    REQUIRE(d.mean_cost.has_value());
    for (const auto &t : d.trial_costs) {
        REQUIRE(t.has_value());
        CHECK(*t >= br.lower - 1e-9);
        CHECK(*t <= br.upper + 1e-9);
    }
    CHECK_THROWS_AS(monte_carlo_expected_cost(sys, reference_schedule(), model, horizon(0)), Error);
    model.resample_sigma = true;
    CHECK_THROWS_AS(monte_carlo_expected_cost(sys, reference_schedule(), model, horizon(10)), Error);
}

TEST_CASE("shortest-period policies have an attack-independent cost") {
    const auto &sys = testing::three_process();
    const PolicySet ps = shortest_period_policies(3);
    SimConfig cfg = horizon(64);
    cfg.trials = 40;
    const MonteCarloResult mc = monte_carlo_expected_cost(sys, ps, AttackModel{}, cfg);
    const BoundsReport br = bounds(ps.factors(), testing::three_process_ladders());
    REQUIRE(mc.mean_cost.has_value());
    CHECK(*mc.mean_cost == doctest::Approx(br.lower).epsilon(1e-12));
    CHECK(mc.cost_half_width < 1e-12);
}

TEST_CASE("sampled local estimation error matches the steady covariance") {
    const auto &sys = testing::three_process();
    // P(-1) = P̄, so the filter is stationary from the start
    SimConfig cfg = horizon(40);
    const std::size_t trials = 10000;
    std::vector<Matrix> acc(3, Matrix::Zero(2, 2));
    for (std::size_t t = 0; t < trials; ++t) {
        const auto run = state_trajectory_sim(sys, reference_schedule(), ShiftTuple{{0, 0, 0}}, cfg, t);
        for (std::size_t i = 0; i < 3; ++i) {
            const Vector e = run[i].state[39] - run[i].local_estimate[39];
            acc[i] += e * e.transpose();
        }
    }
    for (std::size_t i = 0; i < 3; ++i) {
        const Matrix emp = acc[i] / static_cast<double>(trials);
        CHECK(emp.trace() == doctest::Approx(trace_p_bar(i)).epsilon(0.06));
        CHECK((emp - sys[i].steady.P_bar).norm() < 0.06 * sys[i].steady.P_bar.norm() + 0.01);
    }
}

TEST_CASE("remote error one slot after a reception is Tr h(P̄)") {
    const auto &sys = testing::three_process();
    SimConfig cfg = horizon(100);
    cfg.trials = 4000;
    cfg.seed = 9;
    const EmpiricalError err = empirical_remote_error(sys, reference_schedule(), ShiftTuple{{0, 0, 0}}, cfg);
    const auto &ladders = testing::three_process_ladders();
    // sensor 1 receives at k ≡ 2 (mod 3): k = 98 is a reception, k = 99 one slot later
    CHECK(std::abs(err.mean[0][98] - ladders[0].at(0)) < 3.0 * err.std_error[0][98]);
    CHECK(std::abs(err.mean[0][99] - ladders[0].at(1)) < 3.0 * err.std_error[0][99]);
    CHECK(std::abs(err.mean[0][97] - ladders[0].at(2)) < 3.0 * err.std_error[0][97]);
}

TEST_CASE("noise-free observable systems are tracked exactly") {
    auto sys = testing::three_process();
    SimConfig cfg = horizon(30);
    cfg.initial_covariance = {10.0 * Matrix::Identity(2, 2)};
    const std::vector<Vector> x0{Vector::Constant(2, 1.5)};
    const Schedule alone({testing::bits("1")});
    for (std::size_t i = 0; i < 3; ++i) {
        sys[i].system.Q.setZero();
        sys[i].system.R.setZero();
        const auto run = state_trajectory_sim(std::span(sys.data() + i, 1), alone, ShiftTuple{{0}}, cfg, 0, x0);
        for (std::size_t k = 5; k < 30; ++k)
            CHECK(run[0].squared_error[k] < 1e-12);
        // the state evolves deterministically from x0
        Vector x = x0[0];
        for (std::size_t k = 0; k < 30; ++k)
            x = sys[i].system.A * x;
        CHECK((run[0].state[29] - x).norm() < 1e-12);
    }
}

TEST_CASE("trajectory runs are deterministic") {
    const auto &sys = testing::three_process();
    SimConfig cfg = horizon(20);
    cfg.seed = 3;
    const auto a = state_trajectory_sim(sys, reference_schedule(), ShiftTuple{{0, 0, 2}}, cfg, 7);
    const auto b = state_trajectory_sim(sys, reference_schedule(), ShiftTuple{{0, 0, 2}}, cfg, 7);
    for (std::size_t i = 0; i < 3; ++i)
        CHECK(a[i].squared_error == b[i].squared_error);
    // a blocked sensor's remote estimate only predicts from zero
    for (const auto &v : a[1].remote_estimate)
        CHECK(v.norm() == 0.0);
    CHECK_THROWS_AS(state_trajectory_sim(sys, reference_schedule(), ShiftTuple{{0, 0, 0}}, cfg, 0,
                                         std::vector<Vector>(2, Vector::Zero(2))),
                    Error);
}
