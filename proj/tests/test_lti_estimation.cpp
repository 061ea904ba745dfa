#include <cmath>

#include <doctest.h>

#include "helpers.hpp"
#include "schedsec/lti_estimation.hpp"

using namespace schedsec;

namespace {

LinearSystem scalar(double a, double q, double r) {
    return {Matrix::Constant(1, 1, a), Matrix::Constant(1, 1, 1.0), Matrix::Constant(1, 1, q),
            Matrix::Constant(1, 1, r), Matrix::Constant(1, 1, 1.0)};
}

} // namespace

TEST_CASE("lyapunov and riccati steps match hand expansion") {
    LinearSystem s;
    s.A = Matrix{{1, 2}, {0, 3}};
    s.C = Matrix{{1, 0}};
    s.Q = Matrix::Identity(2, 2);
    s.R = Matrix{{1}};
    s.Pi = Matrix::Identity(2, 2);

    const Matrix h = lyapunov_step(s, Matrix::Identity(2, 2));
    CHECK(h.isApprox(Matrix{{6, 6}, {6, 10}}, 1e-14));

    // X − X Cᵀ (C X Cᵀ + R)⁻¹ C X with X = [[2,1],[1,3]]: the gain row is [2,1]/3
    const Matrix g = riccati_step(s, Matrix{{2, 1}, {1, 3}});
    CHECK(g.isApprox(Matrix{{2.0 / 3, 1.0 / 3}, {1.0 / 3, 8.0 / 3}}, 1e-14));
}

TEST_CASE("scalar steady state has the closed form (1 + sqrt 5) / 4") {
    // a = 2, q = r = 1: M = 4P + 1 and P = M / (M + 1) give 4P² − 2P − 1 = 0
    const SteadyState ss = steady_state(scalar(2.0, 1.0, 1.0));
    const double expected = (1.0 + std::sqrt(5.0)) / 4.0;
    CHECK(ss.P_bar(0, 0) == doctest::Approx(expected).epsilon(1e-10));
    CHECK(ss.residual < 1e-9);
    CHECK(steady_state_doubling(scalar(2.0, 1.0, 1.0))(0, 0) == doctest::Approx(expected).epsilon(1e-12));

    // h^t(P̄) = 4^t P̄ + (4^t − 1) / 3
    for (std::size_t t = 0; t < 10; ++t) {
        const double p4 = std::pow(4.0, static_cast<double>(t));
        CHECK(ss.ladder.at(t) == doctest::Approx(p4 * expected + (p4 - 1.0) / 3.0).epsilon(1e-9));
    }
}

TEST_CASE("fixed-point iteration agrees with structured doubling on the bundled systems") {
    for (const auto &p : testing::three_process()) {
        const Matrix d = steady_state_doubling(p.system);
        CHECK((p.steady.P_bar - d).norm() < 1e-8);
        CHECK((riccati_step(p.system, lyapunov_step(p.system, p.steady.P_bar)) - p.steady.P_bar).norm() < 1e-9);
        CHECK(is_symmetric_pd(p.steady.P_bar));
        CHECK(p.report.unstable);
        CHECK(p.report.warnings.empty());
    }
}

TEST_CASE("bundled steady-state traces") {
    // Traces of the doubling solution, rounded to the printed digits.
    const double expected[] = {0.57025, 0.43269, 0.49615};
    const auto &sys = testing::three_process();
    for (std::size_t i = 0; i < 3; ++i)
        CHECK(steady_state_doubling(sys[i].system).trace() == doctest::Approx(expected[i]).epsilon(2e-5));
}

TEST_CASE("trace ladder is nondecreasing and reads past its prefix consistently") {
    const auto &p = testing::three_process()[2];
    const TraceLadder short_ladder(p.system, p.steady.P_bar, 4);
    CHECK(short_ladder.size() == 4);
    Matrix X = p.steady.P_bar;
    for (std::size_t t = 0; t < 40; ++t) {
        CHECK(short_ladder.at(t) == doctest::Approx(X.trace()).epsilon(1e-12));
        if (t > 0)
            CHECK(short_ladder.at(t) >= short_ladder.at(t - 1));
        X = p.system.A * X * p.system.A.transpose() + p.system.Q;
    }
    CHECK(short_ladder.size() == 4);
    const TraceLadder longer = short_ladder.extended(30);
    CHECK(longer.size() >= 30);
    CHECK(longer.at(25) == short_ladder.at(25));
}

TEST_CASE("validation failures name the field") {
    LinearSystem s = testing::three_process()[0].system;

    SUBCASE("non-square A") {
        s.A = Matrix::Zero(2, 3);
        CHECK_THROWS_WITH_AS(validate(s, "system 4"), doctest::Contains("system 4 field A"), Error);
    }
    SUBCASE("R not positive definite") {
        s.R = Matrix{{0.0}};
        try {
            validate(s);
            FAIL("expected a validation error");
        } catch (const Error &e) {
            CHECK(e.code() == ErrorCode::validation);
            CHECK(std::string(e.what()).find("field R") != std::string::npos);
        }
    }
    SUBCASE("undetectable pair") {
        s.A = Matrix{{2.0, 0.0}, {0.0, 1.5}};
        s.C = Matrix{{1.0, 0.0}};
        CHECK_THROWS_WITH_AS(validate(s), doctest::Contains("not detectable"), Error);
    }
    SUBCASE("unstabilizable pair") {
        s.A = Matrix{{2.0, 0.0}, {0.0, 1.5}};
        s.Q = Matrix{{1.0, 0.0}, {0.0, 0.0}};
        CHECK_THROWS_WITH_AS(validate(s), doctest::Contains("not stabilizable"), Error);
    }
    SUBCASE("dimension mismatch in the steps") {
        CHECK_THROWS_AS(lyapunov_step(s, Matrix::Identity(3, 3)), Error);
    }
}

TEST_CASE("a stable system is accepted with a warning") {
    const ValidationReport r = validate(scalar(0.5, 1.0, 1.0));
    CHECK_FALSE(r.unstable);
    REQUIRE(r.warnings.size() == 1);
    CHECK(r.warnings[0].find("not unstable") != std::string::npos);
}

TEST_CASE("iteration cap raises a convergence error with the last residual") {
    SteadyStateOptions opts;
    opts.max_iter = 2;
    try {
        steady_state(testing::three_process()[0].system, opts);
        FAIL("expected a convergence error");
    } catch (const ConvergenceError &e) {
        CHECK(e.code() == ErrorCode::convergence);
        CHECK(e.residual() > 0.0);
    }
}

TEST_CASE("prepare_systems rejects an empty list") {
    CHECK_THROWS_AS(prepare_systems({}), Error);
}

TEST_CASE("operator corner cases") {
    const LinearSystem s1 = testing::three_process()[0].system;
    CHECK(lyapunov_step(s1, Matrix::Zero(2, 2)).isApprox(s1.Q));
    CHECK(riccati_step(s1, Matrix::Zero(2, 2)).norm() == 0.0);

    LinearSystem id = s1;
    id.A = Matrix::Identity(2, 2);
    id.Q = Matrix::Zero(2, 2);
    const Matrix X{{2.0, 0.5}, {0.5, 1.0}};
    CHECK(lyapunov_step(id, X).isApprox(X));

    // A₁ Iₙ A₁ᵀ + Q₁ = [[1.01² + 0.25 + 0.2, 0.1], [0.1, 0.04 + 0.2]]
    const Matrix h = lyapunov_step(s1, Matrix::Identity(2, 2));
    CHECK(h(0, 0) == doctest::Approx(1.0201 + 0.25 + 0.2));
    CHECK(h(0, 1) == doctest::Approx(0.1));
    CHECK(h(1, 0) == doctest::Approx(0.1));
    CHECK(h(1, 1) == doctest::Approx(0.24));

    CHECK(riccati_step(scalar(2.0, 1.0, 1.0), Matrix::Constant(1, 1, 1.0))(0, 0) == doctest::Approx(0.5));
}

TEST_CASE("local Kalman update at steady state") {
    const auto &p = testing::three_process()[0];
    const Vector x_prev = Vector{{0.3, -0.7}};
    const Vector y = p.system.C * p.system.A * x_prev;
    const LocalEstimate est = local_kalman_update(p.system, x_prev, p.steady.P_bar, y);
    CHECK((est.x_hat - p.system.A * x_prev).norm() < 1e-14);
    CHECK((est.P - p.steady.P_bar).norm() < 1e-8);
    CHECK_THROWS_AS(local_kalman_update(p.system, Vector::Zero(3), p.steady.P_bar, y), Error);
}

TEST_CASE("matrix ordering along the ladder and contraction toward the fixed point") {
    for (const auto &p : testing::three_process()) {
        std::vector<Matrix> hs{p.steady.P_bar};
        for (int t = 1; t < 12; ++t)
            hs.push_back(lyapunov_step(p.system, hs.back()));
        for (std::size_t t1 = 0; t1 < hs.size(); ++t1)
            for (std::size_t t2 = 0; t2 <= t1; ++t2)
                CHECK(is_symmetric_psd(hs[t1] - hs[t2], 1e-9));

        for (double eps : {1e-3, 1e-2, 1e-1}) {
            const Matrix X = p.steady.P_bar + eps * Matrix::Identity(2, 2);
            const Matrix next = riccati_step(p.system, lyapunov_step(p.system, X));
            CHECK((next - p.steady.P_bar).norm() <= (X - p.steady.P_bar).norm());
        }
    }
}
