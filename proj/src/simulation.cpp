#include "schedsec/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <random>
#include <string>
#include <thread>

namespace schedsec {

namespace {

constexpr double kZ95 = 1.96;
constexpr double kInf = std::numeric_limits<double>::infinity();

// Runs f(i) for i in [0, n) on a small worker pool. Each index writes only its
// own slot, so the outcome is independent of the thread count. The first
// failure by index is rethrown.
template <class F> void parallel_for(std::size_t n, std::size_t threads, F &&f) {
    if (threads == 0)
        threads = std::max(1u, std::thread::hardware_concurrency());
    threads = std::min(threads, n);
    if (threads <= 1) {
        for (std::size_t i = 0; i < n; ++i)
            f(i);
        return;
    }
    std::vector<std::exception_ptr> errors(n);
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (std::size_t i; (i = next.fetch_add(1)) < n;) {
            try {
                f(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t)
        pool.emplace_back(worker);
    for (auto &t : pool)
        t.join();
    for (auto &e : errors)
        if (e)
            std::rethrow_exception(e);
}

// Pairwise sum of v[lo, hi) with a split point that depends only on the length.
double pairwise_sum(const std::vector<double> &v, std::size_t lo, std::size_t hi) {
    if (hi - lo <= 8) {
        double s = 0.0;
        for (std::size_t i = lo; i < hi; ++i)
            s += v[i];
        return s;
    }
    const std::size_t mid = lo + (hi - lo) / 2;
    return pairwise_sum(v, lo, mid) + pairwise_sum(v, mid, hi);
}

struct MeanSd {
    double mean = 0.0;
    double sd = 0.0;
};

MeanSd mean_sd(const std::vector<double> &v) {
    MeanSd out;
    const auto n = static_cast<double>(v.size());
    out.mean = pairwise_sum(v, 0, v.size()) / n;
    if (v.size() < 2 || !std::isfinite(out.mean))
        return out;
    std::vector<double> dev(v.size());
    for (std::size_t i = 0; i < v.size(); ++i)
        dev[i] = (v[i] - out.mean) * (v[i] - out.mean);
    out.sd = std::sqrt(pairwise_sum(dev, 0, dev.size()) / (n - 1.0));
    return out;
}

Matrix initial_covariance(const PreparedSystem &sys, const SimConfig &cfg, std::size_t i) {
    return cfg.initial_covariance.empty() ? sys.steady.P_bar : cfg.initial_covariance[i];
}

// Column-scaled eigenvectors: L Lᵀ = X for symmetric PSD X (tiny negative
// eigenvalues from rounding are clamped).
Matrix covariance_factor(const Matrix &X) {
    if (X.size() == 0)
        return X;
    Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrized(X));
    const Vector d = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return es.eigenvectors() * d.asDiagonal();
}

Vector gaussian(const Matrix &L, Engine &eng) {
    std::normal_distribution<double> nd(0.0, 1.0);
    Vector z(L.cols());
    for (Eigen::Index k = 0; k < z.size(); ++k)
        z[k] = nd(eng);
    return L * z;
}

// Kalman step tolerant of a singular innovation covariance (noise-free runs).
LocalEstimate kalman_step(const LinearSystem &sys, const Vector &x_hat, const Matrix &P, const Vector &y) {
    const Vector x_prior = sys.A * x_hat;
    const Matrix P_prior = symmetrized(sys.A * P * sys.A.transpose() + sys.Q);
    const Matrix S = sys.C * P_prior * sys.C.transpose() + sys.R;
    const Matrix K = P_prior * sys.C.transpose() * S.completeOrthogonalDecomposition().pseudoInverse();
    const auto n = sys.A.rows();
    return {x_prior + K * (y - sys.C * x_prior), symmetrized((Matrix::Identity(n, n) - K * sys.C) * P_prior)};
}

void check_sizes(std::span<const PreparedSystem> systems, std::size_t sensors, const char *what) {
    if (systems.size() != sensors)
        throw_invalid(std::string(what) + ": " + std::to_string(systems.size()) + " systems for " +
                      std::to_string(sensors) + " sensors");
}

} // namespace

void SimConfig::check(std::size_t sensors) const {
    if (horizon < 1)
        throw_invalid("simulation horizon must be at least 1");
    if (trials < 1)
        throw_invalid("simulation needs at least one trial");
    if (!initial_covariance.empty() && initial_covariance.size() != sensors)
        throw_invalid("custom initial covariance needs one matrix per sensor");
}

CovarianceSeries exact_covariance_series(std::span<const PreparedSystem> systems, const std::vector<Bits> &reception,
                                         const SimConfig &cfg) {
    const std::size_t N = reception.size();
    check_sizes(systems, N, "exact_covariance_series");
    cfg.check(N);
    if (N == 0 || reception.front().empty())
        throw_invalid("exact_covariance_series: empty reception pattern");
    const std::size_t T = reception.front().size(), K = cfg.horizon;

    CovarianceSeries s;
    s.horizon = K;
    s.period = T;
    s.per_sensor_traces.assign(N, std::vector<double>(K, kInf));
    s.per_sensor_running_mean.assign(N, std::vector<double>(K, kInf));
    s.total_running_mean.assign(K, 0.0);
    s.divergent.assign(N, false);
    s.overflow_at.assign(N, std::nullopt);
    s.growth_factor.assign(N, std::nullopt);

    std::vector<std::optional<std::size_t>> first_reception(N);
    for (std::size_t i = 0; i < N; ++i) {
        const auto &lam = reception[i];
        if (lam.size() != T)
            throw_invalid("exact_covariance_series: ragged reception pattern");
        s.divergent[i] = std::none_of(lam.begin(), lam.end(), [](std::uint8_t b) { return b != 0; });

        const LinearSystem &sys = systems[i].system;
        const Matrix &P_bar = systems[i].steady.P_bar;
        Matrix P = initial_covariance(systems[i], cfg, i);
        if (P.rows() != sys.A.rows() || P.cols() != sys.A.cols())
            throw_invalid("initial covariance of sensor " + std::to_string(i) + " has the wrong shape");
        double sum = 0.0;
        for (std::size_t k = 0; k < K; ++k) {
            if (lam[k % T]) {
                P = P_bar;
                if (!first_reception[i])
                    first_reception[i] = k;
            } else {
                P = symmetrized(lyapunov_step(sys, P));
            }
            const double tr = P.trace();
            if (!(tr <= kOverflowTrace)) {
                s.overflow_at[i] = k;
                break;
            }
            s.per_sensor_traces[i][k] = tr;
            sum += tr;
            s.per_sensor_running_mean[i][k] = sum / static_cast<double>(k + 1);
        }
        if (s.divergent[i]) {
            const std::size_t end = s.overflow_at[i].value_or(K); // first non-finite slot
            if (end >= T + 1) {
                const double a = s.per_sensor_traces[i][end - 1 - T], b = s.per_sensor_traces[i][end - 1];
                if (a > 0.0)
                    s.growth_factor[i] = b / a;
            }
        }
    }

    for (std::size_t k = 0; k < K; ++k) {
        double total = 0.0;
        for (std::size_t i = 0; i < N; ++i)
            total += s.per_sensor_running_mean[i][k];
        s.total_running_mean[k] = total;
    }

    // Once a sensor has received, its covariance depends only on the slot
    // phase, so the last period is exactly periodic.
    bool settled = K >= T;
    for (std::size_t i = 0; i < N && settled; ++i)
        if (!s.divergent[i])
            settled = first_reception[i] && *first_reception[i] < K - T + 1;
    if (settled) {
        CostReport rep;
        rep.per_sensor.assign(N, std::nullopt);
        double total = 0.0;
        bool finite = true;
        for (std::size_t i = 0; i < N; ++i) {
            if (s.divergent[i]) {
                finite = false;
                continue;
            }
            double acc = 0.0;
            for (std::size_t k = K - T; k < K; ++k)
                acc += s.per_sensor_traces[i][k];
            rep.per_sensor[i] = acc / static_cast<double>(T);
            total += *rep.per_sensor[i];
        }
        if (finite)
            rep.total = total;
        s.periodic_average = std::move(rep);
    }
    return s;
}

CovarianceSeries exact_covariance_series(std::span<const PreparedSystem> systems, const Schedule &sched,
                                         const ShiftTuple &attack, const SimConfig &cfg) {
    check_sizes(systems, sched.sensors(), "exact_covariance_series");
    return exact_covariance_series(systems, attacked_reception(sched, attack), cfg);
}

std::optional<std::size_t> first_exceeding(const CovarianceSeries &series, std::size_t sensor, double threshold) {
    if (sensor >= series.per_sensor_traces.size())
        throw_invalid("first_exceeding: sensor out of range");
    const auto &tr = series.per_sensor_traces[sensor];
    for (std::size_t k = 0; k < tr.size(); ++k)
        if (tr[k] > threshold)
            return k;
    return std::nullopt;
}

namespace {

MonteCarloResult monte_carlo(std::span<const PreparedSystem> systems, const Schedule &base,
                             const std::vector<DutyFactor> *factors, const AttackModel &model, const SimConfig &cfg) {
    const std::size_t N = base.sensors(), T = base.period(), K = cfg.horizon;
    if (model.resample_sigma && !factors)
        throw_invalid("resampling interleaving vectors needs a policy set with duty factors");
    check_sizes(systems, N, "monte_carlo_expected_cost");
    cfg.check(N);
    if (model.kind == AttackModel::Kind::fixed && model.fixed.size() != N)
        throw_invalid("fixed attack has " + std::to_string(model.fixed.size()) + " offsets for " +
                      std::to_string(N) + " sensors");

    std::vector<TraceLadder> ladders;
    for (const auto &p : systems)
        ladders.push_back(p.steady.ladder);

    std::vector<std::vector<double>> running(cfg.trials);
    std::vector<std::optional<double>> costs(cfg.trials);
    parallel_for(cfg.trials, cfg.threads, [&](std::size_t t) {
        Engine eng = stream_engine(cfg.seed, t);
        std::optional<PolicySet> resampled;
        if (model.resample_sigma)
            resampled = construct_shift_invariant(*factors, random_sigma(*factors, eng));
        const Schedule &sched = resampled ? resampled->schedule() : base;
        const ShiftTuple attack = model.kind == AttackModel::Kind::uniform ? random_attack(T, N, eng) : model.fixed;
        const auto lambda = attacked_reception(sched, attack);
        SimConfig one = cfg;
        one.trials = 1;
        running[t] = exact_covariance_series(systems, lambda, one).total_running_mean;
        costs[t] = average_cost(lambda, ladders).total;
    });

    MonteCarloResult out;
    out.trials = cfg.trials;
    out.horizon = K;
    out.mean_running_cost.resize(K);
    out.half_width.resize(K);
    const double root_n = std::sqrt(static_cast<double>(cfg.trials));
    std::vector<double> column(cfg.trials);
    for (std::size_t k = 0; k < K; ++k) {
        for (std::size_t t = 0; t < cfg.trials; ++t)
            column[t] = running[t][k];
        const MeanSd m = mean_sd(column);
        out.mean_running_cost[k] = m.mean;
        out.half_width[k] = std::isfinite(m.mean) ? kZ95 * m.sd / root_n : kInf;
    }

    out.trial_costs = costs;
    if (std::all_of(costs.begin(), costs.end(), [](const auto &c) { return c.has_value(); })) {
        for (std::size_t t = 0; t < cfg.trials; ++t)
            column[t] = *costs[t];
        const MeanSd m = mean_sd(column);
        out.mean_cost = m.mean;
        out.cost_half_width = kZ95 * m.sd / root_n;
    }
    return out;
}

} // namespace

MonteCarloResult monte_carlo_expected_cost(std::span<const PreparedSystem> systems, const PolicySet &ps,
                                           const AttackModel &model, const SimConfig &cfg) {
    return monte_carlo(systems, ps.schedule(), &ps.factors(), model, cfg);
}

MonteCarloResult monte_carlo_expected_cost(std::span<const PreparedSystem> systems, const Schedule &sched,
                                           const AttackModel &model, const SimConfig &cfg) {
    return monte_carlo(systems, sched, nullptr, model, cfg);
}

namespace {

std::vector<SensorTrajectory> run_trajectory(std::span<const PreparedSystem> systems,
                                             const std::vector<Bits> &lambda, const SimConfig &cfg,
                                             std::uint64_t trial, const std::vector<Vector> *initial_state,
                                             bool keep_vectors) {
    const std::size_t N = systems.size(), K = cfg.horizon, T = lambda.front().size();
    Engine eng = stream_engine(cfg.seed, trial);
    std::vector<SensorTrajectory> out(N);
    for (std::size_t i = 0; i < N; ++i) {
        const LinearSystem &sys = systems[i].system;
        const Matrix P0 = initial_covariance(systems[i], cfg, i);
        const Matrix Lq = covariance_factor(sys.Q), Lr = covariance_factor(sys.R);
        const auto n = sys.A.rows();

        Vector x = initial_state ? (*initial_state)[i] : gaussian(covariance_factor(P0), eng);
        if (x.size() != n)
            throw_invalid("initial state of sensor " + std::to_string(i) + " has the wrong size");
        Vector local = Vector::Zero(n), remote = Vector::Zero(n);
        Matrix P = P0;
        auto &tr = out[i];
        tr.squared_error.reserve(K);
        for (std::size_t k = 0; k < K; ++k) {
            x = sys.A * x + gaussian(Lq, eng);
            const Vector y = sys.C * x + gaussian(Lr, eng);
            const LocalEstimate est = kalman_step(sys, local, P, y);
            local = est.x_hat;
            P = est.P;
            remote = lambda[i][k % T] ? local : Vector(sys.A * remote);
            tr.squared_error.push_back((x - remote).squaredNorm());
            if (keep_vectors) {
                tr.state.push_back(x);
                tr.measurement.push_back(y);
                tr.local_estimate.push_back(local);
                tr.remote_estimate.push_back(remote);
            }
        }
    }
    return out;
}

std::vector<Bits> checked_reception(std::span<const PreparedSystem> systems, const Schedule &sched,
                                    const ShiftTuple &attack, const SimConfig &cfg) {
    check_sizes(systems, sched.sensors(), "state_trajectory_sim");
    cfg.check(sched.sensors());
    return attacked_reception(sched, attack);
}

} // namespace

std::vector<SensorTrajectory> state_trajectory_sim(std::span<const PreparedSystem> systems, const Schedule &sched,
                                                   const ShiftTuple &attack, const SimConfig &cfg,
                                                   std::uint64_t trial) {
    return run_trajectory(systems, checked_reception(systems, sched, attack, cfg), cfg, trial, nullptr, true);
}

std::vector<SensorTrajectory> state_trajectory_sim(std::span<const PreparedSystem> systems, const Schedule &sched,
                                                   const ShiftTuple &attack, const SimConfig &cfg,
                                                   std::uint64_t trial, const std::vector<Vector> &initial_state) {
    if (initial_state.size() != sched.sensors())
        throw_invalid("state_trajectory_sim: need one initial state per sensor");
    return run_trajectory(systems, checked_reception(systems, sched, attack, cfg), cfg, trial, &initial_state, true);
}

EmpiricalError empirical_remote_error(std::span<const PreparedSystem> systems, const Schedule &sched,
                                      const ShiftTuple &attack, const SimConfig &cfg) {
    const auto lambda = checked_reception(systems, sched, attack, cfg);
    const std::size_t N = systems.size(), K = cfg.horizon;
    std::vector<std::vector<SensorTrajectory>> runs(cfg.trials);
    parallel_for(cfg.trials, cfg.threads,
                 [&](std::size_t t) { runs[t] = run_trajectory(systems, lambda, cfg, t, nullptr, false); });

    EmpiricalError out;
    out.mean.assign(N, std::vector<double>(K));
    out.std_error.assign(N, std::vector<double>(K));
    std::vector<double> column(cfg.trials);
    const double root_n = std::sqrt(static_cast<double>(cfg.trials));
    for (std::size_t i = 0; i < N; ++i)
        for (std::size_t k = 0; k < K; ++k) {
            for (std::size_t t = 0; t < cfg.trials; ++t)
                column[t] = runs[t][i].squared_error[k];
            const MeanSd m = mean_sd(column);
            out.mean[i][k] = m.mean;
            out.std_error[i][k] = m.sd / root_n;
        }
    return out;
}

} // namespace schedsec
