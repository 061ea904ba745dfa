#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "schedsec/attack.hpp"
#include "schedsec/lti_estimation.hpp"
#include "schedsec/protocol_sequences.hpp"
#include "schedsec/scheduling.hpp"

namespace schedsec {

/// Traces above this are treated as numerically divergent and no longer propagated.
inline constexpr double kOverflowTrace = 1e12;

struct SimConfig {
    std::size_t horizon = 100; // K slots, k = 0..K-1
    std::uint64_t seed = 0;
    std::size_t trials = 1;
    /// Remote covariance at k = -1. Empty means P̄_i for every sensor;
    /// otherwise one matrix per sensor.
    std::vector<Matrix> initial_covariance;
    /// Worker threads for trial loops; 0 picks the hardware concurrency.
    std::size_t threads = 0;

    void check(std::size_t sensors) const;
};

/// Tr P_i(k) for k = 0..K-1 under P_i(k) = P̄_i on reception and h_i(P_i(k-1))
/// on a drop. Entries from overflow_at[i] onward are +inf.
struct CovarianceSeries {
    std::vector<std::vector<double>> per_sensor_traces;
    std::vector<std::vector<double>> per_sensor_running_mean; // (1/(k+1)) Σ_{j<=k}
    std::vector<double> total_running_mean;
    std::size_t horizon = 0;
    std::size_t period = 0;

    /// Sensors with no reception in a period of the attacked pattern.
    std::vector<bool> divergent;
    std::vector<std::optional<std::size_t>> overflow_at;
    /// For divergent sensors: trace ratio across the last complete period
    /// before overflow (nullopt when the horizon is too short).
    std::vector<std::optional<double>> growth_factor;
    /// Mean over the last period once every receiving sensor has received at
    /// least once before it; nullopt means the run is transient-only.
    std::optional<CostReport> periodic_average;
};

CovarianceSeries exact_covariance_series(std::span<const PreparedSystem> systems, const Schedule &sched,
                                         const ShiftTuple &attack, const SimConfig &cfg);

/// Same recursion from an explicit reception pattern (one row per sensor).
CovarianceSeries exact_covariance_series(std::span<const PreparedSystem> systems, const std::vector<Bits> &reception,
                                         const SimConfig &cfg);

/// First k with Tr P_i(k) > threshold, if any.
std::optional<std::size_t> first_exceeding(const CovarianceSeries &series, std::size_t sensor, double threshold);

struct AttackModel {
    enum class Kind { uniform, fixed };
    Kind kind = Kind::uniform;
    ShiftTuple fixed;
    /// Draw fresh random interleaving vectors per trial (needs factors).
    bool resample_sigma = false;
};

struct MonteCarloResult {
    std::size_t trials = 0;
    std::size_t horizon = 0;
    std::vector<double> mean_running_cost; // across trials, per k
    std::vector<double> half_width;        // 95% normal half-width, per k
    /// Exact periodic average total cost of each trial (nullopt: divergent).
    std::vector<std::optional<double>> trial_costs;
    std::optional<double> mean_cost; // nullopt if any trial diverged
    double cost_half_width = 0.0;
};

/// Trial t uses stream_engine(cfg.seed, t) for its σ draw (if resampled) and
/// then its attack draw, so results do not depend on thread count. Sums are
/// pairwise over a fixed tree.
MonteCarloResult monte_carlo_expected_cost(std::span<const PreparedSystem> systems, const PolicySet &ps,
                                           const AttackModel &model, const SimConfig &cfg);

/// Same for an arbitrary schedule; σ resampling is unavailable here.
MonteCarloResult monte_carlo_expected_cost(std::span<const PreparedSystem> systems, const Schedule &sched,
                                           const AttackModel &model, const SimConfig &cfg);

struct SensorTrajectory {
    std::vector<Vector> state;
    std::vector<Vector> measurement;
    std::vector<Vector> local_estimate;
    std::vector<Vector> remote_estimate;
    std::vector<double> squared_error; // ‖x(k) − x̂_remote(k)‖²
};

/// One sampled run, k = 0..K-1, using stream_engine(cfg.seed, trial). At k = -1
/// x ~ N(0, P0), both estimates are 0 and the local covariance is P0, where P0
/// is the initial covariance from cfg. The remote side takes the local
/// estimate on reception and predicts with A otherwise.
std::vector<SensorTrajectory> state_trajectory_sim(std::span<const PreparedSystem> systems, const Schedule &sched,
                                                   const ShiftTuple &attack, const SimConfig &cfg,
                                                   std::uint64_t trial = 0);

/// Optional explicit initial states replace the N(0, P0) draw.
std::vector<SensorTrajectory> state_trajectory_sim(std::span<const PreparedSystem> systems, const Schedule &sched,
                                                   const ShiftTuple &attack, const SimConfig &cfg,
                                                   std::uint64_t trial, const std::vector<Vector> &initial_state);

struct EmpiricalError {
    std::vector<std::vector<double>> mean;       // per sensor, per k
    std::vector<std::vector<double>> std_error;  // sd / sqrt(trials)
};

/// Remote squared error averaged over cfg.trials sampled runs.
EmpiricalError empirical_remote_error(std::span<const PreparedSystem> systems, const Schedule &sched,
                                      const ShiftTuple &attack, const SimConfig &cfg);

} // namespace schedsec
