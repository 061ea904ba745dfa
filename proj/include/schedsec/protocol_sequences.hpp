#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "schedsec/errors.hpp"
#include "schedsec/lti_estimation.hpp"
#include "schedsec/rational.hpp"
#include "schedsec/rng.hpp"
#include "schedsec/scheduling.hpp"

namespace schedsec {

/// Duty factor n/d with 0 < n < d and gcd(n, d) = 1.
class DutyFactor {
public:
    DutyFactor(std::int64_t n, std::int64_t d);

    std::int64_t n() const noexcept { return n_; }
    std::int64_t d() const noexcept { return d_; }
    Rational value() const { return Rational(n_, d_); }

    friend bool operator==(const DutyFactor &, const DutyFactor &) = default;

private:
    std::int64_t n_;
    std::int64_t d_;
};

/// Shift-invariant transmission policies with the duty factors they were
/// built from. The period is a multiple of Π d_i.
class PolicySet {
public:
    /// Checks each row's weight against its factor and the period against Π d_i.
    PolicySet(Schedule policies, std::vector<DutyFactor> factors);

    const Schedule &schedule() const noexcept { return policies_; }
    const std::vector<DutyFactor> &factors() const noexcept { return factors_; }
    std::size_t period() const noexcept { return policies_.period(); }
    std::size_t sensors() const noexcept { return policies_.sensors(); }

    friend bool operator==(const PolicySet &, const PolicySet &) = default;

private:
    Schedule policies_;
    std::vector<DutyFactor> factors_;
};

/// H(τ; U): slots where every shifted row of U transmits. `tuple` holds
/// strictly ascending sensor indices, `shifts` one offset per tuple entry.
std::size_t hamming_cross_correlation(const Schedule &rows, std::span<const std::size_t> tuple,
                                      std::span<const std::size_t> shifts);

/// θ_j(τ; U): fraction of slots in which tuple[j] transmits and the rest of
/// the tuple is silent.
Rational throughput(const Schedule &rows, std::span<const std::size_t> tuple, std::span<const std::size_t> shifts,
                    std::size_t position);

struct InvarianceWitness {
    std::vector<std::size_t> tuple;
    std::vector<std::size_t> shifts;
    std::size_t value = 0;    // H at the witness
    std::size_t expected = 0; // H at all-zero shifts
};

struct InvarianceReport {
    bool invariant = true;
    /// True when some tuple exceeded the exhaustive budget and was sampled.
    bool sampled = false;
    std::optional<InvarianceWitness> witness;
};

struct InvarianceOptions {
    /// Per-tuple cap on shift combinations checked exhaustively.
    std::uint64_t exhaustive_cap = 10'000'000;
    /// Sampled shift tuples per oversize tuple; 0 makes oversize an error.
    std::size_t samples = 0;
    std::uint64_t seed = 0;
};

/// Checks H is constant for every ascending tuple U. The first shift is held
/// at zero: a common offset only re-indexes the cyclic sum. Tuples are visited
/// by size then lexicographically, shifts lexicographically, so the reported
/// witness is the smallest one.
InvarianceReport is_shift_invariant(const Schedule &rows, const InvarianceOptions &opts = {});

/// Interleaving vectors per sensor: sigma[i] holds Π_{j<i} d_j vectors of
/// length d_i and weight n_i.
using SigmaChoice = std::vector<std::vector<Bits>>;

/// Default choice: σ_ij is the base vector (ones in the last n_i slots)
/// rotated by (j−1) mod d_i.
SigmaChoice default_sigma(std::span<const DutyFactor> factors);

/// Uniformly random weight-n_i vectors for every σ_ij.
SigmaChoice random_sigma(std::span<const DutyFactor> factors, Engine &engine);

/// Row i reads σ_i1(0), σ_i2(0), ..., σ_iD(0), σ_i1(1), ... and repeats to the
/// common period Π d_i. The result is verified shift invariant before return.
PolicySet construct_shift_invariant(std::span<const DutyFactor> factors,
                                    const std::optional<SigmaChoice> &sigma = std::nullopt);

/// All factors 1/2: period 2^N, one reception per sensor per period under any offsets.
PolicySet shortest_period_policies(std::size_t sensors);

/// Reduced duty factors of each row; rows with f ∈ {0, 1} are rejected.
std::vector<DutyFactor> factors_of(const Schedule &sched);

struct BoundsReport {
    double lower = 0.0;
    double upper = 0.0;
    std::vector<std::uint64_t> per_sensor_receptions; // N_i
    std::uint64_t period = 0;                         // D = Π d_i
};

/// Cost bounds under arbitrary offsets given N_i = n_i Π_{j≠i}(d_j − n_j)
/// receptions per period D: receptions spread evenly (lower) or back to back
/// (upper).
BoundsReport bounds(std::span<const DutyFactor> factors, std::span<const TraceLadder> ladders);

} // namespace schedsec
