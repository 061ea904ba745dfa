#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "schedsec/errors.hpp"
#include "schedsec/rng.hpp"
#include "schedsec/scheduling.hpp"

namespace schedsec {

/// Per-sensor cyclic clock offsets τ_i ∈ {0, ..., T−1}. A zero offset leaves
/// the sensor untouched.
struct ShiftTuple {
    std::vector<std::size_t> taus;

    std::size_t size() const noexcept { return taus.size(); }
    /// Number of spoofed (nonzero-offset) sensors; the attack's cost.
    std::size_t spoofed_count() const noexcept;

    friend bool operator==(const ShiftTuple &, const ShiftTuple &) = default;
};

/// out(k) = row((k + tau) mod T).
Bits apply_shift(std::span<const std::uint8_t> row, std::size_t tau);

/// Rows of `sched` after applying each sensor's offset.
std::vector<Bits> shifted_rows(const Schedule &sched, const ShiftTuple &attack);

/// Reception indicators of the shifted schedule on the collision channel.
std::vector<Bits> attacked_reception(const Schedule &sched, const ShiftTuple &attack);

/// Sensors whose reception sequence is identically zero.
std::vector<std::size_t> blocked_sensors(const std::vector<Bits> &receptions);

/// τ_j = 1 for every j ≠ target, τ_target = 0.
ShiftTuple isolation_shift(std::size_t sensors, std::size_t target);

/// Attack that drops every packet of `target`. Tries isolation_shift first;
/// if that does not cover every slot of the target (its ones are not isolated
/// by zeros), falls back to the lexicographically first covering tuple with
/// the target unshifted. Requires an exclusive schedule and f_target <= 1/2.
ShiftTuple isolate_sensor_attack(const Schedule &sched, std::size_t target, const Budget &budget = {});

/// Independent uniform offsets from a seeded generator.
ShiftTuple random_attack(std::size_t period, std::size_t sensors, std::uint64_t seed);
ShiftTuple random_attack(std::size_t period, std::size_t sensors, Engine &engine);

/// Binary cover program for one target sensor i:
///
///   min ‖Γ‖₁  s.t.  S₋ᵢ Γ ⪰ sᵢ,  E Γ ⪯ 1,  Γ binary.
///
/// Column c = b·(T−1) + (s−1) of S₋ᵢ is the other sensor others[b] shifted by
/// s ∈ {1..T−1}; block b of Γ selects at most one shift for that sensor.
struct MipInstance {
    std::size_t target = 0;
    std::size_t period = 0;
    std::vector<std::size_t> others; // sensor index of each block, ascending
    std::vector<Bits> S_minus;       // T rows x (T−1)(N−1) columns
    std::vector<Bits> E;             // (N−1) rows x (T−1)(N−1) columns
    Bits s_target;

    std::size_t block_size() const noexcept { return period - 1; }
    std::size_t blocks() const noexcept { return others.size(); }
    std::size_t variables() const noexcept { return blocks() * block_size(); }

    /// Stacked form D Γ ⪯ b with D = [−S₋ᵢ; E] and b = [−sᵢ; 1].
    void stacked(std::vector<std::vector<int>> &D, std::vector<int> &b) const;

    bool is_feasible(std::span<const std::uint8_t> gamma) const;
    /// Block b nonzero at position s−1 maps to τ_{others[b]} = s.
    ShiftTuple decode(std::span<const std::uint8_t> gamma) const;
    /// Inverse of decode; nullopt when the target itself is shifted.
    std::optional<Bits> encode(const ShiftTuple &attack) const;
};

/// Requires an exclusive schedule with at least two sensors.
MipInstance build_mip(const Schedule &sched, std::size_t target);

/// Result of an optimal-attack search. `attack` is empty when no tuple blocks
/// any sensor.
struct OptimalAttack {
    std::optional<ShiftTuple> attack;
    std::optional<std::size_t> spoofed_count;
    std::optional<std::size_t> target;
    /// Minimal spoofed count that blocks each sensor (nullopt: cannot be blocked).
    std::vector<std::optional<std::size_t>> per_target_costs;
};

struct BruteForceOptions {
    /// Let the blocked sensor itself be shifted too. Off by default so the
    /// oracle searches the same space as the cover program.
    bool allow_target_shift = false;
};

/// Enumerates all T^N shift tuples in lexicographic order; returns the first
/// one with the minimal spoofed count that blocks some sensor.
OptimalAttack brute_force_optimal_attack(const Schedule &sched, const Budget &budget = {},
                                         const BruteForceOptions &opts = {});

/// Partial assignment of Γ's blocks during branch-and-bound.
struct BnbState {
    static constexpr int kLive = -1;
    /// Per block: kLive, 0 (zero block) or s ∈ {1..T−1} (block = e_s).
    std::vector<int> assignment;
    double incumbent = std::numeric_limits<double>::infinity();

    static BnbState all_live(const MipInstance &inst);
    std::vector<std::size_t> live_blocks() const;
};

struct Relaxation {
    bool feasible = false;
    std::vector<double> gamma;
    double objective = 0.0;
};

/// Linear relaxation at a node: live coordinates in [0, 1], fixed blocks
/// pinned. Infeasibility is a normal (pruning) outcome.
Relaxation lp_relaxation(const MipInstance &inst, const BnbState &state);

struct BnbStats {
    std::size_t nodes = 0;
    std::size_t lp_solves = 0;
    /// Relaxation bounds along the accepting path of each target's winner,
    /// root first (empty if the target could not be blocked).
    std::vector<std::vector<double>> accepting_path_bounds;
};

/// Branch-and-bound over every target, taking the cheapest. Within a target:
/// depth-first, prune when the relaxation is infeasible or not below the
/// incumbent, accept integral relaxations (within 1e-6), otherwise branch on
/// the live block with the largest fractional mass into {0, e₁, ..., e_{T−1}}.
OptimalAttack bnb_optimal_attack(const Schedule &sched, BnbStats *stats = nullptr);

} // namespace schedsec
