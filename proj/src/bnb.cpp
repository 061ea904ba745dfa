#include <algorithm>
#include <cmath>
#include <sstream>

#include "schedsec/attack.hpp"
#include "schedsec/lp_simplex.hpp"

namespace schedsec {

namespace {

constexpr double kIntegralityTol = 1e-6;
constexpr double kBoundTol = 1e-9;

std::string describe_node(const MipInstance &inst, const BnbState &state) {
    std::ostringstream os;
    os << "target " << inst.target << ", assignment [";
    for (std::size_t b = 0; b < state.assignment.size(); ++b)
        os << (b ? "," : "") << (state.assignment[b] == BnbState::kLive ? std::string("live")
                                                                          : std::to_string(state.assignment[b]));
    os << "]";
    return os.str();
}

bool is_integral(const std::vector<double> &x) {
    return std::all_of(x.begin(), x.end(),
                       [](double v) { return std::abs(v) <= kIntegralityTol || std::abs(v - 1.0) <= kIntegralityTol; });
}

struct Candidate {
    Bits gamma;
    std::size_t norm = 0;
    std::vector<double> path_bounds;
};

// Most fractional live block: largest Σ min(x, 1−x); ties to the lower index.
std::size_t choose_branch_block(const MipInstance &inst, const BnbState &state, const std::vector<double> &x) {
    std::size_t best = inst.blocks();
    double best_mass = -1.0;
    for (std::size_t b = 0; b < inst.blocks(); ++b) {
        if (state.assignment[b] != BnbState::kLive)
            continue;
        double mass = 0.0;
        for (std::size_t s = 0; s < inst.block_size(); ++s) {
            const double v = x[b * inst.block_size() + s];
            mass += std::min(v, 1.0 - v);
        }
        if (mass > best_mass + kIntegralityTol) {
            best_mass = mass;
            best = b;
        }
    }
    return best;
}

class BranchAndBound {
public:
    BranchAndBound(const MipInstance &inst, BnbStats *stats) : inst_(inst), stats_(stats) {}

    std::optional<Candidate> run() {
        BnbState state = BnbState::all_live(inst_);
        return branch(state);
    }

private:
    std::optional<Candidate> branch(BnbState &state) {
        if (stats_)
            ++stats_->nodes;
        const Relaxation relax = lp_relaxation(inst_, state);
        if (stats_)
            ++stats_->lp_solves;
        if (!relax.feasible || relax.objective >= state.incumbent - kBoundTol)
            return std::nullopt;

        if (is_integral(relax.gamma)) {
            Candidate c;
            c.gamma.resize(relax.gamma.size());
            for (std::size_t k = 0; k < relax.gamma.size(); ++k)
                c.gamma[k] = relax.gamma[k] > 0.5 ? 1 : 0;
            c.norm = static_cast<std::size_t>(std::count(c.gamma.begin(), c.gamma.end(), std::uint8_t{1}));
            c.path_bounds.push_back(relax.objective);
            state.incumbent = static_cast<double>(c.norm);
            return c;
        }

        const std::size_t j = choose_branch_block(inst_, state, relax.gamma);
        if (j == inst_.blocks())
            throw Error(ErrorCode::numerical,
                        "fractional relaxation without a live block at node " + describe_node(inst_, state));

        const double entry_incumbent = state.incumbent;
        std::optional<Candidate> best;
        for (int k = 0; k < static_cast<int>(inst_.period); ++k) {
            state.assignment[j] = k;
            auto child = branch(state);
            if (child && (!best || child->norm < best->norm))
                best = std::move(child);
        }
        state.assignment[j] = BnbState::kLive;

        if (best && static_cast<double>(best->norm) < entry_incumbent) {
            best->path_bounds.insert(best->path_bounds.begin(), relax.objective);
            return best;
        }
        return std::nullopt;
    }

    const MipInstance &inst_;
    BnbStats *stats_;
};

} // namespace

BnbState BnbState::all_live(const MipInstance &inst) {
    BnbState s;
    s.assignment.assign(inst.blocks(), kLive);
    return s;
}

std::vector<std::size_t> BnbState::live_blocks() const {
    std::vector<std::size_t> out;
    for (std::size_t b = 0; b < assignment.size(); ++b)
        if (assignment[b] == kLive)
            out.push_back(b);
    return out;
}

Relaxation lp_relaxation(const MipInstance &inst, const BnbState &state) {
    if (state.assignment.size() != inst.blocks())
        throw_invalid("lp_relaxation: assignment does not match the instance");
    const std::size_t n = inst.variables();
    const std::size_t bs = inst.block_size();

    lp::Problem p;
    p.cost.assign(n, 1.0);
    p.lower.assign(n, 0.0);
    p.upper.assign(n, 1.0);
    for (std::size_t b = 0; b < inst.blocks(); ++b) {
        const int a = state.assignment[b];
        if (a == BnbState::kLive)
            continue;
        if (a < 0 || a >= static_cast<int>(inst.period))
            throw_invalid("lp_relaxation: block " + std::to_string(b) + " pinned to invalid shift");
        for (std::size_t s = 0; s < bs; ++s) {
            const double v = (a != 0 && static_cast<std::size_t>(a) == s + 1) ? 1.0 : 0.0;
            p.lower[b * bs + s] = v;
            p.upper[b * bs + s] = v;
        }
    }
    // cover: S₋ᵢ Γ ⪰ sᵢ (rows where sᵢ(k) = 0 are vacuous)
    for (std::size_t k = 0; k < inst.period; ++k) {
        if (!inst.s_target[k])
            continue;
        lp::Constraint c;
        c.coeffs.assign(n, 0.0);
        for (std::size_t v = 0; v < n; ++v)
            c.coeffs[v] = inst.S_minus[k][v];
        c.sense = lp::Sense::greater_equal;
        c.rhs = 1.0;
        p.rows.push_back(std::move(c));
    }
    // at most one delay per sensor: E Γ ⪯ 1
    for (std::size_t b = 0; b < inst.blocks(); ++b) {
        lp::Constraint c;
        c.coeffs.assign(n, 0.0);
        for (std::size_t v = 0; v < n; ++v)
            c.coeffs[v] = inst.E[b][v];
        c.sense = lp::Sense::less_equal;
        c.rhs = 1.0;
        p.rows.push_back(std::move(c));
    }

    const lp::Solution sol = lp::solve(p);
    Relaxation r;
    switch (sol.status) {
    case lp::Status::optimal:
        r.feasible = true;
        r.gamma = sol.x;
        r.objective = sol.objective;
        return r;
    case lp::Status::infeasible:
        return r;
    case lp::Status::unbounded:
    case lp::Status::iteration_limit:
        break;
    }
    throw Error(ErrorCode::numerical, "LP relaxation could not be resolved at node " + describe_node(inst, state));
}

OptimalAttack bnb_optimal_attack(const Schedule &sched, BnbStats *stats) {
    const std::size_t N = sched.sensors();
    if (N < 2)
        throw_invalid("bnb_optimal_attack: need at least two sensors");
    if (!sched.is_exclusive())
        throw_invalid("bnb_optimal_attack: schedule is not exclusive");

    OptimalAttack out;
    out.per_target_costs.assign(N, std::nullopt);
    if (stats)
        stats->accepting_path_bounds.assign(N, {});
    for (std::size_t i = 0; i < N; ++i) {
        const MipInstance inst = build_mip(sched, i);
        BranchAndBound bnb(inst, stats);
        auto cand = bnb.run();
        if (!cand)
            continue;
        out.per_target_costs[i] = cand->norm;
        if (stats)
            stats->accepting_path_bounds[i] = cand->path_bounds;
        if (!out.spoofed_count || cand->norm < *out.spoofed_count) {
            out.spoofed_count = cand->norm;
            out.attack = inst.decode(cand->gamma);
            out.target = i;
        }
    }
    return out;
}

} // namespace schedsec
