#pragma once

#include <cstddef>
#include <limits>
#include <vector>

namespace schedsec::lp {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

enum class Sense { less_equal, greater_equal, equal };

struct Constraint {
    std::vector<double> coeffs; // one per structural variable
    Sense sense = Sense::less_equal;
    double rhs = 0.0;
};

/// minimize cᵀx  s.t.  each constraint row, lower <= x <= upper.
/// Lower bounds must be finite; upper bounds may be kInfinity.
struct Problem {
    std::vector<double> cost;
    std::vector<double> lower;
    std::vector<double> upper;
    std::vector<Constraint> rows;
};

enum class Status { optimal, infeasible, unbounded, iteration_limit };

struct Solution {
    Status status = Status::infeasible;
    std::vector<double> x;
    double objective = 0.0;
    std::size_t iterations = 0;
};

struct Options {
    double feasibility_tol = 1e-9;
    double optimality_tol = 1e-9;
    double pivot_tol = 1e-11;
    std::size_t max_iterations = 0; // 0: derived from problem size
};

/// Dense two-phase primal simplex with bounded variables: nonbasic variables
/// rest at either bound and may flip between them without a basis change.
/// Bland's rule on both entering and leaving choices, so degenerate problems
/// terminate.
Solution solve(const Problem &problem, const Options &opts = {});

} // namespace schedsec::lp
