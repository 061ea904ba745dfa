#include "schedsec/lp_simplex.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "schedsec/errors.hpp"

namespace schedsec::lp {

namespace {

enum class Place { basic, at_lower, at_upper };

struct Tableau {
    std::size_t m = 0;            // rows
    std::size_t n = 0;            // columns (structural + slack + artificial)
    std::vector<double> a;        // m x n, row-major: B⁻¹ [A | S | Art]
    std::vector<double> lower, upper, x;
    std::vector<Place> place;
    std::vector<std::size_t> basis; // basis[row] = column

    double &at(std::size_t r, std::size_t c) { return a[r * n + c]; }
    double at(std::size_t r, std::size_t c) const { return a[r * n + c]; }

    void pivot(std::size_t row, std::size_t col) {
        const double p = at(row, col);
        for (std::size_t c = 0; c < n; ++c)
            at(row, c) /= p;
        for (std::size_t r = 0; r < m; ++r) {
            if (r == row)
                continue;
            const double f = at(r, col);
            if (f == 0.0)
                continue;
            for (std::size_t c = 0; c < n; ++c)
                at(r, c) -= f * at(row, c);
        }
    }
};

enum class PhaseResult { optimal, unbounded, iteration_limit };

PhaseResult run_phase(Tableau &t, const std::vector<double> &cost, const Options &opts, std::size_t max_iter,
                      std::size_t &iterations) {
    std::vector<double> reduced(t.n);
    for (;;) {
        if (iterations >= max_iter)
            return PhaseResult::iteration_limit;

        // d_j = c_j − c_Bᵀ B⁻¹ A_j
        for (std::size_t j = 0; j < t.n; ++j) {
            double d = cost[j];
            for (std::size_t r = 0; r < t.m; ++r)
                d -= cost[t.basis[r]] * t.at(r, j);
            reduced[j] = d;
        }

        std::size_t enter = t.n;
        double dir = 0.0;
        for (std::size_t j = 0; j < t.n; ++j) {
            if (t.place[j] == Place::basic || t.upper[j] - t.lower[j] <= 0.0)
                continue;
            if (t.place[j] == Place::at_lower && reduced[j] < -opts.optimality_tol) {
                enter = j;
                dir = 1.0;
                break;
            }
            if (t.place[j] == Place::at_upper && reduced[j] > opts.optimality_tol) {
                enter = j;
                dir = -1.0;
                break;
            }
        }
        if (enter == t.n)
            return PhaseResult::optimal;

        // Ratio test. The entering variable's own range is the first candidate.
        double theta = t.upper[enter] - t.lower[enter];
        std::size_t leave_row = t.m;
        bool leave_to_upper = false;
        for (std::size_t r = 0; r < t.m; ++r) {
            const double alpha = dir * t.at(r, enter);
            const std::size_t b = t.basis[r];
            double limit = kInfinity;
            bool to_upper = false;
            if (alpha > opts.pivot_tol) {
                limit = std::max(0.0, t.x[b] - t.lower[b]) / alpha;
            } else if (alpha < -opts.pivot_tol && std::isfinite(t.upper[b])) {
                limit = std::max(0.0, t.upper[b] - t.x[b]) / -alpha;
                to_upper = true;
            } else {
                continue;
            }
            // ties keep a bound flip, else go to the smallest basic index
            if (limit < theta || (limit == theta && leave_row != t.m && b < t.basis[leave_row])) {
                theta = limit;
                leave_row = r;
                leave_to_upper = to_upper;
            }
        }
        if (!std::isfinite(theta))
            return PhaseResult::unbounded;

        for (std::size_t r = 0; r < t.m; ++r)
            t.x[t.basis[r]] -= dir * theta * t.at(r, enter);
        t.x[enter] += dir * theta;
        ++iterations;

        if (leave_row == t.m) {
            // bound flip, basis unchanged
            t.place[enter] = dir > 0 ? Place::at_upper : Place::at_lower;
            t.x[enter] = dir > 0 ? t.upper[enter] : t.lower[enter];
            continue;
        }
        const std::size_t leaving = t.basis[leave_row];
        t.place[leaving] = leave_to_upper ? Place::at_upper : Place::at_lower;
        t.x[leaving] = leave_to_upper ? t.upper[leaving] : t.lower[leaving];
        t.place[enter] = Place::basic;
        t.basis[leave_row] = enter;
        t.pivot(leave_row, enter);
    }
}

} // namespace

Solution solve(const Problem &problem, const Options &opts) {
    const std::size_t ns = problem.cost.size();
    if (problem.lower.size() != ns || problem.upper.size() != ns)
        throw_invalid("lp::solve: bound vectors do not match the cost vector");
    for (std::size_t j = 0; j < ns; ++j) {
        if (!std::isfinite(problem.lower[j]))
            throw_invalid("lp::solve: lower bound of variable " + std::to_string(j) + " must be finite");
        if (problem.upper[j] < problem.lower[j])
            return Solution{Status::infeasible, {}, 0.0, 0};
    }
    const std::size_t m = problem.rows.size();
    for (const auto &row : problem.rows)
        if (row.coeffs.size() != ns)
            throw_invalid("lp::solve: constraint width does not match the variable count");

    // Column layout: [structural | one slack per inequality row | one artificial per row]
    std::vector<std::size_t> slack_of(m, 0);
    std::size_t n_slack = 0;
    for (std::size_t r = 0; r < m; ++r)
        if (problem.rows[r].sense != Sense::equal)
            slack_of[r] = ns + n_slack++;
    const std::size_t art0 = ns + n_slack;

    Tableau t;
    t.m = m;
    t.n = art0 + m;
    t.a.assign(t.m * t.n, 0.0);
    t.lower.assign(t.n, 0.0);
    t.upper.assign(t.n, kInfinity);
    t.x.assign(t.n, 0.0);
    t.place.assign(t.n, Place::at_lower);
    t.basis.assign(m, 0);
    for (std::size_t j = 0; j < ns; ++j) {
        t.lower[j] = problem.lower[j];
        t.upper[j] = problem.upper[j];
        t.x[j] = problem.lower[j];
    }

    for (std::size_t r = 0; r < m; ++r) {
        const auto &row = problem.rows[r];
        double residual = row.rhs;
        for (std::size_t j = 0; j < ns; ++j)
            residual -= row.coeffs[j] * t.x[j];
        const double slack_sign = row.sense == Sense::less_equal ? 1.0 : -1.0;
        // A slack that can absorb the residual starts basic; otherwise an
        // artificial with matching sign does.
        const bool slack_basic = row.sense != Sense::equal && slack_sign * residual >= 0.0;
        const double sign = slack_basic ? slack_sign : (residual >= 0.0 ? 1.0 : -1.0);
        for (std::size_t j = 0; j < ns; ++j)
            t.at(r, j) = sign * row.coeffs[j];
        if (row.sense != Sense::equal)
            t.at(r, slack_of[r]) = sign * slack_sign;
        t.at(r, art0 + r) = sign * (residual >= 0.0 ? 1.0 : -1.0);
        const std::size_t b = slack_basic ? slack_of[r] : art0 + r;
        t.basis[r] = b;
        t.place[b] = Place::basic;
        t.x[b] = std::abs(residual);
        if (slack_basic) {
            // unused artificial: pinned at zero
            t.upper[art0 + r] = 0.0;
        }
    }

    const std::size_t max_iter = opts.max_iterations ? opts.max_iterations : 200 * (t.m + t.n) + 1000;
    std::size_t iterations = 0;

    std::vector<double> phase1(t.n, 0.0);
    for (std::size_t r = 0; r < m; ++r)
        phase1[art0 + r] = 1.0;
    if (run_phase(t, phase1, opts, max_iter, iterations) == PhaseResult::iteration_limit)
        return Solution{Status::iteration_limit, {}, 0.0, iterations};
    double infeasibility = 0.0;
    for (std::size_t r = 0; r < m; ++r)
        infeasibility += t.x[art0 + r];
    if (infeasibility > opts.feasibility_tol * std::max<double>(1.0, static_cast<double>(m)))
        return Solution{Status::infeasible, {}, 0.0, iterations};

    for (std::size_t r = 0; r < m; ++r) {
        t.upper[art0 + r] = 0.0;
        if (t.place[art0 + r] != Place::basic) {
            t.place[art0 + r] = Place::at_lower;
            t.x[art0 + r] = 0.0;
        }
    }
    std::vector<double> phase2(t.n, 0.0);
    std::copy(problem.cost.begin(), problem.cost.end(), phase2.begin());
    const PhaseResult p2 = run_phase(t, phase2, opts, max_iter, iterations);
    if (p2 == PhaseResult::iteration_limit)
        return Solution{Status::iteration_limit, {}, 0.0, iterations};
    if (p2 == PhaseResult::unbounded)
        return Solution{Status::unbounded, {}, -kInfinity, iterations};

    Solution sol;
    sol.status = Status::optimal;
    sol.iterations = iterations;
    sol.x.assign(t.x.begin(), t.x.begin() + static_cast<std::ptrdiff_t>(ns));
    for (std::size_t j = 0; j < ns; ++j) {
        sol.x[j] = std::clamp(sol.x[j], problem.lower[j], problem.upper[j]);
        sol.objective += problem.cost[j] * sol.x[j];
    }
    return sol;
}

} // namespace schedsec::lp
