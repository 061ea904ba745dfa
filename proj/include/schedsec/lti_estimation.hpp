#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace schedsec {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// One process/sensor pair:
///   x(k+1) = A x(k) + w(k),  y(k) = C x(k) + v(k)
/// with w ~ N(0, Q), v ~ N(0, R), x(0) ~ N(0, Pi).
struct LinearSystem {
    Matrix A;
    Matrix C;
    Matrix Q;
    Matrix R;
    Matrix Pi;

    std::size_t state_dim() const noexcept { return static_cast<std::size_t>(A.rows()); }
    std::size_t output_dim() const noexcept { return static_cast<std::size_t>(C.rows()); }
};

/// Non-fatal findings from validate().
struct ValidationReport {
    std::vector<std::string> warnings;
    double spectral_radius = 0.0;
    bool unstable = false;
};

/// Checks shapes, covariance definiteness and detectability/stabilizability.
/// Hard failures throw a validation error naming `label` and the field; a
/// stable A is only a warning.
ValidationReport validate(const LinearSystem &sys, const std::string &label = "system");

double spectral_radius(const Matrix &A);

/// True when (A, C) is detectable (PBH test on every eigenvalue with |λ| >= 1).
bool is_detectable(const Matrix &A, const Matrix &C);

/// True when (A, B) is stabilizable. Callers pass Q for B since range(√Q) = range(Q).
bool is_stabilizable(const Matrix &A, const Matrix &B);

bool is_symmetric_psd(const Matrix &X, double tol = 1e-9);
bool is_symmetric_pd(const Matrix &X, double tol = 1e-9);

/// h(X) = A X Aᵀ + Q
Matrix lyapunov_step(const LinearSystem &sys, const Matrix &X);

/// g(X) = X − X Cᵀ (C X Cᵀ + R)⁻¹ C X
Matrix riccati_step(const LinearSystem &sys, const Matrix &X);

/// The nondecreasing sequence Tr[h^t(P̄)], t = 0, 1, 2, ...
///
/// A ladder stores a prefix and the last propagated matrix. Reading past the
/// prefix recomputes on the fly without mutating, so a ladder can be shared
/// freely between threads.
class TraceLadder {
public:
    TraceLadder() = default;
    TraceLadder(const LinearSystem &sys, const Matrix &P_bar, std::size_t length);

    /// Tr[h^t(P̄)].
    double at(std::size_t t) const;

    /// Number of precomputed entries.
    std::size_t size() const noexcept { return traces_.size(); }
    const std::vector<double> &prefix() const noexcept { return traces_; }

    /// A copy whose precomputed prefix covers at least `length` entries.
    TraceLadder extended(std::size_t length) const;

private:
    Matrix A_;
    Matrix Q_;
    Matrix tail_; // h^{size()-1}(P̄)
    std::vector<double> traces_;
};

struct SteadyState {
    Matrix P_bar;
    TraceLadder ladder;
    std::size_t iterations = 0;
    double residual = 0.0; // Frobenius norm of g∘h(P̄) − P̄
};

struct SteadyStateOptions {
    double tol = 1e-10;
    std::size_t max_iter = 100'000;
    std::size_t ladder_length = 64;
};

/// Iterates X ← g∘h(X) from Π until successive Frobenius change < tol.
/// Throws ConvergenceError carrying the last change otherwise.
SteadyState steady_state(const LinearSystem &sys, const SteadyStateOptions &opts = {});

/// Structured doubling solution of the same fixed point. Independent of the
/// fixed-point iteration; kept as a cross-check.
Matrix steady_state_doubling(const LinearSystem &sys, double tol = 1e-13, std::size_t max_iter = 200);

struct LocalEstimate {
    Vector x_hat;
    Matrix P;
};

/// One step of the sensor-side Kalman filter (predict, gain, correct).
LocalEstimate local_kalman_update(const LinearSystem &sys, const Vector &x_hat_prev,
                                  const Matrix &P_prev, const Vector &y);

/// Averages X with its transpose.
inline Matrix symmetrized(const Matrix &X) { return 0.5 * (X + X.transpose()); }


/// A validated system together with its steady state.
struct PreparedSystem {
    LinearSystem system;
    SteadyState steady;
    ValidationReport report;
};

/// Validates every system (labels "system <i>") and solves its steady state.
std::vector<PreparedSystem> prepare_systems(const std::vector<LinearSystem> &systems,
                                            const SteadyStateOptions &opts = {});

std::vector<TraceLadder> ladders_of(const std::vector<PreparedSystem> &prepared);

} // namespace schedsec
