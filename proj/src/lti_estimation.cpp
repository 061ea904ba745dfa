#include "schedsec/lti_estimation.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>

#include "schedsec/errors.hpp"

namespace schedsec {

namespace {

constexpr double kUnstableMargin = 1e-12;

void require_square(const Matrix &M, Eigen::Index n, const std::string &what) {
    if (M.rows() != n || M.cols() != n)
        throw_invalid(what + " must be " + std::to_string(n) + "x" + std::to_string(n) + ", got " +
                      std::to_string(M.rows()) + "x" + std::to_string(M.cols()));
}

Eigen::Index numerical_rank(const Eigen::MatrixXcd &M) {
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(M);
    const auto &sv = svd.singularValues();
    if (sv.size() == 0)
        return 0;
    const double tol = 1e-9 * std::max(1.0, sv(0));
    return (sv.array() > tol).count();
}

// PBH test shared by detectability (stacked rows) and stabilizability
// (stacked columns).
bool pbh_holds(const Matrix &A, const Matrix &other, bool stack_rows) {
    const Eigen::Index n = A.rows();
    Eigen::EigenSolver<Matrix> es(A, false);
    for (Eigen::Index k = 0; k < n; ++k) {
        const std::complex<double> lambda = es.eigenvalues()(k);
        if (std::abs(lambda) < 1.0)
            continue;
        const Eigen::MatrixXcd shifted =
            A.cast<std::complex<double>>() - lambda * Eigen::MatrixXcd::Identity(n, n);
        Eigen::MatrixXcd stacked;
        if (stack_rows) {
            stacked.resize(n + other.rows(), n);
            stacked << shifted, other.cast<std::complex<double>>();
        } else {
            stacked.resize(n, n + other.cols());
            stacked << shifted, other.cast<std::complex<double>>();
        }
        if (numerical_rank(stacked) < n)
            return false;
    }
    return true;
}

} // namespace

double spectral_radius(const Matrix &A) {
    if (A.size() == 0)
        return 0.0;
    Eigen::EigenSolver<Matrix> es(A, false);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

bool is_detectable(const Matrix &A, const Matrix &C) { return pbh_holds(A, C, true); }

bool is_stabilizable(const Matrix &A, const Matrix &B) { return pbh_holds(A, B, false); }

bool is_symmetric_psd(const Matrix &X, double tol) {
    if (X.rows() != X.cols())
        return false;
    if ((X - X.transpose()).cwiseAbs().maxCoeff() > tol * std::max(1.0, X.cwiseAbs().maxCoeff()))
        return false;
    Eigen::SelfAdjointEigenSolver<Matrix> es(X, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff() >= -tol;
}

bool is_symmetric_pd(const Matrix &X, double tol) {
    if (!is_symmetric_psd(X, tol))
        return false;
    Eigen::SelfAdjointEigenSolver<Matrix> es(X, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff() > tol;
}

ValidationReport validate(const LinearSystem &sys, const std::string &label) {
    auto fail = [&](const std::string &field, const std::string &why) {
        throw_validation(label + " field " + field + ": " + why);
    };
    const Eigen::Index n = sys.A.rows();
    if (n == 0 || sys.A.cols() != n)
        fail("A", "must be a non-empty square matrix");
    const Eigen::Index m = sys.C.rows();
    if (m == 0 || sys.C.cols() != n)
        fail("C", "must have " + std::to_string(n) + " columns and at least one row");
    if (sys.Q.rows() != n || sys.Q.cols() != n)
        fail("Q", "must be " + std::to_string(n) + "x" + std::to_string(n));
    if (sys.R.rows() != m || sys.R.cols() != m)
        fail("R", "must be " + std::to_string(m) + "x" + std::to_string(m));
    if (sys.Pi.rows() != n || sys.Pi.cols() != n)
        fail("Pi", "must be " + std::to_string(n) + "x" + std::to_string(n));
    for (const auto *M : {&sys.A, &sys.C, &sys.Q, &sys.R, &sys.Pi})
        if (!M->allFinite())
            fail("matrices", "contain non-finite entries");
    if (!is_symmetric_psd(sys.Q))
        fail("Q", "must be symmetric positive semi-definite");
    if (!is_symmetric_pd(sys.R))
        fail("R", "must be symmetric positive definite");
    if (!is_symmetric_psd(sys.Pi))
        fail("Pi", "must be symmetric positive semi-definite");
    if (!is_detectable(sys.A, sys.C))
        fail("C", "(A, C) is not detectable");
    if (!is_stabilizable(sys.A, sys.Q))
        fail("Q", "(A, sqrt(Q)) is not stabilizable");

    ValidationReport report;
    report.spectral_radius = spectral_radius(sys.A);
    report.unstable = report.spectral_radius > 1.0 + kUnstableMargin;
    if (!report.unstable)
        report.warnings.push_back(label + ": A is not unstable (spectral radius " +
                                  std::to_string(report.spectral_radius) +
                                  "); a blocked sensor will not diverge");
    return report;
}

Matrix lyapunov_step(const LinearSystem &sys, const Matrix &X) {
    require_square(X, sys.A.rows(), "lyapunov_step input");
    return symmetrized(sys.A * X * sys.A.transpose() + sys.Q);
}

Matrix riccati_step(const LinearSystem &sys, const Matrix &X) {
    require_square(X, sys.A.rows(), "riccati_step input");
    const Matrix S = sys.C * X * sys.C.transpose() + sys.R;
    const Matrix XCt = X * sys.C.transpose();
    return symmetrized(X - XCt * S.ldlt().solve(XCt.transpose()));
}

TraceLadder::TraceLadder(const LinearSystem &sys, const Matrix &P_bar, std::size_t length)
    : A_(sys.A), Q_(sys.Q), tail_(P_bar) {
    traces_.push_back(P_bar.trace());
    while (traces_.size() < std::max<std::size_t>(length, 1)) {
        tail_ = symmetrized(A_ * tail_ * A_.transpose() + Q_);
        traces_.push_back(tail_.trace());
    }
}

double TraceLadder::at(std::size_t t) const {
    if (t < traces_.size())
        return traces_[t];
    Matrix X = tail_;
    for (std::size_t k = traces_.size(); k <= t; ++k)
        X = symmetrized(A_ * X * A_.transpose() + Q_);
    return X.trace();
}

TraceLadder TraceLadder::extended(std::size_t length) const {
    TraceLadder out = *this;
    while (out.traces_.size() < length) {
        out.tail_ = symmetrized(out.A_ * out.tail_ * out.A_.transpose() + out.Q_);
        out.traces_.push_back(out.tail_.trace());
    }
    return out;
}

SteadyState steady_state(const LinearSystem &sys, const SteadyStateOptions &opts) {
    if (!(opts.tol > 0.0))
        throw_invalid("steady_state tolerance must be positive");
    require_square(sys.Pi, sys.A.rows(), "Pi");

    Matrix X = symmetrized(sys.Pi);
    double change = std::numeric_limits<double>::infinity();
    std::size_t it = 0;
    while (it < opts.max_iter) {
        Matrix next = riccati_step(sys, lyapunov_step(sys, X));
        change = (next - X).norm();
        X = std::move(next);
        ++it;
        if (change < opts.tol)
            break;
    }
    if (!(change < opts.tol))
        throw ConvergenceError("Riccati iteration did not converge in " + std::to_string(opts.max_iter) +
                                   " iterations (last change " + std::to_string(change) + ")",
                               change);

    SteadyState ss;
    ss.P_bar = X;
    ss.iterations = it;
    ss.residual = (riccati_step(sys, lyapunov_step(sys, X)) - X).norm();
    ss.ladder = TraceLadder(sys, X, opts.ladder_length);
    return ss;
}

Matrix steady_state_doubling(const LinearSystem &sys, double tol, std::size_t max_iter) {
    // Doubling on the dual control-form equation whose solution is the a priori
    // covariance M = h(P̄); P̄ = g(M) afterwards.
    const Eigen::Index n = sys.A.rows();
    const Matrix I = Matrix::Identity(n, n);
    Matrix Ak = sys.A.transpose();
    Matrix G = sys.C.transpose() * sys.R.ldlt().solve(sys.C);
    Matrix H = sys.Q;
    for (std::size_t it = 0; it < max_iter; ++it) {
        const Eigen::PartialPivLU<Matrix> W(I + G * H);
        const Matrix WinvA = W.solve(Ak);
        const Matrix Gn = symmetrized(G + Ak * W.solve(G) * Ak.transpose());
        const Matrix Hn = symmetrized(H + Ak.transpose() * H * WinvA);
        const Matrix An = Ak * WinvA;
        const double delta = (Hn - H).norm();
        H = Hn;
        G = Gn;
        Ak = An;
        if (delta <= tol * std::max(1.0, H.norm()))
            return riccati_step(sys, H);
    }
    throw ConvergenceError("doubling iteration did not converge", std::numeric_limits<double>::quiet_NaN());
}

LocalEstimate local_kalman_update(const LinearSystem &sys, const Vector &x_hat_prev, const Matrix &P_prev,
                                  const Vector &y) {
    const Eigen::Index n = sys.A.rows();
    if (x_hat_prev.size() != n || y.size() != sys.C.rows())
        throw_invalid("local_kalman_update: dimension mismatch");
    require_square(P_prev, n, "local_kalman_update covariance");

    const Vector x_prior = sys.A * x_hat_prev;
    const Matrix P_prior = sys.A * P_prev * sys.A.transpose() + sys.Q;
    const Matrix S = sys.C * P_prior * sys.C.transpose() + sys.R;
    const Eigen::LDLT<Matrix> S_ldlt(S);
    if (S_ldlt.info() != Eigen::Success || !S_ldlt.isPositive())
        throw Error(ErrorCode::numerical, "local_kalman_update: singular innovation covariance");
    const Matrix K = S_ldlt.solve(sys.C * P_prior.transpose()).transpose();

    LocalEstimate out;
    out.x_hat = x_prior + K * (y - sys.C * x_prior);
    out.P = symmetrized((Matrix::Identity(n, n) - K * sys.C) * P_prior);
    return out;
}


std::vector<PreparedSystem> prepare_systems(const std::vector<LinearSystem> &systems,
                                            const SteadyStateOptions &opts) {
    if (systems.empty())
        throw_validation("system list is empty");
    std::vector<PreparedSystem> out;
    out.reserve(systems.size());
    for (std::size_t i = 0; i < systems.size(); ++i) {
        PreparedSystem p;
        p.system = systems[i];
        p.report = validate(p.system, "system " + std::to_string(i));
        p.steady = steady_state(p.system, opts);
        out.push_back(std::move(p));
    }
    return out;
}

std::vector<TraceLadder> ladders_of(const std::vector<PreparedSystem> &prepared) {
    std::vector<TraceLadder> out;
    out.reserve(prepared.size());
    for (const auto &p : prepared)
        out.push_back(p.steady.ladder);
    return out;
}

} // namespace schedsec
