#pragma once

// exp(tA)v for anti-Hermitian A and the lowest eigenpair of a Hermitian block.

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <vector>

#include "hyfermi/error.hpp"
#include "hyfermi/fock/basis.hpp"

namespace hyfermi::fock {

struct ExpmOptions {
    double tol = 1e-12;             ///< absolute error per application, relative to ‖v‖
    std::size_t krylov_dim = 30;
    std::size_t dense_threshold = 512;
    std::size_t max_substeps = 10000;
};

namespace detail {

/// Lanczos basis of the Hermitian H = iA with full reorthogonalisation.
struct LanczosBasis {
    std::vector<Vec> V;
    std::vector<double> alpha, beta;  // beta[j] couples V[j] and V[j+1]
    bool breakdown = false;
};

inline LanczosBasis lanczos(const SpMat& H, const Vec& v0, std::size_t m) {
    LanczosBasis lb;
    lb.V.push_back(v0 / v0.norm());
    for (std::size_t j = 0; j < m; ++j) {
        Vec w = H * lb.V[j];
        const double a = lb.V[j].dot(w).real();
        lb.alpha.push_back(a);
        for (int pass = 0; pass < 2; ++pass)
            for (const auto& q : lb.V) w -= q.dot(w) * q;
        const double b = w.norm();
        lb.beta.push_back(b);
        if (b <= 1e-14 * std::max(1.0, std::abs(a))) {
            lb.breakdown = true;
            break;
        }
        lb.V.push_back(w / b);
    }
    return lb;
}

inline Eigen::MatrixXd tridiagonal(const LanczosBasis& lb) {
    const auto k = static_cast<Eigen::Index>(lb.alpha.size());
    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(k, k);
    for (Eigen::Index i = 0; i < k; ++i) {
        T(i, i) = lb.alpha[static_cast<std::size_t>(i)];
        if (i + 1 < k) T(i, i + 1) = T(i + 1, i) = lb.beta[static_cast<std::size_t>(i)];
    }
    return T;
}

}  // namespace detail

/// exp(tA)v for anti-Hermitian A. Dense eigendecomposition of iA when the dimension is
/// at most dense_threshold, otherwise Lanczos on iA with adaptive substeps. Throws
/// ConvergenceError carrying the Krylov error estimate if a substep cannot meet tol.
inline Vec expm_action(const FockOperator& A, const Vec& v, double t, const ExpmOptions& opt = {}) {
    if (!A.antihermitian) throw InvariantViolation("expm_action: operator must be flagged anti-Hermitian");
    const cplx I{0.0, 1.0};
    const double nv = v.norm();
    if (nv == 0.0 || t == 0.0) return v;
    const auto n = static_cast<std::size_t>(A.entries.rows());
    if (n <= opt.dense_threshold) {
        Eigen::MatrixXcd H = I * Eigen::MatrixXcd(A.entries);
        H = 0.5 * (H + H.adjoint()).eval();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H);
        const Eigen::VectorXcd ph = (-I * t * es.eigenvalues().cast<cplx>()).array().exp();
        return es.eigenvectors() * ph.asDiagonal() * (es.eigenvectors().adjoint() * v);
    }
    const SpMat H = I * A.entries;
    Vec w = v;
    double done = 0.0, tau = t;
    std::vector<double> history;
    for (std::size_t step = 0; step < opt.max_substeps && std::abs(done) < std::abs(t); ++step) {
        if (std::abs(done + tau) > std::abs(t)) tau = t - done;
        const double nw = w.norm();
        const auto lb = detail::lanczos(H, w, opt.krylov_dim);
        const auto T = detail::tridiagonal(lb);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
        for (int attempt = 0; attempt < 60; ++attempt) {
            const Eigen::VectorXcd ph = (-I * tau * es.eigenvalues().cast<cplx>()).array().exp();
            const Eigen::VectorXcd y = es.eigenvectors().cast<cplx>() * ph.asDiagonal() *
                                       es.eigenvectors().row(0).transpose().cast<cplx>();
            const double err = lb.breakdown ? 0.0 : nw * lb.beta.back() * std::abs(y(y.size() - 1));
            if (err <= opt.tol * nv) {
                Vec next = Vec::Zero(w.size());
                for (Eigen::Index i = 0; i < y.size(); ++i) next += y(i) * lb.V[static_cast<std::size_t>(i)];
                w = nw * next;
                done += tau;
                if (err < 0.1 * opt.tol * nv && std::abs(tau) < std::abs(t)) tau *= 1.5;
                break;
            }
            history.push_back(err);
            tau *= 0.5;
            if (attempt == 59) throw ConvergenceError("expm_action: Krylov substep failed to reach tolerance", err, history);
        }
    }
    if (std::abs(done - t) > 1e-14 * std::abs(t))
        throw ConvergenceError("expm_action: substep budget exhausted", std::abs(t - done), history);
    return w;
}

struct EigenOptions {
    std::size_t dense_threshold = 4096;
    double tol = 1e-10;
    std::size_t krylov_dim = 80;
    std::size_t max_restarts = 200;
    std::uint64_t seed = 42;
};

struct EigenResult {
    double value = NAN;
    Vec vector;
    double residual = NAN;
    std::vector<double> residual_history;
    std::string method;
};

/// Lowest eigenpair of a Hermitian matrix. Dense solve up to dense_threshold, otherwise
/// explicitly restarted Lanczos with full reorthogonalisation.
inline EigenResult lowest_eigenpair(const SpMat& H, const EigenOptions& opt = {}) {
    const auto n = static_cast<std::size_t>(H.rows());
    if (n == 0) throw InvariantViolation("lowest_eigenpair: empty block");
    EigenResult res;
    if (n <= opt.dense_threshold) {
        Eigen::MatrixXcd D(H);
        D = 0.5 * (D + D.adjoint()).eval();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(D);
        res.value = es.eigenvalues()(0);
        res.vector = es.eigenvectors().col(0);
        res.residual = (H * res.vector - res.value * res.vector).norm();
        res.method = "dense";
        return res;
    }
    res.method = "lanczos";
    // Deterministic start vector from a fixed LCG stream.
    Vec x(static_cast<Eigen::Index>(n));
    std::uint64_t st = opt.seed * 6364136223846793005ULL + 1442695040888963407ULL;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        st = st * 6364136223846793005ULL + 1442695040888963407ULL;
        x(i) = static_cast<double>(st >> 11) * 0x1.0p-53 - 0.5;
    }
    const double scale = std::max(1.0, FockOperator::max_abs(H));
    for (std::size_t restart = 0; restart < opt.max_restarts; ++restart) {
        const auto lb = detail::lanczos(H, x, std::min(opt.krylov_dim, n));
        const auto T = detail::tridiagonal(lb);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
        Vec ritz = Vec::Zero(x.size());
        for (Eigen::Index i = 0; i < T.rows(); ++i)
            ritz += es.eigenvectors()(i, 0) * lb.V[static_cast<std::size_t>(i)];
        ritz /= ritz.norm();
        const double theta = es.eigenvalues()(0);
        const double r = (H * ritz - theta * ritz).norm();
        res.residual_history.push_back(r);
        res.value = theta;
        res.vector = ritz;
        res.residual = r;
        if (r <= opt.tol * scale || lb.breakdown) return res;
        if (restart > 10 && r > 0.999 * res.residual_history[restart - 10])
            throw ConvergenceError("lowest_eigenpair: Lanczos stagnated", r, res.residual_history);
        x = ritz;
    }
    throw ConvergenceError("lowest_eigenpair: restart budget exhausted", res.residual, res.residual_history);
}

/// Principal submatrix on the listed basis states.
inline SpMat restrict_to(const SpMat& M, const std::vector<std::uint64_t>& states) {
    std::vector<std::int64_t> pos(static_cast<std::size_t>(M.rows()), -1);
    for (std::size_t i = 0; i < states.size(); ++i) pos[states[i]] = static_cast<std::int64_t>(i);
    std::vector<Eigen::Triplet<cplx, std::int64_t>> trip;
    for (std::size_t j = 0; j < states.size(); ++j)
        for (SpMat::InnerIterator it(M, static_cast<Eigen::Index>(states[j])); it; ++it)
            if (pos[static_cast<std::size_t>(it.row())] >= 0)
                trip.emplace_back(pos[static_cast<std::size_t>(it.row())], static_cast<std::int64_t>(j), it.value());
    SpMat out(static_cast<std::int64_t>(states.size()), static_cast<std::int64_t>(states.size()));
    out.setFromTriplets(trip.begin(), trip.end());
    return out;
}

/// States with exactly N↑ and N↓ occupied modes.
inline std::vector<std::uint64_t> particle_sector(const FockBasis& b, std::size_t N_up, std::size_t N_down) {
    std::vector<std::uint64_t> out;
    for (std::uint64_t s = 0; s < b.dimension(); ++s)
        if (static_cast<std::size_t>(b.count(s, b.spin_mask(0))) == N_up &&
            static_cast<std::size_t>(b.count(s, b.spin_mask(1))) == N_down)
            out.push_back(s);
    return out;
}

}  // namespace hyfermi::fock
