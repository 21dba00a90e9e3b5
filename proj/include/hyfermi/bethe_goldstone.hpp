#pragma once

// Nyström solver for the Bethe–Goldstone equation
//
//   G(p) = 𝓕V(p) − (2π)^{-3} ∫_Pauli dq 𝓕V(p − q) G(q) / (λ_{r,q} + λ_{r',−q}),
//
// Pauli domain |r + q| ≥ kF↑, |r' − q| ≥ kF↓, and φ̂_{r,r'}(p) = G(p)/(λ_{r,p} + λ_{r',−p}).
//
// Three reductions, chosen by the geometry of (r, r'):
//   spherical      r = r' = 0: G depends on |p| only and the angular integral
//                  is W(p+q) − W(|p−q|) with W(k) = ∫₀^k t 𝓕V(t) dt.
//   axisymmetric   r ∥ r': G depends on (|p|, cos θ); the azimuth is
//                  integrated by the trapezoid rule inside the kernel.
//   general        full 3D product grid.
// Radial nodes are Gauss–Legendre on uniform panels, polar nodes Gauss–Legendre
// in cos θ, azimuthal nodes equispaced.

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "hyfermi/cubature.hpp"
#include "hyfermi/cutoff.hpp"
#include "hyfermi/error.hpp"
#include "hyfermi/potentials.hpp"

namespace hyfermi {

enum class BGMode { automatic, spherical, axisymmetric, general };

struct BGGrid {
    std::size_t radial_panels = 48;
    std::size_t panel_nodes = 8;
    std::size_t n_polar = 12;
    std::size_t n_azimuth = 16;
    double q_max = 0.0;  ///< 0 selects 60/R
    std::size_t max_iterations = 400;
    double tol = 1e-12;
    BGMode mode = BGMode::automatic;
};

struct BGSolution {
    std::string mode;
    std::string method;  ///< "fixed-point", "direct-lu" or "zeroth-order"
    std::vector<Vec3> nodes;
    std::vector<double> weights;  ///< quadrature weights (including q² measure)
    std::vector<bool> pauli;      ///< node inside the Pauli-allowed domain
    std::vector<double> FV;       ///< 𝓕V at the nodes
    std::vector<double> G;
    std::vector<double> phi_hat;  ///< G/(λ_{r,p} + λ_{r',−p}) on the Pauli domain, 0 elsewhere
    double residual = 0.0;        ///< ‖G − (𝓕V − K G)‖∞
    std::vector<double> residual_history;
    std::size_t iterations = 0;
    double condition_estimate = NAN;
    bool converged = false;
};

namespace detail {

inline std::vector<std::pair<double, double>> radial_nodes(double lo, double hi, const BGGrid& g) {
    const auto [x, w] = gauss_legendre(g.panel_nodes);
    std::vector<std::pair<double, double>> out;
    const double width = (hi - lo) / static_cast<double>(g.radial_panels);
    for (std::size_t k = 0; k < g.radial_panels; ++k) {
        const double a = lo + width * static_cast<double>(k);
        for (std::size_t i = 0; i < x.size(); ++i) out.emplace_back(a + 0.5 * width * (x[i] + 1.0), 0.5 * width * w[i]);
    }
    return out;
}

inline bool parallel(const Vec3& a, const Vec3& b) {
    const Vec3 c{a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
    return norm(c) <= 1e-14 * std::max(1.0, norm(a) * norm(b));
}

}  // namespace detail

inline BGSolution bethe_goldstone_solve(const RadialPotential& pot, double kF_up, double kF_down, const Vec3& r,
                                        const Vec3& rp, const BGGrid& grid = {}) {
    pot.validate();
    if (!(kF_up >= 0.0) || !(kF_down >= 0.0)) throw InvariantViolation("bethe_goldstone_solve: kF must be >= 0");
    if (norm(r) > kF_up || norm(rp) > kF_down)
        throw InvariantViolation("bethe_goldstone_solve: r and r' must lie inside their Fermi balls");
    if (grid.radial_panels == 0 || grid.panel_nodes == 0) throw InvariantViolation("bethe_goldstone_solve: empty grid");

    const double pi = std::numbers::pi;
    const double q_max = grid.q_max > 0.0 ? grid.q_max : 60.0 / pot.R();
    BGMode mode = grid.mode;
    if (mode == BGMode::automatic) {
        if (norm(r) == 0.0 && norm(rp) == 0.0) mode = BGMode::spherical;
        else if (detail::parallel(r, rp)) mode = BGMode::axisymmetric;
        else mode = BGMode::general;
    }
    if (mode == BGMode::spherical && (norm(r) > 0.0 || norm(rp) > 0.0))
        throw InvariantViolation("bethe_goldstone_solve: spherical mode requires r = r' = 0");
    if (mode == BGMode::axisymmetric && !detail::parallel(r, rp))
        throw InvariantViolation("bethe_goldstone_solve: axisymmetric mode requires r parallel to r'");

    const FourierTable table(pot, 2.0 * q_max + 1.0);
    const Vec3 d = r - rp;
    auto denom = [&](const Vec3& q) { return 2.0 * norm2(q) + 2.0 * (q[0] * d[0] + q[1] * d[1] + q[2] * d[2]); };
    auto allowed = [&](const Vec3& q) { return norm(r + q) >= kF_up && norm(rp - q) >= kF_down; };

    BGSolution sol;
    Eigen::MatrixXd K;

    // Axis for the axisymmetric and general grids.
    Vec3 ez{0.0, 0.0, 1.0};
    if (norm(r) > 0.0) ez = (1.0 / norm(r)) * r;
    else if (norm(rp) > 0.0) ez = (1.0 / norm(rp)) * rp;
    Vec3 ex = std::abs(ez[0]) < 0.9 ? Vec3{1.0, 0.0, 0.0} : Vec3{0.0, 1.0, 0.0};
    {
        const double dot = ex[0] * ez[0] + ex[1] * ez[1] + ex[2] * ez[2];
        ex = ex - dot * ez;
        ex = (1.0 / norm(ex)) * ex;
    }
    const Vec3 ey{ez[1] * ex[2] - ez[2] * ex[1], ez[2] * ex[0] - ez[0] * ex[2], ez[0] * ex[1] - ez[1] * ex[0]};
    auto point = [&](double q, double c, double phi) {
        const double s = std::sqrt(std::max(0.0, 1.0 - c * c));
        return (q * c) * ez + (q * s * std::cos(phi)) * ex + (q * s * std::sin(phi)) * ey;
    };

    if (mode == BGMode::spherical) {
        sol.mode = "spherical";
        const double q_lo = std::max(kF_up, kF_down);
        const auto rad = detail::radial_nodes(q_lo, q_max, grid);
        const std::size_t n = rad.size();
        for (const auto& [q, w] : rad) {
            sol.nodes.push_back({0.0, 0.0, q});
            sol.weights.push_back(4.0 * pi * q * q * w);
            sol.pauli.push_back(true);
        }
        K.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
        for (std::size_t i = 0; i < n; ++i) {
            const double p = rad[i].first;
            for (std::size_t j = 0; j < n; ++j) {
                const double q = rad[j].first;
                K(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                    rad[j].second * (table.W(p + q) - table.W(p - q)) / (8.0 * pi * pi * p * q);
            }
        }
    } else if (mode == BGMode::axisymmetric) {
        sol.mode = "axisymmetric";
        const auto rad = detail::radial_nodes(0.0, q_max, grid);
        const auto [cx, cw] = gauss_legendre(grid.n_polar);
        struct Node {
            double q, c, w;
        };
        std::vector<Node> nodes;
        for (const auto& [q, wq] : rad)
            for (std::size_t j = 0; j < cx.size(); ++j) {
                nodes.push_back({q, cx[j], 2.0 * pi * q * q * wq * cw[j]});
                const Vec3 v = point(q, cx[j], 0.0);
                sol.nodes.push_back(v);
                sol.weights.push_back(nodes.back().w);
                sol.pauli.push_back(allowed(v));
            }
        const std::size_t n = nodes.size(), m = grid.n_azimuth;
        K.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
        std::vector<double> cosphi(m);
        for (std::size_t k = 0; k < m; ++k) cosphi[k] = std::cos(2.0 * pi * static_cast<double>(k) / static_cast<double>(m));
        for (std::size_t i = 0; i < n; ++i) {
            const double p = nodes[i].q, cp = nodes[i].c, sp = std::sqrt(std::max(0.0, 1.0 - cp * cp));
            for (std::size_t j = 0; j < n; ++j) {
                double entry = 0.0;
                if (sol.pauli[j]) {
                    const double q = nodes[j].q, cq = nodes[j].c, sq = std::sqrt(std::max(0.0, 1.0 - cq * cq));
                    double avg = 0.0;
                    for (std::size_t k = 0; k < m; ++k) {
                        const double k2 = p * p + q * q - 2.0 * p * q * (cp * cq + sp * sq * cosphi[k]);
                        avg += table.FV(std::sqrt(std::max(0.0, k2)));
                    }
                    avg /= static_cast<double>(m);
                    entry = nodes[j].w * avg / denom(sol.nodes[j]) / (8.0 * pi * pi * pi);
                }
                K(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = entry;
            }
        }
    } else {
        sol.mode = "general";
        const auto rad = detail::radial_nodes(0.0, q_max, grid);
        const auto [cx, cw] = gauss_legendre(grid.n_polar);
        const std::size_t m = grid.n_azimuth;
        for (const auto& [q, wq] : rad)
            for (std::size_t j = 0; j < cx.size(); ++j)
                for (std::size_t k = 0; k < m; ++k) {
                    const double phi = 2.0 * pi * static_cast<double>(k) / static_cast<double>(m);
                    const Vec3 v = point(q, cx[j], phi);
                    sol.nodes.push_back(v);
                    sol.weights.push_back(q * q * wq * cw[j] * 2.0 * pi / static_cast<double>(m));
                    sol.pauli.push_back(allowed(v));
                }
        const std::size_t n = sol.nodes.size();
        K.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) {
                double entry = 0.0;
                if (sol.pauli[j])
                    entry = sol.weights[j] * table.FV(norm(sol.nodes[i] - sol.nodes[j])) / denom(sol.nodes[j]) /
                            (8.0 * pi * pi * pi);
                K(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = entry;
            }
    }

    const Eigen::Index n = static_cast<Eigen::Index>(sol.nodes.size());
    Eigen::VectorXd fv(n);
    for (Eigen::Index i = 0; i < n; ++i) fv(i) = table.FV(norm(sol.nodes[static_cast<std::size_t>(i)]));
    auto residual_of = [&](const Eigen::VectorXd& g) { return (g - (fv - K * g)).cwiseAbs().maxCoeff(); };

    Eigen::VectorXd G = fv;
    if (grid.max_iterations == 0) {
        sol.method = "zeroth-order";
        sol.residual = residual_of(G);
        sol.converged = false;
    } else {
        const double scale = std::max(1.0, fv.cwiseAbs().maxCoeff());
        bool ok = false;
        for (std::size_t it = 1; it <= grid.max_iterations; ++it) {
            G = fv - K * G;
            const double res = residual_of(G);
            sol.residual_history.push_back(res);
            sol.iterations = it;
            if (!std::isfinite(res)) break;
            if (res <= grid.tol * scale) {
                ok = true;
                break;
            }
            // Diverging: the kernel norm exceeds one.
            if (it > 5 && res > 10.0 * sol.residual_history[it - 6]) break;
        }
        const bool small = n <= 3000;
        if (ok) {
            sol.method = "fixed-point";
        } else {
            sol.method = "direct-lu";
            Eigen::MatrixXd A = Eigen::MatrixXd::Identity(n, n) + K;
            Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);
            G = lu.solve(fv);
            sol.condition_estimate = 1.0 / lu.rcond();
        }
        if (ok && small) {
            Eigen::PartialPivLU<Eigen::MatrixXd> lu(Eigen::MatrixXd::Identity(n, n) + K);
            sol.condition_estimate = 1.0 / lu.rcond();
        }
        sol.residual = residual_of(G);
        sol.converged = std::isfinite(sol.residual) && sol.residual <= 1e3 * grid.tol * scale;
    }

    sol.FV.assign(fv.data(), fv.data() + n);
    sol.G.assign(G.data(), G.data() + n);
    sol.phi_hat.resize(static_cast<std::size_t>(n), 0.0);
    for (std::size_t i = 0; i < static_cast<std::size_t>(n); ++i) {
        const double D = denom(sol.nodes[i]);
        if (sol.pauli[i] && D > 0.0) sol.phi_hat[i] = sol.G[i] / D;
    }
    return sol;
}

}  // namespace hyfermi
