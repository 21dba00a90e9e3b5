#pragma once

// Numerical oracles for the Huang–Yang integral.
//
// All momenta are measured in units of the larger Fermi momentum, so the
// ↑-ball has radius 1 and the ↓-ball radius y (y = x^{1/3} for the defining
// integral of F). With p along the z axis the pair denominator
//   λ_{k,p} + λ_{q,−p} = 2p² + 2p(k_z − q_z)
// depends on |k|, |q| and the two polar angles only. The azimuths contribute
// (2π)² and the cos θ_k integral is done in closed form, leaving a 3D
// cubature in (|k|, |q|, cos θ_q).
//
// For p ≥ 2 (and p ≥ 2y) both Pauli constraints hold on the whole balls; the
// integrals then only see the projections k_z = s, q_z = t with densities
// π(1 − s²) and π(y² − t²) and reduce to 2D. Beyond a cut radius the 1/p
// expansion is summed exactly from the moments of w = s − t.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "hyfermi/cubature.hpp"
#include "hyfermi/cutoff.hpp"
#include "hyfermi/error.hpp"
#include "hyfermi/hy_formula.hpp"

namespace hyfermi {

enum class PairKernel {
    inverse,          ///< ∫∫_Pauli 1/D
    inverse_squared,  ///< ∫∫_Pauli 1/D²
    gap_shift,        ///< ∫∫_Pauli [1/(D + 2ε) − 1/D]
    deficit,          ///< ∫∫_balls 1/(2p²) − ∫∫_Pauli 1/D
};

struct QuadratureSettings {
    double rel_tol = 1e-7;
    double abs_tol = 1e-12;
    std::size_t max_evals = 400'000;  ///< per inner cubature
    double p_cut = 8.0;               ///< start of the analytic large-p tail
    std::uint64_t seed = 42;

    CubatureOptions inner() const { return {abs_tol, rel_tol, max_evals, true, seed}; }
    CubatureOptions outer() const { return {abs_tol, 10.0 * rel_tol, 20'000, false, seed}; }
};

namespace detail {

inline constexpr double kPi = std::numbers::pi;

// c_k-integral of the kernel over [c1, 1] for D = E + B c_k.
inline double ck_integral(PairKernel kind, double E, double B, double c1, double eps) {
    const double lo = E + B * c1;
    const double hi = E + B;
    switch (kind) {
        case PairKernel::inverse:
        case PairKernel::deficit:
            if (B * (1.0 - c1) < 1e-12 * lo) return (1.0 - c1) / lo;
            return std::log1p(B * (1.0 - c1) / lo) / B;
        case PairKernel::inverse_squared:
            return (1.0 - c1) / (lo * hi);
        case PairKernel::gap_shift: {
            if (B * (1.0 - c1) < 1e-12 * lo) return (1.0 - c1) * (1.0 / (lo + 2.0 * eps) - 1.0 / lo);
            return (std::log1p(2.0 * eps / hi) - std::log1p(2.0 * eps / lo)) / B;
        }
    }
    return 0.0;
}

// ∫∫ over the Pauli-allowed pair domain for p below the full-ball regime.
inline QuadratureResult pauli_pair_3d(double p, double y, PairKernel kind, double eps, const QuadratureSettings& s) {
    const double k_lo = std::max(0.0, 1.0 - p);
    const double q_lo = std::max(0.0, y - p);
    std::vector<double> kb{k_lo, 1.0}, qb{q_lo, y};
    if (p - 1.0 > k_lo && p - 1.0 < 1.0) kb.insert(kb.begin() + 1, p - 1.0);
    if (p - y > q_lo && p - y < y) qb.insert(qb.begin() + 1, p - y);

    auto f = [&](const std::array<double, 3>& v) {
        const double k = v[0], q = v[1], t = v[2];
        if (k <= 0.0 || q <= 0.0) return 0.0;
        const double beta = (q * q + p * p - y * y) / (2.0 * p * q);
        const double cmax = std::min(1.0, beta);
        if (cmax <= -1.0) return 0.0;
        const double jac = cmax + 1.0;
        const double cq = -1.0 + t * jac;
        const double alpha = (1.0 - k * k - p * p) / (2.0 * p * k);
        const double c1 = std::max(-1.0, alpha);
        if (c1 >= 1.0) return 0.0;
        const double B = 2.0 * p * k;
        const double E = 2.0 * p * p - 2.0 * p * q * cq;
        return 4.0 * kPi * kPi * k * k * q * q * jac * ck_integral(kind, E, B, c1, eps);
    };

    QuadratureResult total;
    CubatureOptions opt = s.inner();
    const std::size_t boxes = (kb.size() - 1) * (qb.size() - 1);
    opt.abs_tol = s.abs_tol / static_cast<double>(boxes);
    for (std::size_t i = 0; i + 1 < kb.size(); ++i)
        for (std::size_t j = 0; j + 1 < qb.size(); ++j)
            total += integrate<3>(f, {kb[i], qb[j], 0.0}, {kb[i + 1], qb[j + 1], 1.0}, opt);
    return total;
}

// Full-ball regime: 2D integral over the z-projections s ∈ [−1,1], t ∈ [−y,y].
inline QuadratureResult full_ball_pair_2d(double p, double y, PairKernel kind, double eps,
                                          const QuadratureSettings& s) {
    auto f = [&](const std::array<double, 2>& v) {
        const double w = v[0] - v[1];
        const double dens = kPi * kPi * (1.0 - v[0] * v[0]) * (y * y - v[1] * v[1]);
        const double D = 2.0 * p * p + 2.0 * p * w;
        switch (kind) {
            case PairKernel::inverse: return dens / D;
            case PairKernel::inverse_squared: return dens / (D * D);
            case PairKernel::gap_shift: return -dens * 2.0 * eps / (D * (D + 2.0 * eps));
            case PairKernel::deficit: return dens * w / (p * D);
        }
        return 0.0;
    };
    return integrate<2>(f, {-1.0, -y}, {1.0, y}, s.inner());
}

// Moments M_n = ∫∫ π(1−s²) π(y²−t²) (s − t)^n ds dt, n even.
inline std::vector<double> projection_moments(double y, int nmax) {
    auto m = [](int j) { return (j % 2 != 0) ? 0.0 : 2.0 / (j + 1) - 2.0 / (j + 3); };
    std::vector<double> M(static_cast<std::size_t>(nmax) + 1, 0.0);
    for (int n = 0; n <= nmax; n += 2) {
        double sum = 0.0, binom = 1.0;
        for (int j = 0; j <= n; ++j) {
            const double sign = ((n - j) % 2 == 0) ? 1.0 : -1.0;
            sum += binom * m(j) * sign * m(n - j) * std::pow(y, n - j + 3);
            binom = binom * (n - j) / (j + 1);
        }
        M[static_cast<std::size_t>(n)] = kPi * kPi * sum;
    }
    return M;
}

inline int tail_terms(double y, double P) {
    // Terms decay like ((1 + y)/P)^n.
    const double ratio = (1.0 + y) / P;
    if (ratio >= 1.0) throw DomainError("tail expansion requires p_cut > 1 + y");
    const int n = static_cast<int>(std::ceil(std::log(1e-18) / std::log(ratio)));
    return std::clamp(n + (n % 2), 4, 400);
}

inline std::vector<double> p_breakpoints(double y, double hi) {
    std::vector<double> b{0.0};
    for (double c : {y, 2.0 * y, std::abs(1.0 - y), 1.0, 1.0 + y, 2.0})
        if (c > 0.0 && c < hi) b.push_back(c);
    b.push_back(hi);
    std::sort(b.begin(), b.end());
    b.erase(std::unique(b.begin(), b.end(), [](double u, double v) { return std::abs(u - v) < 1e-14; }), b.end());
    return b;
}

}  // namespace detail

/// ∫_{|k|<1<|k+p|} dk ∫_{|q|<y<|q−p|} dq of the chosen kernel, for |p| = p.
inline QuadratureResult pair_integral(double p, double y, PairKernel kind, const QuadratureSettings& s = {},
                                      double eps = 0.0) {
    if (!(p > 0.0)) throw DomainError("pair_integral: p must be > 0");
    if (!(y > 0.0 && y <= 1.0)) throw DomainError("pair_integral: y must lie in (0, 1]");
    if (p >= 2.0) return detail::full_ball_pair_2d(p, y, kind, eps, s);
    QuadratureResult r = detail::pauli_pair_3d(p, y, kind, eps, s);
    if (kind == PairKernel::deficit) r.value = 8.0 * detail::kPi * detail::kPi * y * y * y / (9.0 * p * p) - r.value;
    return r;
}

/// g(x, p) = (9/8π²) ∫∫_Pauli dk dq 1/(2p² + 2p·(k − q)), x ∈ (0, 1].
inline QuadratureResult g_pointwise(double x, double p, const QuadratureSettings& s = {}) {
    if (!(x > 0.0 && x <= 1.0)) throw DomainError("g_pointwise: x must lie in (0, 1]");
    if (!(p > 0.0)) throw DomainError("g_pointwise: p must be > 0");
    QuadratureResult r = pair_integral(p, std::cbrt(x), PairKernel::inverse, s);
    const double c = 9.0 / (8.0 * detail::kPi * detail::kPi);
    r.value *= c;
    r.error_estimate *= c;
    return r;
}

/// 4π ∫_P^∞ p² Deficit(p) dp from the moment expansion.
inline double deficit_tail(double y, double P) {
    const int nmax = detail::tail_terms(y, P);
    const auto M = detail::projection_moments(y, nmax);
    double sum = 0.0;
    for (int n = 2; n <= nmax; n += 2) sum += M[static_cast<std::size_t>(n)] * std::pow(P, 1.0 - n) / (n - 1);
    return -2.0 * detail::kPi * sum;
}

/// 4π ∫_P^∞ p² ∫∫ D^{-2} dp from the moment expansion.
inline double inverse_squared_tail(double y, double P) {
    const int nmax = detail::tail_terms(y, P);
    const auto M = detail::projection_moments(y, nmax);
    double sum = 0.0;
    for (int n = 0; n <= nmax; n += 2) sum += M[static_cast<std::size_t>(n)] * std::pow(P, -1.0 - n);
    return detail::kPi * sum;
}

/// 4π ∫_{lo}^{hi} p² w(p) K(p) dp with nested adaptive quadrature.
template <class Weight>
QuadratureResult radial_pair_integral(double y, PairKernel kind, double lo, double hi, Weight&& weight,
                                      const QuadratureSettings& s, double eps = 0.0,
                                      std::vector<double> extra_breaks = {}) {
    std::vector<double> b = detail::p_breakpoints(y, hi);
    b.insert(b.end(), extra_breaks.begin(), extra_breaks.end());
    b.push_back(lo);
    std::sort(b.begin(), b.end());
    b.erase(std::remove_if(b.begin(), b.end(), [&](double v) { return v < lo || v > hi; }), b.end());
    b.erase(std::unique(b.begin(), b.end(), [](double u, double v) { return std::abs(u - v) < 1e-14; }), b.end());

    std::size_t inner_evals = 0, nonfinite = 0;
    double inner_rel_err = 0.0;
    bool inner_ok = true;
    auto f = [&](double p) {
        const double w = weight(p);
        if (w == 0.0 || p <= 0.0) return 0.0;
        const QuadratureResult r = pair_integral(p, y, kind, s, eps);
        inner_evals += r.evaluations;
        nonfinite += r.nonfinite;
        inner_ok = inner_ok && r.converged;
        if (r.value != 0.0) inner_rel_err = std::max(inner_rel_err, r.error_estimate / std::abs(r.value));
        return 4.0 * detail::kPi * p * p * w * r.value;
    };
    QuadratureResult res = integrate_panels(f, b, s.outer());
    res.error_estimate += inner_rel_err * std::abs(res.value);
    res.evaluations += inner_evals;
    res.nonfinite += nonfinite;
    res.converged = res.converged && inner_ok;
    res.method = "nested-adaptive";
    return res;
}

/// F(x) from its defining momentum integral, independent of the closed form.
inline QuadratureResult F_quadrature(double x, const QuadratureSettings& s = {}) {
    if (!(x > 0.0)) throw DomainError("F_quadrature: x must be > 0");
    if (x > 1.0) {
        QuadratureResult r = F_quadrature(1.0 / x, s);
        const double scale = std::pow(x, 7.0 / 3.0);
        r.value *= scale;
        r.error_estimate *= scale;
        return r;
    }
    const auto t0 = std::chrono::steady_clock::now();
    const double y = std::cbrt(x);
    const double P = s.p_cut;
    QuadratureResult r = radial_pair_integral(y, PairKernel::deficit, 0.0, P, [](double) { return 1.0; }, s);
    r.value += deficit_tail(y, P);
    const double pref = 4.0 / detail::kPi * detail::six_pi_sq_cbrt() * 9.0 / (8.0 * detail::kPi * detail::kPi);
    r.value *= pref;
    r.error_estimate *= pref;
    r.elapsed = std::chrono::steady_clock::now() - t0;
    return r;
}

/// 2π − (π/2)√(a²−4b) ln|(b−1−√)/(b−1+√)| + (π/2)((a²−2b−2)/|a|) ln|(b+1−|a|)/(b+1+|a|)|,
/// the principal value of ∫_{|p|<1} dp / (p² + a p₁ + b).
inline double p_integral_quadratic(double a, double b) {
    const double disc = a * a - 4.0 * b;
    if (disc < 0.0) throw DomainError("p_integral_quadratic: requires a^2 >= 4b");
    const double sq = std::sqrt(disc);
    const double pi = detail::kPi;
    double val = 2.0 * pi;
    if (sq > 0.0) {
        const double num = b - 1.0 - sq, den = b - 1.0 + sq;
        if (num == 0.0 || den == 0.0) throw DomainError("p_integral_quadratic: logarithm argument hits zero");
        val -= pi / 2.0 * sq * std::log(std::abs(num / den));
    }
    const double aa = std::abs(a);
    if (aa == 0.0) {
        // (a² − 2b − 2)/|a| · ln|(b+1−|a|)/(b+1+|a|)| → −2(a² − 2b − 2)/(b + 1).
        if (b + 1.0 == 0.0) throw DomainError("p_integral_quadratic: logarithm argument hits zero");
        val += pi / 2.0 * (-2.0) * (-2.0 * b - 2.0) / (b + 1.0);
        return val;
    }
    const double num = b + 1.0 - aa, den = b + 1.0 + aa;
    if (num == 0.0 || den == 0.0) throw DomainError("p_integral_quadratic: logarithm argument hits zero");
    val += pi / 2.0 * ((a * a - 2.0 * b - 2.0) / aa) * std::log(std::abs(num / den));
    return val;
}

/// 2πb/a² − (π/|a|³)(a² − b²) ln|(b − |a|)/(b + |a|)|,
/// the principal value of ∫_{|p|<1} dp / (a p₁ + b).
inline double p_integral_linear(double a, double b) {
    if (a == 0.0) throw DomainError("p_integral_linear: a must be nonzero");
    const double aa = std::abs(a);
    if (b == 0.0) return 0.0;
    const double num = b - aa, den = b + aa;
    if (num == 0.0) throw DomainError("p_integral_linear: logarithm argument hits zero");
    const double pi = detail::kPi;
    return 2.0 * pi * b / (a * a) - pi / (aa * aa * aa) * (a * a - b * b) * std::log(std::abs(num / den));
}

/// Absolute residual of −8π x^{7/3} (x^{−4/3} f′)′ = 8π²(2 + x^{−1/3}(x^{2/3} − 1) ln(|1 − x^{1/3}|/(1 + x^{1/3})))
/// with both derivatives taken by centred differences of step h.
inline double ode_check_f(double x, double h, double A = 0.0) {
    if (!(x > 0.0) || !(h > 0.0)) throw DomainError("ode_check_f: x and h must be > 0");
    if (x - 2.0 * h <= 0.0) throw DomainError("ode_check_f: step too large for x");
    if (std::abs(x - 1.0) < 10.0 * h) throw DomainError("ode_check_f: x too close to 1 for step h");
    auto fp = [&](double z) { return (f_aux(z + h, A) - f_aux(z - h, A)) / (2.0 * h); };
    auto inner = [&](double z) { return std::pow(z, -4.0 / 3.0) * fp(z); };
    const double lhs = -8.0 * detail::kPi * std::pow(x, 7.0 / 3.0) * (inner(x + h) - inner(x - h)) / (2.0 * h);
    const double y = std::cbrt(x);
    const double rhs = 8.0 * detail::kPi * detail::kPi *
                       (2.0 + (y * y - 1.0) / y * std::log(std::abs(1.0 - y) / (1.0 + y)));
    return std::abs(lhs - rhs);
}

struct GapStudyRow {
    double rho = 0.0;
    double I_regularized = 0.0;
    double I_limit = 0.0;
    double diff = 0.0;  ///< |I_regularized − I_limit|, computed directly
    double I_limit_closed = 0.0;  ///< −8π⁷ ρ_maj^{7/3} F(x) from the closed form
    double error_estimate = 0.0;
    std::size_t evaluations = 0;
    bool converged = true;
};

/// Removal of the gap ε and the cut-off χ̂< from the p-integral of the
/// second-order energy. Each ρ in the grid is split as ρ↑ : ρ↓ of `params`;
/// γ and δ are taken from `cutoff`.
inline std::vector<GapStudyRow> gap_cutoff_study(const FermiParams& params, const CutoffConfig& cutoff,
                                                 const std::vector<double>& rho_grid,
                                                 const QuadratureSettings& s = {}) {
    params.validate();
    if (params.rho_up == 0.0 || params.rho_down == 0.0)
        throw InvariantViolation("gap_cutoff_study: both spin densities must be positive");
    const double ratio = std::min(params.rho_up, params.rho_down) / std::max(params.rho_up, params.rho_down);
    const double y = std::cbrt(ratio);
    const double pi = detail::kPi;

    std::vector<GapStudyRow> rows;
    for (double rho : rho_grid) {
        const CutoffConfig c(cutoff.gamma, cutoff.delta, rho);
        const double rho_major = rho / (1.0 + ratio);
        const double kF = std::cbrt(6.0 * pi * pi * rho_major);
        const double eps = c.epsilon() / (kF * kF);
        const double p_in = c.inner_radius() / kF;
        const double p_out = c.outer_radius() / kF;
        auto chi2 = [&](double p) {
            const double v = c.chi_less(p * kF);
            return v * v;
        };

        GapStudyRow row;
        row.rho = rho;
        // χ²(h_ε − h_0) over the support of χ̂<.
        QuadratureResult t1 = radial_pair_integral(y, PairKernel::gap_shift, 0.0, p_out, chi2, s, eps, {p_in});
        // (χ² − 1) h_0 = (1 − χ²) · Deficit, nonzero only beyond p_in.
        const double P = std::max(s.p_cut, p_out);
        QuadratureResult t2 = radial_pair_integral(
            y, PairKernel::deficit, p_in, P, [&](double p) { return 1.0 - chi2(p); }, s, 0.0, {p_out});
        t2.value += deficit_tail(y, P);
        // I_limit = −kF⁷ 4π ∫ p² Deficit.
        QuadratureResult lim = radial_pair_integral(y, PairKernel::deficit, 0.0, s.p_cut, [](double) { return 1.0; }, s);
        lim.value += deficit_tail(y, s.p_cut);

        const double k7 = std::pow(kF, 7);
        row.I_limit = -k7 * lim.value;
        const double d = k7 * (t1.value + t2.value);
        row.I_regularized = row.I_limit + d;
        row.diff = std::abs(d);
        row.I_limit_closed = -8.0 * std::pow(pi, 7) * std::pow(rho_major, 7.0 / 3.0) * F_closed(ratio);
        row.error_estimate = k7 * (t1.error_estimate + t2.error_estimate);
        row.evaluations = t1.evaluations + t2.evaluations + lim.evaluations;
        row.converged = t1.converged && t2.converged && lim.converged;
        rows.push_back(row);
    }
    return rows;
}

/// Least-squares slope of log(ys) against log(xs).
inline double loglog_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
    if (xs.size() != ys.size() || xs.size() < 2) throw DomainError("loglog_slope: need at least two points");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (!(xs[i] > 0.0) || !(ys[i] > 0.0)) throw DomainError("loglog_slope: values must be positive");
        const double lx = std::log(xs[i]), ly = std::log(ys[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

struct LatticeSumRow {
    double L = 0.0;
    double sum_value = 0.0;
    double integral_value = 0.0;
    double diff = 0.0;
};

/// (1/L³) Σ_{0≠p∈(2π/L)ℤ³} χ̂<(p)²/(2p²) against (2π)^{-3} ∫ χ̂<(p)²/(2p²) dp.
inline std::vector<LatticeSumRow> lattice_sum_convergence(const std::vector<double>& L_grid, const CutoffConfig& c) {
    c.validate();
    const double pmax = c.outer_radius();
    auto chi2 = [&](double p) {
        const double v = c.chi_less(p);
        return v * v;
    };
    // (2π)^{-3} 4π ∫ χ²/2 dp = (1/4π²) ∫₀^{5s} χ² dp.
    const double integral =
        integrate_panels(chi2, {0.0, c.inner_radius(), pmax}, {1e-15, 1e-13, 100'000, false, 42}).value /
        (4.0 * detail::kPi * detail::kPi);

    std::vector<LatticeSumRow> rows;
    for (double L : L_grid) {
        if (!(L > 0.0)) throw DomainError("lattice_sum_convergence: L must be > 0");
        const double unit = 2.0 * detail::kPi / L;
        const long nmax = static_cast<long>(std::floor(pmax / unit));
        // Accumulate per |n|² shell so the summation order is fixed.
        std::vector<long> shell(static_cast<std::size_t>(nmax * nmax) + 1, 0);
        for (long i = -nmax; i <= nmax; ++i)
            for (long j = -nmax; j <= nmax; ++j) {
                const long ij = i * i + j * j;
                if (ij > nmax * nmax) continue;
                for (long k = -nmax; k <= nmax; ++k) {
                    const long n2 = ij + k * k;
                    if (n2 > 0 && n2 <= nmax * nmax) ++shell[static_cast<std::size_t>(n2)];
                }
            }
        double sum = 0.0;
        for (std::size_t n2 = 1; n2 < shell.size(); ++n2) {
            if (shell[n2] == 0) continue;
            const double p2 = unit * unit * static_cast<double>(n2);
            sum += static_cast<double>(shell[n2]) * chi2(std::sqrt(p2)) / (2.0 * p2);
        }
        sum /= L * L * L;
        rows.push_back({L, sum, integral, std::abs(sum - integral)});
    }
    return rows;
}

struct SingularBoundRow {
    double x = 0.0;
    double value = 0.0;
    double error_estimate = 0.0;
    std::size_t evaluations = 0;
    bool converged = true;
};

/// ∫dp ∫_{|r|<1<|r+p|} dr ∫_{|r'|<x<|r'−p|} dr' (λ_{r,p} + λ_{r',−p})^{−2}.
/// The |p| > p_cut part is summed exactly from the 1/p expansion.
inline std::vector<SingularBoundRow> singular_integral_bound(const std::vector<double>& x_grid,
                                                             const QuadratureSettings& s = {}) {
    std::vector<SingularBoundRow> rows;
    for (double x : x_grid) {
        if (!(x > 0.0 && x <= 1.0)) throw DomainError("singular_integral_bound: x must lie in (0, 1]");
        QuadratureResult r =
            radial_pair_integral(x, PairKernel::inverse_squared, 0.0, s.p_cut, [](double) { return 1.0; }, s);
        r.value += inverse_squared_tail(x, s.p_cut);
        rows.push_back({x, r.value, r.error_estimate, r.evaluations, r.converged});
    }
    return rows;
}

}  // namespace hyfermi
