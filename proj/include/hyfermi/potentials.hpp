#pragma once

// Radial potentials, the zero-energy scattering solution and its Fourier data.
//
// The scattering equation 2Δφ∞ + V(1 − φ∞) = 0 is solved through the radial
// reduction u(r) = r(1 − φ∞(r)), u'' = (V/2)u, u(0) = 0. The stored profile is
// normalised so that u(r) = r − a beyond the range of V.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>
#include <numbers>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/interpolators/cardinal_cubic_b_spline.hpp>
#include <json.hpp>

#include "hyfermi/cubature.hpp"
#include "hyfermi/cutoff.hpp"
#include "hyfermi/error.hpp"

namespace hyfermi {

enum class PotentialKind { square_well, truncated_gaussian, tabulated };

inline std::string to_string(PotentialKind k) {
    switch (k) {
        case PotentialKind::square_well: return "square-well";
        case PotentialKind::truncated_gaussian: return "truncated-gaussian";
        case PotentialKind::tabulated: return "tabulated";
    }
    return "unknown";
}

inline PotentialKind potential_kind_from_string(const std::string& s) {
    if (s == "square-well") return PotentialKind::square_well;
    if (s == "truncated-gaussian") return PotentialKind::truncated_gaussian;
    if (s == "tabulated") return PotentialKind::tabulated;
    throw InvariantViolation("unknown potential kind '" + s + "'");
}

/// Nonnegative radial potential supported in [0, R].
///
/// square-well:        V0 for r ≤ R.
/// truncated-gaussian: V0 exp(−r²/(2s²)) for r ≤ R with s = R/4.
/// tabulated:          linear between samples, constant before the first and
///                     after the last sample, zero beyond R.
class RadialPotential {
public:
    using Sample = std::pair<double, double>;

    RadialPotential() = default;
    RadialPotential(PotentialKind kind, double V0, double R, std::vector<Sample> samples = {})
        : kind_(kind), V0_(V0), R_(R), samples_(std::move(samples)) {
        validate();
    }

    static RadialPotential square_well(double V0, double R) { return {PotentialKind::square_well, V0, R}; }
    static RadialPotential truncated_gaussian(double V0, double R) {
        return {PotentialKind::truncated_gaussian, V0, R};
    }
    static RadialPotential tabulated(std::vector<Sample> samples, double R) {
        return {PotentialKind::tabulated, 0.0, R, std::move(samples)};
    }

    void validate() const {
        if (!(R_ > 0.0) || !std::isfinite(R_)) throw InvariantViolation("RadialPotential: range R must be > 0");
        if (kind_ == PotentialKind::tabulated) {
            if (samples_.empty()) throw InvariantViolation("RadialPotential: tabulated kind needs samples");
            for (std::size_t i = 0; i < samples_.size(); ++i) {
                const auto& [r, v] = samples_[i];
                if (!(r >= 0.0)) throw InvariantViolation("RadialPotential: sample radius must be >= 0");
                if (!(v >= 0.0) || !std::isfinite(v))
                    throw InvariantViolation("RadialPotential: negative potential sample at r = " + std::to_string(r));
                if (i > 0 && !(r > samples_[i - 1].first))
                    throw InvariantViolation("RadialPotential: sample radii must be strictly increasing");
            }
            if (samples_.back().first > R_) throw InvariantViolation("RadialPotential: last sample radius exceeds R");
        } else if (!(V0_ >= 0.0) || !std::isfinite(V0_)) {
            throw InvariantViolation("RadialPotential: amplitude V0 must be >= 0");
        }
    }

    PotentialKind kind() const { return kind_; }
    double V0() const { return V0_; }
    double R() const { return R_; }
    const std::vector<Sample>& samples() const { return samples_; }
    double gaussian_width() const { return R_ / 4.0; }

    /// V(r); the value at r = R is the inner limit.
    double operator()(double r) const {
        if (r > R_) return 0.0;
        switch (kind_) {
            case PotentialKind::square_well: return V0_;
            case PotentialKind::truncated_gaussian: {
                const double s = gaussian_width();
                return V0_ * std::exp(-r * r / (2.0 * s * s));
            }
            case PotentialKind::tabulated: {
                if (r <= samples_.front().first) return samples_.front().second;
                if (r >= samples_.back().first) return samples_.back().second;
                const auto it = std::upper_bound(samples_.begin(), samples_.end(), r,
                                                 [](double v, const Sample& s) { return v < s.first; });
                const auto& [r1, v1] = *it;
                const auto& [r0, v0] = *(it - 1);
                return v0 + (v1 - v0) * (r - r0) / (r1 - r0);
            }
        }
        return 0.0;
    }

    /// Radii in (0, R) where V has a kink, followed by R.
    std::vector<double> breakpoints() const {
        std::vector<double> b;
        if (kind_ == PotentialKind::tabulated)
            for (const auto& s : samples_)
                if (s.first > 0.0 && s.first < R_) b.push_back(s.first);
        b.push_back(R_);
        return b;
    }

    bool is_zero() const {
        if (kind_ == PotentialKind::tabulated)
            return std::all_of(samples_.begin(), samples_.end(), [](const Sample& s) { return s.second == 0.0; });
        return V0_ == 0.0;
    }

    nlohmann::json to_json() const {
        nlohmann::json j{{"kind", to_string(kind_)}, {"R", R_}};
        if (kind_ == PotentialKind::tabulated) {
            nlohmann::json arr = nlohmann::json::array();
            for (const auto& [r, v] : samples_) arr.push_back({r, v});
            j["samples"] = arr;
        } else {
            j["V0"] = V0_;
        }
        return j;
    }

    static RadialPotential from_json(const nlohmann::json& j) {
        if (!j.contains("kind") || !j.contains("R"))
            throw InvariantViolation("potential JSON needs 'kind' and 'R'");
        const PotentialKind kind = potential_kind_from_string(j.at("kind").get<std::string>());
        const double R = j.at("R").get<double>();
        if (kind == PotentialKind::tabulated) {
            std::vector<Sample> s;
            for (const auto& e : j.at("samples")) s.emplace_back(e.at(0).get<double>(), e.at(1).get<double>());
            return tabulated(std::move(s), R);
        }
        return {kind, j.at("V0").get<double>(), R};
    }

private:
    PotentialKind kind_ = PotentialKind::square_well;
    double V0_ = 0.0;
    double R_ = 1.0;
    std::vector<Sample> samples_;
};

/// (8π)^{-1} ∫ V over ℝ³ = (1/2) ∫₀^R r² V(r) dr; an upper bound for a.
inline double born_length(const RadialPotential& V) {
    const double R = V.R();
    switch (V.kind()) {
        case PotentialKind::square_well: return V.V0() * R * R * R / 6.0;
        case PotentialKind::truncated_gaussian: {
            const double s = V.gaussian_width();
            const double z = R / s;
            const double m2 = s * s * s * (std::sqrt(std::numbers::pi / 2.0) * std::erf(z / std::numbers::sqrt2) -
                                           z * std::exp(-z * z / 2.0));
            return 0.5 * V.V0() * m2;
        }
        case PotentialKind::tabulated: {
            // Exact integral of r² times the piecewise-linear profile.
            std::vector<double> knots{0.0};
            for (double b : V.breakpoints()) knots.push_back(b);
            const auto& s = V.samples();
            if (s.front().first > 0.0 && s.front().first < R) knots.push_back(s.front().first);
            std::sort(knots.begin(), knots.end());
            knots.erase(std::unique(knots.begin(), knots.end()), knots.end());
            double sum = 0.0;
            for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
                const double r0 = knots[i], r1 = knots[i + 1];
                const double v0 = V(r0 + 0.0), v1 = V(r1);
                const double slope = (v1 - v0) / (r1 - r0);
                const double c = v0 - slope * r0;
                sum += c * (r1 * r1 * r1 - r0 * r0 * r0) / 3.0 + slope * (r1 * r1 * r1 * r1 - r0 * r0 * r0 * r0) / 4.0;
            }
            return 0.5 * sum;
        }
    }
    return 0.0;
}

struct RadialGrid {
    double step = 0.0;             ///< target RK4 step; 0 selects R/4000
    double matching_radius = 0.0;  ///< ≥ R; 0 selects R
    double tol = 1e-9;             ///< relative tolerance on a from step halving
};

/// Zero-energy scattering solution on the RK4 grid.
class ScatteringSolution {
public:
    double a = 0.0;
    double matching_radius = 0.0;
    double error_estimate = 0.0;
    std::vector<double> r;   ///< nodes, including every breakpoint
    std::vector<double> u;   ///< normalised u(r) = r(1 − φ∞(r))
    std::vector<double> du;  ///< u'(r)
    std::vector<double> V;   ///< V at the nodes (inner limit at breakpoints)
    std::vector<std::size_t> segment_starts;  ///< node index of each segment start; last entry = last node

    double u_at(double x) const {
        if (x >= matching_radius) return x - a;
        if (x <= 0.0) return 0.0;
        const auto it = std::upper_bound(r.begin(), r.end(), x);
        const std::size_t i = static_cast<std::size_t>(std::max<std::ptrdiff_t>(1, it - r.begin())) - 1;
        const std::size_t j = std::min(i + 1, r.size() - 1);
        const double h = r[j] - r[i];
        if (h <= 0.0) return u[i];
        const double t = (x - r[i]) / h;
        const double h00 = (1 + 2 * t) * (1 - t) * (1 - t), h10 = t * (1 - t) * (1 - t);
        const double h01 = t * t * (3 - 2 * t), h11 = t * t * (t - 1);
        return h00 * u[i] + h10 * h * du[i] + h01 * u[j] + h11 * h * du[j];
    }

    /// φ∞(x) = 1 − u(x)/x, equal to a/x beyond the matching radius.
    double phi(double x) const {
        if (x >= matching_radius) return a / x;
        if (x <= 0.0) return 1.0 - du.front();
        return 1.0 - u_at(x) / x;
    }

    /// 𝓕(V∞ f∞)(p) = (4π/p) ∫ V u sin(pr) dr, by composite Simpson per segment.
    double fourier_Vf(double p) const {
        double sum = 0.0;
        for (std::size_t s = 0; s + 1 < segment_starts.size(); ++s) {
            const std::size_t i0 = segment_starts[s], i1 = segment_starts[s + 1];
            if (i1 <= i0) continue;
            const double h = (r[i1] - r[i0]) / static_cast<double>(i1 - i0);
            auto f = [&](std::size_t i, double vi) {
                const double kern = (p == 0.0) ? r[i] : std::sin(p * r[i]) / p;
                return vi * u[i] * kern;
            };
            // Breakpoint nodes carry the inner limit, so segment ends use the
            // neighbouring segment's value only through V_right below.
            double acc = f(i0, V_right_at(s)) + f(i1, V[i1]);
            for (std::size_t i = i0 + 1; i < i1; ++i) acc += ((i - i0) % 2 == 1 ? 4.0 : 2.0) * f(i, V[i]);
            sum += acc * h / 3.0;
        }
        return 4.0 * std::numbers::pi * sum;
    }

    /// 𝓕(φ∞)(p) = 𝓕(V∞ f∞)(p) / (2p²), p > 0.
    double fourier_phi(double p) const {
        if (!(p > 0.0)) throw DomainError("fourier_phi: p must be > 0");
        return fourier_Vf(p) / (2.0 * p * p);
    }

    /// CSV with columns r, u, phi.
    void write_csv(std::ostream& os) const {
        os << "r,u,phi\n";
        char buf[96];
        for (std::size_t i = 0; i < r.size(); ++i) {
            const double ph = (r[i] == 0.0) ? 1.0 - du[i] : 1.0 - u[i] / r[i];
            std::snprintf(buf, sizeof buf, "%.10g,%.12g,%.12g\n", r[i], u[i], ph);
            os << buf;
        }
    }

    std::vector<double> V_right;  ///< V at each segment start, outer limit

private:
    double V_right_at(std::size_t s) const { return V_right.empty() ? V[segment_starts[s]] : V_right[s]; }
};

namespace detail {

struct RawScatter {
    double a, c;
    ScatteringSolution sol;
};

inline RawScatter integrate_radial(const RadialPotential& pot, double step, double rmatch) {
    std::vector<double> knots{0.0};
    for (double b : pot.breakpoints()) knots.push_back(b);
    if (rmatch > pot.R()) knots.push_back(rmatch);

    ScatteringSolution sol;
    double u = 0.0, du = 1.0;
    sol.r.push_back(0.0);
    sol.u.push_back(u);
    sol.du.push_back(du);
    sol.V.push_back(pot(0.0));
    sol.segment_starts.push_back(0);
    for (std::size_t k = 0; k + 1 < knots.size(); ++k) {
        const double lo = knots[k], hi = knots[k + 1];
        std::size_t n = std::max<std::size_t>(2, static_cast<std::size_t>(std::ceil((hi - lo) / step)));
        n += n % 2;
        const double h = (hi - lo) / static_cast<double>(n);
        // V restricted to [lo, hi]: outer limit at lo, inner limit at hi.
        const double eps = 1e-13 * std::max(1.0, hi);
        auto Vseg = [&](double x) { return pot(std::max(x, lo + eps)); };
        const double v_lo = pot(lo + eps);
        sol.V_right.push_back(lo >= pot.R() ? 0.0 : v_lo);
        for (std::size_t i = 0; i < n; ++i) {
            const double x = lo + static_cast<double>(i) * h;
            auto F = [&](double xx, double uu, double vv) { return std::pair{vv, 0.5 * Vseg(xx) * uu}; };
            const auto [k1u, k1v] = F(x, u, du);
            const auto [k2u, k2v] = F(x + h / 2, u + h / 2 * k1u, du + h / 2 * k1v);
            const auto [k3u, k3v] = F(x + h / 2, u + h / 2 * k2u, du + h / 2 * k2v);
            const auto [k4u, k4v] = F(x + h, u + h * k3u, du + h * k3v);
            u += h / 6 * (k1u + 2 * k2u + 2 * k3u + k4u);
            du += h / 6 * (k1v + 2 * k2v + 2 * k3v + k4v);
            if (!std::isfinite(u) || !std::isfinite(du))
                throw ConvergenceError("solve_scattering: integration overflow", INFINITY);
            const double xn = lo + static_cast<double>(i + 1) * h;
            sol.r.push_back(xn);
            sol.u.push_back(u);
            sol.du.push_back(du);
            sol.V.push_back(Vseg(xn));
        }
        sol.segment_starts.push_back(sol.r.size() - 1);
    }
    const double c = sol.du.back();
    const double a = rmatch - sol.u.back() / c;
    for (auto& v : sol.u) v /= c;
    for (auto& v : sol.du) v /= c;
    sol.a = a;
    sol.matching_radius = rmatch;
    return {a, c, std::move(sol)};
}

}  // namespace detail

/// Solves u'' = (V/2)u with u(0) = 0, u'(0) = 1 by fixed-step RK4 and reads
/// a = r − u/u' at the matching radius. The step is validated by halving.
inline ScatteringSolution solve_scattering(const RadialPotential& pot, const RadialGrid& grid = {}) {
    pot.validate();
    const double rmatch = grid.matching_radius > 0.0 ? grid.matching_radius : pot.R();
    if (rmatch < pot.R()) throw InvariantViolation("solve_scattering: matching radius must be >= R");
    const double step = grid.step > 0.0 ? grid.step : pot.R() / 4000.0;
    auto fine = detail::integrate_radial(pot, step, rmatch);
    const auto coarse = detail::integrate_radial(pot, 2.0 * step, rmatch);
    // RK4 is fourth order: the fine-grid error is about |a_h − a_2h| / 15.
    const double err = std::abs(fine.a - coarse.a) / 15.0;
    fine.sol.error_estimate = err;
    if (err > grid.tol * std::max(std::abs(fine.a), pot.R()))
        throw ConvergenceError("solve_scattering: step too large for requested tolerance", err);
    return std::move(fine.sol);
}

/// 𝓕(V∞)(p) = 4π ∫ r² V(r) sin(pr)/(pr) dr.
inline double fourier_V(const RadialPotential& pot, double p) {
    const double pi = std::numbers::pi;
    if (pot.kind() == PotentialKind::square_well) {
        const double R = pot.R(), x = p * R;
        if (x < 1e-3) return 4.0 * pi * pot.V0() * R * R * R * (1.0 / 3.0 - x * x / 30.0 + x * x * x * x / 840.0);
        return 4.0 * pi * pot.V0() * (std::sin(x) - x * std::cos(x)) / (p * p * p);
    }
    auto f = [&](double r) {
        const double x = p * r;
        const double sinc = (x < 1e-4) ? 1.0 - x * x / 6.0 : std::sin(x) / x;
        return r * r * pot(r) * sinc;
    };
    std::vector<double> b{0.0};
    for (double v : pot.breakpoints()) b.push_back(v);
    return 4.0 * pi * integrate_panels(f, b, {1e-15, 1e-13, 200'000, false, 42}).value;
}

/// W(k) = ∫₀^k t 𝓕(V∞)(t) dt = 4π ∫ V(r)(1 − cos kr) dr.
inline double fourier_V_moment(const RadialPotential& pot, double k) {
    const double pi = std::numbers::pi;
    if (pot.kind() == PotentialKind::square_well) {
        const double R = pot.R(), x = k * R;
        if (x < 1e-3) return 4.0 * pi * pot.V0() * R * (x * x / 6.0 - x * x * x * x / 120.0);
        return 4.0 * pi * pot.V0() * (R - std::sin(x) / k);
    }
    auto f = [&](double r) {
        const double s = std::sin(0.5 * k * r);
        return pot(r) * 2.0 * s * s;
    };
    std::vector<double> b{0.0};
    for (double v : pot.breakpoints()) b.push_back(v);
    return 4.0 * pi * integrate_panels(f, b, {1e-16, 1e-13, 200'000, false, 42}).value;
}

/// Cached 𝓕(V∞) and its first moment W on [0, k_max]; closed forms are used
/// for the square well, cubic B-spline tables otherwise.
class FourierTable {
public:
    FourierTable(const RadialPotential& pot, double k_max, double h = 0.0) : pot_(pot), k_max_(k_max) {
        if (pot.kind() == PotentialKind::square_well) return;
        if (h <= 0.0) h = 0.01 / pot.R();
        const std::size_t n = static_cast<std::size_t>(std::ceil(k_max / h)) + 4;
        std::vector<double> fv(n), w(n);
        for (std::size_t i = 0; i < n; ++i) {
            fv[i] = fourier_V(pot, h * static_cast<double>(i));
            w[i] = fourier_V_moment(pot, h * static_cast<double>(i));
        }
        // Both are even/odd-symmetric about k = 0 with vanishing odd derivatives
        // (FV) or vanishing value and slope (W).
        fv_ = std::make_shared<Spline>(fv.begin(), fv.end(), 0.0, h, 0.0);
        w_ = std::make_shared<Spline>(w.begin(), w.end(), 0.0, h, 0.0);
        h_ = h;
    }

    double FV(double k) const {
        k = std::abs(k);
        if (!fv_) return fourier_V(pot_, k);
        check(k);
        return (*fv_)(k);
    }

    double W(double k) const {
        k = std::abs(k);
        if (!w_) return fourier_V_moment(pot_, k);
        check(k);
        return (*w_)(k);
    }

    double k_max() const { return k_max_; }

private:
    using Spline = boost::math::interpolators::cardinal_cubic_b_spline<double>;
    void check(double k) const {
        if (k > k_max_ + 2.0 * h_) throw DomainError("FourierTable: momentum beyond table range");
    }
    RadialPotential pot_;
    double k_max_;
    double h_ = 0.0;
    std::shared_ptr<Spline> fv_, w_;
};

/// Periodic scattering function on the torus of side L with φ̂(0) = 0 and,
/// optionally, the high-momentum part φ̃ (coefficients times χ̂>).
class PeriodicScatteringFunction {
public:
    PeriodicScatteringFunction(std::shared_ptr<const ScatteringSolution> sol, RadialPotential pot, double L,
                               std::optional<CutoffConfig> cutoff)
        : sol_(std::move(sol)), pot_(std::move(pot)), L_(L), cutoff_(cutoff) {
        if (!(L_ > 0.0) || pot_.R() > 0.5 * L_)
            throw InvariantViolation("periodize_phi: box side L must be at least 2R");
        // ŝ(0) for s = φ∞ − a/r on [0, R].
        const double a = sol_->a, R = sol_->matching_radius;
        auto f = [&](double r) { return r * r - r * sol_->u_at(r) - a * r; };
        std::vector<double> b{0.0};
        for (double v : pot_.breakpoints()) b.push_back(v);
        if (R > b.back()) b.push_back(R);
        s0_ = 4.0 * std::numbers::pi * integrate_panels(f, b, {1e-15, 1e-12, 200'000, false, 42}).value;
        alpha_ = 6.0 / L_;
        if (cutoff_) {
            const double unit = 2.0 * std::numbers::pi / L_;
            const long nmax = static_cast<long>(std::floor(cutoff_->outer_radius() / unit));
            for (long i = -nmax; i <= nmax; ++i)
                for (long j = -nmax; j <= nmax; ++j)
                    for (long k = -nmax; k <= nmax; ++k) {
                        if (i == 0 && j == 0 && k == 0) continue;
                        const Vec3 p{unit * i, unit * j, unit * k};
                        const double pn = norm(p);
                        const double chi = cutoff_->chi_less(pn);
                        if (chi == 0.0) continue;
                        low_modes_.push_back({p, sol_->fourier_phi(pn) * chi});
                    }
        }
    }

    double L() const { return L_; }
    double a() const { return sol_->a; }
    bool cutoff_applied() const { return cutoff_.has_value(); }
    const ScatteringSolution& solution() const { return *sol_; }

    /// φ̂(p) for p = 2πn/L (times χ̂>(p) when the cut-off is applied); φ̂(0) = 0.
    double coefficient(const std::array<long, 3>& n) const {
        if (n[0] == 0 && n[1] == 0 && n[2] == 0) return 0.0;
        const double unit = 2.0 * std::numbers::pi / L_;
        const double p = unit * std::sqrt(static_cast<double>(n[0] * n[0] + n[1] * n[1] + n[2] * n[2]));
        return coefficient_at(p);
    }

    double coefficient_at(double p) const {
        if (p == 0.0) return 0.0;
        const double v = sol_->fourier_phi(p);
        return cutoff_ ? v * cutoff_->chi_greater(p) : v;
    }

    /// Real-space value. The 1/r tail is periodised by an Ewald sum, the
    /// compactly supported remainder by its nearest images; the χ̂< part is a
    /// finite Fourier sum.
    double operator()(Vec3 x) const {
        for (double& c : x) c -= L_ * std::floor(c / L_ + 0.5);
        const double a = sol_->a;
        const double rx = norm(x);
        double val = sol_->phi(rx) + a * ewald_minus_coulomb(x) - s0_ / (L_ * L_ * L_);
        for (int i = -1; i <= 1; ++i)
            for (int j = -1; j <= 1; ++j)
                for (int k = -1; k <= 1; ++k) {
                    if (i == 0 && j == 0 && k == 0) continue;
                    const double d = norm(Vec3{x[0] + i * L_, x[1] + j * L_, x[2] + k * L_});
                    if (d < sol_->matching_radius) val += sol_->phi(d) - a / d;
                }
        if (cutoff_) {
            double low = 0.0;
            for (const auto& m : low_modes_) low += m.coef * std::cos(m.p[0] * x[0] + m.p[1] * x[1] + m.p[2] * x[2]);
            val -= low / (L_ * L_ * L_);
        }
        return val;
    }

    /// ‖Δφ̃‖_{L¹(Λ)} (or ‖Δφ‖ without cut-off), using
    /// Δφ̃ = −½ V f∞ + 4πa/L³ + L^{-3} Σ_{0<|p|} p² φ̂(p) χ̂<(p) cos(p·x).
    /// The smooth part is integrated on an M³ midpoint grid, the ball |x| < R
    /// by adaptive cubature.
    double laplacian_l1_norm(int M = 48) const {
        const double a = sol_->a, L3 = L_ * L_ * L_;
        const double R = pot_.R();
        auto smooth = [&](const Vec3& x) {
            double v = 4.0 * std::numbers::pi * a / L3;
            for (const auto& m : low_modes_)
                v += norm2(m.p) * m.coef * std::cos(m.p[0] * x[0] + m.p[1] * x[1] + m.p[2] * x[2]) / L3;
            return v;
        };
        double grid_sum = 0.0;
        const double h = L_ / M;
        for (int i = 0; i < M; ++i)
            for (int j = 0; j < M; ++j)
                for (int k = 0; k < M; ++k) {
                    const Vec3 x{-L_ / 2 + (i + 0.5) * h, -L_ / 2 + (j + 0.5) * h, -L_ / 2 + (k + 0.5) * h};
                    grid_sum += std::abs(smooth(x));
                }
        grid_sum *= h * h * h;
        // Inside the ball: replace |S| by |−½Vf + S| (spherical coordinates).
        auto ball = [&](const std::array<double, 3>& v, bool with_V) {
            const double r = v[0], c = v[1], ph = v[2];
            const double s = std::sqrt(std::max(0.0, 1.0 - c * c));
            const Vec3 x{r * s * std::cos(ph), r * s * std::sin(ph), r * c};
            double val = smooth(x);
            if (with_V) val -= 0.5 * pot_(r) * (r > 0.0 ? sol_->u_at(r) / r : sol_->du.front());
            return r * r * std::abs(val);
        };
        const CubatureOptions opt{1e-12, 1e-7, 300'000, false, 42};
        const double pi = std::numbers::pi;
        double inside = 0.0, inside_smooth = 0.0;
        std::vector<double> b{0.0};
        for (double v : pot_.breakpoints()) b.push_back(v);
        for (std::size_t i = 0; i + 1 < b.size(); ++i) {
            inside += integrate<3>([&](const auto& v) { return ball(v, true); }, {b[i], -1.0, 0.0},
                                   {b[i + 1], 1.0, 2.0 * pi}, opt)
                          .value;
        }
        inside_smooth = integrate<3>([&](const auto& v) { return ball(v, false); }, {0.0, -1.0, 0.0}, {R, 1.0, 2.0 * pi}, opt).value;
        return grid_sum - inside_smooth + inside;
    }

private:
    struct Mode {
        Vec3 p;
        double coef;
    };

    // Periodic Coulomb kernel (Fourier 4π/(L³k²), zero mean) minus 1/|x|.
    double ewald_minus_coulomb(const Vec3& x) const {
        const double al = alpha_, L = L_;
        const double pi = std::numbers::pi;
        double real = 0.0;
        for (int i = -2; i <= 2; ++i)
            for (int j = -2; j <= 2; ++j)
                for (int k = -2; k <= 2; ++k) {
                    const double d = norm(Vec3{x[0] + i * L, x[1] + j * L, x[2] + k * L});
                    if (i == 0 && j == 0 && k == 0) {
                        real += (d < 1e-12) ? -2.0 * al / std::sqrt(pi) : -std::erf(al * d) / d;
                    } else {
                        real += std::erfc(al * d) / d;
                    }
                }
        double recip = 0.0;
        const double unit = 2.0 * pi / L;
        const int m = 14;
        for (int i = -m; i <= m; ++i)
            for (int j = -m; j <= m; ++j)
                for (int k = -m; k <= m; ++k) {
                    if (i == 0 && j == 0 && k == 0) continue;
                    const double k2 = unit * unit * (i * i + j * j + k * k);
                    const double w = std::exp(-k2 / (4.0 * al * al));
                    if (w < 1e-18) continue;
                    recip += w / k2 * std::cos(unit * (i * x[0] + j * x[1] + k * x[2]));
                }
        return real + 4.0 * pi / (L * L * L) * recip - pi / (al * al * L * L * L);
    }

    std::shared_ptr<const ScatteringSolution> sol_;
    RadialPotential pot_;
    double L_;
    std::optional<CutoffConfig> cutoff_;
    double s0_ = 0.0;
    double alpha_ = 1.0;
    std::vector<Mode> low_modes_;
};

inline PeriodicScatteringFunction periodize_phi(std::shared_ptr<const ScatteringSolution> sol,
                                                const RadialPotential& pot, double L,
                                                std::optional<CutoffConfig> cutoff = std::nullopt) {
    return {std::move(sol), pot, L, cutoff};
}

/// η̂^ε_{r,r'}(p) = 8πa / (λ_{r,p} + λ_{r',−p} + 2ε).
struct EtaFunction {
    double a = 0.0;
    double epsilon = 0.0;
    double kF_up = 0.0;
    double kF_down = 0.0;

    bool pauli_allowed(const Vec3& r, const Vec3& rp, const Vec3& p) const {
        return norm(r) <= kF_up && norm(r + p) > kF_up && norm(rp) <= kF_down && norm(rp - p) > kF_down;
    }

    double operator()(const Vec3& r, const Vec3& rp, const Vec3& p) const {
        const double den = lambda(r, p) + lambda(rp, -p) + 2.0 * epsilon;
        if (!(den > 0.0))
            throw DomainError("eta_eps: nonpositive denominator (momenta outside the Pauli-allowed region)");
        return 8.0 * std::numbers::pi * a / den;
    }
};

inline double eta_eps(const EtaFunction& eta, const Vec3& r, const Vec3& rp, const Vec3& p) { return eta(r, rp, p); }

}  // namespace hyfermi
