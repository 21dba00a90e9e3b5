#pragma once

// Momentum cut-offs χ̂<, χ̂> and the sharp Fermi projectors û, v̂.

#include <array>
#include <cmath>
#include <string>

#include "hyfermi/error.hpp"

namespace hyfermi {

using Vec3 = std::array<double, 3>;

inline double norm(const Vec3& v) { return std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]); }
inline double norm2(const Vec3& v) { return v[0] * v[0] + v[1] * v[1] + v[2] * v[2]; }
inline Vec3 operator+(const Vec3& a, const Vec3& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }
inline Vec3 operator-(const Vec3& a, const Vec3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
inline Vec3 operator-(const Vec3& a) { return {-a[0], -a[1], -a[2]}; }
inline Vec3 operator*(double s, const Vec3& a) { return {s * a[0], s * a[1], s * a[2]}; }

/// Quintic smoothstep 6t⁵ − 15t⁴ + 10t³ clamped to [0, 1]; C² at both ends.
inline double smoothstep5(double t) {
    if (t <= 0.0) return 0.0;
    if (t >= 1.0) return 1.0;
    return t * t * t * (t * (6.0 * t - 15.0) + 10.0);
}

struct CutoffConfig {
    double gamma = 1.0 / 9.0;
    double delta = 16.0 / 63.0;
    double rho = 0.0;

    CutoffConfig() = default;
    CutoffConfig(double g, double d, double r) : gamma(g), delta(d), rho(r) { validate(); }

    /// Throws InvariantViolation naming the violated constraint.
    void validate() const {
        if (!(gamma > 0.0 && gamma < 1.0 / 3.0))
            throw InvariantViolation("CutoffConfig: gamma must lie in (0, 1/3), got " + std::to_string(gamma));
        if (!(delta > 0.0)) throw InvariantViolation("CutoffConfig: delta must be > 0");
        if (delta > 8.0 * gamma)
            throw InvariantViolation("CutoffConfig: constraint delta <= 8*gamma violated");
        if (2.0 * gamma + delta / 16.0 > 1.0 / 3.0 + 1e-15)
            throw InvariantViolation("CutoffConfig: constraint 2*gamma + delta/16 <= 1/3 violated");
        if (!(rho > 0.0)) throw InvariantViolation("CutoffConfig: rho must be > 0");
    }

    double epsilon() const { return std::pow(rho, 2.0 / 3.0 + delta); }
    /// Length scale ρ^{1/3−γ} of the cut-off plateaus.
    double scale() const { return std::pow(rho, 1.0 / 3.0 - gamma); }
    double inner_radius() const { return 4.0 * scale(); }
    double outer_radius() const { return 5.0 * scale(); }

    /// χ̂<: 1 below 4ρ^{1/3−γ}, 0 above 5ρ^{1/3−γ}, quintic smoothstep between.
    double chi_less(double p) const {
        const double s = scale();
        return 1.0 - smoothstep5((p - 4.0 * s) / s);
    }
    double chi_greater(double p) const { return 1.0 - chi_less(p); }
    double chi_less(const Vec3& p) const { return chi_less(norm(p)); }
    double chi_greater(const Vec3& p) const { return chi_greater(norm(p)); }
};

/// Sharp Fermi-sea projectors for the two spin components.
struct FermiProjectors {
    double kF_up = 0.0;
    double kF_down = 0.0;

    double kF(int spin) const { return spin == 0 ? kF_up : kF_down; }
    /// û_σ(k): 1 outside the Fermi ball (|k| > k_F).
    double u_hat(const Vec3& k, int spin) const { return norm(k) > kF(spin) ? 1.0 : 0.0; }
    /// v̂_σ(k): 1 inside the closed Fermi ball.
    double v_hat(const Vec3& k, int spin) const { return norm(k) > kF(spin) ? 0.0 : 1.0; }
    /// û^<_σ(k): 1 on the shell k_F < |k| ≤ 6ρ^{1/3−γ}.
    double u_hat_less(const Vec3& k, int spin, const CutoffConfig& c) const {
        const double n = norm(k);
        return (n > kF(spin) && n <= 6.0 * c.scale()) ? 1.0 : 0.0;
    }
};

/// λ_{r,p} = |r + p|² − |r|².
inline double lambda(const Vec3& r, const Vec3& p) { return norm2(r + p) - norm2(r); }

}  // namespace hyfermi
