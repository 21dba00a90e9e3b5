#pragma once

// Closed-form Huang–Yang correction function F(x) and the three-term
// low-density energy expansion of the two-component Fermi gas.
//
// Units: the one-body kinetic operator is -Δ (ħ = 1, 2m = 1).

#include <array>
#include <cmath>
#include <numbers>

#include "hyfermi/error.hpp"

namespace hyfermi {

/// Spin-resolved number densities. k_F^σ = (6π²ρ_σ)^{1/3}.
struct FermiParams {
    double rho_up = 0.0;
    double rho_down = 0.0;

    FermiParams() = default;
    FermiParams(double up, double down) : rho_up(up), rho_down(down) { validate(); }

    void validate() const {
        if (!(rho_up >= 0.0) || !(rho_down >= 0.0) || !(rho_up + rho_down > 0.0))
            throw InvariantViolation("FermiParams: densities must be nonnegative with positive total");
    }

    double rho() const { return rho_up + rho_down; }
    double kF_up() const { return std::cbrt(6.0 * std::numbers::pi * std::numbers::pi * rho_up); }
    double kF_down() const { return std::cbrt(6.0 * std::numbers::pi * std::numbers::pi * rho_down); }
};

struct HYEnergyBreakdown {
    double kinetic = 0.0;
    double mean_field = 0.0;
    double huang_yang = 0.0;
    double total = 0.0;
    /// Exponent of the remainder O(ρ^{7/3 + 1/9}); reported, never evaluated.
    double error_order_exponent = 7.0 / 3.0 + 1.0 / 9.0;
};

namespace detail {

inline double six_pi_sq_cbrt() { return std::cbrt(6.0 * std::numbers::pi * std::numbers::pi); }

// Polynomial prefactor of the log-singular group, 1 - 6y² + 5y³ + 5y⁴ - 6y⁵ + y⁷
// with y = x^{1/3}. It has a fourth-order zero at y = 1:
// P(y) = (1 - y)⁴ (1 + y)(y² + 3y + 1).
inline double log_group_poly(double y) {
    const double y2 = y * y;
    return 1.0 - 6.0 * y2 + 5.0 * y2 * y + 5.0 * y2 * y2 - 6.0 * y2 * y2 * y + y2 * y2 * y2 * y;
}

inline double log_group_poly_factored(double y) {
    const double t = 1.0 - y;
    return t * t * t * t * (1.0 + y) * (y * y + 3.0 * y + 1.0);
}

// Bracket of F without the (6π²)^{1/3}/35 prefactor, direct evaluation.
inline double F_bracket_direct(double x, bool factored_poly) {
    const double y = std::cbrt(x);
    const double y2 = y * y;
    const double x73 = x * x * y;  // x^{7/3}
    const double poly = 15.0 * y - 4.0 * y2 + 33.0 * x + 33.0 * x * y - 4.0 * x * y2 + 15.0 * x * x;
    const double P = factored_poly ? log_group_poly_factored(y) : log_group_poly(y);
    const double t = std::abs(1.0 - y);
    // P vanishes to fourth order where the logarithm diverges; t⁴ ln t → 0.
    const double log_group = (t == 0.0) ? 0.0 : 21.0 * P * std::log(t / (1.0 + y));
    return 16.0 * x73 * std::log(x) - 48.0 * (x73 + 1.0) * std::log1p(y) + 6.0 * poly + log_group;
}

constexpr int kSeriesOrder = 48;

// Power-series coefficients c_n of the bracket in y = x^{1/3}, excluding the
// 48 y⁷ ln y term, assembled from the Taylor series of ln(1 ± y).
inline const std::array<double, kSeriesOrder + 1>& F_series_coefficients() {
    static const std::array<double, kSeriesOrder + 1> coeffs = [] {
        std::array<double, kSeriesOrder + 1> c{};
        std::array<double, kSeriesOrder + 1> log1p_y{};   // ln(1 + y)
        std::array<double, kSeriesOrder + 1> log_ratio{};  // ln(1 - y) - ln(1 + y)
        for (int n = 1; n <= kSeriesOrder; ++n) {
            log1p_y[n] = ((n % 2 == 1) ? 1.0 : -1.0) / n;
            log_ratio[n] = (n % 2 == 1) ? -2.0 / n : 0.0;
        }
        // -48 (y⁷ + 1) ln(1 + y)
        for (int n = 1; n <= kSeriesOrder; ++n) {
            c[n] -= 48.0 * log1p_y[n];
            if (n + 7 <= kSeriesOrder) c[n + 7] -= 48.0 * log1p_y[n];
        }
        // 6 (15y - 4y² + 33y³ + 33y⁴ - 4y⁵ + 15y⁶)
        const std::array<double, 7> poly{0.0, 15.0, -4.0, 33.0, 33.0, -4.0, 15.0};
        for (int n = 1; n <= 6; ++n) c[n] += 6.0 * poly[n];
        // 21 P(y) [ln(1 - y) - ln(1 + y)]
        const std::array<double, 8> P{1.0, 0.0, -6.0, 5.0, 5.0, -6.0, 0.0, 1.0};
        for (int m = 0; m <= 7; ++m)
            for (int n = 1; n + m <= kSeriesOrder; ++n) c[n + m] += 21.0 * P[m] * log_ratio[n];
        return c;
    }();
    return coeffs;
}

inline double F_bracket_series(double x) {
    const double y = std::cbrt(x);
    const auto& c = F_series_coefficients();
    double sum = 0.0;
    for (int n = kSeriesOrder; n >= 1; --n) sum = (sum + c[n]) * y;
    return sum + 48.0 * std::pow(y, 7) * std::log(y);
}

constexpr double kNearOneWindow = 1e-4;
constexpr double kSeriesBelow = 1e-3;
constexpr double kSymmetricAbove = 1e3;

// S(y) = 15 - 42y² + 35y⁴ - 8y⁷ = (1 - y)³ (8y⁴ + 24y³ + 48y² + 45y + 15).
inline double f_log_poly(double y, bool factored) {
    if (factored) {
        const double t = 1.0 - y;
        return t * t * t * ((((8.0 * y + 24.0) * y + 48.0) * y + 45.0) * y + 15.0);
    }
    const double y2 = y * y;
    return 15.0 - 42.0 * y2 + 35.0 * y2 * y2 - 8.0 * y2 * y2 * y2 * y;
}

inline double f_particular(double x, bool factored) {
    const double y = std::cbrt(x);
    const double y2 = y * y;
    const double y4 = y2 * y2;
    const double y7 = y4 * y2 * y;
    const double t = std::abs(1.0 - y);
    const double singular = (t == 0.0) ? 0.0 : 3.0 / 140.0 * f_log_poly(y, factored) * std::log(t);
    const double ylog = (y == 0.0) ? 0.0 : 12.0 / 35.0 * y7 * std::log(y);
    return std::numbers::pi *
           (9.0 / 14.0 * y + 99.0 / 70.0 * x - 6.0 / 35.0 * x * y2 + singular -
            3.0 / 140.0 * (15.0 - 42.0 * y2 + 35.0 * y4 + 8.0 * y7) * std::log1p(y) + ylog);
}

}  // namespace detail

/// Huang–Yang correction function F(x), x = ρ↓/ρ↑.
///
/// Evaluated from its closed form. Three numerical regimes: a power series in
/// x^{1/3} for x < 1e-3, the factored form of the log-singular group for
/// |x - 1| < 1e-4, and the reflection F(x) = x^{7/3} F(1/x) for x > 1e3.
inline double F_closed(double x) {
    if (std::isnan(x) || x < 0.0) throw DomainError("F_closed: x must be >= 0");
    if (x == 0.0) return 0.0;
    if (std::isinf(x)) throw DomainError("F_closed: x must be finite");
    if (x > detail::kSymmetricAbove) return std::pow(x, 7.0 / 3.0) * F_closed(1.0 / x);
    const double pref = detail::six_pi_sq_cbrt() / 35.0;
    if (x < detail::kSeriesBelow) return pref * detail::F_bracket_series(x);
    const bool near_one = std::abs(x - 1.0) < detail::kNearOneWindow;
    return pref * detail::F_bracket_direct(x, near_one);
}

/// The auxiliary function f with free constants A and B = -A:
/// F(x) = (4/π)(6π²)^{1/3} (f(x) + x^{7/3} f(1/x)).
inline double f_aux(double x, double A = 0.0) {
    if (std::isnan(x) || x < 0.0) throw DomainError("f_aux: x must be >= 0");
    const bool near_one = std::abs(x - 1.0) < detail::kNearOneWindow;
    return A * (std::pow(x, 7.0 / 3.0) - 1.0) + detail::f_particular(x, near_one);
}

inline double F_from_f(double x, double A = 0.0) {
    if (std::isnan(x) || x < 0.0) throw DomainError("F_from_f: x must be >= 0");
    if (x == 0.0) return 0.0;
    const double pref = 4.0 / std::numbers::pi * detail::six_pi_sq_cbrt();
    return pref * (f_aux(x, A) + std::pow(x, 7.0 / 3.0) * f_aux(1.0 / x, A));
}

/// (3/5)(6π²)^{2/3}(ρ↑^{5/3} + ρ↓^{5/3}).
inline double kinetic_energy_density(const FermiParams& p) {
    const double c = detail::six_pi_sq_cbrt();
    return 0.6 * c * c * (std::pow(p.rho_up, 5.0 / 3.0) + std::pow(p.rho_down, 5.0 / 3.0));
}

inline HYEnergyBreakdown hy_energy(const FermiParams& params, double a) {
    params.validate();
    if (!(a >= 0.0)) throw DomainError("hy_energy: scattering length must be >= 0");
    HYEnergyBreakdown e;
    e.kinetic = kinetic_energy_density(params);
    e.mean_field = 8.0 * std::numbers::pi * a * params.rho_up * params.rho_down;
    if (a > 0.0 && params.rho_up > 0.0 && params.rho_down > 0.0) {
        e.huang_yang = a * a * std::pow(params.rho_up, 7.0 / 3.0) * F_closed(params.rho_down / params.rho_up);
    }
    e.total = e.kinetic + e.mean_field + e.huang_yang;
    return e;
}

/// Coefficient of a²ρ^{7/3} in the spin-balanced expansion,
/// (4/35)(11 - 2 ln 2)(9π)^{2/3}.
inline double hy_symmetric_coefficient() {
    return 4.0 / 35.0 * (11.0 - 2.0 * std::numbers::ln2) * std::pow(9.0 * std::numbers::pi, 2.0 / 3.0);
}

struct BaselineEnergies {
    double lss = 0.0;  ///< kinetic + 8πa ρ↑ρ↓
    double ffg = 0.0;  ///< kinetic + V̂(0) ρ↑ρ↓ (free Fermi gas, first order)
};

inline BaselineEnergies baseline_energies(const FermiParams& params, double a, double vhat0) {
    params.validate();
    if (!(a >= 0.0)) throw DomainError("baseline_energies: scattering length must be >= 0");
    const double kin = kinetic_energy_density(params);
    const double pair = params.rho_up * params.rho_down;
    return {kin + 8.0 * std::numbers::pi * a * pair, kin + vhat0 * pair};
}

}  // namespace hyfermi
