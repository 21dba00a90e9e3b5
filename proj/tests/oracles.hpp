#pragma once

// Independent reference computations shared by the unit tests and the
// acceptance runner. Nothing here calls the closed forms being checked.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "hyfermi/cubature.hpp"

namespace oracle {

inline double square_well_length(double V0, double R) {
    const double kappa = std::sqrt(V0 / 2.0);
    return R - std::tanh(kappa * R) / kappa;
}

// Re ∫_{|p|<1} dp / (α(r) ... ) evaluated as 2π ∫₀¹ r² dr × (angular integral),
// where the angular integral of 1/(c₀(r) + a r cos θ + iε) is
//   (1/(a r)) [Log(c₀ + a r + iε) − Log(c₀ − a r + iε)].
// Its real part is ½ ln(((c₀+ar)² + ε²)/((c₀−ar)² + ε²)) / (a r).
template <class C0>
double regularized_ball_integral(C0 c0, double a, double eps, const std::vector<double>& singular_r) {
    auto f = [&](double r) {
        if (r == 0.0) return 0.0;
        const double c = c0(r);
        const double hi = c + a * r, lo = c - a * r;
        return r * r * 0.5 * std::log((hi * hi + eps * eps) / (lo * lo + eps * eps)) / (a * r);
    };
    std::vector<double> b{0.0, 1.0};
    for (double s : singular_r)
        if (s > 0.0 && s < 1.0) b.push_back(s);
    std::sort(b.begin(), b.end());
    hyfermi::CubatureOptions opt{1e-13, 1e-11, 2'000'000, false, 42};
    return 2.0 * std::numbers::pi * hyfermi::integrate_panels(f, b, opt).value;
}

// Richardson extrapolation ε → 0 over ε, ε/2, ε/4 assuming an expansion in powers of ε.
template <class F>
double extrapolate_eps(F&& at, double eps) {
    const double r1 = at(eps), r2 = at(eps / 2.0), r3 = at(eps / 4.0);
    const double a1 = 2.0 * r2 - r1, a2 = 2.0 * r3 - r2;
    return (4.0 * a2 - a1) / 3.0;
}

// Principal value of ∫_{|p|<1} dp / (p² + a p₁ + b) by ε-regularisation.
inline double pv_quadratic(double a, double b, double eps = 1e-6) {
    std::vector<double> sing;
    // Roots of r² ± a r + b = 0.
    for (double s : {1.0, -1.0}) {
        const double disc = a * a - 4.0 * b;
        if (disc < 0) continue;
        for (double sg : {1.0, -1.0}) sing.push_back((-s * a + sg * std::sqrt(disc)) / 2.0);
    }
    auto at = [&](double e) {
        return regularized_ball_integral([&](double r) { return r * r + b; }, a, e, sing);
    };
    return extrapolate_eps(at, eps);
}

// Principal value of ∫_{|p|<1} dp / (a p₁ + b) by ε-regularisation.
inline double pv_linear(double a, double b, double eps = 1e-6) {
    auto at = [&](double e) {
        return regularized_ball_integral([&](double) { return b; }, a, e, {std::abs(b / a)});
    };
    return extrapolate_eps(at, eps);
}

}  // namespace oracle
