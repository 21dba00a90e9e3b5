#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "hyfermi/quadrature.hpp"
#include "oracles.hpp"

using namespace hyfermi;

namespace {

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

}  // namespace

TEST(Cutoff, PartitionOfUnityAndPlateaus) {
    const CutoffConfig c(1.0 / 9.0, 16.0 / 63.0, 1e-3);
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> dist(0.0, 8.0 * c.scale());
    for (int i = 0; i < 10000; ++i) {
        const double p = dist(rng);
        const double lo = c.chi_less(p), hi = c.chi_greater(p);
        EXPECT_EQ(lo + hi, 1.0);
        EXPECT_GE(lo, 0.0);
        EXPECT_LE(lo, 1.0);
        if (p < c.inner_radius()) EXPECT_EQ(lo, 1.0);
        if (p > c.outer_radius()) EXPECT_EQ(lo, 0.0);
    }
}

TEST(Cutoff, ParameterConstraints) {
    EXPECT_NO_THROW(CutoffConfig(1.0 / 9.0, 16.0 / 63.0, 0.01));
    EXPECT_THROW(CutoffConfig(0.2, 1.7, 0.01), InvariantViolation);   // δ > 8γ
    EXPECT_THROW(CutoffConfig(0.165, 0.1, 0.01), InvariantViolation);  // 2γ + δ/16 > 1/3
    EXPECT_THROW(CutoffConfig(0.4, 0.1, 0.01), InvariantViolation);
    EXPECT_THROW(CutoffConfig(0.1, 0.0, 0.01), InvariantViolation);
    const CutoffConfig c(1.0 / 9.0, 16.0 / 63.0, 0.01);
    EXPECT_DOUBLE_EQ(c.epsilon(), std::pow(0.01, 2.0 / 3.0 + 16.0 / 63.0));
}

TEST(Projectors, Partition) {
    const FermiProjectors fp{1.0, 0.6};
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> dist(-2.0, 2.0);
    for (int i = 0; i < 10000; ++i) {
        const Vec3 k{dist(rng), dist(rng), dist(rng)};
        for (int s : {0, 1}) {
            EXPECT_EQ(fp.u_hat(k, s) + fp.v_hat(k, s), 1.0);
            EXPECT_EQ(fp.u_hat(k, s) * fp.v_hat(k, s), 0.0);
        }
    }
}

TEST(Pauli, DenominatorPositive) {
    // λ_{r,p} + λ_{r',−p} > 0 whenever |r| ≤ 1 < |r + p| and |r'| ≤ y < |r' − p|.
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    const double y = 0.7;
    int checked = 0;
    while (checked < 100000) {
        const Vec3 r{dist(rng), dist(rng), dist(rng)};
        const Vec3 rp = y * Vec3{dist(rng), dist(rng), dist(rng)};
        const Vec3 p = 2.0 * Vec3{dist(rng), dist(rng), dist(rng)};
        if (!(norm(r) <= 1.0 && norm(r + p) > 1.0 && norm(rp) <= y && norm(rp - p) > y)) continue;
        const double D = lambda(r, p) + lambda(rp, -p);
        ASSERT_GT(D, 0.0);
        ASSERT_TRUE(std::isfinite(1.0 / D));
        ++checked;
    }
}

TEST(GPointwise, SmallAndLargeMomentum) {
    const double x = 0.5;
    EXPECT_LT(g_pointwise(x, 1e-3).value, 1e-2);
    const auto far = g_pointwise(x, 50.0);
    EXPECT_LT(rel(far.value, x / (50.0 * 50.0)), 1.0 / 50.0);
    EXPECT_GE(far.error_estimate, 0.0);
    EXPECT_GT(far.evaluations, 0u);
    EXPECT_EQ(far.nonfinite, 0u);
}

TEST(GPointwise, ContinuousAcrossFullBallSwitch) {
    // p = 2 switches from the 3D Pauli reduction to the 2D projection.
    for (double x : {0.3, 1.0}) {
        const double below = g_pointwise(x, 2.0 - 1e-9).value;
        const double at = g_pointwise(x, 2.0).value;
        EXPECT_LT(rel(below, at), 1e-7);
    }
}

TEST(GPointwise, PauliDomainMatchesMonteCarlo) {
    // Plain Monte Carlo over the two balls, rejecting blocked pairs.
    const double x = 0.4, y = std::cbrt(x), p = 0.9;
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    double sum = 0.0;
    const int n = 2'000'000;
    for (int i = 0; i < n; ++i) {
        Vec3 k, q;
        do k = {u(rng), u(rng), u(rng)};
        while (norm(k) >= 1.0);
        do q = {u(rng), u(rng), u(rng)};
        while (norm(q) >= 1.0);
        q = y * q;
        const Vec3 pv{0.0, 0.0, p};
        if (norm(k + pv) > 1.0 && norm(q - pv) > y) sum += 1.0 / (lambda(k, pv) + lambda(q, -pv));
    }
    const double vol = (4.0 * std::numbers::pi / 3.0) * (4.0 * std::numbers::pi / 3.0) * x;
    const double mc = 9.0 / (8.0 * std::numbers::pi * std::numbers::pi) * vol * sum / n;
    EXPECT_LT(rel(g_pointwise(x, p).value, mc), 5e-3);
}

TEST(FQuadrature, MatchesClosedForm) {
    for (double x : {0.25, 0.5, 1.0}) {
        const auto r = F_quadrature(x);
        EXPECT_LT(rel(r.value, F_closed(x)), 1e-5) << x;
        EXPECT_TRUE(r.converged);
        EXPECT_EQ(r.nonfinite, 0u);
    }
}

TEST(FQuadrature, MonotoneAndSymmetric) {
    const double a = F_quadrature(0.25).value, b = F_quadrature(0.5).value, c = F_quadrature(1.0).value;
    EXPECT_LT(a, b);
    EXPECT_LT(b, c);
    EXPECT_LT(rel(F_quadrature(2.0).value, F_closed(2.0)), 1e-5);
}

TEST(FQuadrature, TailCutIndependent) {
    QuadratureSettings s;
    s.p_cut = 5.0;
    const double a = F_quadrature(0.5, s).value;
    s.p_cut = 12.0;
    const double b = F_quadrature(0.5, s).value;
    EXPECT_LT(rel(a, b), 1e-6);
}

TEST(FQuadrature, RefinementConsistent) {
    QuadratureSettings coarse;
    coarse.rel_tol = 1e-5;
    QuadratureSettings fine;
    fine.rel_tol = 0.5e-5;
    const auto a = F_quadrature(0.5, coarse);
    const auto b = F_quadrature(0.5, fine);
    EXPECT_LT(std::abs(a.value - b.value), a.error_estimate);
}

TEST(PIntegrals, QuadraticMatchesPrincipalValue) {
    for (auto [a, b] : {std::pair{3.0, 1.0}, std::pair{2.0, -1.0}, std::pair{2.5, 0.5}}) {
        EXPECT_NEAR(p_integral_quadratic(a, b), oracle::pv_quadratic(a, b), 1e-4) << a << "," << b;
    }
}

TEST(PIntegrals, LinearMatchesPrincipalValue) {
    for (auto [a, b] : {std::pair{2.0, 0.5}, std::pair{1.0, 0.3}, std::pair{-3.0, 2.0}}) {
        EXPECT_NEAR(p_integral_linear(a, b), oracle::pv_linear(a, b), 1e-4) << a << "," << b;
    }
}

TEST(PIntegrals, Symmetries) {
    EXPECT_NEAR(p_integral_quadratic(3.0, 1.0), p_integral_quadratic(-3.0, 1.0), 1e-13);
    EXPECT_EQ(p_integral_linear(2.0, 0.0), 0.0);
    EXPECT_NEAR(p_integral_linear(2.0, 0.5), -p_integral_linear(2.0, -0.5), 1e-13);
    EXPECT_THROW(p_integral_linear(0.0, 1.0), DomainError);
    EXPECT_THROW(p_integral_quadratic(1.0, 1.0), DomainError);
    // Decay toward zero as b → −∞.
    double prev = std::abs(p_integral_quadratic(0.5, -10.0));
    for (double b : {-100.0, -1000.0, -10000.0}) {
        const double v = std::abs(p_integral_quadratic(0.5, b));
        EXPECT_LT(v, prev);
        prev = v;
    }
    // a = 0 uses the analytic limit: ∫_{|p|<1} dp/(p² + b) for b < 0.
    const double b = -4.0;
    EXPECT_NEAR(p_integral_quadratic(0.0, b), p_integral_quadratic(1e-6, b), 1e-6);
}

TEST(OdeCheck, ResidualSmall) {
    for (double x : {0.5, 2.0, 0.2, 3.0}) EXPECT_LE(ode_check_f(x, 1e-4), 1e-4) << x;
}

TEST(OdeCheck, IndependentOfConstant) {
    EXPECT_NEAR(ode_check_f(0.5, 1e-4, 0.0), ode_check_f(0.5, 1e-4, 25.0), 1e-4);
    EXPECT_THROW(ode_check_f(1.0 + 1e-4, 1e-4), DomainError);
}

TEST(GapStudy, LimitMatchesClosedFormAndScaling) {
    const FermiParams params(1.0, 1.0);
    const CutoffConfig cut(1.0 / 9.0, 16.0 / 63.0, 1e-3);
    const auto rows = gap_cutoff_study(params, cut, {1e-4, 1e-3, 1e-2});
    std::vector<double> rho, diff;
    for (const auto& r : rows) {
        EXPECT_LT(rel(r.I_limit, r.I_limit_closed), 1e-5);
        EXPECT_TRUE(r.converged);
        rho.push_back(r.rho);
        diff.push_back(r.diff);
    }
    EXPECT_GE(loglog_slope(rho, diff), 7.0 / 3.0 + 1.0 / 9.0 - 0.2);
}

TEST(GapStudy, LargerDeltaShrinksGapTerm) {
    const FermiParams params(1.0, 0.5);
    double prev = INFINITY;
    for (double delta : {0.1, 0.3, 0.6}) {
        const CutoffConfig cut(1.0 / 9.0, delta, 1e-3);
        const auto rows = gap_cutoff_study(params, cut, {1e-3});
        EXPECT_LT(rows[0].diff, prev);
        prev = rows[0].diff;
    }
}

TEST(LatticeSum, ConvergesToIntegral) {
    const CutoffConfig c(1.0 / 9.0, 16.0 / 63.0, 1e-2);
    const auto rows = lattice_sum_convergence({20.0, 40.0, 80.0, 160.0, 320.0}, c);
    std::vector<double> L, gap;
    for (const auto& r : rows) {
        L.push_back(r.L);
        gap.push_back(r.diff);
    }
    EXPECT_LT(loglog_slope(L, gap), -0.5);
    EXPECT_LT(rows.back().diff, rows.front().diff);
    EXPECT_LT(rel(rows.back().sum_value, rows.back().integral_value), 2e-2);
}

TEST(LatticeSum, IntegralScalesWithCutoffRadius) {
    std::vector<double> rho, val;
    for (double r : {1e-4, 1e-3, 1e-2}) {
        const CutoffConfig c(1.0 / 9.0, 16.0 / 63.0, r);
        rho.push_back(r);
        val.push_back(lattice_sum_convergence({10.0}, c)[0].integral_value);
    }
    EXPECT_NEAR(loglog_slope(rho, val), 1.0 / 3.0 - 1.0 / 9.0, 1e-9);
}

TEST(SingularBound, FiniteAndOrdered) {
    const auto rows = singular_integral_bound({1e-3, 1e-2, 0.1, 0.5, 1.0});
    for (const auto& r : rows) {
        EXPECT_TRUE(std::isfinite(r.value));
        EXPECT_GT(r.value, 0.0);
    }
    EXPECT_LT(rows.front().value, rows.back().value);
}

TEST(SingularBound, TailMatchesDirectIntegration) {
    // The moment series beyond p_cut agrees with integrating the 2D projection further out.
    const double y = 0.5;
    QuadratureSettings s;
    const auto mid = radial_pair_integral(y, PairKernel::inverse_squared, 6.0, 12.0, [](double) { return 1.0; }, s);
    EXPECT_LT(rel(inverse_squared_tail(y, 6.0) - inverse_squared_tail(y, 12.0), mid.value), 1e-6);
    const auto mid2 = radial_pair_integral(y, PairKernel::deficit, 6.0, 12.0, [](double) { return 1.0; }, s);
    EXPECT_LT(rel(deficit_tail(y, 6.0) - deficit_tail(y, 12.0), mid2.value), 1e-5);
}
