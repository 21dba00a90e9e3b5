#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "hyfermi/hy_formula.hpp"

using namespace hyfermi;

namespace {

double F_one_expected() {
    return 48.0 / 35.0 * (11.0 - 2.0 * std::log(2.0)) * std::cbrt(6.0 * std::numbers::pi * std::numbers::pi);
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

}  // namespace

TEST(FClosed, ValueAtOne) { EXPECT_LT(rel(F_closed(1.0), F_one_expected()), 1e-12); }

TEST(FClosed, ZeroLimit) {
    EXPECT_EQ(F_closed(0.0), 0.0);
    EXPECT_LT(F_closed(1e-9), 1e-6);
    // Leading behaviour 12(6π²)^{1/3} x.
    const double x = 1e-7;
    EXPECT_LT(rel(F_closed(x), 12.0 * std::cbrt(6.0 * std::numbers::pi * std::numbers::pi) * x), 1e-2);
}

TEST(FClosed, NegativeArgumentThrows) { EXPECT_THROW(F_closed(-0.1), DomainError); }

TEST(FClosed, SymmetryOnGrid) {
    for (int i = 0; i < 40; ++i) {
        const double x = 0.05 + (4.0 - 0.05) * i / 39.0;
        const double lhs = F_closed(1.0 / x);
        const double rhs = std::pow(x, -7.0 / 3.0) * F_closed(x);
        EXPECT_LT(std::abs(lhs - rhs) / F_closed(x), 1e-10) << "x=" << x;
    }
    for (double x : {0.2, 0.5, 0.9}) {
        EXPECT_LT(std::abs(F_closed(1.0 / x) - std::pow(x, -7.0 / 3.0) * F_closed(x)) / F_closed(x), 1e-10);
    }
}

TEST(FClosed, BranchAgreementAtSwitchPoints) {
    const double pref = std::cbrt(6.0 * std::numbers::pi * std::numbers::pi) / 35.0;
    // Near one: factored polynomial vs expanded.
    for (double x : {1.0 - 1e-4, 1.0 + 1e-4, 1.0 - 1e-3}) {
        EXPECT_LT(rel(detail::F_bracket_direct(x, true), detail::F_bracket_direct(x, false)), 1e-9);
    }
    // Small x: series vs direct.
    for (double x : {1e-3, 5e-3, 2e-2}) {
        EXPECT_LT(rel(pref * detail::F_bracket_series(x), pref * detail::F_bracket_direct(x, false)), 1e-9) << x;
    }
    // Large x: reflection vs direct.
    const double big = 1e3;
    EXPECT_LT(rel(std::pow(big, 7.0 / 3.0) * F_closed(1.0 / big), pref * detail::F_bracket_direct(big, false)), 1e-9);
}

TEST(FClosed, ContinuousAcrossOne) {
    const double f1 = F_closed(1.0);
    double prev = 1.0;
    for (double h : {1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-8}) {
        const double d = std::max(std::abs(F_closed(1.0 + h) - f1), std::abs(F_closed(1.0 - h) - f1));
        EXPECT_LT(d, prev);
        prev = d;
    }
    EXPECT_LT(prev, 1e-6);
}

TEST(FClosed, NonnegativeAndIncreasing) {
    double last = 0.0;
    for (int i = 1; i <= 2000; ++i) {
        const double x = 8.0 * i / 2000.0;
        const double f = F_closed(x);
        EXPECT_GE(f, 0.0);
        EXPECT_GT(f, last) << "x=" << x;
        last = f;
    }
}

TEST(FAux, ConstantEntersLinearly) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> dist(0.01, 5.0);
    for (int i = 0; i < 50; ++i) {
        const double x = dist(rng);
        if (std::abs(x - 1.0) < 1e-3) continue;
        const double A = 3.7;
        EXPECT_NEAR(f_aux(x, A) - f_aux(x, 0.0), A * (std::pow(x, 7.0 / 3.0) - 1.0), 1e-11 * (1.0 + std::pow(x, 7.0 / 3.0)));
    }
}

TEST(FAux, FiniteAwayFromOne) {
    for (int i = 1; i < 400; ++i) {
        const double x = i / 100.0;
        if (std::abs(x - 1.0) < 1e-12) continue;
        EXPECT_TRUE(std::isfinite(f_aux(x, 0.0))) << x;
    }
    EXPECT_TRUE(std::isfinite(f_aux(1.0, 0.0)));
}

TEST(FFromF, MatchesClosedForm) {
    for (double x : {0.25, 0.5, 1.0, 2.0, 4.0}) {
        EXPECT_LT(rel(F_from_f(x), F_closed(x)), 1e-10) << x;
    }
}

TEST(FFromF, IndependentOfConstant) {
    for (double x : {0.3, 0.7, 1.5}) {
        const double base = F_from_f(x, 0.0);
        for (double A : {-10.0, 10.0}) EXPECT_LT(rel(F_from_f(x, A), base), 1e-12);
    }
}

TEST(HYEnergy, SymmetricIdentity) {
    const double a = 0.3, rho = 0.02;
    const auto e = hy_energy(FermiParams(rho / 2, rho / 2), a);
    const double expected = hy_symmetric_coefficient() * a * a * std::pow(rho, 7.0 / 3.0);
    EXPECT_LT(rel(e.huang_yang, expected), 1e-12);
}

TEST(HYEnergy, Breakdown) {
    const FermiParams p(0.01, 0.004);
    const double a = 0.5;
    const auto e = hy_energy(p, a);
    EXPECT_EQ(e.total, e.kinetic + e.mean_field + e.huang_yang);
    EXPECT_GT(e.huang_yang, 0.0);
    EXPECT_NEAR(e.mean_field, 8.0 * std::numbers::pi * a * 0.01 * 0.004, 1e-18);
    const auto swapped = hy_energy(FermiParams(0.004, 0.01), a);
    EXPECT_LT(rel(swapped.huang_yang, e.huang_yang), 1e-12);
    const auto free = hy_energy(p, 0.0);
    EXPECT_EQ(free.mean_field, 0.0);
    EXPECT_EQ(free.huang_yang, 0.0);
    EXPECT_EQ(free.total, free.kinetic);
    EXPECT_DOUBLE_EQ(e.error_order_exponent, 7.0 / 3.0 + 1.0 / 9.0);
}

TEST(HYEnergy, FermiMomenta) {
    const FermiParams p(0.01, 0.02);
    EXPECT_NEAR(std::pow(p.kF_up(), 3) / (6.0 * std::numbers::pi * std::numbers::pi), 0.01, 1e-16);
    EXPECT_NEAR(std::pow(p.kF_down(), 3) / (6.0 * std::numbers::pi * std::numbers::pi), 0.02, 1e-16);
    EXPECT_THROW(FermiParams(-1.0, 0.1), InvariantViolation);
    EXPECT_THROW(FermiParams(0.0, 0.0), InvariantViolation);
}

TEST(Baselines, Ordering) {
    const FermiParams p(0.01, 0.003);
    const double a = 0.1, vhat0 = 8.0 * std::numbers::pi * 0.12;
    const auto b = baseline_energies(p, a, vhat0);
    EXPECT_NEAR(b.ffg - b.lss, (vhat0 - 8.0 * std::numbers::pi * a) * 0.01 * 0.003, 1e-16);
    const auto one = baseline_energies(FermiParams(0.01, 0.0), a, vhat0);
    EXPECT_DOUBLE_EQ(one.lss, 0.6 * std::pow(6.0 * std::numbers::pi * std::numbers::pi, 2.0 / 3.0) * std::pow(0.01, 5.0 / 3.0));
    // Scaling: kinetic ~ λ^{5/3}, interaction ~ λ².
    const double lam = 2.5;
    const auto s = baseline_energies(FermiParams(lam * 0.01, lam * 0.003), a, vhat0);
    const double kin = kinetic_energy_density(p);
    EXPECT_LT(rel(s.lss, std::pow(lam, 5.0 / 3.0) * kin + lam * lam * (b.lss - kin)), 1e-12);
}
