#include <array>
#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "hyfermi/cubature.hpp"

using namespace hyfermi;

TEST(Cubature, GaussKronrodPolynomialExact) {
    auto r = integrate_1d([](double x) { return 3 * x * x - x + 2; }, 0.0, 2.0);
    EXPECT_NEAR(r.value, 8.0 - 2.0 + 4.0, 1e-13);
    EXPECT_TRUE(r.converged);
    EXPECT_GT(r.evaluations, 0u);
    EXPECT_GE(r.error_estimate, 0.0);
}

TEST(Cubature, GaussKronrodEndpointSingularity) {
    CubatureOptions opt;
    opt.rel_tol = 1e-10;
    auto r = integrate_1d([](double x) { return 1.0 / std::sqrt(x); }, 0.0, 1.0, opt);
    EXPECT_NEAR(r.value, 2.0, 1e-8);
}

TEST(Cubature, GenzMalikGaussian3D) {
    auto f = [](const std::array<double, 3>& x) { return std::exp(-(x[0] * x[0] + x[1] * x[1] + x[2] * x[2])); };
    CubatureOptions opt;
    opt.rel_tol = 1e-9;
    auto r = integrate<3>(f, {-1, -1, -1}, {1, 1, 1}, opt);
    const double one = std::sqrt(std::numbers::pi) * std::erf(1.0);
    EXPECT_NEAR(r.value, one * one * one, 1e-8);
    EXPECT_TRUE(r.converged);
}

TEST(Cubature, GenzMalikDegreeSevenExact) {
    auto f = [](const std::array<double, 2>& x) { return std::pow(x[0], 6) * x[1] + std::pow(x[0] * x[1], 3) + 1.0; };
    CubatureOptions opt;
    opt.max_evals = 100;
    auto r = integrate<2>(f, {0, 0}, {1, 2}, opt);
    // ∫x⁶ y = 1/7·2, ∫x³y³ = 1/4·4, area 2.
    EXPECT_NEAR(r.value, 2.0 / 7.0 + 1.0 + 2.0, 1e-13);
}

TEST(Cubature, RefinementConsistency) {
    auto f = [](const std::array<double, 4>& x) {
        return 1.0 / (1.0 + x[0] + 2 * x[1] + x[2] * x[3]);
    };
    CubatureOptions coarse;
    coarse.rel_tol = 1e-4;
    coarse.abs_tol = 0.0;
    CubatureOptions fine = coarse;
    fine.rel_tol = 0.5e-4;
    auto a = integrate<4>(f, {0, 0, 0, 0}, {1, 1, 1, 1}, coarse);
    auto b = integrate<4>(f, {0, 0, 0, 0}, {1, 1, 1, 1}, fine);
    EXPECT_LT(std::abs(a.value - b.value), a.error_estimate);
}

TEST(Cubature, BudgetExhaustionFlagged) {
    // Genz product-peak family: ∫₀¹ dx/(c⁻² + (x − w)²) = c[atan(c(1 − w)) + atan(cw)].
    const double c = 50.0, w = 0.5;
    auto f = [&](const std::array<double, 3>& x) {
        double v = 1.0;
        for (double xi : x) v /= 1.0 / (c * c) + (xi - w) * (xi - w);
        return v;
    };
    const double one = c * (std::atan(c * (1 - w)) + std::atan(c * w));
    CubatureOptions opt;
    opt.max_evals = 20000;
    opt.rel_tol = 1e-12;
    opt.abs_tol = 0.0;
    auto r = integrate<3>(f, {0, 0, 0}, {1, 1, 1}, opt);
    EXPECT_FALSE(r.converged);
    EXPECT_LT(std::abs(r.value - one * one * one) / (one * one * one), 1e-2);
}

TEST(Cubature, RqmcDeterministicForSeed) {
    auto f = [](const std::array<double, 2>& x) { return std::sin(10 * x[0] * x[1]) > 0 ? 1.0 : 0.0; };
    CubatureOptions opt;
    opt.max_evals = 5000;
    opt.rel_tol = 1e-14;
    opt.abs_tol = 0.0;
    auto a = integrate<2>(f, {0, 0}, {1, 1}, opt);
    auto b = integrate<2>(f, {0, 0}, {1, 1}, opt);
    EXPECT_EQ(a.value, b.value);
    EXPECT_EQ(a.method, b.method);
}

TEST(Cubature, NonfiniteCounted) {
    auto r = integrate_1d([](double x) { return x == 0.0 ? NAN : x; }, -1.0, 1.0);
    EXPECT_NEAR(r.value, 0.0, 1e-14);
    EXPECT_GE(r.nonfinite, 1u);
}
