#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "hyfermi/bethe_goldstone.hpp"

using namespace hyfermi;

namespace {

constexpr double kPi = std::numbers::pi;

double max_relative_gap(const BGSolution& s, const ScatteringSolution& sc) {
    double worst = 0.0;
    for (std::size_t i = 0; i < s.nodes.size(); ++i)
        worst = std::max(worst, std::abs(s.G[i] - sc.fourier_Vf(norm(s.nodes[i]))));
    return worst / (8.0 * kPi * sc.a);
}

BGGrid small_grid(BGMode mode) {
    BGGrid g;
    g.radial_panels = 6;
    g.panel_nodes = 4;
    g.n_polar = 6;
    g.n_azimuth = 8;
    g.q_max = 20.0;
    g.mode = mode;
    return g;
}

}  // namespace

TEST(BetheGoldstone, FreeLimitReproducesScatteringTransform) {
    for (const auto& pot : {RadialPotential::square_well(4.0, 1.0), RadialPotential::truncated_gaussian(8.0, 1.0)}) {
        BGGrid g;
        g.q_max = 80.0 / pot.R();
        const auto s = bethe_goldstone_solve(pot, 0.0, 0.0, {0, 0, 0}, {0, 0, 0}, g);
        EXPECT_EQ(s.mode, "spherical");
        EXPECT_TRUE(s.converged);
        EXPECT_LE(max_relative_gap(s, solve_scattering(pot)), 1e-4);
    }
}

TEST(BetheGoldstone, StrongWellFallsBackToDirectSolve) {
    const auto pot = RadialPotential::square_well(20.0, 0.5);
    BGGrid g;
    g.q_max = 80.0 / pot.R();
    const auto s = bethe_goldstone_solve(pot, 0.0, 0.0, {0, 0, 0}, {0, 0, 0}, g);
    EXPECT_EQ(s.method, "direct-lu");
    EXPECT_TRUE(std::isfinite(s.condition_estimate));
    EXPECT_LE(max_relative_gap(s, solve_scattering(pot)), 1e-4);
}

TEST(BetheGoldstone, ZerothOrderIsBornTerm) {
    const auto pot = RadialPotential::square_well(2.0, 1.0);
    BGGrid g;
    g.max_iterations = 0;
    const auto s = bethe_goldstone_solve(pot, 0.3, 0.3, {0, 0, 0}, {0, 0, 0}, g);
    EXPECT_EQ(s.method, "zeroth-order");
    EXPECT_EQ(s.G, s.FV);
    for (std::size_t i = 0; i < s.nodes.size(); ++i) EXPECT_NEAR(s.FV[i], fourier_V(pot, norm(s.nodes[i])), 1e-6);
}

TEST(BetheGoldstone, ResidualWithinTolerance) {
    const auto pot = RadialPotential::square_well(4.0, 1.0);
    for (double kF : {0.05, 0.5}) {
        const auto s = bethe_goldstone_solve(pot, kF, kF, {0, 0, 0}, {0, 0, 0});
        EXPECT_TRUE(s.converged);
        EXPECT_LE(s.residual, 1e3 * 1e-12 * std::max(1.0, fourier_V(pot, 0.0)));
        for (std::size_t i = 1; i < s.residual_history.size(); ++i)
            EXPECT_LE(s.residual_history[i], s.residual_history[i - 1] * (1.0 + 1e-9));
    }
}

TEST(BetheGoldstone, DiluteLimitApproachesEightPiA) {
    const auto pot = RadialPotential::square_well(4.0, 1.0);
    const double a = solve_scattering(pot).a;
    BGGrid g;
    g.q_max = 80.0;
    const auto s = bethe_goldstone_solve(pot, 0.05, 0.05, {0, 0, 0}, {0, 0, 0}, g);
    // The node nearest the Fermi surface.
    EXPECT_NEAR(s.G.front() / (8.0 * kPi * a), 1.0, 0.05);
    for (std::size_t i = 0; i < s.nodes.size(); ++i) EXPECT_GE(norm(s.nodes[i]), 0.05);
}

TEST(BetheGoldstone, PhiHatVanishesOutsidePauliDomain) {
    const auto pot = RadialPotential::square_well(1.0, 1.0);
    const auto s = bethe_goldstone_solve(pot, 1.0, 0.8, {0.3, 0, 0}, {0.5, 0, 0}, small_grid(BGMode::automatic));
    EXPECT_EQ(s.mode, "axisymmetric");
    std::size_t blocked = 0;
    for (std::size_t i = 0; i < s.nodes.size(); ++i) {
        if (!s.pauli[i]) {
            EXPECT_EQ(s.phi_hat[i], 0.0);
            ++blocked;
        }
    }
    EXPECT_GT(blocked, 0u);
}

TEST(BetheGoldstone, GeneralGridAgreesWithAxisymmetric) {
    const auto pot = RadialPotential::square_well(1.0, 1.0);
    const Vec3 r{0.2, 0.1, -0.1}, rp = 1.5 * r;
    const auto ax = bethe_goldstone_solve(pot, 0.6, 0.6, r, rp, small_grid(BGMode::axisymmetric));
    const auto ge = bethe_goldstone_solve(pot, 0.6, 0.6, r, rp, small_grid(BGMode::general));
    ASSERT_EQ(ge.nodes.size(), ax.nodes.size() * 8);
    // General nodes are ordered (radial, polar, azimuth); azimuth 0 is the axisymmetric node.
    double worst = 0.0;
    for (std::size_t i = 0; i < ax.nodes.size(); ++i) {
        const std::size_t k = 8 * i;
        ASSERT_LT(norm(ge.nodes[k] - ax.nodes[i]), 1e-13);
        worst = std::max(worst, std::abs(ge.G[k] - ax.G[i]));
    }
    EXPECT_LE(worst, 1e-10);
}

TEST(BetheGoldstone, RejectsInvalidInput) {
    const auto pot = RadialPotential::square_well(1.0, 1.0);
    EXPECT_THROW(bethe_goldstone_solve(pot, 0.5, 0.5, {0.6, 0, 0}, {0, 0, 0}), InvariantViolation);
    EXPECT_THROW(bethe_goldstone_solve(pot, 1.0, 1.0, {0.1, 0, 0}, {0, 0.1, 0}, [] {
        BGGrid g;
        g.mode = BGMode::axisymmetric;
        return g;
    }()), InvariantViolation);
    EXPECT_THROW(bethe_goldstone_solve(pot, 1.0, 1.0, {0.1, 0, 0}, {0, 0, 0}, [] {
        BGGrid g;
        g.mode = BGMode::spherical;
        return g;
    }()), InvariantViolation);
}
