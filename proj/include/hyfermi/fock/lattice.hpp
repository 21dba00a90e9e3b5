#pragma once

// Finite momentum grids (2π/L)ℤ³ ∩ {|k| ≤ K_max} with closed-shell Fermi balls.

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "hyfermi/cutoff.hpp"
#include "hyfermi/error.hpp"

namespace hyfermi::fock {

using IVec = std::array<int, 3>;

inline IVec operator+(const IVec& a, const IVec& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }
inline IVec operator-(const IVec& a, const IVec& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
inline IVec operator-(const IVec& a) { return {-a[0], -a[1], -a[2]}; }
inline int norm2(const IVec& n) { return n[0] * n[0] + n[1] * n[1] + n[2] * n[2]; }

struct LatticeConfig {
    double L = 2.0 * std::numbers::pi;
    double K_max = 1.0;
    std::vector<IVec> momenta;  ///< sorted lexicographically, closed under n ↦ −n
    double kF_up = 0.0;
    double kF_down = 0.0;
    std::size_t N_up = 0;
    std::size_t N_down = 0;
    /// Largest |n|² inside each Fermi ball; membership is decided on integers.
    std::array<int, 2> ball_n2{0, 0};

    double unit() const { return 2.0 * std::numbers::pi / L; }
    double volume() const { return L * L * L; }
    Vec3 k(const IVec& n) const { return {unit() * n[0], unit() * n[1], unit() * n[2]}; }
    double k2(const IVec& n) const { return unit() * unit() * norm2(n); }
    double kF(int spin) const { return spin == 0 ? kF_up : kF_down; }
    std::size_t N(int spin) const { return spin == 0 ? N_up : N_down; }
    bool contains(const IVec& n) const { return std::binary_search(momenta.begin(), momenta.end(), n); }
    bool in_ball(const IVec& n, int spin) const { return norm2(n) <= ball_n2[static_cast<std::size_t>(spin)]; }
    /// Density (N↑ + N↓)/L³.
    double density() const { return static_cast<double>(N_up + N_down) / volume(); }
};

namespace detail {

/// Values |n|² ≤ max_n2 attained by integer vectors, ascending.
inline std::vector<int> shell_values(int max_n2) {
    std::set<int> s;
    const int m = static_cast<int>(std::floor(std::sqrt(static_cast<double>(max_n2)))) + 1;
    for (int a = -m; a <= m; ++a)
        for (int b = -m; b <= m; ++b)
            for (int c = -m; c <= m; ++c)
                if (a * a + b * b + c * c <= max_n2) s.insert(a * a + b * b + c * c);
    return {s.begin(), s.end()};
}

inline std::size_t ball_count(int max_n2) {
    const int m = static_cast<int>(std::floor(std::sqrt(static_cast<double>(std::max(max_n2, 0))))) + 1;
    std::size_t n = 0;
    for (int a = -m; a <= m; ++a)
        for (int b = -m; b <= m; ++b)
            for (int c = -m; c <= m; ++c)
                if (a * a + b * b + c * c <= max_n2) ++n;
    return n;
}

inline int grid_n2(double radius, double unit) {
    const double r = radius / unit;
    return static_cast<int>(std::floor(r * r * (1.0 + 1e-12) + 1e-12));
}

}  // namespace detail

/// Builds the grid and the two Fermi balls {|k| ≤ kF^σ}. A radius within
/// 1e−9 of a shell includes that shell.
inline LatticeConfig build_lattice(double L, double K_max, double kF_up, double kF_down) {
    if (!(L > 0.0) || !std::isfinite(L)) throw InvariantViolation("build_lattice: L must be positive");
    if (!(K_max >= 0.0) || !std::isfinite(K_max)) throw InvariantViolation("build_lattice: K_max must be >= 0");
    if (!(kF_up >= 0.0) || !(kF_down >= 0.0)) throw InvariantViolation("build_lattice: kF must be >= 0");
    LatticeConfig lat;
    lat.L = L;
    lat.K_max = K_max;
    lat.kF_up = kF_up;
    lat.kF_down = kF_down;
    const double unit = lat.unit();
    const int kmax_n2 = detail::grid_n2(K_max * (1.0 + 1e-9), unit);
    const int m = static_cast<int>(std::floor(std::sqrt(static_cast<double>(kmax_n2))));
    for (int a = -m; a <= m; ++a)
        for (int b = -m; b <= m; ++b)
            for (int c = -m; c <= m; ++c)
                if (a * a + b * b + c * c <= kmax_n2) lat.momenta.push_back({a, b, c});
    std::sort(lat.momenta.begin(), lat.momenta.end());
    for (int s = 0; s < 2; ++s) {
        const double kF = lat.kF(s);
        const int n2 = detail::grid_n2(kF * (1.0 + 1e-9), unit);
        if (n2 > kmax_n2)
            throw InvariantViolation("build_lattice: Fermi ball of radius " + std::to_string(kF) +
                                     " is not contained in the momentum grid (K_max = " + std::to_string(K_max) + ")");
        lat.ball_n2[static_cast<std::size_t>(s)] = n2;
    }
    lat.N_up = detail::ball_count(lat.ball_n2[0]);
    lat.N_down = detail::ball_count(lat.ball_n2[1]);
    return lat;
}

/// Radius of the closed Fermi ball holding exactly N momenta. Refuses counts
/// that would split a degenerate shell and names the two nearest closed shells.
inline double closed_shell_radius(double L, std::size_t N) {
    if (N == 0) throw InvariantViolation("closed_shell_radius: N must be >= 1");
    const double unit = 2.0 * std::numbers::pi / L;
    int limit = 4;
    while (detail::ball_count(limit) < N) limit *= 2;
    const auto shells = detail::shell_values(limit);
    std::size_t below_n = 0;
    int below_shell = -1;
    for (std::size_t i = 0; i < shells.size(); ++i) {
        const std::size_t c = detail::ball_count(shells[i]);
        if (c == N) {
            // Midway to the next shell, so rounding cannot move the ball edge.
            const double r = std::sqrt(static_cast<double>(shells[i]));
            const double next = i + 1 < shells.size() ? std::sqrt(static_cast<double>(shells[i + 1])) : r + 1.0;
            return unit * 0.5 * (r + next);
        }
        if (c > N) {
            std::ostringstream os;
            os << "closed_shell_radius: N = " << N << " splits a degenerate shell; nearest closed shells: N = ";
            if (below_shell >= 0)
                os << below_n << " (|k| <= " << unit * std::sqrt(static_cast<double>(below_shell)) << ") and N = ";
            os << c << " (|k| <= " << unit * std::sqrt(static_cast<double>(shells[i])) << ")";
            throw InvariantViolation(os.str());
        }
        below_n = c;
        below_shell = shells[i];
    }
    throw InvariantViolation("closed_shell_radius: no closed shell found");
}

/// Grid with closed Fermi balls holding N↑ and N↓ momenta.
inline LatticeConfig build_lattice_counts(double L, double K_max, std::size_t N_up, std::size_t N_down) {
    return build_lattice(L, K_max, closed_shell_radius(L, N_up), closed_shell_radius(L, N_down));
}

}  // namespace hyfermi::fock
