#pragma once

// Pair generators B = (1/L³) Σ_{p,r,r'} c(p, r, r') b_{p,r,↑} b_{−p,r',↓} with
// b_{p,k,σ} = û_σ(p+k) v̂_σ(k) â_{p+k,σ} â_{−k,σ}.

#include <functional>

#include "hyfermi/cutoff.hpp"
#include "hyfermi/fock/basis.hpp"
#include "hyfermi/potentials.hpp"

namespace hyfermi::fock {

enum class GeneratorKind { B1, B2 };

/// c(p, r, r') for a Pauli-allowed triple (r ∈ B↑, r+p ∉ B↑, r' ∈ B↓, r'−p ∉ B↓).
using PairCoefficient = std::function<double(const IVec& p, const IVec& r, const IVec& rp)>;

inline FockOperator build_pair_generator(const BasisPtr& basis, const PairCoefficient& c) {
    const auto& lat = basis->lattice();
    OperatorBuilder b(basis);
    for (const auto& r : lat.momenta) {
        if (!lat.in_ball(r, 0)) continue;
        for (const auto& rp_out : lat.momenta) {  // r + p
            if (lat.in_ball(rp_out, 0)) continue;
            const IVec p = rp_out - r;
            for (const auto& s : lat.momenta) {  // r'
                if (!lat.in_ball(s, 1)) continue;
                const IVec t = s - p;  // r' − p
                if (!lat.contains(t) || lat.in_ball(t, 1)) continue;
                const double coef = c(p, r, s) / lat.volume();
                b.add(coef, {Op{static_cast<std::uint8_t>(basis->index(rp_out, 0)), false},
                             Op{static_cast<std::uint8_t>(basis->index(-r, 0)), false},
                             Op{static_cast<std::uint8_t>(basis->index(t, 1)), false},
                             Op{static_cast<std::uint8_t>(basis->index(-s, 1)), false}});
            }
        }
    }
    return b.build(false, false, false);
}

/// B₁ with coefficient 𝓕(φ∞)(p) χ̂>(p).
inline FockOperator build_B1(const BasisPtr& basis, const ScatteringSolution& sol, const CutoffConfig& cut) {
    const auto& lat = basis->lattice();
    return build_pair_generator(basis, [&](const IVec& p, const IVec&, const IVec&) {
        const double k = norm(lat.k(p));
        return sol.fourier_phi(k) * cut.chi_greater(k);
    });
}

/// B₂ with coefficient η̂^ε_{r,r'}(p) χ̂<(p), ε = ρ^{2/3+δ}.
inline FockOperator build_B2(const BasisPtr& basis, double a, const CutoffConfig& cut) {
    const auto& lat = basis->lattice();
    const EtaFunction eta{a, cut.epsilon(), lat.kF_up, lat.kF_down};
    return build_pair_generator(basis, [&](const IVec& p, const IVec& r, const IVec& rp) {
        const Vec3 kp = lat.k(p);
        return eta_eps(eta, lat.k(r), lat.k(rp), kp) * cut.chi_less(kp);
    });
}

inline FockOperator build_generator(const BasisPtr& basis, GeneratorKind which, const ScatteringSolution& sol,
                                    const CutoffConfig& cut) {
    return which == GeneratorKind::B1 ? build_B1(basis, sol, cut) : build_B2(basis, sol.a, cut);
}

/// B − B*.
inline FockOperator antihermitian_part(const FockOperator& B) {
    FockOperator r{B.basis, SpMat(B.entries - SpMat(B.entries.adjoint())), false, true, false};
    return r;
}

}  // namespace hyfermi::fock
