#pragma once

// Trial-state energies ⟨T₁T₂Ω, H_corr T₁T₂Ω⟩ and exact ground energies of fixed-number blocks.

#include <cmath>
#include <vector>

#include "hyfermi/fock/generators.hpp"
#include "hyfermi/fock/hamiltonian.hpp"
#include "hyfermi/fock/linalg.hpp"

namespace hyfermi::fock {

/// T₁T₂Ω with T_j = exp(λ_j(B_j − B_j*)).
inline Vec trial_state(const FockOperator& B1, const FockOperator& B2, double lambda1, double lambda2,
                       const ExpmOptions& opt = {}) {
    const Vec omega = basis_vector(*B1.basis, 0);
    const Vec t2 = expm_action(antihermitian_part(B2), omega, lambda2, opt);
    return expm_action(antihermitian_part(B1), t2, lambda1, opt);
}

/// ⟨ψ, O ψ⟩ for Hermitian O; throws InvariantViolation if the imaginary part exceeds 1e−10.
inline double expectation(const FockOperator& O, const Vec& psi) {
    const cplx e = psi.dot(O.entries * psi);
    if (std::abs(e.imag()) > 1e-10 * std::max(1.0, std::abs(e.real())))
        throw InvariantViolation("expectation: imaginary part " + std::to_string(e.imag()) + " exceeds 1e-10");
    return e.real();
}

inline double trial_energy(const FockOperator& Hcorr, const FockOperator& B1, const FockOperator& B2, double lambda1,
                           double lambda2, const ExpmOptions& opt = {}) {
    return expectation(Hcorr, trial_state(B1, B2, lambda1, lambda2, opt));
}

/// Smallest eigenvalue of H on the block 𝓝↑ = N↑, 𝓝↓ = N↓.
inline EigenResult ground_state(const FockOperator& H, std::size_t N_up, std::size_t N_down,
                                const EigenOptions& opt = {}) {
    const auto states = particle_sector(*H.basis, N_up, N_down);
    if (states.empty()) throw InvariantViolation("ground_energy: the fixed-number block is empty");
    return lowest_eigenpair(restrict_to(H.entries, states), opt);
}

inline double ground_energy(const FockOperator& H, std::size_t N_up, std::size_t N_down, const EigenOptions& opt = {}) {
    return ground_state(H, N_up, N_down, opt).value;
}

/// Smallest eigenvalue of an operator conserving both spin counts, over all (n↑, n↓) blocks.
inline double min_eigenvalue_blockwise(const FockOperator& O, const EigenOptions& opt = {256, 1e-12, 60, 400, 42}) {
    const auto& b = *O.basis;
    const std::size_t half = b.n_modes() / 2;
    double lo = INFINITY;
    for (std::size_t nu = 0; nu <= half; ++nu)
        for (std::size_t nd = 0; nd <= half; ++nd)
            lo = std::min(lo, lowest_eigenpair(restrict_to(O.entries, particle_sector(b, nu, nd)), opt).value);
    return lo;
}

}  // namespace hyfermi::fock
