#pragma once

// End-to-end small-lattice run: builds every operator, checks the exact
// identities and scans the trial energy over a (λ₁, λ₂) grid.

#include <cmath>
#include <nlohmann/json.hpp>
#include <vector>

#include "hyfermi/fock/trial.hpp"

namespace hyfermi::fock {

struct FockDemoConfig {
    double L = 2.0 * std::numbers::pi;
    double K_max = 1.0;
    std::size_t N_up = 1;
    std::size_t N_down = 1;
    RadialPotential potential = RadialPotential::square_well(4.0, 1.0);
    double gamma = 1.0 / 9.0;
    double delta = 16.0 / 63.0;
    /// Density entering the χ cut-offs. NaN places the first shell |p| = 2π/L at
    /// 4.5ρ^{1/3−γ}, inside the transition band, so both B₁ and B₂ act.
    double cutoff_rho = NAN;
    std::vector<double> lambda_grid{0.0, 0.25, 0.5, 0.75, 1.0};
};

struct TrialPoint {
    double lambda1, lambda2, energy;
};

struct FockDemoResult {
    std::size_t modes = 0, dimension = 0, N_up = 0, N_down = 0;
    double scattering_length = 0.0, cutoff_rho = 0.0;
    double E_ffg = 0.0, E_ffg_wick = 0.0, E_ground = 0.0;
    std::vector<TrialPoint> trial;  ///< energy = E_FFG + ⟨T₁T₂Ω, H_corr T₁T₂Ω⟩
    double min_trial = INFINITY;
    double variational_gap = 0.0;   ///< min_trial − E_ground
    std::map<std::string, double> residuals;

    nlohmann::json to_json() const {
        nlohmann::json t = nlohmann::json::array();
        for (const auto& p : trial) t.push_back({p.lambda1, p.lambda2, p.energy});
        return {{"modes", modes},
                {"dimension", dimension},
                {"N_up", N_up},
                {"N_down", N_down},
                {"scattering_length", scattering_length},
                {"cutoff_rho", cutoff_rho},
                {"E_ffg", E_ffg},
                {"E_ffg_wick", E_ffg_wick},
                {"E_ground", E_ground},
                {"trial_energies", t},
                {"min_trial_energy", min_trial},
                {"variational_gap", variational_gap},
                {"identity_residuals", residuals}};
    }
};

/// E_FFG by Wick's theorem for the filled balls:
/// Σ_{σ,k∈B}|k|² + (1/2L³)[V̂(0)N² − Σ_σ Σ_{p,q∈B_σ} V̂(p−q)].
inline double free_fermi_gas_energy_wick(const LatticeConfig& lat, const Vhat& V) {
    double kin = 0.0, exch = 0.0;
    for (int s : {0, 1})
        for (const auto& p : lat.momenta) {
            if (!lat.in_ball(p, s)) continue;
            kin += lat.k2(p);
            for (const auto& q : lat.momenta)
                if (lat.in_ball(q, s)) exch += V(p - q);
        }
    const double N = static_cast<double>(lat.N_up + lat.N_down);
    return kin + (V({0, 0, 0}) * N * N - exch) / (2.0 * lat.volume());
}

/// max over modes i, j of the CAR defects ‖{a_i, a*_j} − δ_ij‖ and ‖{a_i, a_j}‖.
inline double car_residual(const BasisPtr& basis) {
    const auto& modes = basis->modes();
    std::vector<FockOperator> a, ad;
    for (const auto& m : modes) {
        a.push_back(mode_operator(basis, m.n, m.spin, ModeKind::annihilate));
        ad.push_back(mode_operator(basis, m.n, m.spin, ModeKind::create));
    }
    const auto id = identity_operator(basis);
    double worst = 0.0;
    for (std::size_t i = 0; i < modes.size(); ++i)
        for (std::size_t j = 0; j < modes.size(); ++j) {
            SpMat c1 = a[i].entries * ad[j].entries + ad[j].entries * a[i].entries;
            if (i == j) c1 -= id.entries;
            const SpMat c2 = a[i].entries * a[j].entries + a[j].entries * a[i].entries;
            worst = std::max({worst, FockOperator::max_abs(c1), FockOperator::max_abs(c2)});
        }
    return worst;
}

inline double commutator_residual(const FockOperator& A, const FockOperator& B, const SpMat& expected) {
    return FockOperator::max_abs(SpMat(A.entries * B.entries - B.entries * A.entries - expected));
}

inline FockDemoResult run_fock_demo(const FockDemoConfig& cfg) {
    const auto lat = build_lattice_counts(cfg.L, cfg.K_max, cfg.N_up, cfg.N_down);
    const auto basis = std::make_shared<const FockBasis>(lat);
    const auto V = vhat_from_potential(cfg.potential, lat.L);
    const auto sol = solve_scattering(cfg.potential);

    FockDemoResult out;
    out.modes = basis->n_modes();
    out.dimension = basis->dimension();
    out.N_up = lat.N_up;
    out.N_down = lat.N_down;
    out.scattering_length = sol.a;
    out.cutoff_rho =
        std::isnan(cfg.cutoff_rho) ? std::pow(lat.unit() / 4.5, 1.0 / (1.0 / 3.0 - cfg.gamma)) : cfg.cutoff_rho;
    const CutoffConfig cut(cfg.gamma, cfg.delta, out.cutoff_rho);

    const auto H = build_hamiltonian(basis, V);
    const auto R = particle_hole_unitary(basis);
    const auto terms = build_corr_terms(basis, V);
    const auto Hc = terms.total();
    out.E_ffg = free_fermi_gas_energy(R, H);
    out.E_ffg_wick = free_fermi_gas_energy_wick(lat, V);
    out.E_ground = ground_energy(H, lat.N_up, lat.N_down);

    auto& res = out.residuals;
    const auto id = identity_operator(basis);
    res["R_unitarity"] = FockOperator::max_abs(SpMat(SpMat(R.entries.adjoint()) * R.entries - id.entries));
    res["CAR"] = car_residual(basis);
    res["corr_identity"] = corr_identity_residual(particle_hole_conjugate(R, H), out.E_ffg, Hc);
    res["E_ffg_wick"] = std::abs(out.E_ffg - out.E_ffg_wick);
    res["H_number_commutator"] = std::max(commutator_residual(H, number_operator(basis, 0), SpMat(H.entries.rows(), H.entries.cols())),
                                          commutator_residual(H, number_operator(basis, 1), SpMat(H.entries.rows(), H.entries.cols())));

    const auto B1 = build_B1(basis, sol, cut);
    const auto B2 = build_B2(basis, sol.a, cut);
    const auto N = number_operator(basis);
    for (const auto& [name, B] : {std::pair{"B1", &B1}, std::pair{"B2", &B2}}) {
        const auto A = antihermitian_part(*B);
        res[std::string("N_commutator_") + name] =
            commutator_residual(N, A, SpMat(-4.0 * (B->entries + SpMat(B->entries.adjoint()))));
    }

    double q2 = 0.0, q3 = 0.0, norm_err = 0.0, imag = 0.0;
    for (double l1 : cfg.lambda_grid)
        for (double l2 : cfg.lambda_grid) {
            const Vec psi = trial_state(B1, B2, l1, l2);
            norm_err = std::max(norm_err, std::abs(psi.norm() - 1.0));
            q2 = std::max(q2, std::abs(psi.dot(terms.Q2_par.entries * psi)));
            q3 = std::max(q3, std::abs(psi.dot(terms.Q3.entries * psi)));
            const cplx e = psi.dot(Hc.entries * psi);
            imag = std::max(imag, std::abs(e.imag()));
            out.trial.push_back({l1, l2, out.E_ffg + e.real()});
            out.min_trial = std::min(out.min_trial, out.E_ffg + e.real());
        }
    res["Q2_par_expectation"] = q2;
    res["Q3_expectation"] = q3;
    res["expm_norm"] = norm_err;
    res["trial_energy_imag"] = imag;
    out.variational_gap = out.min_trial - out.E_ground;
    return out;
}

}  // namespace hyfermi::fock
