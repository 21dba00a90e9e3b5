#pragma once

// Lattice Hamiltonian, particle-hole transformation and the correlation
// Hamiltonian. Interaction sums are restricted to the grid: a term is kept
// only if all four momenta are grid momenta.

#include <functional>
#include <map>
#include <string>

#include "hyfermi/fock/basis.hpp"
#include "hyfermi/potentials.hpp"

namespace hyfermi::fock {

/// Fourier coefficient V̂(k) = ∫_Λ V(x) e^{−ik·x} dx at k = (2π/L)n.
using Vhat = std::function<double(const IVec&)>;

/// V̂ for a radial potential on the torus; equals 𝓕V when the support fits (L ≥ 2R).
inline Vhat vhat_from_potential(const RadialPotential& pot, double L) {
    if (L < 2.0 * pot.R()) throw InvariantViolation("vhat_from_potential: box side L must be >= 2R");
    const double unit = 2.0 * std::numbers::pi / L;
    return [pot, unit](const IVec& n) { return fourier_V(pot, unit * std::sqrt(static_cast<double>(norm2(n)))); };
}

inline std::uint8_t mode_of(const FockBasis& b, const IVec& n, int s) {
    return static_cast<std::uint8_t>(b.index(n, s));
}

/// 𝓗 = Σ|k|² a*_{kσ}a_{kσ} + (1/2L³) Σ V̂(k) a*_{p+k,σ} a*_{q−k,σ'} a_{q,σ'} a_{p,σ}.
inline FockOperator build_hamiltonian(const BasisPtr& basis, const Vhat& V) {
    const auto& lat = basis->lattice();
    OperatorBuilder b(basis);
    for (const auto& k : lat.momenta)
        for (int s : {0, 1}) {
            const auto m = mode_of(*basis, k, s);
            b.add(lat.k2(k), {Op{m, true}, Op{m, false}});
        }
    const double pre = 0.5 / lat.volume();
    for (int s : {0, 1})
        for (int sp : {0, 1})
            for (const auto& p : lat.momenta)
                for (const auto& q : lat.momenta)
                    for (const auto& pk : lat.momenta) {
                        const IVec k = pk - p;
                        const IVec qk = q - k;
                        if (!lat.contains(qk)) continue;
                        b.add(pre * V(k), {Op{mode_of(*basis, pk, s), true}, Op{mode_of(*basis, qk, sp), true},
                                           Op{mode_of(*basis, q, sp), false}, Op{mode_of(*basis, p, s), false}});
                    }
    return b.build(true, false, true);
}

/// The unitary R with R*a_{kσ}R = a_{kσ} outside the Fermi ball and a*_{−k,σ} inside,
/// and RΩ = Π_{k∈B} a*_{kσ}Ω (product in mode order). R is a signed permutation.
inline FockOperator particle_hole_unitary(const BasisPtr& basis) {
    const auto& lat = basis->lattice();
    const auto dim = static_cast<std::int64_t>(basis->dimension());
    const std::size_t M = basis->n_modes();
    // R a*_j R* = a*_j outside, a_{−j} inside.
    std::vector<Op> conj(M);
    for (std::size_t j = 0; j < M; ++j) {
        const auto& md = basis->modes()[j];
        if (lat.in_ball(md.n, md.spin)) conj[j] = Op{mode_of(*basis, -md.n, md.spin), false};
        else conj[j] = Op{static_cast<std::uint8_t>(j), true};
    }
    const std::uint64_t filled = basis->ball_mask(0) | basis->ball_mask(1);
    SpMat R(dim, dim);
    R.reserve(Eigen::VectorXi::Constant(dim, 1));
    std::vector<char> hit(static_cast<std::size_t>(dim), 0);
    for (std::int64_t s = 0; s < dim; ++s) {
        // e_s = a*_{m₁}⋯a*_{m_n}Ω, m₁ < ⋯ < m_n.
        std::vector<Op> ops;
        for (std::size_t j = 0; j < M; ++j)
            if (static_cast<std::uint64_t>(s) >> j & 1) ops.push_back(conj[j]);
        std::uint64_t state = filled;
        int sign = 1;
        if (!apply_ops(ops.data(), ops.size(), state, sign))
            throw InvariantViolation("particle_hole_unitary: image of a basis state vanished");
        if (hit[state]++) throw InvariantViolation("particle_hole_unitary: map is not a bijection");
        R.insert(static_cast<std::int64_t>(state), s) = static_cast<double>(sign);
    }
    R.makeCompressed();
    return {basis, std::move(R), false, false, false};
}

/// R* O R.
inline FockOperator particle_hole_conjugate(const FockOperator& R, const FockOperator& O) {
    FockOperator r{O.basis, SpMat(SpMat(R.entries.adjoint()) * O.entries * R.entries), O.hermitian, O.antihermitian,
                   false};
    r.entries.prune(cplx{0.0, 0.0});
    return r;
}

/// E_FFG = ⟨RΩ, 𝓗 RΩ⟩ evaluated from the matrices.
inline double free_fermi_gas_energy(const FockOperator& R, const FockOperator& H) {
    const Vec psi = R.entries.col(0);
    return (psi.adjoint() * (H.entries * psi))(0).real();
}

struct CorrTerms {
    FockOperator H0, X, Q1, Q2_par, Q2_ud, Q3, Q4;

    FockOperator total() const { return H0 + X + Q1 + Q2_par + Q2_ud + Q3 + Q4; }
    std::map<std::string, FockOperator> as_map() const {
        return {{"H0", H0}, {"X", X}, {"Q1", Q1}, {"Q2_par", Q2_par}, {"Q2_ud", Q2_ud}, {"Q3", Q3}, {"Q4", Q4}};
    }
};

namespace detail {

enum class Kernel { u, v };

/// One smeared field a^♯_σ(f_z) with f = u or v and z = x (pos 0) or y (pos 1).
struct Field {
    bool create;
    Kernel kernel;
    int spin;
    int pos;
};

/// Adds c ∫∫ dx dy W(x−y) F₁⋯F_n to the builder. With
/// a_σ(u_z) = L^{−3/2} Σ_{k∉B} e^{ik·z} â_k and a*_σ(u_z) = L^{−3/2} Σ_{k∉B} e^{−ik·z} â*_k
/// (v likewise over k ∈ B) the space integrals give L³ δ(K_x + K_y) Ŵ(K_y),
/// where K_z is the signed momentum carried at z.
inline void add_field_term(OperatorBuilder& b, const FockBasis& basis, double c, const Vhat& W,
                           const std::vector<Field>& fields) {
    const auto& lat = basis.lattice();
    const double pre = c * std::pow(lat.volume(), 1.0 - 0.5 * static_cast<double>(fields.size()));
    std::vector<IVec> chosen(fields.size());
    std::function<void(std::size_t)> rec = [&](std::size_t i) {
        if (i == fields.size()) {
            IVec Kx{0, 0, 0}, Ky{0, 0, 0};
            for (std::size_t j = 0; j < fields.size(); ++j) {
                IVec& K = fields[j].pos == 0 ? Kx : Ky;
                K = K + (fields[j].create ? -chosen[j] : chosen[j]);
            }
            if (Kx + Ky != IVec{0, 0, 0}) return;
            std::vector<Op> ops(fields.size());
            for (std::size_t j = 0; j < fields.size(); ++j)
                ops[j] = Op{mode_of(basis, chosen[j], fields[j].spin), fields[j].create};
            b.add(pre * W(Ky), ops);
            return;
        }
        for (const auto& k : lat.momenta) {
            const bool inside = lat.in_ball(k, fields[i].spin);
            if (inside != (fields[i].kernel == Kernel::v)) continue;
            chosen[i] = k;
            rec(i + 1);
        }
    };
    rec(0);
}

inline FockOperator hermitian_part_of(const OperatorBuilder& b) {
    // O + O* for a builder holding only O.
    auto o = b.build(false, false, false);
    o.entries = SpMat(o.entries + SpMat(o.entries.adjoint()));
    o.hermitian = true;
    return o;
}

}  // namespace detail

/// ℍ₀, 𝕏, ℚ₁, ℚ₂^∥, ℚ₂^↑↓, ℚ₃, ℚ₄, each assembled from its configuration-space form.
inline CorrTerms build_corr_terms(const BasisPtr& basis, const Vhat& V) {
    using detail::Field;
    using detail::Kernel;
    const auto& lat = basis->lattice();
    const auto& B = *basis;
    constexpr auto u = Kernel::u;
    constexpr auto v = Kernel::v;
    constexpr bool cr = true, an = false;

    OperatorBuilder h0(basis);
    for (const auto& k : lat.momenta)
        for (int s : {0, 1}) {
            const auto m = mode_of(B, k, s);
            h0.add(std::abs(lat.k2(k) - lat.kF(s) * lat.kF(s)), {Op{m, true}, Op{m, false}});
        }

    OperatorBuilder x(basis);
    for (int s : {0, 1}) {
        // Ŵ(p) for W = V·v_σ: L^{−3} Σ_{k∈B_σ} V̂(p − k).
        const Vhat Vv = [&, s](const IVec& p) {
            double acc = 0.0;
            for (const auto& k : lat.momenta)
                if (lat.in_ball(k, s)) acc += V(p - k);
            return acc / lat.volume();
        };
        // Exchange enters with a minus sign: −∫∫ V v_σ (a*(u_x)a(u_y) − a*(v_y)a(v_x)).
        detail::add_field_term(x, B, -1.0, Vv, {Field{cr, u, s, 0}, Field{an, u, s, 1}});
        detail::add_field_term(x, B, 1.0, Vv, {Field{cr, v, s, 1}, Field{an, v, s, 0}});
    }

    OperatorBuilder q1(basis), q2p(basis), q2ud(basis), q3(basis), q4(basis);
    for (int s : {0, 1})
        for (int sp : {0, 1}) {
            detail::add_field_term(q1, B, 1.0, V,
                                   {Field{cr, u, s, 0}, Field{cr, v, s, 0}, Field{an, v, sp, 1}, Field{an, u, sp, 1}});
            detail::add_field_term(q1, B, 0.5, V,
                                   {Field{cr, v, s, 0}, Field{cr, v, sp, 1}, Field{an, v, sp, 1}, Field{an, v, s, 0}});
            detail::add_field_term(q1, B, -1.0, V,
                                   {Field{cr, u, s, 0}, Field{cr, v, sp, 1}, Field{an, v, sp, 1}, Field{an, u, s, 0}});
            detail::add_field_term(s == sp ? q2p : q2ud, B, 0.5, V,
                                   {Field{cr, u, s, 0}, Field{cr, u, sp, 1}, Field{cr, v, sp, 1}, Field{cr, v, s, 0}});
            detail::add_field_term(q3, B, 1.0, V,
                                   {Field{cr, u, s, 0}, Field{cr, v, sp, 1}, Field{cr, v, s, 0}, Field{an, v, sp, 1}});
            detail::add_field_term(q3, B, -1.0, V,
                                   {Field{cr, u, s, 0}, Field{cr, u, sp, 1}, Field{cr, v, s, 0}, Field{an, u, sp, 1}});
            detail::add_field_term(q4, B, 0.5, V,
                                   {Field{cr, u, s, 0}, Field{cr, u, sp, 1}, Field{an, u, sp, 1}, Field{an, u, s, 0}});
        }

    CorrTerms t{h0.build(true, false, true), x.build(true, false, true), q1.build(true, false, true),
                detail::hermitian_part_of(q2p), detail::hermitian_part_of(q2ud), detail::hermitian_part_of(q3),
                q4.build(true, false, true)};
    return t;
}

/// Per spin, #particles outside the ball equals #holes inside: the image under R*
/// of the sector 𝓝_σ = N_σ.
inline bool in_neutral_sector(const FockBasis& b, std::uint64_t s) {
    for (int sp : {0, 1}) {
        const auto out = b.spin_mask(sp) & ~b.ball_mask(sp);
        if (b.count(s, out) != b.count(s, b.ball_mask(sp))) return false;
    }
    return true;
}

/// max |(R*𝓗R − E_FFG − H_corr)_{ij}| over i, j in the neutral sector.
inline double corr_identity_residual(const FockOperator& RHR, double E_ffg, const FockOperator& Hcorr) {
    const auto& b = *RHR.basis;
    SpMat D = RHR.entries - Hcorr.entries;
    double worst = 0.0;
    for (std::int64_t s = 0; s < static_cast<std::int64_t>(b.dimension()); ++s)
        if (in_neutral_sector(b, static_cast<std::uint64_t>(s)))
            worst = std::max(worst, std::abs(D.coeff(s, s) - E_ffg));
    for (Eigen::Index c = 0; c < D.outerSize(); ++c) {
        if (!in_neutral_sector(b, static_cast<std::uint64_t>(c))) continue;
        for (SpMat::InnerIterator it(D, c); it; ++it)
            if (it.row() != c && in_neutral_sector(b, static_cast<std::uint64_t>(it.row())))
                worst = std::max(worst, std::abs(it.value()));
    }
    return worst;
}

}  // namespace hyfermi::fock
