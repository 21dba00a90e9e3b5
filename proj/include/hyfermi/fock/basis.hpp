#pragma once

// Occupation-number basis and sparse operators on the fermionic Fock space of
// a finite mode set. Basis state s is a bitmask; bit m set means mode m is
// occupied, and the state is a*_{m₁} a*_{m₂} ⋯ Ω with m₁ < m₂ < ⋯.

#include <Eigen/Sparse>
#include <algorithm>
#include <bit>
#include <complex>
#include <cstdint>
#include <initializer_list>
#include <map>
#include <memory>
#include <vector>

#include "hyfermi/error.hpp"
#include "hyfermi/fock/lattice.hpp"

namespace hyfermi::fock {

using cplx = std::complex<double>;
using SpMat = Eigen::SparseMatrix<cplx, Eigen::ColMajor, std::int64_t>;
using Vec = Eigen::VectorXcd;

enum Spin : int { up = 0, down = 1 };

struct Mode {
    IVec n;
    int spin;
};

class FockBasis {
public:
    static constexpr std::size_t max_modes = 20;

    /// Modes ordered by momentum (lexicographic on integer coordinates), ↑ before ↓.
    explicit FockBasis(const LatticeConfig& lat) : lat_(lat) {
        for (const auto& n : lat.momenta)
            for (int s : {0, 1}) {
                index_[{n, s}] = modes_.size();
                modes_.push_back({n, s});
            }
        if (modes_.size() > max_modes)
            throw InvariantViolation("FockBasis: " + std::to_string(modes_.size()) + " modes exceed the limit of " +
                                     std::to_string(max_modes));
        for (std::size_t m = 0; m < modes_.size(); ++m) {
            const auto bit = std::uint64_t{1} << m;
            spin_mask_[static_cast<std::size_t>(modes_[m].spin)] |= bit;
            if (lat.in_ball(modes_[m].n, modes_[m].spin)) ball_mask_[static_cast<std::size_t>(modes_[m].spin)] |= bit;
        }
    }

    const LatticeConfig& lattice() const { return lat_; }
    std::size_t n_modes() const { return modes_.size(); }
    std::uint64_t dimension() const { return std::uint64_t{1} << modes_.size(); }
    const std::vector<Mode>& modes() const { return modes_; }
    bool has_mode(const IVec& n, int spin) const { return index_.count({n, spin}) > 0; }
    std::size_t index(const IVec& n, int spin) const {
        const auto it = index_.find({n, spin});
        if (it == index_.end())
            throw InvariantViolation("FockBasis: unknown mode (" + std::to_string(n[0]) + "," + std::to_string(n[1]) +
                                     "," + std::to_string(n[2]) + ") spin " + std::to_string(spin));
        return it->second;
    }
    std::uint64_t spin_mask(int spin) const { return spin_mask_[static_cast<std::size_t>(spin)]; }
    /// Modes inside the Fermi ball of the given spin.
    std::uint64_t ball_mask(int spin) const { return ball_mask_[static_cast<std::size_t>(spin)]; }
    int count(std::uint64_t state, std::uint64_t mask) const { return std::popcount(state & mask); }

private:
    LatticeConfig lat_;
    std::vector<Mode> modes_;
    std::map<std::pair<IVec, int>, std::size_t> index_;
    std::array<std::uint64_t, 2> spin_mask_{0, 0};
    std::array<std::uint64_t, 2> ball_mask_{0, 0};
};

using BasisPtr = std::shared_ptr<const FockBasis>;

struct Op {
    std::uint8_t mode;
    bool create;
};

/// Applies ops[len−1] first. Returns false if the product annihilates the state.
inline bool apply_ops(const Op* ops, std::size_t len, std::uint64_t& state, int& sign) {
    for (std::size_t i = len; i-- > 0;) {
        const auto bit = std::uint64_t{1} << ops[i].mode;
        if (static_cast<bool>(state & bit) == ops[i].create) return false;
        if (std::popcount(state & (bit - 1)) & 1) sign = -sign;
        state ^= bit;
    }
    return true;
}

struct FockOperator {
    BasisPtr basis;
    SpMat entries;
    bool hermitian = false;
    bool antihermitian = false;
    bool number_conserving = false;

    Vec apply(const Vec& v) const { return entries * v; }

    FockOperator adjoint() const {
        FockOperator r{basis, SpMat(entries.adjoint()), hermitian, antihermitian, number_conserving};
        return r;
    }

    /// Exact check of the declared flags. Throws InvariantViolation naming the first failure.
    void verify_flags(double tol = 1e-12) const {
        if (hermitian && max_abs(SpMat(entries - SpMat(entries.adjoint()))) > tol)
            throw InvariantViolation("FockOperator: hermitian flag set but O != O*");
        if (antihermitian && max_abs(SpMat(entries + SpMat(entries.adjoint()))) > tol)
            throw InvariantViolation("FockOperator: antihermitian flag set but O != -O*");
        if (number_conserving)
            for (Eigen::Index c = 0; c < entries.outerSize(); ++c)
                for (SpMat::InnerIterator it(entries, c); it; ++it)
                    if (std::abs(it.value()) > tol &&
                        std::popcount(static_cast<std::uint64_t>(it.row())) != std::popcount(static_cast<std::uint64_t>(c)))
                        throw InvariantViolation("FockOperator: number_conserving flag set but occupation changes");
    }

    static double max_abs(const SpMat& m) {
        double r = 0.0;
        for (Eigen::Index c = 0; c < m.outerSize(); ++c)
            for (SpMat::InnerIterator it(m, c); it; ++it) r = std::max(r, std::abs(it.value()));
        return r;
    }
};

inline FockOperator operator+(const FockOperator& a, const FockOperator& b) {
    return {a.basis, SpMat(a.entries + b.entries), a.hermitian && b.hermitian, a.antihermitian && b.antihermitian,
            a.number_conserving && b.number_conserving};
}
inline FockOperator operator-(const FockOperator& a, const FockOperator& b) {
    return {a.basis, SpMat(a.entries - b.entries), a.hermitian && b.hermitian, a.antihermitian && b.antihermitian,
            a.number_conserving && b.number_conserving};
}
inline FockOperator operator*(double c, const FockOperator& a) {
    return {a.basis, SpMat(c * a.entries), a.hermitian, a.antihermitian, a.number_conserving};
}
inline FockOperator operator*(const FockOperator& a, const FockOperator& b) {
    return {a.basis, SpMat(a.entries * b.entries), false, false, a.number_conserving && b.number_conserving};
}

/// Accumulates normal-form monomials c·o₁o₂⋯o_n (n ≤ 4) and assembles the sparse matrix.
class OperatorBuilder {
public:
    explicit OperatorBuilder(BasisPtr basis) : basis_(std::move(basis)) {}

    void add(cplx c, std::initializer_list<Op> ops) {
        if (c == cplx{0.0, 0.0}) return;
        Term t{c, {}, static_cast<std::uint8_t>(ops.size())};
        std::copy(ops.begin(), ops.end(), t.ops.begin());
        terms_.push_back(t);
    }
    void add(cplx c, const std::vector<Op>& ops) {
        if (c == cplx{0.0, 0.0}) return;
        Term t{c, {}, static_cast<std::uint8_t>(ops.size())};
        std::copy(ops.begin(), ops.end(), t.ops.begin());
        terms_.push_back(t);
    }
    std::size_t size() const { return terms_.size(); }

    FockOperator build(bool hermitian, bool antihermitian, bool number_conserving) const {
        const auto dim = static_cast<std::int64_t>(basis_->dimension());
        SpMat m(dim, dim);
        std::vector<std::pair<std::int64_t, cplx>> col;
        std::vector<Eigen::Index> nnz(static_cast<std::size_t>(dim));
        std::vector<std::vector<std::pair<std::int64_t, cplx>>> cols(static_cast<std::size_t>(dim));
        for (std::int64_t s = 0; s < dim; ++s) {
            col.clear();
            for (const auto& t : terms_) {
                auto state = static_cast<std::uint64_t>(s);
                int sign = 1;
                if (apply_ops(t.ops.data(), t.len, state, sign))
                    col.emplace_back(static_cast<std::int64_t>(state), static_cast<double>(sign) * t.c);
            }
            std::sort(col.begin(), col.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
            auto& out = cols[static_cast<std::size_t>(s)];
            for (const auto& [r, v] : col) {
                if (!out.empty() && out.back().first == r) out.back().second += v;
                else out.emplace_back(r, v);
            }
            std::erase_if(out, [](const auto& e) { return e.second == cplx{0.0, 0.0}; });
            nnz[static_cast<std::size_t>(s)] = static_cast<Eigen::Index>(out.size());
        }
        m.reserve(nnz);
        for (std::int64_t s = 0; s < dim; ++s)
            for (const auto& [r, v] : cols[static_cast<std::size_t>(s)]) m.insert(r, s) = v;
        m.makeCompressed();
        return {basis_, std::move(m), hermitian, antihermitian, number_conserving};
    }

private:
    struct Term {
        cplx c;
        std::array<Op, 4> ops;
        std::uint8_t len;
    };
    BasisPtr basis_;
    std::vector<Term> terms_;
};

enum class ModeKind { create, annihilate };

/// a*_{kσ} or a_{kσ}; the sign is the parity of occupied modes preceding the target.
inline FockOperator mode_operator(const BasisPtr& basis, const IVec& n, int spin, ModeKind kind) {
    const auto m = static_cast<std::uint8_t>(basis->index(n, spin));
    OperatorBuilder b(basis);
    b.add(1.0, {Op{m, kind == ModeKind::create}});
    return b.build(false, false, false);
}

/// 𝓝_σ, or 𝓝 when spin < 0.
inline FockOperator number_operator(const BasisPtr& basis, int spin = -1) {
    const auto dim = static_cast<std::int64_t>(basis->dimension());
    const std::uint64_t mask = spin < 0 ? basis->spin_mask(0) | basis->spin_mask(1) : basis->spin_mask(spin);
    SpMat m(dim, dim);
    m.reserve(Eigen::VectorXi::Constant(dim, 1));
    for (std::int64_t s = 0; s < dim; ++s) {
        const int c = std::popcount(static_cast<std::uint64_t>(s) & mask);
        if (c) m.insert(s, s) = static_cast<double>(c);
    }
    m.makeCompressed();
    return {basis, std::move(m), true, false, true};
}

inline FockOperator identity_operator(const BasisPtr& basis) {
    const auto dim = static_cast<std::int64_t>(basis->dimension());
    SpMat m(dim, dim);
    m.setIdentity();
    return {basis, std::move(m), true, false, true};
}

/// Basis vector e_s.
inline Vec basis_vector(const FockBasis& basis, std::uint64_t s) {
    Vec v = Vec::Zero(static_cast<Eigen::Index>(basis.dimension()));
    v(static_cast<Eigen::Index>(s)) = 1.0;
    return v;
}

}  // namespace hyfermi::fock
