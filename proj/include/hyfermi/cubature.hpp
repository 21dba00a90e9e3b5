#pragma once

// h-adaptive cubature on hyper-rectangles.
//
// D >= 2 uses the degree-7 Genz–Malik rule with its embedded degree-5 rule for
// the error estimate; D = 1 uses the 15-point Gauss–Kronrod pair. The region
// with the largest error is bisected along the coordinate with the largest
// fourth divided difference. When the evaluation budget runs out, a randomized
// (digit-scrambled) Halton estimate with a fixed seed is tried as well and the
// better of the two estimates is returned, flagged as not converged.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <queue>
#include <random>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace hyfermi {

struct QuadratureResult {
    double value = 0.0;
    double error_estimate = 0.0;
    std::size_t evaluations = 0;
    std::chrono::duration<double> elapsed{0.0};
    bool converged = true;
    /// Integrand evaluations that returned NaN/Inf (counted as zero).
    std::size_t nonfinite = 0;
    std::string method = "adaptive";

    QuadratureResult& operator+=(const QuadratureResult& o) {
        value += o.value;
        error_estimate += o.error_estimate;
        evaluations += o.evaluations;
        elapsed += o.elapsed;
        converged = converged && o.converged;
        nonfinite += o.nonfinite;
        return *this;
    }
};

struct CubatureOptions {
    double abs_tol = 1e-10;
    double rel_tol = 1e-8;
    std::size_t max_evals = 2'000'000;
    bool qmc_fallback = true;
    std::uint64_t seed = 42;
};

namespace detail {

template <std::size_t D>
using Point = std::array<double, D>;

template <std::size_t D>
struct Region {
    Point<D> center;
    Point<D> half;
    double value = 0.0;
    double error = 0.0;
    std::size_t split_dim = 0;

    bool operator<(const Region& o) const { return error < o.error; }
};

template <std::size_t D, class F>
class Evaluator {
public:
    explicit Evaluator(F& f) : f_(f) {}

    double operator()(const Point<D>& x) {
        ++count;
        const double v = f_(x);
        if (!std::isfinite(v)) {
            ++nonfinite;
            return 0.0;
        }
        return v;
    }

    std::size_t count = 0;
    std::size_t nonfinite = 0;

private:
    F& f_;
};

template <std::size_t D, class Eval>
void genz_malik(Region<D>& r, Eval& eval) {
    static_assert(D >= 2);
    constexpr double l2 = 0.35856858280031809199;  // sqrt(9/70)
    constexpr double l4 = 0.94868329805051379960;  // sqrt(9/10)
    constexpr double l5 = 0.68824720161168529772;  // sqrt(9/19)
    constexpr double n = static_cast<double>(D);
    const double w1 = (12824.0 - 9120.0 * n + 400.0 * n * n) / 19683.0;
    const double w2 = 980.0 / 6561.0;
    const double w3 = (1820.0 - 400.0 * n) / 19683.0;
    const double w4 = 200.0 / 19683.0;
    const double w5 = 6859.0 / 19683.0 / static_cast<double>(std::size_t{1} << D);
    const double e1 = (729.0 - 950.0 * n + 50.0 * n * n) / 729.0;
    const double e2 = 245.0 / 486.0;
    const double e3 = (265.0 - 100.0 * n) / 1458.0;
    const double e4 = 25.0 / 729.0;
    const double ratio = (l2 * l2) / (l4 * l4);

    double vol = 1.0;
    for (std::size_t d = 0; d < D; ++d) vol *= 2.0 * r.half[d];

    const double f0 = eval(r.center);
    double s2 = 0.0, s3 = 0.0, s4 = 0.0, s5 = 0.0;
    double max_diff = -1.0;
    for (std::size_t d = 0; d < D; ++d) {
        Point<D> x = r.center;
        x[d] = r.center[d] - l2 * r.half[d];
        const double a = eval(x);
        x[d] = r.center[d] + l2 * r.half[d];
        const double b = eval(x);
        x[d] = r.center[d] - l4 * r.half[d];
        const double c = eval(x);
        x[d] = r.center[d] + l4 * r.half[d];
        const double e = eval(x);
        s2 += a + b;
        s3 += c + e;
        const double diff = std::abs(a + b - 2.0 * f0 - ratio * (c + e - 2.0 * f0));
        if (diff > max_diff * (1.0 + 1e-12)) {
            max_diff = diff;
            r.split_dim = d;
        }
    }
    for (std::size_t i = 0; i < D; ++i) {
        for (std::size_t j = i + 1; j < D; ++j) {
            for (int si : {-1, 1}) {
                for (int sj : {-1, 1}) {
                    Point<D> x = r.center;
                    x[i] += si * l4 * r.half[i];
                    x[j] += sj * l4 * r.half[j];
                    s4 += eval(x);
                }
            }
        }
    }
    for (std::size_t mask = 0; mask < (std::size_t{1} << D); ++mask) {
        Point<D> x = r.center;
        for (std::size_t d = 0; d < D; ++d) x[d] += ((mask >> d) & 1U ? 1.0 : -1.0) * l5 * r.half[d];
        s5 += eval(x);
    }
    const double r7 = vol * (w1 * f0 + w2 * s2 + w3 * s3 + w4 * s4 + w5 * s5);
    const double r5 = vol * (e1 * f0 + e2 * s2 + e3 * s3 + e4 * s4);
    r.value = r7;
    r.error = std::abs(r7 - r5);
}

template <class Eval>
void gauss_kronrod(Region<1>& r, Eval& eval) {
    using GK = boost::math::quadrature::gauss_kronrod<double, 15>;
    const auto& xk = GK::abscissa();
    const auto& wk = GK::weights();
    const auto& wg = boost::math::quadrature::gauss<double, 7>::weights();
    double kron = 0.0, gauss = 0.0;
    for (std::size_t i = 0; i < xk.size(); ++i) {
        const double h = xk[i] * r.half[0];
        double fv = eval(Point<1>{r.center[0] + h});
        if (xk[i] != 0.0) fv += eval(Point<1>{r.center[0] - h});
        kron += wk[i] * fv;
        // Gauss nodes are the even-indexed Kronrod nodes (index 0 is the centre).
        if (i % 2 == 0) gauss += wg[i / 2] * fv;
    }
    r.value = kron * r.half[0];
    r.error = std::abs((kron - gauss) * r.half[0]);
    r.split_dim = 0;
}

template <std::size_t D, class Eval>
void apply_rule(Region<D>& r, Eval& eval) {
    if constexpr (D == 1) {
        gauss_kronrod(r, eval);
    } else {
        genz_malik(r, eval);
    }
}

inline constexpr std::array<unsigned, 8> kHaltonBases{2, 3, 5, 7, 11, 13, 17, 19};

// Halton point with an independent random digit permutation per (dimension, digit).
template <std::size_t D>
class ScrambledHalton {
public:
    explicit ScrambledHalton(std::uint64_t seed) {
        static_assert(D <= kHaltonBases.size());
        std::mt19937_64 rng(seed);
        for (std::size_t d = 0; d < D; ++d) {
            const unsigned b = kHaltonBases[d];
            perms_[d].resize(kDigits);
            for (auto& p : perms_[d]) {
                p.resize(b);
                std::iota(p.begin(), p.end(), 0U);
                std::shuffle(p.begin(), p.end(), rng);
            }
        }
    }

    Point<D> operator()(std::uint64_t index) const {
        Point<D> u{};
        for (std::size_t d = 0; d < D; ++d) {
            const unsigned b = kHaltonBases[d];
            double inv = 1.0 / b, scale = inv, v = 0.0;
            std::uint64_t i = index;
            for (std::size_t k = 0; k < kDigits; ++k) {
                v += perms_[d][k][i % b] * scale;
                i /= b;
                scale *= inv;
            }
            u[d] = v;
        }
        return u;
    }

private:
    static constexpr std::size_t kDigits = 40;
    std::array<std::vector<std::vector<unsigned>>, D> perms_;
};

template <std::size_t D, class Eval>
QuadratureResult rqmc(Eval& eval, const Point<D>& lo, const Point<D>& hi, std::size_t budget,
                      std::uint64_t seed) {
    constexpr std::size_t replicas = 8;
    const std::size_t n = std::max<std::size_t>(budget / replicas, 64);
    double vol = 1.0;
    for (std::size_t d = 0; d < D; ++d) vol *= hi[d] - lo[d];
    std::array<double, replicas> est{};
    for (std::size_t r = 0; r < replicas; ++r) {
        ScrambledHalton<D> seq(seed + 0x9E3779B97F4A7C15ULL * (r + 1));
        double sum = 0.0;
        for (std::size_t i = 1; i <= n; ++i) {
            Point<D> u = seq(i);
            for (std::size_t d = 0; d < D; ++d) u[d] = lo[d] + u[d] * (hi[d] - lo[d]);
            sum += eval(u);
        }
        est[r] = vol * sum / static_cast<double>(n);
    }
    const double mean = std::accumulate(est.begin(), est.end(), 0.0) / replicas;
    double var = 0.0;
    for (double e : est) var += (e - mean) * (e - mean);
    var /= (replicas - 1);
    QuadratureResult res;
    res.value = mean;
    res.error_estimate = 3.0 * std::sqrt(var / replicas);
    res.method = "rqmc-halton";
    return res;
}

}  // namespace detail

/// Integrates f over the box [lo, hi]. `f` takes std::array<double, D>.
template <std::size_t D, class F>
QuadratureResult integrate(F&& f, const std::array<double, D>& lo, const std::array<double, D>& hi,
                           const CubatureOptions& opt = {}) {
    const auto t0 = std::chrono::steady_clock::now();
    detail::Evaluator<D, std::remove_reference_t<F>> eval(f);

    detail::Region<D> root;
    for (std::size_t d = 0; d < D; ++d) {
        root.center[d] = 0.5 * (lo[d] + hi[d]);
        root.half[d] = 0.5 * (hi[d] - lo[d]);
    }
    detail::apply_rule(root, eval);

    std::priority_queue<detail::Region<D>> heap;
    heap.push(root);
    double value = root.value, error = root.error;

    auto satisfied = [&] { return error <= std::max(opt.abs_tol, opt.rel_tol * std::abs(value)); };

    while (!satisfied() && eval.count < opt.max_evals) {
        detail::Region<D> worst = heap.top();
        heap.pop();
        const std::size_t d = worst.split_dim;
        detail::Region<D> a = worst, b = worst;
        a.half[d] = b.half[d] = 0.5 * worst.half[d];
        a.center[d] = worst.center[d] - a.half[d];
        b.center[d] = worst.center[d] + b.half[d];
        detail::apply_rule(a, eval);
        detail::apply_rule(b, eval);
        value += a.value + b.value - worst.value;
        error += a.error + b.error - worst.error;
        heap.push(a);
        heap.push(b);
        // Re-sum occasionally so the running totals do not drift.
        if (heap.size() % 1024 == 0) {
            auto copy = heap;
            value = error = 0.0;
            while (!copy.empty()) {
                value += copy.top().value;
                error += copy.top().error;
                copy.pop();
            }
        }
    }
    {
        value = error = 0.0;
        auto copy = heap;
        while (!copy.empty()) {
            value += copy.top().value;
            error += copy.top().error;
            copy.pop();
        }
    }

    QuadratureResult res;
    res.value = value;
    res.error_estimate = error;
    res.converged = satisfied();

    if (!res.converged && opt.qmc_fallback) {
        if constexpr (D <= detail::kHaltonBases.size()) {
            QuadratureResult q = detail::rqmc<D>(eval, lo, hi, opt.max_evals, opt.seed);
            if (q.error_estimate < res.error_estimate) {
                res.value = q.value;
                res.error_estimate = q.error_estimate;
                res.method = q.method;
            }
        }
    }
    res.evaluations = eval.count;
    res.nonfinite = eval.nonfinite;
    res.elapsed = std::chrono::steady_clock::now() - t0;
    return res;
}

/// Gauss–Legendre nodes and weights on [a, b] (Newton iteration on P_n).
inline std::pair<std::vector<double>, std::vector<double>> gauss_legendre(std::size_t n, double a = -1.0,
                                                                          double b = 1.0) {
    std::vector<double> x(n), w(n);
    const double pi = 3.14159265358979323846;
    for (std::size_t i = 0; i < n; ++i) {
        double z = std::cos(pi * (static_cast<double>(i) + 0.75) / (static_cast<double>(n) + 0.5));
        double dp = 1.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = z;
            for (std::size_t k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / static_cast<double>(k);
                p0 = p1;
                p1 = p2;
            }
            if (n == 1) p0 = 1.0;
            dp = static_cast<double>(n) * (z * p1 - p0) / (z * z - 1.0);
            const double dz = p1 / dp;
            z -= dz;
            if (std::abs(dz) < 1e-16) break;
        }
        // Ascending order.
        x[n - 1 - i] = 0.5 * (b - a) * z + 0.5 * (b + a);
        w[n - 1 - i] = (b - a) / ((1.0 - z * z) * dp * dp);
    }
    return {x, w};
}

/// Adaptive Gauss–Kronrod over [a, b] for scalar integrands.
template <class F>
QuadratureResult integrate_1d(F&& f, double a, double b, const CubatureOptions& opt = {}) {
    auto g = [&f](const std::array<double, 1>& x) { return f(x[0]); };
    return integrate<1>(g, {a}, {b}, opt);
}

/// Sums 1D integrals over consecutive panels [b_i, b_{i+1}].
template <class F>
QuadratureResult integrate_panels(F&& f, const std::vector<double>& breaks, const CubatureOptions& opt = {}) {
    QuadratureResult total;
    total.evaluations = 0;
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
        if (!(breaks[i + 1] > breaks[i])) continue;
        total += integrate_1d(f, breaks[i], breaks[i + 1], opt);
    }
    return total;
}

}  // namespace hyfermi
