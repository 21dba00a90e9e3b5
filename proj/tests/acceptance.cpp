// Acceptance runner: one PASS/FAIL line per criterion. Tolerances and runtime
// budgets are fixed here; exit status is nonzero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "hyfermi/bethe_goldstone.hpp"
#include "hyfermi/fock.hpp"
#include "hyfermi/hy_formula.hpp"
#include "hyfermi/potentials.hpp"
#include "hyfermi/quadrature.hpp"
#include "oracles.hpp"

using namespace hyfermi;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kLn2 = std::numbers::ln2;

struct Outcome {
    bool pass;
    std::string detail;
};

struct Criterion {
    int id;
    std::string name;
    double budget_s;
    std::function<Outcome()> check;
};

std::string sci(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", v);
    return buf;
}

std::string within(const std::string& what, double value, double tol) {
    return what + " " + sci(value) + " (tol " + sci(tol) + ")";
}

Outcome closed_form_anchor() {
    const double expected = 48.0 / 35.0 * (11.0 - 2.0 * kLn2) * std::cbrt(6.0 * kPi * kPi);
    const double rel = std::abs(F_closed(1.0) - expected) / expected;
    return {rel <= 1e-12, within("rel err", rel, 1e-12)};
}

Outcome symmetric_identity() {
    double worst = 0.0;
    for (double rho : {1e-6, 1e-3, 0.1})
        for (double a : {0.1, 0.37, 1.0}) {
            const double lhs = hy_energy(FermiParams(rho / 2.0, rho / 2.0), a).huang_yang;
            const double rhs =
                4.0 / 35.0 * (11.0 - 2.0 * kLn2) * std::pow(9.0 * kPi, 2.0 / 3.0) * a * a * std::pow(rho, 7.0 / 3.0);
            worst = std::max(worst, std::abs(lhs - rhs) / rhs);
        }
    return {worst <= 1e-12, within("max rel err", worst, 1e-12)};
}

Outcome symmetry_law() {
    double worst = 0.0;
    for (int i = 0; i < 40; ++i) {
        const double x = 0.05 + (4.0 - 0.05) * i / 39.0;
        const double Fx = F_closed(x);
        worst = std::max(worst, std::abs(F_closed(1.0 / x) - std::pow(x, -7.0 / 3.0) * Fx) / Fx);
    }
    return {worst <= 1e-10, within("max rel defect", worst, 1e-10)};
}

Outcome oracle_agreement() {
    double worst = 0.0;
    bool converged = true;
    for (double x : {0.25, 0.5, 1.0}) {
        const auto r = F_quadrature(x);
        const double Fc = F_closed(x);
        worst = std::max(worst, std::abs(r.value - Fc) / Fc);
        converged = converged && r.converged && std::isfinite(r.value);
    }
    return {converged && worst <= 5e-3,
            within("max rel diff", worst, 5e-3) + (converged ? "" : ", quadrature not converged")};
}

Outcome internal_consistency() {
    double ode = 0.0, quad = 0.0, lin = 0.0;
    for (double x : {0.5, 2.0}) ode = std::max(ode, ode_check_f(x, 1e-4));
    for (auto [a, b] : {std::pair{3.0, 1.0}, std::pair{2.0, -1.0}})
        quad = std::max(quad, std::abs(p_integral_quadratic(a, b) - oracle::pv_quadratic(a, b)));
    for (auto [a, b] : {std::pair{2.0, 0.5}, std::pair{1.0, 0.3}})
        lin = std::max(lin, std::abs(p_integral_linear(a, b) - oracle::pv_linear(a, b)));
    return {ode <= 1e-4 && quad <= 1e-4 && lin <= 1e-4,
            within("ode residual", ode, 1e-4) + ", " + within("quadratic", quad, 1e-4) + ", " +
                within("linear", lin, 1e-4)};
}

Outcome scattering_solver() {
    double worst = 0.0;
    bool below_born = true;
    for (double V0 : {0.5, 4.0, 20.0})
        for (double R : {0.5, 1.0}) {
            const auto pot = RadialPotential::square_well(V0, R);
            const double a = solve_scattering(pot).a;
            const double ref = oracle::square_well_length(V0, R);
            worst = std::max(worst, std::abs(a - ref) / ref);
            below_born = below_born && a <= born_length(pot);
        }
    return {worst <= 1e-8 && below_born,
            within("max rel err", worst, 1e-8) + (below_born ? ", a <= born" : ", a > born somewhere")};
}

Outcome bethe_goldstone_degeneration() {
    const auto pot = RadialPotential::square_well(4.0, 1.0);
    BGGrid grid;
    grid.mode = BGMode::spherical;
    grid.q_max = 80.0 / pot.R();
    const auto bg = bethe_goldstone_solve(pot, 0.0, 0.0, {0, 0, 0}, {0, 0, 0}, grid);
    const auto free = solve_scattering(pot);
    double diff = 0.0, scale = 0.0, weighted = 0.0;
    for (std::size_t i = 0; i < bg.nodes.size(); ++i) {
        const double p = norm(bg.nodes[i]);
        const double ref = free.fourier_phi(p);
        diff = std::max(diff, std::abs(bg.phi_hat[i] - ref));
        scale = std::max(scale, std::abs(ref));
        weighted = std::max(weighted, 2.0 * p * p * std::abs(bg.phi_hat[i] - ref) / (8.0 * kPi * free.a));
    }
    const double rel = diff / scale;
    return {bg.converged && rel <= 1e-4 && weighted <= 1e-4,
            within("sup rel", rel, 1e-4) + ", " + within("pointwise 2p^2|dphi|/8pi a", weighted, 1e-4) + ", " +
                std::to_string(bg.nodes.size()) + " nodes"};
}

Outcome fock_exactness() {
    const auto res = fock::run_fock_demo({});
    const auto& r = res.residuals;
    double ident = 0.0;
    for (const char* k : {"R_unitarity", "CAR", "corr_identity"}) ident = std::max(ident, r.at(k));
    const double vanish = std::max(r.at("Q2_par_expectation"), r.at("Q3_expectation"));
    double worst_gap = INFINITY;
    for (const auto& t : res.trial) worst_gap = std::min(worst_gap, t.energy - res.E_ground);
    const bool grid_ok = res.trial.size() == 25;
    const bool pass = res.modes <= 14 && ident <= 1e-10 && vanish <= 1e-12 && grid_ok && worst_gap >= -1e-12;
    return {pass, std::to_string(res.modes) + " modes, " + within("identities", ident, 1e-10) + ", " +
                      within("Q2/Q3 expectations", vanish, 1e-12) + ", min(E_trial - E_ground) " + sci(worst_gap) +
                      " over " + std::to_string(res.trial.size()) + " points"};
}

Outcome gap_scaling() {
    const double gamma = 1.0 / 9.0, delta = 16.0 / 63.0;
    std::vector<double> grid;
    for (int i = 0; i < 5; ++i) grid.push_back(1e-4 * std::pow(100.0, i / 4.0));
    const auto rows = gap_cutoff_study(FermiParams(1.0, 1.0), CutoffConfig(gamma, delta, 1.0), grid);
    std::vector<double> rho, diff;
    bool converged = true;
    for (const auto& row : rows) {
        rho.push_back(row.rho);
        diff.push_back(row.diff);
        converged = converged && row.converged;
    }
    const double slope = loglog_slope(rho, diff);
    const double floor = 7.0 / 3.0 + std::min(gamma, delta) - 0.2;
    char buf[96];
    std::snprintf(buf, sizeof buf, "slope %.4f (min %.4f)", slope, floor);
    return {converged && slope >= floor, std::string(buf) + (converged ? "" : ", quadrature not converged")};
}

Outcome singular_bound() {
    const std::vector<double> xs{1e-3, 1e-2, 0.1, 0.5, 1.0};
    const auto rows = singular_integral_bound(xs);
    bool finite = true;
    std::string vals;
    for (const auto& row : rows) {
        finite = finite && std::isfinite(row.value) && row.converged;
        vals += (vals.empty() ? "" : " ") + sci(row.value);
    }
    const bool ordered = rows.front().value < rows.back().value;
    return {finite && ordered, "values [" + vals + "]" + (ordered ? "" : ", value(1e-3) >= value(1)")};
}

}  // namespace

int main() {
    const std::vector<Criterion> criteria{
        {1, "closed-form anchor F(1)", 1e-3, closed_form_anchor},
        {2, "symmetric-case identity", 1e-3, symmetric_identity},
        {3, "symmetry law F(1/x) = x^(-7/3) F(x)", 1e-2, symmetry_law},
        {4, "F quadrature vs closed form", 900.0, oracle_agreement},
        {5, "auxiliary ODE and p-integrals", 120.0, internal_consistency},
        {6, "square-well scattering length", 1.0, scattering_solver},
        {7, "Bethe-Goldstone free limit", 60.0, bethe_goldstone_degeneration},
        {8, "Fock-space exactness", 600.0, fock_exactness},
        {9, "gap/cut-off removal scaling", 1800.0, gap_scaling},
        {10, "singular integral boundedness", 600.0, singular_bound},
    };
    int failures = 0;
    for (const auto& c : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.check();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const bool in_budget = secs <= c.budget_s;
        const bool pass = o.pass && in_budget;
        failures += pass ? 0 : 1;
        std::printf("%s %2d %s: %s; %.3f s (budget %g s)%s\n", pass ? "PASS" : "FAIL", c.id, c.name.c_str(),
                    o.detail.c_str(), secs, c.budget_s, in_budget ? "" : " over budget");
        std::fflush(stdout);
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
