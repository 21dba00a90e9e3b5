#pragma once

// Command-line front end: option table, config merging and command dispatch.
// Every command writes one document (CSV table or JSON) followed by a single
// JSON metadata line.

#include <CLI11.hpp>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <nlohmann/json.hpp>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "hyfermi/bethe_goldstone.hpp"
#include "hyfermi/cutoff.hpp"
#include "hyfermi/error.hpp"
#include "hyfermi/fock.hpp"
#include "hyfermi/hy_formula.hpp"
#include "hyfermi/potentials.hpp"
#include "hyfermi/quadrature.hpp"

namespace hyfermi::cli {

inline constexpr const char* kVersion = "0.1.0";

enum ExitCode : int { kOk = 0, kFailure = 1, kUsage = 2 };

/// Malformed command line or config file.
class UsageError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// --help was requested; what() holds the help text.
class HelpRequested : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class ParamType { number, integer, text, list };

struct ParamSpec {
    std::string name;
    ParamType type;
    nlohmann::json fallback;
    std::string help;
};

inline const std::vector<ParamSpec>& param_table() {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    static const std::vector<ParamSpec> table{
        {"gamma", ParamType::number, 1.0 / 9.0, "cut-off exponent gamma in (0, 1/3)"},
        {"delta", ParamType::number, 16.0 / 63.0, "gap exponent delta, delta <= 8 gamma and 2 gamma + delta/16 <= 1/3"},
        {"rho-up", ParamType::number, 1e-3, "spin-up density"},
        {"rho-down", ParamType::number, 1e-3, "spin-down density"},
        {"a", ParamType::number, nan, "scattering length (default: computed from the potential)"},
        {"V0", ParamType::number, 4.0, "potential strength"},
        {"R", ParamType::number, 1.0, "potential range"},
        {"kind", ParamType::text, "square-well", "square-well | truncated-gaussian | tabulated"},
        {"potential-file", ParamType::text, "", "potential JSON document (overrides kind, V0, R)"},
        {"L", ParamType::number, nan, "box side for fock-demo (default 2 pi)"},
        {"L-grid", ParamType::list, nlohmann::json::array({25.0, 50.0, 100.0, 200.0, 400.0}), "box sides for lattice-sum"},
        {"kmax", ParamType::number, 1.0, "momentum cut-off of the fock-demo grid"},
        {"shells", ParamType::list, nlohmann::json::array({1.0, 1.0}), "fock-demo particle numbers N_up,N_down"},
        {"lambda-grid", ParamType::list, nlohmann::json::array({0.0, 0.25, 0.5, 0.75, 1.0}), "fock-demo lambda values"},
        {"cutoff-rho", ParamType::number, nan, "density entering the fock-demo cut-offs"},
        {"tol", ParamType::number, nan, "relative tolerance (default depends on the command)"},
        {"seed", ParamType::integer, 42, "seed for randomised start vectors and sampling"},
        {"threads", ParamType::integer, 1, "worker threads (computation is single-threaded)"},
        {"out", ParamType::text, "-", "output path, - for stdout"},
        {"format", ParamType::text, "", "csv | json (default depends on the command)"},
        {"x", ParamType::number, nan, "density ratio x"},
        {"x-grid", ParamType::list, nlohmann::json::array(), "list of x values"},
        {"x-min", ParamType::number, 0.05, "hy-table lower end"},
        {"x-max", ParamType::number, 4.0, "hy-table upper end"},
        {"n-points", ParamType::integer, 40, "hy-table number of points"},
        {"p", ParamType::number, 1.0, "momentum for quad-g"},
        {"rho-min", ParamType::number, 1e-4, "gap-study lowest density"},
        {"rho-max", ParamType::number, 1e-2, "gap-study highest density"},
        {"n-rho", ParamType::integer, 5, "gap-study number of densities"},
        {"kf-up", ParamType::number, 0.0, "bg-solve spin-up Fermi momentum"},
        {"kf-down", ParamType::number, 0.0, "bg-solve spin-down Fermi momentum"},
        {"r", ParamType::list, nlohmann::json::array({0.0, 0.0, 0.0}), "bg-solve momentum r"},
        {"rp", ParamType::list, nlohmann::json::array({0.0, 0.0, 0.0}), "bg-solve momentum r'"},
        {"q-max", ParamType::number, 0.0, "bg-solve radial cut-off (0 selects 80/R)"},
        {"mode", ParamType::text, "automatic", "bg-solve mode: automatic | spherical | axisymmetric | general"},
    };
    return table;
}

inline const std::vector<std::string>& command_names() {
    static const std::vector<std::string> names{"scatter",    "hy-eval",     "hy-table",       "verify-f",
                                                "quad-g",     "gap-study",   "lattice-sum",    "singular-bound",
                                                "fock-demo",  "bg-solve"};
    return names;
}

struct RunConfig {
    std::string command;
    nlohmann::json params = nlohmann::json::object();
    bool timing = true;

    double num(const std::string& k) const {
        const auto& v = params.at(k);
        return v.is_null() ? std::numeric_limits<double>::quiet_NaN() : v.get<double>();
    }
    long long integer(const std::string& k) const { return params.at(k).get<long long>(); }
    std::string text(const std::string& k) const { return params.at(k).get<std::string>(); }
    std::vector<double> list(const std::string& k) const { return params.at(k).get<std::vector<double>>(); }
    bool has(const std::string& k) const {
        const auto& v = params.at(k);
        if (v.is_null()) return false;
        if (v.is_number_float()) return !std::isnan(v.get<double>());
        if (v.is_array() || v.is_string()) return !v.empty();
        return true;
    }
};

namespace detail {

inline double parse_number(const std::string& name, const std::string& s) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        throw UsageError("--" + name + ": '" + s + "' is not a number");
    }
    if (used != s.size()) throw UsageError("--" + name + ": '" + s + "' is not a number");
    return v;
}

inline nlohmann::json coerce(const ParamSpec& p, const nlohmann::json& v) {
    switch (p.type) {
        case ParamType::number:
            if (v.is_number()) return v.get<double>();
            if (v.is_string()) return parse_number(p.name, v.get<std::string>());
            break;
        case ParamType::integer:
            if (v.is_number_integer()) return v.get<long long>();
            if (v.is_number_float() && v.get<double>() == std::floor(v.get<double>()))
                return static_cast<long long>(v.get<double>());
            if (v.is_string()) {
                const double d = parse_number(p.name, v.get<std::string>());
                if (d == std::floor(d)) return static_cast<long long>(d);
            }
            break;
        case ParamType::text:
            if (v.is_string()) return v;
            break;
        case ParamType::list: {
            if (v.is_array()) {
                nlohmann::json out = nlohmann::json::array();
                for (const auto& e : v) out.push_back(coerce({p.name, ParamType::number, {}, {}}, e));
                return out;
            }
            if (v.is_number()) return nlohmann::json::array({v.get<double>()});
            if (v.is_string()) {
                nlohmann::json out = nlohmann::json::array();
                std::stringstream ss(v.get<std::string>());
                std::string item;
                while (std::getline(ss, item, ','))
                    if (!item.empty()) out.push_back(parse_number(p.name, item));
                return out;
            }
            break;
        }
    }
    throw UsageError("--" + p.name + ": value " + v.dump() + " has the wrong type");
}

/// Joins two-word forms such as `hy table` or `fock demo` into one command token.
inline std::vector<std::string> normalize_args(std::vector<std::string> args) {
    if (args.size() >= 2) {
        const std::string joined = args[0] + "-" + args[1];
        for (const auto& c : command_names())
            if (c == joined) {
                args.erase(args.begin());
                args[0] = joined;
                break;
            }
    }
    return args;
}

}  // namespace detail

/// Parses arguments (without the program name). Precedence: flags > --config > defaults.
inline RunConfig parse_config(std::vector<std::string> args) {
    args = detail::normalize_args(std::move(args));
    CLI::App app{"Dilute spin-1/2 Fermi gas: energy expansion and numerical checks", "hyfermi"};
    std::string command, config_path;
    bool no_timing = false;
    app.add_option("command", command, "one of: scatter hy-eval hy-table verify-f quad-g gap-study lattice-sum "
                                       "singular-bound fock-demo bg-solve")
        ->required();
    app.add_option("--config", config_path, "JSON file whose keys mirror the long flag names");
    app.add_flag("--no-timing", no_timing, "omit wall time from the metadata line");
    app.set_version_flag("--version", kVersion);

    const auto& table = param_table();
    std::vector<std::string> raw(table.size());
    std::vector<CLI::Option*> opts;
    for (std::size_t i = 0; i < table.size(); ++i)
        opts.push_back(app.add_option("--" + table[i].name, raw[i], table[i].help));

    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
        app.parse(rev);
    } catch (const CLI::CallForHelp&) {
        throw HelpRequested(app.help());
    } catch (const CLI::CallForVersion&) {
        throw HelpRequested(std::string(kVersion) + "\n");
    } catch (const CLI::ParseError& e) {
        throw UsageError(e.what());
    }

    RunConfig cfg;
    cfg.command = command;
    if (std::find(command_names().begin(), command_names().end(), command) == command_names().end())
        throw UsageError("unknown command '" + command + "'");
    cfg.timing = !no_timing;

    for (const auto& p : table) cfg.params[p.name] = p.fallback;
    if (!config_path.empty()) {
        std::ifstream in(config_path);
        if (!in) throw UsageError("cannot open config file '" + config_path + "'");
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(in);
        } catch (const nlohmann::json::exception& e) {
            throw UsageError("config file '" + config_path + "': " + e.what());
        }
        if (!j.is_object()) throw UsageError("config file must hold a JSON object");
        for (const auto& [key, value] : j.items()) {
            if (key == "no-timing") {
                if (value.get<bool>()) cfg.timing = false;
                continue;
            }
            const auto it = std::find_if(table.begin(), table.end(), [&](const ParamSpec& p) { return p.name == key; });
            if (it == table.end()) throw UsageError("config file: unknown key '" + key + "'");
            cfg.params[key] = detail::coerce(*it, value);
        }
    }
    for (std::size_t i = 0; i < table.size(); ++i)
        if (opts[i]->count() > 0) cfg.params[table[i].name] = detail::coerce(table[i], raw[i]);

    if (cfg.integer("threads") < 1) throw UsageError("--threads must be >= 1");
    if (cfg.integer("seed") < 0) throw UsageError("--seed must be >= 0");
    const auto fmt = cfg.text("format");
    if (!fmt.empty() && fmt != "csv" && fmt != "json") throw UsageError("--format must be csv or json");
    return cfg;
}

/// Rows of JSON scalars with a fixed column order.
struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<nlohmann::json>> rows;

    void add(std::vector<nlohmann::json> row) { rows.push_back(std::move(row)); }

    static std::string cell(const nlohmann::json& v) {
        if (v.is_number_float()) {
            const double d = v.get<double>();
            if (std::isnan(d)) return "nan";
            if (std::isinf(d)) return d > 0 ? "inf" : "-inf";
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.17g", d);
            return buf;
        }
        if (v.is_string()) return v.get<std::string>();
        return v.dump();
    }

    void write_csv(std::ostream& os) const {
        for (std::size_t i = 0; i < columns.size(); ++i) os << (i ? "," : "") << columns[i];
        os << '\n';
        for (const auto& r : rows) {
            for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << cell(r[i]);
            os << '\n';
        }
    }

    nlohmann::json to_json() const {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& r : rows) {
            nlohmann::json o = nlohmann::json::object();
            for (std::size_t i = 0; i < r.size(); ++i) o[columns[i]] = r[i];
            arr.push_back(o);
        }
        return arr;
    }
};

/// What a command produced before serialisation.
struct CommandOutput {
    std::optional<Table> table;
    std::optional<nlohmann::json> document;
    std::string default_format = "csv";
    nlohmann::json tolerances = nlohmann::json::object();
    nlohmann::json meta = nlohmann::json::object();
    std::string summary;
    bool ok = true;
};

namespace detail {

inline RadialPotential potential_from(const RunConfig& c) {
    const auto file = c.text("potential-file");
    if (!file.empty()) {
        std::ifstream in(file);
        if (!in) throw UsageError("cannot open potential file '" + file + "'");
        try {
            return RadialPotential::from_json(nlohmann::json::parse(in));
        } catch (const nlohmann::json::exception& e) {
            throw UsageError("potential file '" + file + "': " + e.what());
        }
    }
    const auto kind = potential_kind_from_string(c.text("kind"));
    if (kind == PotentialKind::tabulated) throw UsageError("--kind tabulated needs --potential-file");
    return RadialPotential(kind, c.num("V0"), c.num("R"));
}

inline QuadratureSettings quad_settings(const RunConfig& c) {
    QuadratureSettings s;
    if (c.has("tol")) s.rel_tol = c.num("tol");
    s.seed = static_cast<std::uint64_t>(c.integer("seed"));
    return s;
}

inline nlohmann::json quad_tolerances(const QuadratureSettings& s) {
    return {{"rel_tol", s.rel_tol}, {"abs_tol", s.abs_tol}, {"max_evals", s.max_evals}, {"p_cut", s.p_cut}};
}

inline std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

inline std::vector<double> x_values(const RunConfig& c, std::vector<double> fallback) {
    if (c.has("x")) return {c.num("x")};
    if (c.has("x-grid")) return c.list("x-grid");
    return fallback;
}

inline CommandOutput cmd_scatter(const RunConfig& c) {
    const auto pot = potential_from(c);
    RadialGrid grid;
    if (c.has("tol")) grid.tol = c.num("tol");
    const auto sol = solve_scattering(pot, grid);
    const double born = born_length(pot);
    CommandOutput out;
    out.default_format = "json";
    out.tolerances = {{"tol", grid.tol}};
    out.document = nlohmann::json{{"potential", pot.to_json()},
                                  {"a", sol.a},
                                  {"born", born},
                                  {"a_over_born", sol.a / born},
                                  {"error_estimate", sol.error_estimate},
                                  {"matching_radius", sol.matching_radius},
                                  {"fourier_V_0", fourier_V(pot, 0.0)},
                                  {"fourier_Vf_0", sol.fourier_Vf(0.0)}};
    Table t{{"r", "u", "phi"}, {}};
    for (std::size_t i = 0; i < sol.r.size(); ++i) t.add({sol.r[i], sol.u[i], sol.phi(sol.r[i])});
    out.table = std::move(t);
    out.summary = "scatter: a = " + fmt(sol.a) + ", born = " + fmt(born);
    return out;
}

inline CommandOutput cmd_hy_eval(const RunConfig& c) {
    const FermiParams params(c.num("rho-up"), c.num("rho-down"));
    const auto pot = potential_from(c);
    const bool given = c.has("a");
    const double a = given ? c.num("a") : solve_scattering(pot).a;
    const auto e = hy_energy(params, a);
    const auto base = baseline_energies(params, a, fourier_V(pot, 0.0));
    const double lo = std::min(params.rho_up, params.rho_down), hi = std::max(params.rho_up, params.rho_down);
    CommandOutput out;
    out.default_format = "json";
    out.document = nlohmann::json{{"rho_up", params.rho_up},
                                  {"rho_down", params.rho_down},
                                  {"kF_up", params.kF_up()},
                                  {"kF_down", params.kF_down()},
                                  {"a", a},
                                  {"a_source", given ? "flag" : "potential"},
                                  {"gas_parameter", a * std::cbrt(params.rho())},
                                  {"x", lo / hi},
                                  {"F_x", F_closed(lo / hi)},
                                  {"kinetic", e.kinetic},
                                  {"mean_field", e.mean_field},
                                  {"huang_yang", e.huang_yang},
                                  {"total", e.total},
                                  {"error_order_exponent", e.error_order_exponent},
                                  {"baseline_lss", base.lss},
                                  {"baseline_ffg", base.ffg}};
    Table t{{"quantity", "value"}, {}};
    for (const auto& [k, v] : out.document->items())
        if (v.is_number()) t.add({k, v});
    out.table = std::move(t);
    out.summary = "hy-eval: e = " + fmt(e.total) + " (huang-yang term " + fmt(e.huang_yang) + ")";
    return out;
}

inline CommandOutput cmd_hy_table(const RunConfig& c) {
    std::vector<double> xs;
    if (c.has("x-grid") || c.has("x")) {
        xs = x_values(c, {});
    } else {
        const auto n = c.integer("n-points");
        const double a = c.num("x-min"), b = c.num("x-max");
        if (n < 2) throw UsageError("--n-points must be >= 2");
        for (long long i = 0; i < n; ++i) xs.push_back(a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1));
    }
    CommandOutput out;
    Table t{{"x", "F_closed", "F_from_f", "rel_diff"}, {}};
    double worst = 0.0;
    for (double x : xs) {
        const double fc = F_closed(x), ff = F_from_f(x);
        const double rd = std::abs(fc - ff) / std::abs(fc);
        worst = std::max(worst, rd);
        t.add({x, fc, ff, rd});
    }
    out.table = std::move(t);
    out.meta["max_rel_diff"] = worst;
    out.summary = "hy-table: " + std::to_string(xs.size()) + " rows, max rel_diff " + fmt(worst);
    return out;
}

inline CommandOutput cmd_verify_f(const RunConfig& c) {
    const auto s = quad_settings(c);
    CommandOutput out;
    out.tolerances = quad_tolerances(s);
    Table t{{"x", "F_quadrature", "F_closed", "rel_diff", "error_estimate", "evaluations", "converged"}, {}};
    double worst = 0.0;
    std::size_t evals = 0;
    for (double x : x_values(c, {0.25, 0.5, 1.0})) {
        const auto r = F_quadrature(x, s);
        const double fc = F_closed(x);
        const double rd = std::abs(r.value - fc) / std::abs(fc);
        worst = std::max(worst, rd);
        evals += r.evaluations;
        out.ok = out.ok && r.converged;
        t.add({x, r.value, fc, rd, r.error_estimate, r.evaluations, r.converged});
    }
    out.table = std::move(t);
    out.meta["evaluations"] = evals;
    out.meta["max_rel_diff"] = worst;
    out.summary = "verify-f: max rel_diff " + fmt(worst) + (out.ok ? "" : " (quadrature did not converge)");
    return out;
}

inline CommandOutput cmd_quad_g(const RunConfig& c) {
    const auto s = quad_settings(c);
    const double x = c.has("x") ? c.num("x") : 0.5, p = c.num("p");
    const auto r = g_pointwise(x, p, s);
    CommandOutput out;
    out.tolerances = quad_tolerances(s);
    out.table = Table{{"x", "p", "g", "error_estimate", "evaluations", "converged"},
                      {{x, p, r.value, r.error_estimate, r.evaluations, r.converged}}};
    out.ok = r.converged;
    out.meta["evaluations"] = r.evaluations;
    out.summary = "quad-g: g(" + fmt(x) + ", " + fmt(p) + ") = " + fmt(r.value);
    return out;
}

inline CommandOutput cmd_gap_study(const RunConfig& c) {
    const auto s = quad_settings(c);
    const FermiParams params(c.num("rho-up"), c.num("rho-down"));
    const CutoffConfig cut(c.num("gamma"), c.num("delta"), 1.0);
    const double lo = c.num("rho-min"), hi = c.num("rho-max");
    const auto n = c.integer("n-rho");
    if (!(lo > 0.0 && hi > lo) || n < 2) throw UsageError("gap-study needs 0 < rho-min < rho-max and n-rho >= 2");
    std::vector<double> grid;
    for (long long i = 0; i < n; ++i)
        grid.push_back(lo * std::pow(hi / lo, static_cast<double>(i) / static_cast<double>(n - 1)));
    const auto rows = gap_cutoff_study(params, cut, grid, s);

    CommandOutput out;
    out.tolerances = quad_tolerances(s);
    Table t{{"rho", "I_regularized", "I_limit", "I_limit_closed", "diff", "error_estimate", "evaluations", "converged"},
            {}};
    std::vector<double> rho, diff;
    std::size_t evals = 0;
    for (const auto& r : rows) {
        t.add({r.rho, r.I_regularized, r.I_limit, r.I_limit_closed, r.diff, r.error_estimate, r.evaluations,
               r.converged});
        rho.push_back(r.rho);
        diff.push_back(r.diff);
        evals += r.evaluations;
        out.ok = out.ok && r.converged;
    }
    const double slope = loglog_slope(rho, diff);
    const double expected = 7.0 / 3.0 + std::min(cut.gamma, cut.delta);
    out.table = std::move(t);
    out.meta["evaluations"] = evals;
    out.meta["loglog_slope"] = slope;
    out.meta["expected_slope"] = expected;
    out.summary = "gap-study: log-log slope " + fmt(slope) + " (expected >= " + fmt(expected) + ")";
    return out;
}

inline CommandOutput cmd_lattice_sum(const RunConfig& c) {
    const CutoffConfig cut(c.num("gamma"), c.num("delta"), c.num("rho-up") + c.num("rho-down"));
    const auto rows = lattice_sum_convergence(c.list("L-grid"), cut);
    CommandOutput out;
    Table t{{"L", "sum", "integral", "diff"}, {}};
    for (const auto& r : rows) t.add({r.L, r.sum_value, r.integral_value, r.diff});
    out.table = std::move(t);
    out.summary = "lattice-sum: " + std::to_string(rows.size()) + " box sizes, final diff " +
                  fmt(rows.empty() ? NAN : rows.back().diff);
    return out;
}

inline CommandOutput cmd_singular_bound(const RunConfig& c) {
    const auto s = quad_settings(c);
    const auto rows = singular_integral_bound(x_values(c, {1e-3, 1e-2, 0.1, 0.5, 1.0}), s);
    CommandOutput out;
    out.tolerances = quad_tolerances(s);
    Table t{{"x", "value", "error_estimate", "evaluations", "converged"}, {}};
    std::size_t evals = 0;
    double worst = 0.0;
    for (const auto& r : rows) {
        t.add({r.x, r.value, r.error_estimate, r.evaluations, r.converged});
        evals += r.evaluations;
        worst = std::max(worst, r.value);
        out.ok = out.ok && r.converged && std::isfinite(r.value);
    }
    out.table = std::move(t);
    out.meta["evaluations"] = evals;
    out.summary = "singular-bound: max value " + fmt(worst);
    return out;
}

inline CommandOutput cmd_fock_demo(const RunConfig& c) {
    fock::FockDemoConfig cfg;
    if (c.has("L")) cfg.L = c.num("L");
    cfg.K_max = c.num("kmax");
    const auto shells = c.list("shells");
    if (shells.size() != 2 || shells[0] < 0 || shells[1] < 0 || shells[0] != std::floor(shells[0]) ||
        shells[1] != std::floor(shells[1]))
        throw UsageError("--shells takes two particle numbers N_up,N_down");
    cfg.N_up = static_cast<std::size_t>(shells[0]);
    cfg.N_down = static_cast<std::size_t>(shells[1]);
    cfg.potential = potential_from(c);
    cfg.gamma = c.num("gamma");
    cfg.delta = c.num("delta");
    cfg.cutoff_rho = c.num("cutoff-rho");
    cfg.lambda_grid = c.list("lambda-grid");
    const auto res = fock::run_fock_demo(cfg);

    constexpr double kResidualTol = 1e-10;
    CommandOutput out;
    out.default_format = "json";
    out.tolerances = {{"expm_tol", fock::ExpmOptions{}.tol}, {"eigen_tol", fock::EigenOptions{}.tol},
                      {"identity_tol", kResidualTol}};
    out.document = res.to_json();
    Table t{{"lambda1", "lambda2", "energy"}, {}};
    for (const auto& p : res.trial) t.add({p.lambda1, p.lambda2, p.energy});
    out.table = std::move(t);
    double worst = 0.0;
    for (const auto& [k, v] : res.residuals) worst = std::max(worst, v);
    out.ok = worst <= kResidualTol;
    out.meta["max_identity_residual"] = worst;
    out.summary = "fock-demo: " + std::to_string(res.modes) + " modes, max identity residual " + fmt(worst) +
                  ", variational gap " + fmt(res.variational_gap);
    return out;
}

inline BGMode bg_mode(const std::string& s) {
    if (s == "automatic") return BGMode::automatic;
    if (s == "spherical") return BGMode::spherical;
    if (s == "axisymmetric") return BGMode::axisymmetric;
    if (s == "general") return BGMode::general;
    throw UsageError("--mode must be automatic, spherical, axisymmetric or general");
}

inline Vec3 vec3(const RunConfig& c, const std::string& k) {
    const auto v = c.list(k);
    if (v.size() != 3) throw UsageError("--" + k + " takes three components");
    return {v[0], v[1], v[2]};
}

inline CommandOutput cmd_bg_solve(const RunConfig& c) {
    const auto pot = potential_from(c);
    BGGrid grid;
    grid.mode = bg_mode(c.text("mode"));
    grid.q_max = c.num("q-max") > 0.0 ? c.num("q-max") : 80.0 / pot.R();
    if (c.has("tol")) grid.tol = c.num("tol");
    const auto sol = bethe_goldstone_solve(pot, c.num("kf-up"), c.num("kf-down"), vec3(c, "r"), vec3(c, "rp"), grid);
    const auto free = solve_scattering(pot);

    CommandOutput out;
    out.tolerances = {{"tol", grid.tol}, {"q_max", grid.q_max}};
    Table t{{"px", "py", "pz", "p", "weight", "pauli", "FV", "G", "phi_hat"}, {}};
    double gap = 0.0;
    for (std::size_t i = 0; i < sol.nodes.size(); ++i) {
        const auto& q = sol.nodes[i];
        const double pn = norm(q);
        gap = std::max(gap, std::abs(sol.G[i] - free.fourier_Vf(pn)));
        t.add({q[0], q[1], q[2], pn, sol.weights[i], static_cast<bool>(sol.pauli[i]), sol.FV[i], sol.G[i],
               sol.phi_hat[i]});
    }
    const double rel_gap = gap / (8.0 * std::numbers::pi * free.a);
    out.table = std::move(t);
    out.ok = sol.converged;
    out.meta = {{"mode", sol.mode},
                {"method", sol.method},
                {"residual", sol.residual},
                {"iterations", sol.iterations},
                {"condition_estimate", sol.condition_estimate},
                {"converged", sol.converged},
                {"scattering_length", free.a},
                {"max_rel_gap_to_free", rel_gap}};
    out.summary = "bg-solve: " + sol.mode + "/" + sol.method + ", residual " + fmt(sol.residual) +
                  ", max |G - F(Vf)|/(8 pi a) " + fmt(rel_gap);
    return out;
}

inline CommandOutput dispatch(const RunConfig& c) {
    const auto& k = c.command;
    if (k == "scatter") return cmd_scatter(c);
    if (k == "hy-eval") return cmd_hy_eval(c);
    if (k == "hy-table") return cmd_hy_table(c);
    if (k == "verify-f") return cmd_verify_f(c);
    if (k == "quad-g") return cmd_quad_g(c);
    if (k == "gap-study") return cmd_gap_study(c);
    if (k == "lattice-sum") return cmd_lattice_sum(c);
    if (k == "singular-bound") return cmd_singular_bound(c);
    if (k == "fock-demo") return cmd_fock_demo(c);
    if (k == "bg-solve") return cmd_bg_solve(c);
    throw UsageError("unknown command '" + k + "'");
}

}  // namespace detail

/// Runs one command. Returns 0 on success, 1 on computational failure and 2 on invalid input.
inline int run(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    const auto t0 = std::chrono::steady_clock::now();
    CommandOutput res;
    try {
        // Cut-off exponents are validated up front for every command.
        CutoffConfig(cfg.num("gamma"), cfg.num("delta"), 1.0);
        res = detail::dispatch(cfg);
    } catch (const ConvergenceError& e) {
        err << "error: " << e.what() << " (residual " << e.residual() << ")\n";
        return kFailure;
    } catch (const InvariantViolation& e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const DomainError& e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kFailure;
    }
    const auto wall_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();

    const std::string format = cfg.text("format").empty() ? res.default_format : cfg.text("format");
    nlohmann::json meta{{"version", kVersion},
                        {"command", cfg.command},
                        {"seed", cfg.integer("seed")},
                        {"threads", cfg.integer("threads")},
                        {"tolerances", res.tolerances}};
    for (const auto& [k, v] : res.meta.items()) meta[k] = v;
    meta["wall_time_ms"] = cfg.timing ? nlohmann::json(std::round(wall_ms * 1000.0) / 1000.0) : nlohmann::json();

    std::ofstream file;
    const auto path = cfg.text("out");
    if (path != "-") {
        file.open(path);
        if (!file) {
            err << "error: cannot open output file '" << path << "'\n";
            return kUsage;
        }
    }
    std::ostream& os = path == "-" ? out : file;
    if (format == "json") {
        os << (res.document ? *res.document : res.table->to_json()).dump(2) << '\n';
    } else {
        if (!res.table) {
            err << "error: " << cfg.command << " has no CSV form\n";
            return kUsage;
        }
        res.table->write_csv(os);
    }
    os << meta.dump() << '\n';
    os.flush();
    err << res.summary << '\n';
    return res.ok ? kOk : kFailure;
}

/// Entry point used by the executable.
inline int main_entry(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    RunConfig cfg;
    try {
        cfg = parse_config(args);
    } catch (const HelpRequested& h) {
        out << h.what();
        return kOk;
    } catch (const UsageError& e) {
        err << "error: " << e.what() << "\nrun with --help for usage\n";
        return kUsage;
    }
    return run(cfg, out, err);
}

}  // namespace hyfermi::cli
