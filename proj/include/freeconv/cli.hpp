#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "freeconv/errors.hpp"
#include "freeconv/laws.hpp"
#include "freeconv/linpen.hpp"
#include "freeconv/ncexpr.hpp"
#include "freeconv/parallel.hpp"
#include "freeconv/recover.hpp"
#include "freeconv/rmt.hpp"
#include "freeconv/subord.hpp"
#include "freeconv/version.hpp"

namespace freeconv {
namespace cli {

using json = nlohmann::ordered_json;

enum ExitCode : int {
    kOk = 0,
    kSelfcheckFailed = 1,
    kConfigError = 2,
    kNumericalError = 3,
};

struct ProblemConfig {
    std::string task;
    std::string expression;
    std::string pencil_file;
    std::vector<std::string> var_order;
    std::map<std::string, laws::ScalarLaw> variables;

    bool has_grid1d = false;
    double grid_min = 0.0, grid_max = 0.0;
    int grid_points = 0;

    bool has_grid2d = false;
    recover::BrownGrid brown_grid;

    std::vector<double> eps_schedule;  // density task
    double eps_scalar = 1e-3;          // brown task

    subord::FixedPointOptions fixed_point;
    int threads = 0;
    std::string output;
    bool emit_gnuplot = false;

    bool has_rmt = false;
    int rmt_n = 1000;
    int rmt_trials = 1;
    std::uint64_t rmt_seed = 1;
    std::map<std::string, rmt::EnsembleSpec> ensembles;

    std::string config_hash;  // filled when parsed from JSON
};

namespace detail {

inline std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

inline std::uint64_t fnv1a64(const std::string& s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (const unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

inline void check_keys(const json& obj, const std::vector<std::string>& allowed,
                       const std::string& where) {
    if (!obj.is_object()) throw ParseError("config: " + where + " must be an object");
    for (const auto& [key, value] : obj.items()) {
        bool ok = false;
        for (const std::string& a : allowed) ok = ok || key == a;
        if (!ok) throw ParseError("config: unknown key '" + where + key + "'");
    }
}

inline double require_number(const json& obj, const std::string& key, const std::string& where) {
    if (!obj.contains(key)) throw ParseError("config: missing '" + where + key + "'");
    if (!obj[key].is_number()) throw ParseError("config: '" + where + key + "' must be a number");
    return obj[key].get<double>();
}

inline laws::ScalarLaw parse_law(const json& spec, const std::string& where) {
    if (!spec.is_object() || !spec.contains("law") || !spec["law"].is_string())
        throw ParseError("config: '" + where + "' needs a \"law\" name");
    const std::string name = spec["law"].get<std::string>();
    if (name == "semicircle") {
        check_keys(spec, {"law", "mean", "variance"}, where + ".");
        const double mean = spec.contains("mean") ? require_number(spec, "mean", where + ".") : 0.0;
        const double var =
            spec.contains("variance") ? require_number(spec, "variance", where + ".") : 1.0;
        return laws::ScalarLaw::semicircle(mean, var);
    }
    if (name == "marchenko_pastur") {
        check_keys(spec, {"law", "ratio", "scale"}, where + ".");
        const double ratio = require_number(spec, "ratio", where + ".");
        const double scale =
            spec.contains("scale") ? require_number(spec, "scale", where + ".") : 1.0;
        return laws::ScalarLaw::marchenko_pastur(ratio, scale);
    }
    if (name == "atomic" || name == "quadrature") {
        check_keys(spec, {"law", "points", "weights", "nodes"}, where + ".");
        const char* pts_key = spec.contains("nodes") ? "nodes" : "points";
        if (!spec.contains(pts_key) || !spec.contains("weights"))
            throw ParseError("config: '" + where + "' needs points/nodes and weights");
        std::vector<double> pts = spec[pts_key].get<std::vector<double>>();
        std::vector<double> wts = spec["weights"].get<std::vector<double>>();
        return name == "atomic" ? laws::ScalarLaw::atomic(std::move(pts), std::move(wts))
                                : laws::ScalarLaw::quadrature(std::move(pts), std::move(wts));
    }
    throw ParseError("config: unknown law '" + name + "' at '" + where + ".law'");
}

inline rmt::EnsembleSpec parse_ensemble(const json& spec, const std::string& where, int n) {
    if (!spec.is_object() || !spec.contains("kind") || !spec["kind"].is_string())
        throw ParseError("config: '" + where + "' needs a \"kind\"");
    rmt::EnsembleSpec out;
    const std::string kind = spec["kind"].get<std::string>();
    if (kind == "wigner") {
        check_keys(spec, {"kind", "complex"}, where + ".");
        out.kind = rmt::EnsembleSpec::Kind::Wigner;
        if (spec.contains("complex")) out.complex_entries = spec["complex"].get<bool>();
    } else if (kind == "wishart") {
        check_keys(spec, {"kind", "ratio", "scale"}, where + ".");
        out.kind = rmt::EnsembleSpec::Kind::Wishart;
        const double ratio = require_number(spec, "ratio", where + ".");
        if (!(ratio > 0.0)) throw ParseError("config: '" + where + ".ratio' must be positive");
        out.m = std::max(1, static_cast<int>(std::lround(n / ratio)));
        if (spec.contains("scale")) out.scale = require_number(spec, "scale", where + ".");
    } else {
        throw ParseError("config: unknown ensemble kind '" + kind + "' at '" + where + ".kind'");
    }
    out.n = n;
    return out;
}

} // namespace detail

inline ProblemConfig parse_config(const json& doc) {
    ProblemConfig cfg;
    detail::check_keys(doc,
                       {"task", "expression", "pencil_file", "variables", "grid", "epsilon",
                        "fixed_point", "threads", "output", "emit_gnuplot", "rmt"},
                       "");
    if (!doc.contains("task") || !doc["task"].is_string())
        throw ParseError("config: missing 'task'");
    cfg.task = doc["task"].get<std::string>();
    if (cfg.task != "density" && cfg.task != "brown" && cfg.task != "compare" &&
        cfg.task != "selfcheck")
        throw ParseError("config: unknown task '" + cfg.task + "'");
    cfg.config_hash = [&] {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%016llx",
                      static_cast<unsigned long long>(detail::fnv1a64(doc.dump())));
        return std::string(buf);
    }();
    if (cfg.task == "selfcheck") return cfg;

    if (doc.contains("expression")) cfg.expression = doc["expression"].get<std::string>();
    if (doc.contains("pencil_file")) cfg.pencil_file = doc["pencil_file"].get<std::string>();
    if (cfg.expression.empty() == cfg.pencil_file.empty())
        throw ParseError("config: exactly one of 'expression' or 'pencil_file' is required");

    if (!doc.contains("variables") || !doc["variables"].is_object())
        throw ParseError("config: missing 'variables'");
    for (const auto& [name, spec] : doc["variables"].items()) {
        cfg.var_order.push_back(name);
        cfg.variables.emplace(name, detail::parse_law(spec, "variables." + name));
    }
    if (cfg.variables.empty()) throw ParseError("config: 'variables' is empty");

    if (!doc.contains("grid")) throw ParseError("config: missing 'grid'");
    const json& grid = doc["grid"];
    if (grid.contains("min")) {
        detail::check_keys(grid, {"min", "max", "points"}, "grid.");
        cfg.has_grid1d = true;
        cfg.grid_min = detail::require_number(grid, "min", "grid.");
        cfg.grid_max = detail::require_number(grid, "max", "grid.");
        cfg.grid_points = static_cast<int>(detail::require_number(grid, "points", "grid."));
        if (!(cfg.grid_min < cfg.grid_max)) throw ParseError("config: grid.min must be < grid.max");
        if (cfg.grid_points < 8) throw ParseError("config: grid.points must be >= 8");
    } else {
        detail::check_keys(grid, {"re_min", "re_max", "re_points", "im_min", "im_max", "im_points"},
                           "grid.");
        cfg.has_grid2d = true;
        auto& g = cfg.brown_grid;
        g.re_min = detail::require_number(grid, "re_min", "grid.");
        g.re_max = detail::require_number(grid, "re_max", "grid.");
        g.re_points = static_cast<int>(detail::require_number(grid, "re_points", "grid."));
        g.im_min = detail::require_number(grid, "im_min", "grid.");
        g.im_max = detail::require_number(grid, "im_max", "grid.");
        g.im_points = static_cast<int>(detail::require_number(grid, "im_points", "grid."));
        if (!(g.re_min < g.re_max) || !(g.im_min < g.im_max))
            throw ParseError("config: grid bounds must be increasing");
        if (g.re_points < 8 || g.im_points < 8)
            throw ParseError("config: grid resolution must be >= 8");
    }

    if (doc.contains("epsilon")) {
        const json& eps = doc["epsilon"];
        if (eps.is_array()) {
            cfg.eps_schedule = eps.get<std::vector<double>>();
            if (!cfg.eps_schedule.empty()) cfg.eps_scalar = cfg.eps_schedule.back();
        } else if (eps.is_number()) {
            cfg.eps_scalar = eps.get<double>();
            cfg.eps_schedule = {cfg.eps_scalar};
        } else {
            throw ParseError("config: 'epsilon' must be a number or an array");
        }
    } else {
        cfg.eps_schedule = {0.05, 0.025, 0.0125};
    }

    if (doc.contains("fixed_point")) {
        const json& fp = doc["fixed_point"];
        detail::check_keys(fp, {"tol", "max_iter", "damping"}, "fixed_point.");
        if (fp.contains("tol")) cfg.fixed_point.tol = detail::require_number(fp, "tol", "fixed_point.");
        if (fp.contains("max_iter"))
            cfg.fixed_point.max_iter =
                static_cast<int>(detail::require_number(fp, "max_iter", "fixed_point."));
        if (fp.contains("damping"))
            cfg.fixed_point.damping = detail::require_number(fp, "damping", "fixed_point.");
        if (cfg.fixed_point.damping < 0.0 || cfg.fixed_point.damping >= 1.0)
            throw ParseError("config: fixed_point.damping must lie in [0,1)");
    }
    if (doc.contains("threads"))
        cfg.threads = static_cast<int>(detail::require_number(doc, "threads", ""));

    if (!doc.contains("output") || !doc["output"].is_string())
        throw ParseError("config: missing 'output'");
    cfg.output = doc["output"].get<std::string>();
    if (doc.contains("emit_gnuplot")) cfg.emit_gnuplot = doc["emit_gnuplot"].get<bool>();

    if (doc.contains("rmt")) {
        const json& r = doc["rmt"];
        detail::check_keys(r, {"N", "trials", "seed", "ensembles"}, "rmt.");
        cfg.has_rmt = true;
        cfg.rmt_n = static_cast<int>(detail::require_number(r, "N", "rmt."));
        if (r.contains("trials"))
            cfg.rmt_trials = static_cast<int>(detail::require_number(r, "trials", "rmt."));
        if (r.contains("seed"))
            cfg.rmt_seed = static_cast<std::uint64_t>(detail::require_number(r, "seed", "rmt."));
        if (!r.contains("ensembles") || !r["ensembles"].is_object())
            throw ParseError("config: missing 'rmt.ensembles'");
        for (const auto& [name, spec] : r["ensembles"].items())
            cfg.ensembles.emplace(name,
                                  detail::parse_ensemble(spec, "rmt.ensembles." + name, cfg.rmt_n));
        if (cfg.rmt_n < 2) throw ParseError("config: rmt.N must be >= 2");
        if (cfg.rmt_trials < 1) throw ParseError("config: rmt.trials must be >= 1");
    }
    if (cfg.task == "compare" && !cfg.has_rmt)
        throw ParseError("config: compare task needs an 'rmt' block");
    return cfg;
}

struct RunResult {
    int code = kOk;
    std::string message;
};

namespace detail {

struct Problem {
    ncexpr::NcPolynomial poly;     // empty if pencil came from a file
    bool have_poly = false;
    linpen::LinearPencil pencil;
};

inline Problem build_problem(const ProblemConfig& cfg, bool hermitized) {
    Problem prob;
    if (!cfg.pencil_file.empty()) {
        prob.pencil = linpen::read_pencil_file(cfg.pencil_file);
        const int want = hermitized ? 2 : 1;
        if (prob.pencil.corner != want)
            throw ParseError("config: pencil corner " + std::to_string(prob.pencil.corner) +
                             " does not fit the task");
        for (const std::string& v : prob.pencil.vars)
            if (!cfg.variables.count(v))
                throw ParseError("config: pencil variable '" + v + "' has no law");
        return prob;
    }
    prob.poly = ncexpr::parse(cfg.expression, cfg.var_order);
    prob.have_poly = true;
    if (hermitized)
        prob.pencil = linpen::hermitized_linearize(prob.poly);
    else {
        if (!ncexpr::is_selfadjoint(prob.poly))
            throw ParseError("config: density task requires a selfadjoint expression");
        prob.pencil = linpen::linearize_sa(prob.poly);
    }
    return prob;
}

inline void write_header(std::ostream& os, const ProblemConfig& cfg, const std::string& extra) {
    os << "# freeconv " << kVersion << "\n";
    os << "# config " << cfg.config_hash << "\n";
    os << "# task " << cfg.task << "\n";
    if (!extra.empty()) os << extra;
}

inline void write_density_csv(const std::string& path, const ProblemConfig& cfg,
                              const recover::DensityCurve& curve) {
    std::ofstream os(path);
    if (!os) throw NumericError("cannot open output file '" + path + "'");
    std::ostringstream extra;
    extra << "# grid " << fmt(cfg.grid_min) << ' ' << fmt(cfg.grid_max) << ' ' << cfg.grid_points
          << "\n# epsilon";
    for (const double e : curve.epsilon_used) extra << ' ' << fmt(e);
    extra << "\n";
    write_header(os, cfg, extra.str());
    os << "t,density\n";
    for (std::size_t i = 0; i < curve.grid.size(); ++i)
        os << fmt(curve.grid[i]) << ',' << fmt(curve.values[i]) << '\n';
    os << "# mass," << fmt(curve.mass) << '\n';
    if (curve.atom_candidates.empty()) {
        os << "# atoms,none\n";
    } else {
        for (const auto& a : curve.atom_candidates)
            os << "# atom," << fmt(a.location) << ',' << fmt(a.mass_estimate) << '\n';
    }
}

inline void write_brown_csv(const std::string& path, const ProblemConfig& cfg,
                            const recover::BrownField& field) {
    std::ofstream os(path);
    if (!os) throw NumericError("cannot open output file '" + path + "'");
    const auto& g = field.grid;
    std::ostringstream extra;
    extra << "# grid " << fmt(g.re_min) << ' ' << fmt(g.re_max) << ' ' << g.re_points << ' '
          << fmt(g.im_min) << ' ' << fmt(g.im_max) << ' ' << g.im_points << "\n# epsilon "
          << fmt(field.epsilon) << "\n";
    write_header(os, cfg, extra.str());
    os << "re,im,density\n";
    for (int iy = 0; iy < g.im_points; ++iy)
        for (int ix = 0; ix < g.re_points; ++ix)
            os << fmt(g.re_at(ix)) << ',' << fmt(g.im_at(iy)) << ',' << fmt(field.at(ix, iy))
               << '\n';
    os << "# mass," << fmt(field.mass) << '\n';
    os << "# failed_nodes," << field.failed_nodes << '\n';
}

inline void emit_gnuplot_script(const ProblemConfig& cfg, bool two_d) {
    std::ofstream os(cfg.output + ".gnuplot");
    if (!os) return;
    os << "# gnuplot script generated by freeconv " << kVersion << "\n";
    os << "set datafile separator ','\n";
    if (two_d) {
        os << "set view map\nset size ratio -1\n";
        os << "splot '" << cfg.output << "' using 1:2:3 with points pt 5 ps 0.6 palette\n";
    } else {
        os << "set xlabel 't'\nset ylabel 'density'\n";
        os << "plot '" << cfg.output << "' using 1:2 with lines title 'density'\n";
    }
}

inline std::vector<double> make_grid(double lo, double hi, int n) {
    std::vector<double> g(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        g[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (n - 1);
    return g;
}

} // namespace detail

/// Closed-form and oracle checks; prints one line per item. The
/// tolerance scale is a test hook; 1.0 is the normative run.
inline bool selfcheck(std::ostream& os, double tol_scale = 1.0) {
    using laws::ScalarLaw;
    bool all = true;
    auto report = [&](const char* name, bool ok, double value, double bound) {
        os << "selfcheck " << name << ": " << (ok ? "PASS" : "FAIL") << " (value "
           << detail::fmt(value) << ", bound " << detail::fmt(bound) << ")\n";
        all = all && ok;
    };
    auto check = [&](const char* name, double value, double bound) {
        report(name, value <= bound * tol_scale, value, bound * tol_scale);
    };

    try {
        const Complex g2i = laws::cauchy_scalar(ScalarLaw::semicircle(), Complex(0, 2));
        check("semicircle_closed_form", std::abs(g2i - Complex(0, 1.0 - std::sqrt(2.0))), 1e-12);

        const ScalarLaw mp = ScalarLaw::marchenko_pastur(0.25);
        double worst = 0.0;
        for (const Complex z : {Complex(1.0, 1.0), Complex(2.5, 0.5)}) {
            CMatrix a(1, 1), b(1, 1);
            a << 1.0;
            b << z;
            worst = std::max(worst,
                             std::abs(laws::cauchy_scalar(mp, z) - laws::ov_cauchy(mp, a, b)(0, 0)));
        }
        check("mp_transform_vs_quadrature", worst, 1e-8);

        const auto p_sum = ncexpr::parse("x + y", {"x", "y"});
        const auto pen_sum = linpen::linearize_sa(p_sum);
        const std::map<std::string, ScalarLaw> two_sc{{"x", ScalarLaw::semicircle()},
                                                      {"y", ScalarLaw::semicircle()}};
        const Complex g4i = subord::scalar_cauchy(pen_sum, two_sc, Complex(0, 4));
        check("free_add_two_semicircles",
              std::abs(g4i - Complex(0, (4.0 - 2.0 * std::sqrt(6.0)) / 4.0)), 1e-9);

        const std::map<std::string, ScalarLaw> sc_mp{{"x", ScalarLaw::semicircle()},
                                                     {"y", ScalarLaw::marchenko_pastur(0.25)}};
        const Complex z0(1.0, 1.0);
        const Complex gz = subord::scalar_cauchy(pen_sum, sc_mp, z0);
        check("subordination_identity",
              std::abs(gz - laws::cauchy_scalar(sc_mp.at("y"), z0 - gz)), 1e-8);

        const auto p_quad = ncexpr::parse("x*y + y*x + x^2", {"x", "y"});
        const auto rep_sa = linpen::verify_pencil(linpen::linearize_sa(p_quad), p_quad,
                                                  {.trials = 10, .m = 4, .seed = 5});
        check("linearization_recovery", rep_sa.max_residual, 1e-8);

        const auto p_xy = ncexpr::parse("x*y", {"x", "y"});
        const auto rep_h = linpen::verify_pencil(linpen::hermitized_linearize(p_xy), p_xy,
                                                 {.trials = 10, .m = 4, .seed = 6});
        check("hermitized_recovery", rep_h.max_residual, 1e-8);

        const auto p_atom = ncexpr::parse("x", {"x"});
        const auto hp = linpen::hermitized_linearize(p_atom);
        const std::map<std::string, ScalarLaw> atom{{"x", ScalarLaw::atomic({0.3}, {1.0})}};
        const double eps = 0.05, c = 0.3;
        double gerr = 0.0;
        for (const Complex lam : {Complex(0.52, -0.11), Complex(-0.2, 0.4)}) {
            const Complex got = subord::scalar_cauchy_herm(hp, atom, lam, eps);
            const Complex want = std::conj(lam - c) / (std::norm(lam - c) + eps * eps);
            gerr = std::max(gerr, std::abs(got - want));
        }
        check("brown_atom_transform", gerr, 1e-10);

        const recover::BrownGrid grid{-0.7, 1.3, 81, -1.0, 1.0, 81};
        const auto field = recover::brown_field(hp, atom, grid, eps, {}, default_thread_count());
        check("brown_atom_mass", std::abs(field.mass - 1.0), 2e-2);

        const auto grid1 = detail::make_grid(-3.2, 3.2, 81);
        const auto curve = recover::density_1d(
            [&](Complex z) { return subord::scalar_cauchy(pen_sum, two_sc, z); }, grid1,
            {0.05, 0.025, 0.0125}, default_thread_count());
        check("free_convolution_mass", std::abs(curve.mass - 1.0), 2e-2);
    } catch (const std::exception& e) {
        os << "selfcheck aborted: " << e.what() << "\n";
        all = false;
    }
    os << (all ? "selfcheck: all checks passed\n" : "selfcheck: FAILURES present\n");
    return all;
}

inline RunResult run(const ProblemConfig& cfg) {
    RunResult result;
    const int threads = cfg.threads > 0 ? cfg.threads : default_thread_count();
    try {
        if (cfg.task == "selfcheck") {
            const bool ok = selfcheck(std::cout);
            result.code = ok ? kOk : kSelfcheckFailed;
            return result;
        }
        if (cfg.task == "density") {
            if (!cfg.has_grid1d) throw ParseError("config: density task needs a 1-D grid");
            auto prob = detail::build_problem(cfg, /*hermitized=*/false);
            auto evaluator = [&](Complex z) {
                return subord::scalar_cauchy(prob.pencil, cfg.variables, z, cfg.fixed_point);
            };
            const auto grid = detail::make_grid(cfg.grid_min, cfg.grid_max, cfg.grid_points);
            const auto curve = recover::density_1d(evaluator, grid, cfg.eps_schedule, threads);
            detail::write_density_csv(cfg.output, cfg, curve);
            if (cfg.emit_gnuplot) detail::emit_gnuplot_script(cfg, false);
            result.message = "mass " + detail::fmt(curve.mass);
            return result;
        }
        if (cfg.task == "brown") {
            if (!cfg.has_grid2d) throw ParseError("config: brown task needs a 2-D grid");
            auto prob = detail::build_problem(cfg, /*hermitized=*/true);
            const auto field = recover::brown_field(prob.pencil, cfg.variables, cfg.brown_grid,
                                                    cfg.eps_scalar, cfg.fixed_point, threads);
            detail::write_brown_csv(cfg.output, cfg, field);
            if (cfg.emit_gnuplot) detail::emit_gnuplot_script(cfg, true);
            result.message = "mass " + detail::fmt(field.mass);
            return result;
        }
        // compare
        if (cfg.expression.empty())
            throw ParseError("config: compare task needs an expression");
        const auto poly = ncexpr::parse(cfg.expression, cfg.var_order);
        for (const std::string& v : poly.variables())
            if (!cfg.ensembles.count(v))
                throw ParseError("config: no rmt ensemble for variable '" + v + "'");
        if (ncexpr::is_selfadjoint(poly)) {
            if (!cfg.has_grid1d) throw ParseError("config: 1-D compare needs a 1-D grid");
            auto prob = detail::build_problem(cfg, false);
            const auto grid = detail::make_grid(cfg.grid_min, cfg.grid_max, cfg.grid_points);
            const auto curve = recover::density_1d(
                [&](Complex z) {
                    return subord::scalar_cauchy(prob.pencil, cfg.variables, z, cfg.fixed_point);
                },
                grid, cfg.eps_schedule, threads);
            std::vector<double> pooled;
            for (int t = 0; t < cfg.rmt_trials; ++t) {
                const auto spec = rmt::poly_spectrum(poly, cfg.ensembles, cfg.rmt_n, cfg.rmt_seed,
                                                     static_cast<std::uint64_t>(t));
                pooled.insert(pooled.end(), spec.real_eigenvalues.data(),
                              spec.real_eigenvalues.data() + spec.real_eigenvalues.size());
            }
            const double ks = rmt::ks_distance(pooled, curve);
            detail::write_density_csv(cfg.output, cfg, curve);
            {
                std::ofstream os(cfg.output, std::ios::app);
                os << "# ks," << detail::fmt(ks) << '\n';
            }
            std::ofstream spec_os(cfg.output + ".spectrum.csv");
            spec_os << "value\n";
            for (const double v : pooled) spec_os << detail::fmt(v) << '\n';
            if (cfg.emit_gnuplot) detail::emit_gnuplot_script(cfg, false);
            result.message = "ks " + detail::fmt(ks);
            return result;
        }
        if (!cfg.has_grid2d) throw ParseError("config: 2-D compare needs a 2-D grid");
        auto prob = detail::build_problem(cfg, true);
        const auto field = recover::brown_field(prob.pencil, cfg.variables, cfg.brown_grid,
                                                cfg.eps_scalar, cfg.fixed_point, threads);
        std::vector<Complex> pooled;
        for (int t = 0; t < cfg.rmt_trials; ++t) {
            const auto spec = rmt::poly_spectrum(poly, cfg.ensembles, cfg.rmt_n, cfg.rmt_seed,
                                                 static_cast<std::uint64_t>(t));
            pooled.insert(pooled.end(), spec.complex_eigenvalues.data(),
                          spec.complex_eigenvalues.data() + spec.complex_eigenvalues.size());
        }
        const auto cmp = rmt::compare_field(pooled, field);
        detail::write_brown_csv(cfg.output, cfg, field);
        {
            std::ofstream os(cfg.output, std::ios::app);
            os << "# radial_sup," << detail::fmt(cmp.radial_sup) << '\n';
            os << "# chi2," << detail::fmt(cmp.chi2) << ',' << cmp.cells << '\n';
        }
        std::ofstream spec_os(cfg.output + ".spectrum.csv");
        spec_os << "re,im\n";
        for (const Complex& v : pooled)
            spec_os << detail::fmt(v.real()) << ',' << detail::fmt(v.imag()) << '\n';
        if (cfg.emit_gnuplot) detail::emit_gnuplot_script(cfg, true);
        result.message = "radial_sup " + detail::fmt(cmp.radial_sup);
        return result;
    } catch (const ParseError& e) {
        result.code = kConfigError;
        result.message = e.what();
        return result;
    } catch (const DomainError& e) {
        result.code = kConfigError;
        result.message = e.what();
        return result;
    } catch (const NumericError& e) {
        result.code = kNumericalError;
        result.message = e.what();
        return result;
    } catch (const std::exception& e) {
        result.code = kNumericalError;
        result.message = e.what();
        return result;
    }
}

inline RunResult run_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) return {kConfigError, "cannot open config '" + path + "'"};
    json doc;
    try {
        in >> doc;
    } catch (const std::exception& e) {
        return {kConfigError, std::string("config is not valid JSON: ") + e.what()};
    }
    try {
        return run(parse_config(doc));
    } catch (const ParseError& e) {
        return {kConfigError, e.what()};
    } catch (const DomainError& e) {
        return {kConfigError, e.what()};
    } catch (const nlohmann::json::exception& e) {
        return {kConfigError, std::string("config: ") + e.what()};
    }
}

} // namespace cli
} // namespace freeconv
