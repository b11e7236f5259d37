// Command-line front end: validate / eval / perturb / dim over a JSON config.
// Exit codes: 0 ok, 1 validation failure, 2 no convergence, 3 inconclusive theory.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "hvrfif/hvrfif.hpp"

namespace fs = std::filesystem;
using hvrfif::json;

namespace {

struct CommonArgs {
    std::string config_path;
    std::string out_dir;
    int grid = 0;
    double tol = 0.0;
    std::uint64_t seed = 0;
    bool seed_set = false;
    std::string deltas;
    bool allow_classical = false;
    bool rescale_unit = false;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "JSON run configuration")->required();
    cmd->add_option("--out", args.out_dir, "output directory (default: stdout)");
    cmd->add_option("--grid", args.grid, "override evaluation grid intervals");
    cmd->add_option("--tol", args.tol, "override iteration tolerance");
    cmd->add_option("--seed", args.seed, "override RNG seed")->each([&args](const std::string&) { args.seed_set = true; });
    cmd->add_option("--deltas", args.deltas, "override box-count ladder MIN:MAX:LEVELS");
    cmd->add_flag("--allow-classical", args.allow_classical, "admit the single-domain classical case");
    cmd->add_flag("--rescale-unit", args.rescale_unit, "rescale abscissas to [0,1] before building");
}

hvrfif::RunConfig load(const CommonArgs& args) {
    hvrfif::RunConfig cfg = hvrfif::load_config(args.config_path);
    if (args.grid > 0) cfg.grid_points = args.grid;
    if (args.tol > 0) cfg.tol = args.tol;
    if (args.seed_set) cfg.seed = args.seed;
    if (args.allow_classical) cfg.allow_classical = true;
    if (args.rescale_unit) cfg.rescale_to_unit = true;
    if (!args.deltas.empty()) {
        double dmin = 0, dmax = 0;
        int levels = 0;
        if (std::sscanf(args.deltas.c_str(), "%lf:%lf:%d", &dmin, &dmax, &levels) != 3)
            hvrfif::raise(hvrfif::errc::config_error, "--deltas expects MIN:MAX:LEVELS");
        cfg.delta_min = dmin;
        cfg.delta_max = dmax;
        cfg.levels = levels;
    }
    return cfg;
}

json report_header(const hvrfif::RunConfig& cfg) {
    json j;
    j["version"] = hvrfif::kVersion;
    j["config_hash"] = cfg.config_hash();
    j["mode"] = cfg.mode == hvrfif::RunConfig::Mode::curve ? "curve" : "surface";
    return j;
}

void emit(const CommonArgs& args, const std::string& name, const std::string& body, bool to_stdout) {
    if (args.out_dir.empty()) {
        if (to_stdout) std::fwrite(body.data(), 1, body.size(), stdout);
        else std::fwrite(body.data(), 1, body.size(), stderr);
        return;
    }
    fs::create_directories(args.out_dir);
    fs::path p = fs::path(args.out_dir) / name;
    std::ofstream out(p, std::ios::binary);
    if (!out) hvrfif::raise(hvrfif::errc::io_error, "cannot write " + p.string());
    out.write(body.data(), static_cast<std::streamsize>(body.size()));
}

json hypotheses_json(const hvrfif::HypothesisReport& rep) {
    json checks = json::array();
    for (const auto& c : rep.checks)
        checks.push_back({{"name", c.name}, {"pass", c.pass}, {"evidence", c.evidence}});
    return checks;
}

std::string csv_curve(const hvrfif::SampledPair& sp) {
    std::string out = "x,f1,f2\n";
    for (std::size_t j = 0; j < sp.grid.size(); ++j) {
        out += hvrfif::format_double17(sp.grid[j]);
        out += ',';
        out += hvrfif::format_double17(sp.f1[j]);
        out += ',';
        out += hvrfif::format_double17(sp.f2[j]);
        out += '\n';
    }
    return out;
}

std::string csv_surface(const hvrfif::SampledField& f) {
    std::string out = "x,y,f1,f2\n";
    for (std::size_t j = 0; j < f.gy.size(); ++j)
        for (std::size_t i = 0; i < f.gx.size(); ++i) {
            out += hvrfif::format_double17(f.gx[i]);
            out += ',';
            out += hvrfif::format_double17(f.gy[j]);
            out += ',';
            out += hvrfif::format_double17(f.f1[j * f.gx.size() + i]);
            out += ',';
            out += hvrfif::format_double17(f.f2[j * f.gx.size() + i]);
            out += '\n';
        }
    return out;
}

int cmd_validate(const CommonArgs& args) {
    hvrfif::RunConfig cfg = load(args);
    json rep = report_header(cfg);
    if (cfg.mode == hvrfif::RunConfig::Mode::curve) {
        hvrfif::CurveSystem sys = hvrfif::build_curve_system(cfg);
        rep["n"] = sys.rifs.n();
        rep["l"] = sys.rifs.partition.l;
        rep["S_bar"] = sys.rifs.S_bar;
        rep["contractive"] = true;
        rep["hypotheses"] = hypotheses_json(hvrfif::validate_hypotheses(sys.rifs));
        rep["irreducible"] = hvrfif::check_irreducible(sys.rifs.C);
    } else {
        hvrfif::SurfaceRIFS srifs = hvrfif::build_surface_system(cfg);
        rep["n"] = srifs.n();
        rep["m"] = srifs.m();
        rep["l"] = srifs.partition.l;
        rep["mu"] = srifs.partition.mu;
        rep["S_bar"] = srifs.S_bar;
        rep["contractive"] = true;
        rep["hypotheses"] = hypotheses_json(hvrfif::validate_surface_hypotheses(srifs));
        rep["irreducible"] = hvrfif::check_irreducible(srifs.C);
    }
    emit(args, "validate.json", rep.dump(2) + "\n", true);
    return 0;
}

int cmd_eval(const CommonArgs& args) {
    hvrfif::RunConfig cfg = load(args);
    hvrfif::IterOptions opts;
    opts.grid_points = cfg.grid_points;
    opts.tol = cfg.tol;
    opts.max_iter = cfg.max_iter;
    opts.allow_partial = true;

    json meta = report_header(cfg);
    bool converged = false;
    if (cfg.mode == hvrfif::RunConfig::Mode::curve) {
        hvrfif::CurveSystem sys = hvrfif::build_curve_system(cfg);
        hvrfif::SampledPair sp = hvrfif::rb_iterate(sys.rifs, opts);
        converged = sp.converged;
        meta["grid_points"] = static_cast<int>(sp.grid.size()) - 1;
        meta["tol"] = opts.tol;
        meta["iterations"] = sp.iterations;
        meta["residual"] = sp.residual;
        meta["converged"] = sp.converged;
        meta["sweep_residuals"] = sp.sweep_residuals;
        emit(args, "samples.csv", csv_curve(sp), true);
        if (cfg.has_chaos) {
            auto orbit = hvrfif::chaos_game(sys.rifs, cfg.chaos_points, cfg.chaos_burn_in, cfg.seed);
            std::string csv = "x,y,z\n";
            for (const auto& p : orbit) {
                csv += hvrfif::format_double17(p[0]);
                csv += ',';
                csv += hvrfif::format_double17(p[1]);
                csv += ',';
                csv += hvrfif::format_double17(p[2]);
                csv += '\n';
            }
            emit(args, "chaos.csv", csv, false);
        }
    } else {
        hvrfif::SurfaceRIFS srifs = hvrfif::build_surface_system(cfg);
        hvrfif::SampledField field = hvrfif::rb_iterate_surface(srifs, opts);
        converged = field.converged;
        meta["grid_points"] = static_cast<int>(field.gx.size()) - 1;
        meta["tol"] = opts.tol;
        meta["iterations"] = field.iterations;
        meta["residual"] = field.residual;
        meta["converged"] = field.converged;
        meta["sweep_residuals"] = field.sweep_residuals;
        emit(args, "samples.csv", csv_surface(field), true);
    }
    emit(args, "eval.json", meta.dump(2) + "\n", false);
    return converged ? 0 : 2;
}

int cmd_perturb(const CommonArgs& args) {
    hvrfif::RunConfig cfg = load(args);
    if (cfg.mode != hvrfif::RunConfig::Mode::curve)
        hvrfif::raise(hvrfif::errc::config_error, "perturbation bounds are defined for curve mode");
    if (!cfg.has_perturbation)
        hvrfif::raise(hvrfif::errc::config_error, "config has no 'perturbation' block");
    hvrfif::CurveSystem sys = hvrfif::build_curve_system(cfg);
    hvrfif::ErrorBoundReport rep = hvrfif::verify_bound(sys.rifs, *sys.perturbation, cfg.grid_points, cfg.tol);
    json j = report_header(cfg);
    j["Omega"] = rep.Omega;
    j["Omega_tilde"] = rep.Omega_tilde;
    j["Delta"] = rep.Delta;
    j["Delta_tilde"] = rep.Delta_tilde;
    j["P"] = rep.P;
    j["Q"] = rep.Q;
    j["P_tilde"] = rep.P_tilde;
    j["Q_tilde"] = rep.Q_tilde;
    j["bound_f1"] = rep.bound_f1;
    j["bound_f2"] = rep.bound_f2;
    j["measured_f1"] = rep.measured_f1;
    j["measured_f2"] = rep.measured_f2;
    j["slack"] = rep.slack;
    j["used_inflated_profiles"] = rep.used_inflated_profiles;
    j["pass"] = rep.pass;
    emit(args, "perturb.json", j.dump(2) + "\n", true);
    return rep.pass ? 0 : 1;
}

int cmd_dim(const CommonArgs& args) {
    hvrfif::RunConfig cfg = load(args);
    hvrfif::require(cfg.delta_min > 0 && cfg.delta_max > cfg.delta_min && cfg.levels >= 4,
                    hvrfif::errc::config_error,
                    "dimension run needs delta_min/delta_max/levels (config 'dimension' block or --deltas)");
    hvrfif::IterOptions opts;
    opts.grid_points = cfg.grid_points;
    opts.tol = cfg.tol;
    opts.max_iter = cfg.max_iter;

    json j = report_header(cfg);
    hvrfif::DimensionBounds db;
    hvrfif::SlopeFit fit;
    if (cfg.mode == hvrfif::RunConfig::Mode::curve) {
        hvrfif::CurveSystem sys = hvrfif::build_curve_system(cfg);
        j["hypotheses"] = hypotheses_json(hvrfif::validate_hypotheses(sys.rifs));
        db = hvrfif::dimension_bounds(sys.rifs);
        hvrfif::SampledPair sp = hvrfif::rb_iterate(sys.rifs, opts);
        fit = hvrfif::estimate_dimension(sp, cfg.delta_min, cfg.delta_max, cfg.levels);
    } else {
        hvrfif::SurfaceRIFS srifs = hvrfif::build_surface_system(cfg);
        j["hypotheses"] = hypotheses_json(hvrfif::validate_surface_hypotheses(srifs));
        db = hvrfif::surface_dimension_bounds(srifs);
        hvrfif::SampledField field = hvrfif::rb_iterate_surface(srifs, opts);
        fit = hvrfif::estimate_dimension_surface(field, cfg.delta_min, cfg.delta_max, cfg.levels);
    }
    j["case"] = hvrfif::to_string(db.dim_case);
    j["rho_lower"] = db.rho_lower;
    j["rho_upper"] = db.rho_upper;
    j["eta_max"] = db.eta_max;
    j["eta_min"] = db.eta_min;
    j["dim_lower"] = db.dim_lower;
    j["dim_upper"] = db.dim_upper;
    if (!db.note.empty()) j["note"] = db.note;
    j["slope"] = fit.slope;
    j["r2"] = fit.r2;
    json counts = json::array();
    for (std::size_t i = 0; i < fit.deltas.size(); ++i)
        counts.push_back({{"delta", fit.deltas[i]}, {"count", fit.counts[i]}});
    j["counts"] = counts;
    emit(args, "dim.json", j.dump(2) + "\n", true);
    return db.dim_case == hvrfif::DimensionCase::inconclusive ? 3 : 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"hidden variable recurrent fractal interpolation toolkit"};
    app.require_subcommand(1);

    CommonArgs va, ea, pa, da;
    add_common(app.add_subcommand("validate", "build the system and print the hypothesis checklist"), va);
    add_common(app.add_subcommand("eval", "sample the fixed point to CSV"), ea);
    add_common(app.add_subcommand("perturb", "verify the perturbation error bounds"), pa);
    add_common(app.add_subcommand("dim", "dimension bounds plus numerical box-count slope"), da);

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand("validate")) return cmd_validate(va);
        if (app.got_subcommand("eval")) return cmd_eval(ea);
        if (app.got_subcommand("perturb")) return cmd_perturb(pa);
        if (app.got_subcommand("dim")) return cmd_dim(da);
    } catch (const hvrfif::error& e) {
        std::cerr << e.what() << "\n";
        return e.code() == hvrfif::errc::no_convergence ? 2 : 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
