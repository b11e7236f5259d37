#pragma once

#include <array>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "hvrfif/errors.hpp"
#include "hvrfif/perturbation.hpp"
#include "hvrfif/rifs.hpp"
#include "hvrfif/surface.hpp"
#include "hvrfif/util.hpp"

namespace hvrfif {

using json = nlohmann::json;

/// Everything one CLI run needs, parsed from a single JSON document.
struct RunConfig {
    enum class Mode { curve, surface };
    Mode mode = Mode::curve;

    // curve dataset
    std::vector<DataPoint> points;
    std::vector<Domain> domains;
    std::vector<int> gamma;
    std::vector<int> orientations;

    // surface dataset
    double x0 = 0.0, xn = 1.0, y0 = 0.0, ym = 1.0;
    std::vector<std::vector<double>> z_rows, t_rows;
    std::vector<SurfaceDomain> surface_domains;
    std::vector<int> surface_gamma;  // tau order

    // factor/perturbation expression strings (wildcards already expanded)
    std::array<std::vector<std::string>, 4> factors;  // s, s', s~, s~'
    bool has_perturbation = false;
    std::array<std::vector<std::string>, 4> perturbation;

    int grid_points = 0;  // 0 = module default
    double tol = 1e-10;
    int max_iter = 200;
    double delta_min = 0.0, delta_max = 0.0;
    int levels = 0;
    std::uint64_t seed = 0;
    bool allow_classical = false;
    bool rescale_to_unit = false;
    std::size_t chaos_points = 0, chaos_burn_in = 0;
    bool has_chaos = false;

    std::string raw;  // original document bytes (hashed into reports)

    std::string config_hash() const { return hex64(fnv1a64(raw)); }
};

namespace detail {

[[noreturn]] inline void cfg_fail(const std::string& what) { raise(errc::config_error, what); }

inline std::vector<std::string> expand_exprs(const json& v, int count, const std::string& key) {
    std::vector<std::string> out;
    if (v.is_string()) {
        out.assign(static_cast<std::size_t>(count), v.get<std::string>());
        return out;
    }
    if (v.is_array()) {
        if (!v.empty() && v[0].is_array()) {  // nested [m][n] grid for surfaces
            for (const auto& row : v)
                for (const auto& cell : row) out.push_back(cell.get<std::string>());
        } else {
            for (const auto& e : v) out.push_back(e.get<std::string>());
        }
        if (static_cast<int>(out.size()) != count)
            cfg_fail("factors." + key + ": expected " + std::to_string(count) + " expressions, got " +
                     std::to_string(out.size()));
        return out;
    }
    cfg_fail("factors." + key + " must be a string or an array of strings");
}

inline std::vector<std::vector<double>> read_matrix(const json& v, const std::string& key) {
    if (!v.is_array() || v.empty() || !v[0].is_array()) cfg_fail(key + " must be a 2-D array");
    std::vector<std::vector<double>> out;
    for (const auto& row : v) out.push_back(row.get<std::vector<double>>());
    return out;
}

}  // namespace detail

/// Parses and validates the shape of a config document. Dataset file
/// references ({"file": "points.csv"}) are resolved relative to the working
/// directory.
inline RunConfig parse_config(const std::string& text) {
    RunConfig cfg;
    cfg.raw = text;
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        detail::cfg_fail(std::string("invalid JSON: ") + e.what());
    }

    std::string mode = doc.value("mode", "curve");
    if (mode == "curve") cfg.mode = RunConfig::Mode::curve;
    else if (mode == "surface") cfg.mode = RunConfig::Mode::surface;
    else detail::cfg_fail("mode must be 'curve' or 'surface'");

    cfg.allow_classical = doc.value("allow_classical", false);
    cfg.rescale_to_unit = doc.value("rescale_to_unit", false);
    cfg.seed = doc.value("seed", std::uint64_t{0});

    if (doc.contains("evaluation")) {
        const json& ev = doc["evaluation"];
        cfg.grid_points = ev.value("grid_points", 0);
        cfg.tol = ev.value("tol", 1e-10);
        cfg.max_iter = ev.value("max_iter", 200);
    }
    if (doc.contains("dimension")) {
        const json& dd = doc["dimension"];
        cfg.delta_min = dd.value("delta_min", 0.0);
        cfg.delta_max = dd.value("delta_max", 0.0);
        cfg.levels = dd.value("levels", 0);
    }
    if (doc.contains("chaos")) {
        cfg.has_chaos = true;
        cfg.chaos_points = doc["chaos"].value("points", std::size_t{0});
        cfg.chaos_burn_in = doc["chaos"].value("burn_in", std::size_t{0});
    }

    if (!doc.contains("dataset")) detail::cfg_fail("missing 'dataset'");
    const json& ds = doc["dataset"];

    int region_count = 0;
    if (cfg.mode == RunConfig::Mode::curve) {
        json pts;
        if (ds.contains("points")) {
            pts = ds["points"];
        } else if (ds.contains("file")) {
            std::ifstream in(ds["file"].get<std::string>());
            if (!in) detail::cfg_fail("cannot open dataset file " + ds["file"].get<std::string>());
            pts = json::array();
            std::string line;
            while (std::getline(in, line)) {
                if (line.empty() || line[0] == '#') continue;
                std::istringstream ls(line);
                double x, y, z;
                char comma;
                if (!(ls >> x >> comma >> y >> comma >> z)) detail::cfg_fail("malformed dataset row: " + line);
                pts.push_back({x, y, z});
            }
        } else {
            detail::cfg_fail("dataset needs 'points' or 'file'");
        }
        for (const auto& p : pts) {
            if (!p.is_array() || p.size() != 3) detail::cfg_fail("each point must be [x, y, z]");
            cfg.points.push_back({p[0].get<double>(), p[1].get<double>(), p[2].get<double>()});
        }
        region_count = static_cast<int>(cfg.points.size()) - 1;

        if (!doc.contains("partition")) detail::cfg_fail("missing 'partition'");
        const json& part = doc["partition"];
        for (const auto& d : part.value("domains", json::array())) {
            if (!d.is_array() || d.size() != 2) detail::cfg_fail("each curve domain must be [s, e]");
            cfg.domains.push_back({d[0].get<int>(), d[1].get<int>()});
        }
        cfg.gamma = part.value("gamma", std::vector<int>{});
        cfg.orientations = doc.value("orientations", std::vector<int>{});
        if (cfg.orientations.empty()) cfg.orientations.assign(static_cast<std::size_t>(region_count), 1);
    } else {
        cfg.x0 = ds.value("x0", 0.0);
        cfg.xn = ds.value("xn", 1.0);
        cfg.y0 = ds.value("y0", 0.0);
        cfg.ym = ds.value("ym", 1.0);
        if (!ds.contains("z") || !ds.contains("t")) detail::cfg_fail("surface dataset needs 'z' and 't' arrays");
        cfg.z_rows = detail::read_matrix(ds["z"], "dataset.z");
        cfg.t_rows = detail::read_matrix(ds["t"], "dataset.t");
        int n = static_cast<int>(cfg.z_rows[0].size()) - 1;
        int m = static_cast<int>(cfg.z_rows.size()) - 1;
        region_count = n * m;

        if (!doc.contains("partition")) detail::cfg_fail("missing 'partition'");
        const json& part = doc["partition"];
        for (const auto& d : part.value("domains", json::array())) {
            if (!d.is_array() || d.size() != 4) detail::cfg_fail("each surface domain must be [sx, ex, sy, ey]");
            cfg.surface_domains.push_back({d[0].get<int>(), d[1].get<int>(), d[2].get<int>(), d[3].get<int>()});
        }
        const json& g = part.value("gamma", json::array());
        if (!g.empty() && g[0].is_array()) {  // [m][n] rows
            if (static_cast<int>(g.size()) != m) detail::cfg_fail("gamma must have m rows");
            for (const auto& row : g) {
                if (static_cast<int>(row.size()) != n) detail::cfg_fail("gamma rows must have n entries");
                for (const auto& e : row) cfg.surface_gamma.push_back(e.get<int>());
            }
        } else {
            cfg.surface_gamma = g.get<std::vector<int>>();
        }
    }

    if (!doc.contains("factors")) detail::cfg_fail("missing 'factors'");
    const json& f = doc["factors"];
    static const char* keys[4] = {"s", "s_prime", "s_tilde", "s_tilde_prime"};
    for (int q = 0; q < 4; ++q) {
        if (!f.contains(keys[q])) detail::cfg_fail(std::string("factors.") + keys[q] + " missing");
        cfg.factors[static_cast<std::size_t>(q)] = detail::expand_exprs(f[keys[q]], region_count, keys[q]);
    }
    if (doc.contains("perturbation")) {
        cfg.has_perturbation = true;
        const json& p = doc["perturbation"];
        static const char* pkeys[4] = {"delta", "delta_prime", "delta_tilde", "delta_tilde_prime"};
        for (int q = 0; q < 4; ++q) {
            if (!p.contains(pkeys[q]))
                cfg.perturbation[static_cast<std::size_t>(q)].assign(static_cast<std::size_t>(region_count), "0");
            else
                cfg.perturbation[static_cast<std::size_t>(q)] = detail::expand_exprs(p[pkeys[q]], region_count, pkeys[q]);
        }
    }
    return cfg;
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) raise(errc::io_error, "cannot open config file " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

/// Instantiates the curve system (and the perturbation profile when present).
struct CurveSystem {
    RecurrentIFS rifs;
    std::optional<PerturbationQuad> perturbation;
};

inline CurveSystem build_curve_system(const RunConfig& cfg) {
    require(cfg.mode == RunConfig::Mode::curve, errc::config_error, "config is not in curve mode");
    ExtendedDataSet ds = validate_dataset(cfg.points);
    if (cfg.rescale_to_unit) ds = ds.rescaled_to_unit();
    PartitionScheme part = build_partition(ds, cfg.domains, cfg.gamma, cfg.allow_classical);
    FactorSet fs;
    const bool allow_y = false;
    for (const auto& e : cfg.factors[0]) fs.s.push_back(parse_expr(e, allow_y));
    for (const auto& e : cfg.factors[1]) fs.s_prime.push_back(parse_expr(e, allow_y));
    for (const auto& e : cfg.factors[2]) fs.s_tilde.push_back(parse_expr(e, allow_y));
    for (const auto& e : cfg.factors[3]) fs.s_tilde_prime.push_back(parse_expr(e, allow_y));
    CurveSystem sys{assemble_rifs(ds, part, fs, cfg.orientations), std::nullopt};
    if (cfg.has_perturbation) {
        std::vector<Expr> d, dp, dt, dtp;
        for (const auto& e : cfg.perturbation[0]) d.push_back(parse_expr(e, allow_y));
        for (const auto& e : cfg.perturbation[1]) dp.push_back(parse_expr(e, allow_y));
        for (const auto& e : cfg.perturbation[2]) dt.push_back(parse_expr(e, allow_y));
        for (const auto& e : cfg.perturbation[3]) dtp.push_back(parse_expr(e, allow_y));
        sys.perturbation = profile_perturbation(sys.rifs, std::move(d), std::move(dp), std::move(dt), std::move(dtp));
    }
    return sys;
}

inline SurfaceRIFS build_surface_system(const RunConfig& cfg) {
    require(cfg.mode == RunConfig::Mode::surface, errc::config_error, "config is not in surface mode");
    GridDataSet grid = validate_grid_dataset(cfg.x0, cfg.xn, cfg.y0, cfg.ym, cfg.z_rows, cfg.t_rows);
    SurfacePartition part = build_surface_partition(grid, cfg.surface_domains, cfg.surface_gamma, cfg.allow_classical);
    SurfaceFactorSet fs;
    for (const auto& e : cfg.factors[0]) fs.s.push_back(parse_expr(e, true));
    for (const auto& e : cfg.factors[1]) fs.s_prime.push_back(parse_expr(e, true));
    for (const auto& e : cfg.factors[2]) fs.s_tilde.push_back(parse_expr(e, true));
    for (const auto& e : cfg.factors[3]) fs.s_tilde_prime.push_back(parse_expr(e, true));
    return build_surface_rifs(grid, part, fs);
}

}  // namespace hvrfif
