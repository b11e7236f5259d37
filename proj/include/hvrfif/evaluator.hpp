#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "hvrfif/errors.hpp"
#include "hvrfif/rifs.hpp"
#include "hvrfif/util.hpp"

namespace hvrfif {

/// Synchronized grid samples of the fixed point (f1, f2).
struct SampledPair {
    std::vector<double> grid;
    std::vector<double> f1;
    std::vector<double> f2;
    int iterations = 0;
    double residual = 0.0;
    bool converged = false;
    std::vector<double> sweep_residuals;
};

struct IterOptions {
    int grid_points = 0;  // number of grid intervals G; 0 -> 64*n
    double tol = 1e-10;
    int max_iter = 200;
    bool allow_partial = false;  // return a non-converged SampledPair instead of throwing
    bool pin_nodes = true;
};

namespace detail {

/// Per-grid-point data that never changes across sweeps.
struct SweepPlan {
    struct Pin {
        std::size_t idx;
        double y, z;
    };
    std::vector<int> j0;                 // left interp index of L^-1(x)
    std::vector<double> w;               // interp weight
    std::vector<double> s1, s2, s3, s4;  // factors at x
    std::vector<double> g1, g2;          // domain chords at L^-1(x)
    std::vector<double> h1, h2;          // region chords at x
    std::vector<Pin> pins;               // node re-pinning targets
};

inline SweepPlan make_sweep_plan(const RecurrentIFS& rifs, const std::vector<double>& grid, bool pin_nodes) {
    const auto& ds = rifs.dataset;
    const int n = ds.n();
    const int gp = static_cast<int>(grid.size()) - 1;
    const double x0 = ds.x0();
    const double h = ds.span() / gp;

    SweepPlan plan;
    plan.j0.resize(grid.size());
    plan.w.resize(grid.size());
    plan.s1.resize(grid.size());
    plan.s2.resize(grid.size());
    plan.s3.resize(grid.size());
    plan.s4.resize(grid.size());
    plan.g1.resize(grid.size());
    plan.g2.resize(grid.size());
    plan.h1.resize(grid.size());
    plan.h2.resize(grid.size());

    int region = 1;
    for (std::size_t j = 0; j < grid.size(); ++j) {
        double x = grid[j];
        while (region < n && x > ds.nodes[static_cast<std::size_t>(region)].x) ++region;
        const AffineMap1D& L = rifs.maps[static_cast<std::size_t>(region - 1)];
        const RegionFactors& f = rifs.factors[static_cast<std::size_t>(region - 1)];
        const QPair& q = rifs.qpairs[static_cast<std::size_t>(region - 1)];
        double xp = L.invert(x);
        double p = (xp - x0) / h;
        int idx = std::clamp(static_cast<int>(p), 0, gp - 1);
        plan.j0[j] = idx;
        plan.w[j] = std::clamp(p - idx, 0.0, 1.0);
        plan.s1[j] = f.s.eval(x);
        plan.s2[j] = f.s_prime.eval(x);
        plan.s3[j] = f.s_tilde.eval(x);
        plan.s4[j] = f.s_tilde_prime.eval(x);
        plan.g1[j] = q.g(xp);
        plan.g2[j] = q.g_hidden(xp);
        plan.h1[j] = q.h(x);
        plan.h2[j] = q.h_hidden(x);
    }
    if (pin_nodes) {
        for (const DataPoint& p : ds.nodes) {
            int j = static_cast<int>(std::lround((p.x - x0) / h));
            if (j >= 0 && j <= gp && std::abs(grid[static_cast<std::size_t>(j)] - p.x) <= 1e-12 * std::max(1.0, std::abs(ds.span())))
                plan.pins.push_back({static_cast<std::size_t>(j), p.y, p.z});
        }
    }
    return plan;
}

}  // namespace detail

/// Iterates the Read-Bajraktarevic operator on a uniform grid until the
/// component-sum sup-norm update drops below tol. The initial iterate is the
/// piecewise-linear interpolant of the extended data; off-grid reads use
/// linear interpolation; node values are re-pinned to the data every sweep.
inline SampledPair rb_iterate(const RecurrentIFS& rifs, const IterOptions& opts = {}) {
    const auto& ds = rifs.dataset;
    const int n = ds.n();
    const int gp = opts.grid_points > 0 ? opts.grid_points : 64 * n;
    require(gp >= 16 * n, errc::invalid_parameter,
            "grid_points must be at least 16*n = " + std::to_string(16 * n));
    require(opts.tol > 0, errc::invalid_parameter, "tol must be positive");
    require(opts.max_iter > 0, errc::invalid_parameter, "max_iter must be positive");

    SampledPair out;
    out.grid.resize(static_cast<std::size_t>(gp) + 1);
    const double x0 = ds.x0();
    const double h = ds.span() / gp;
    for (int j = 0; j <= gp; ++j) out.grid[static_cast<std::size_t>(j)] = (j == gp) ? ds.xn() : x0 + j * h;

    // initial iterate: piecewise-linear data interpolant
    out.f1.resize(out.grid.size());
    out.f2.resize(out.grid.size());
    {
        int i = 1;
        for (std::size_t j = 0; j < out.grid.size(); ++j) {
            double x = out.grid[j];
            while (i < n && x > ds.nodes[static_cast<std::size_t>(i)].x) ++i;
            const DataPoint& a = ds.nodes[static_cast<std::size_t>(i - 1)];
            const DataPoint& b = ds.nodes[static_cast<std::size_t>(i)];
            double t = (x - a.x) / (b.x - a.x);
            out.f1[j] = a.y + t * (b.y - a.y);
            out.f2[j] = a.z + t * (b.z - a.z);
        }
    }

    detail::SweepPlan plan = detail::make_sweep_plan(rifs, out.grid, opts.pin_nodes);
    std::vector<double> nf1(out.grid.size()), nf2(out.grid.size());

    for (int sweep = 1; sweep <= opts.max_iter; ++sweep) {
        parallel_chunks(out.grid.size(), [&](std::size_t b, std::size_t e) {
            for (std::size_t j = b; j < e; ++j) {
                int j0 = plan.j0[j];
                double w = plan.w[j];
                double r1 = out.f1[static_cast<std::size_t>(j0)] * (1.0 - w) + out.f1[static_cast<std::size_t>(j0) + 1] * w;
                double r2 = out.f2[static_cast<std::size_t>(j0)] * (1.0 - w) + out.f2[static_cast<std::size_t>(j0) + 1] * w;
                double d1 = r1 - plan.g1[j];
                double d2 = r2 - plan.g2[j];
                nf1[j] = plan.s1[j] * d1 + plan.s2[j] * d2 + plan.h1[j];
                nf2[j] = plan.s3[j] * d1 + plan.s4[j] * d2 + plan.h2[j];
            }
        });
        for (const auto& pin : plan.pins) {
            nf1[pin.idx] = pin.y;
            nf2[pin.idx] = pin.z;
        }
        double res = 0.0;
        for (std::size_t j = 0; j < out.grid.size(); ++j)
            res = std::max(res, std::abs(nf1[j] - out.f1[j]) + std::abs(nf2[j] - out.f2[j]));
        out.f1.swap(nf1);
        out.f2.swap(nf2);
        out.iterations = sweep;
        out.residual = res;
        out.sweep_residuals.push_back(res);
        if (res < opts.tol) {
            out.converged = true;
            break;
        }
    }
    if (!out.converged && !opts.allow_partial)
        raise(errc::no_convergence,
              "residual " + std::to_string(out.residual) + " > tol after " +
                  std::to_string(out.iterations) + " sweeps");
    return out;
}

/// Random orbit of the RIFS: from map index s, the next map t is drawn with
/// probability p_st, then W_t is applied. Deterministic for a fixed seed.
inline std::vector<std::array<double, 3>> chaos_game(const RecurrentIFS& rifs, std::size_t points,
                                                     std::size_t burn_in, std::uint64_t seed) {
    std::vector<std::array<double, 3>> orbit;
    orbit.reserve(points);
    if (points == 0) return orbit;

    std::mt19937_64 rng(seed);
    auto uniform = [&rng]() { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };

    const auto& ds = rifs.dataset;
    const int n = ds.n();
    int s = 1;
    double x = 0.5 * (ds.nodes[0].x + ds.nodes[1].x);
    double y = 0.5 * (ds.nodes[0].y + ds.nodes[1].y);
    double z = 0.5 * (ds.nodes[0].z + ds.nodes[1].z);

    std::size_t emitted = 0;
    while (emitted < points) {
        double u = uniform();
        double acc = 0.0;
        int t = n;  // guard against roundoff at u ~ 1
        for (int c = 1; c <= n; ++c) {
            acc += rifs.M.at(s - 1, c - 1);
            if (u < acc) {
                t = c;
                break;
            }
        }
        if (rifs.M.at(s - 1, t - 1) == 0.0) {
            // roundoff fallback: take the last positive column
            for (int c = n; c >= 1; --c)
                if (rifs.M.at(s - 1, c - 1) > 0.0) {
                    t = c;
                    break;
                }
        }
        auto next = rifs.apply_W(t, x, y, z);
        x = next[0];
        y = next[1];
        z = next[2];
        s = t;
        if (burn_in > 0) {
            --burn_in;
            continue;
        }
        orbit.push_back({x, y, z});
        ++emitted;
    }
    return orbit;
}

/// Per-node absolute errors of the sampled fixed point against the data.
struct InterpolationReport {
    std::vector<double> err_f1;
    std::vector<double> err_f2;
    double max_err = 0.0;
    double tol = 0.0;
    bool pass = false;
};

/// Requires the grid to contain every node (choose G a multiple of n on
/// uniform data).
inline InterpolationReport check_interpolation(const SampledPair& sampled, const ExtendedDataSet& ds,
                                               double tol) {
    InterpolationReport rep;
    rep.tol = tol;
    const int gp = static_cast<int>(sampled.grid.size()) - 1;
    const double h = (sampled.grid.back() - sampled.grid.front()) / gp;
    for (const DataPoint& p : ds.nodes) {
        int j = static_cast<int>(std::lround((p.x - sampled.grid.front()) / h));
        require(j >= 0 && j <= gp && std::abs(sampled.grid[static_cast<std::size_t>(j)] - p.x) <= 1e-9,
                errc::invalid_parameter, "grid does not contain node at x = " + std::to_string(p.x));
        rep.err_f1.push_back(std::abs(sampled.f1[static_cast<std::size_t>(j)] - p.y));
        rep.err_f2.push_back(std::abs(sampled.f2[static_cast<std::size_t>(j)] - p.z));
        rep.max_err = std::max({rep.max_err, rep.err_f1.back(), rep.err_f2.back()});
    }
    rep.pass = rep.max_err <= tol;
    return rep;
}

}  // namespace hvrfif
