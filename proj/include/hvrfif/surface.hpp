#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <string>
#include <vector>

#include "hvrfif/dimension.hpp"
#include "hvrfif/errors.hpp"
#include "hvrfif/expr.hpp"
#include "hvrfif/matrix.hpp"
#include "hvrfif/util.hpp"

namespace hvrfif {

/// Extended surface data (z_ij, t_ij) on a uniform rectangular grid with
/// square cells: x_i = x0 + i|Ix|/n, y_j = y0 + j|Iy|/m, |Ix|/n = |Iy|/m.
struct GridDataSet {
    double x0 = 0.0, xn = 1.0;
    double y0 = 0.0, ym = 1.0;
    int n = 0, m = 0;
    std::vector<double> z;  // (m+1)*(n+1), index j*(n+1)+i
    std::vector<double> t;

    double z_at(int i, int j) const { return z[static_cast<std::size_t>(j) * (n + 1) + i]; }
    double t_at(int i, int j) const { return t[static_cast<std::size_t>(j) * (n + 1) + i]; }
    double x_node(int i) const { return i == n ? xn : x0 + i * (xn - x0) / n; }
    double y_node(int j) const { return j == m ? ym : y0 + j * (ym - y0) / m; }
    double cell() const { return (xn - x0) / n; }

    double max_abs_z() const {
        double v = 0.0;
        for (double w : z) v = std::max(v, std::abs(w));
        return v;
    }

    /// Global piecewise-bilinear interpolant of the z data.
    double g1(double x, double y) const { return bilerp(z, x, y); }
    /// Same for the hidden t data.
    double g2(double x, double y) const { return bilerp(t, x, y); }

private:
    double bilerp(const std::vector<double>& d, double x, double y) const {
        double px = (x - x0) / (xn - x0) * n;
        double py = (y - y0) / (ym - y0) * m;
        int i = std::clamp(static_cast<int>(px), 0, n - 1);
        int j = std::clamp(static_cast<int>(py), 0, m - 1);
        double u = px - i, v = py - j;
        auto at = [&](int ii, int jj) { return d[static_cast<std::size_t>(jj) * (n + 1) + ii]; };
        return at(i, j) * (1 - u) * (1 - v) + at(i + 1, j) * u * (1 - v) + at(i, j + 1) * (1 - u) * v +
               at(i + 1, j + 1) * u * v;
    }
};

inline GridDataSet validate_grid_dataset(double x0, double xn, double y0, double ym,
                                         const std::vector<std::vector<double>>& z,
                                         const std::vector<std::vector<double>>& t) {
    GridDataSet g;
    g.x0 = x0;
    g.xn = xn;
    g.y0 = y0;
    g.ym = ym;
    require(xn > x0 && ym > y0, errc::invalid_parameter, "degenerate grid extents");
    int mrows = static_cast<int>(z.size());
    require(mrows >= 3, errc::too_few_points, "need at least 3 rows of z data");
    int ncols = static_cast<int>(z[0].size());
    require(ncols >= 3, errc::too_few_points, "need at least 3 columns of z data");
    g.n = ncols - 1;
    g.m = mrows - 1;
    require(static_cast<int>(t.size()) == mrows, errc::invalid_parameter, "z and t row counts differ");
    double hx = (xn - x0) / g.n, hy = (ym - y0) / g.m;
    if (std::abs(hx - hy) > 1e-9 * std::max(hx, hy))
        raise(errc::non_square_cell,
              "cells must be square: |Ix|/n = " + format_double(hx) + " but |Iy|/m = " + format_double(hy));
    g.z.reserve(static_cast<std::size_t>(mrows) * ncols);
    g.t.reserve(static_cast<std::size_t>(mrows) * ncols);
    for (int j = 0; j < mrows; ++j) {
        require(static_cast<int>(z[static_cast<std::size_t>(j)].size()) == ncols &&
                    static_cast<int>(t[static_cast<std::size_t>(j)].size()) == ncols,
                errc::invalid_parameter, "ragged data rows");
        for (int i = 0; i < ncols; ++i) {
            double zv = z[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)];
            double tv = t[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)];
            if (!std::isfinite(zv) || !std::isfinite(tv))
                raise(errc::non_finite_value, "non-finite value at node (" + std::to_string(i) + "," + std::to_string(j) + ")");
            g.z.push_back(zv);
            g.t.push_back(tv);
        }
    }
    return g;
}

/// One square index-rectangle domain [x_sx, x_ex] x [y_sy, y_ey].
struct SurfaceDomain {
    int sx = 0, ex = 0;
    int sy = 0, ey = 0;
};

inline int tau(int i, int j, int n) { return i + (j - 1) * n; }
inline std::array<int, 2> tau_inv(int kappa, int n) { return {(kappa - 1) % n + 1, (kappa - 1) / n + 1}; }

/// Domains, the cell-to-domain assignment, and the common side mu in cells.
struct SurfacePartition {
    int l = 0;
    std::vector<SurfaceDomain> domains;
    std::vector<int> gamma;  // tau-ordered, values 1..l
    int mu = 0;

    int domain_of_cell(int i, int j, int n) const { return gamma[static_cast<std::size_t>(tau(i, j, n) - 1)]; }
    const SurfaceDomain& domain(int k) const { return domains[static_cast<std::size_t>(k - 1)]; }

    bool cell_in_domain(int i, int j, int k) const {
        const SurfaceDomain& d = domain(k);
        return d.sx <= i - 1 && i <= d.ex && d.sy <= j - 1 && j <= d.ey;
    }
};

inline SurfacePartition build_surface_partition(const GridDataSet& grid,
                                                const std::vector<SurfaceDomain>& domains,
                                                const std::vector<int>& gamma, bool allow_classical = false) {
    const int n = grid.n, m = grid.m, N = n * m;
    const int l = static_cast<int>(domains.size());
    const int l_min = allow_classical ? 1 : 2;
    if (l < l_min || l > N)
        raise(errc::domain_count_out_of_range,
              "domain count " + std::to_string(l) + " outside [" + std::to_string(l_min) + ", " + std::to_string(N) + "]");
    int mu = -1;
    for (int k = 1; k <= l; ++k) {
        const SurfaceDomain& d = domains[static_cast<std::size_t>(k - 1)];
        if (d.sx < 0 || d.ex > n || d.sy < 0 || d.ey > m)
            raise(errc::domain_index_out_of_range, "domain " + std::to_string(k) + " outside the grid");
        if (d.ex - d.sx < 2 || d.ey - d.sy < 2)
            raise(errc::domain_too_narrow,
                  "domain " + std::to_string(k) + " must contain at least 2 cells per axis");
        if (d.ex - d.sx != d.ey - d.sy)
            raise(errc::non_square_domain,
                  "domain " + std::to_string(k) + " is " + std::to_string(d.ex - d.sx) + "x" +
                      std::to_string(d.ey - d.sy) + " cells; domains must be square");
        if (mu < 0) mu = d.ex - d.sx;
        if (d.ex - d.sx != mu)
            raise(errc::non_square_domain,
                  "all domains must share one side mu: domain " + std::to_string(k) + " has side " +
                      std::to_string(d.ex - d.sx) + " != " + std::to_string(mu));
    }
    require(static_cast<int>(gamma.size()) == N, errc::gamma_size_mismatch,
            "gamma must assign every cell: expected " + std::to_string(N) + " entries");
    std::vector<bool> used(static_cast<std::size_t>(l), false);
    for (int kappa = 1; kappa <= N; ++kappa) {
        int k = gamma[static_cast<std::size_t>(kappa - 1)];
        if (k < 1 || k > l)
            raise(errc::gamma_out_of_range, "gamma[" + std::to_string(kappa) + "] outside {1.." + std::to_string(l) + "}");
        used[static_cast<std::size_t>(k - 1)] = true;
    }
    for (int k = 1; k <= l; ++k)
        if (!used[static_cast<std::size_t>(k - 1)])
            raise(errc::unused_domain, "domain " + std::to_string(k) + " never appears in gamma");
    SurfacePartition p;
    p.l = l;
    p.domains = domains;
    p.gamma = gamma;
    p.mu = mu;
    return p;
}

/// Surface transition matrix with the same membership-count normalization
/// as the curve case: b_s = |{t : cell(s) in domain(gamma(cell(t)))}|.
inline Matrix build_surface_row_stochastic(const SurfacePartition& part, int n, int m) {
    const int N = n * m;
    Matrix M(N, N);
    for (int s = 1; s <= N; ++s) {
        auto [si, sj] = tau_inv(s, n);
        int count = 0;
        for (int t = 1; t <= N; ++t) {
            auto [ti, tj] = tau_inv(t, n);
            if (part.cell_in_domain(si, sj, part.domain_of_cell(ti, tj, n))) ++count;
        }
        if (count == 0)
            raise(errc::dead_region, "cell " + std::to_string(s) + " lies in no domain used by gamma");
        for (int t = 1; t <= N; ++t) {
            auto [ti, tj] = tau_inv(t, n);
            if (part.cell_in_domain(si, sj, part.domain_of_cell(ti, tj, n)))
                M.at(s - 1, t - 1) = 1.0 / count;
        }
    }
    return M;
}

/// Factor expressions per cell in tau order.
struct SurfaceFactorSet {
    std::vector<Expr> s, s_prime, s_tilde, s_tilde_prime;
};

struct CellFactors {
    Expr s, s_prime, s_tilde, s_tilde_prime;
    FactorProfile ps, psp, pst, pstp;
};

/// Assembled bivariate recurrent IFS.
struct SurfaceRIFS {
    GridDataSet grid;
    SurfacePartition partition;
    std::vector<CellFactors> factors;  // tau order
    Matrix M;
    Matrix C;
    double S_bar = 0.0;
    int profile_samples = kDefaultProfileSamples;

    int n() const { return grid.n; }
    int m() const { return grid.m; }
    int N() const { return grid.n * grid.m; }

    /// L_{ij} component maps for cell (i, j), orientation +1 per axis.
    std::array<double, 4> map_coeffs(int i, int j) const {
        const SurfaceDomain& d = partition.domain(partition.domain_of_cell(i, j, grid.n));
        double xs = grid.x_node(d.sx), xe = grid.x_node(d.ex);
        double ys = grid.y_node(d.sy), ye = grid.y_node(d.ey);
        double ax = (grid.x_node(i) - grid.x_node(i - 1)) / (xe - xs);
        double bx = grid.x_node(i - 1) - ax * xs;
        double ay = (grid.y_node(j) - grid.y_node(j - 1)) / (ye - ys);
        double by = grid.y_node(j - 1) - ay * ys;
        return {ax, bx, ay, by};
    }

    /// Domain-boundary transfinite (Coons) patch: matches the piecewise-linear
    /// data trace of g on all four domain edges, which is exactly the
    /// boundary-matching requirement on l; reduces to the chord in one
    /// variable. Component 0 blends the z data, component 1 the t data.
    double coons(int component, int k, double x, double y) const {
        const SurfaceDomain& d = partition.domain(k);
        double xs = grid.x_node(d.sx), xe = grid.x_node(d.ex);
        double ys = grid.y_node(d.sy), ye = grid.y_node(d.ey);
        double u = (x - xs) / (xe - xs);
        double v = (y - ys) / (ye - ys);
        auto g = [&](double px, double py) { return component == 0 ? grid.g1(px, py) : grid.g2(px, py); };
        auto node = [&](int i, int j) { return component == 0 ? grid.z_at(i, j) : grid.t_at(i, j); };
        double bottom = g(x, ys), top = g(x, ye), left = g(xs, y), right = g(xe, y);
        double corners = (1 - u) * (1 - v) * node(d.sx, d.sy) + u * (1 - v) * node(d.ex, d.sy) +
                         (1 - u) * v * node(d.sx, d.ey) + u * v * node(d.ex, d.ey);
        return (1 - v) * bottom + v * top + (1 - u) * left + u * right - corners;
    }

    /// F_{ij} at a domain point (x, y) with state (z, t):
    /// S(L(x,y)) (z - l(x,y)) + g(L(x,y)).
    std::array<double, 2> apply_F(int i, int j, double x, double y, double z, double t) const {
        auto mc = map_coeffs(i, j);
        double lx = mc[0] * x + mc[1];
        double ly = mc[2] * y + mc[3];
        int k = partition.domain_of_cell(i, j, grid.n);
        const CellFactors& f = factors[static_cast<std::size_t>(tau(i, j, grid.n) - 1)];
        double d1 = z - coons(0, k, x, y);
        double d2 = t - coons(1, k, x, y);
        return {f.s.eval(lx, ly) * d1 + f.s_prime.eval(lx, ly) * d2 + grid.g1(lx, ly),
                f.s_tilde.eval(lx, ly) * d1 + f.s_tilde_prime.eval(lx, ly) * d2 + grid.g2(lx, ly)};
    }
};

/// Profiles every factor over its cell, checks S_bar < 1, builds M and C,
/// and verifies the boundary-matching conditions at sampled edge points.
inline SurfaceRIFS build_surface_rifs(const GridDataSet& grid, const SurfacePartition& part,
                                      const SurfaceFactorSet& fexprs,
                                      int profile_samples = kDefaultProfileSamples,
                                      int boundary_samples = 17) {
    const int n = grid.n, m = grid.m, N = n * m;
    require(static_cast<int>(fexprs.s.size()) == N && static_cast<int>(fexprs.s_prime.size()) == N &&
                static_cast<int>(fexprs.s_tilde.size()) == N && static_cast<int>(fexprs.s_tilde_prime.size()) == N,
            errc::invalid_parameter, "need four factor expressions per cell");

    SurfaceRIFS r;
    r.grid = grid;
    r.partition = part;
    r.profile_samples = profile_samples;

    double s_bar = 0.0;
    int worst = 1;
    for (int kappa = 1; kappa <= N; ++kappa) {
        auto [i, j] = tau_inv(kappa, n);
        double xlo = grid.x_node(i - 1), xhi = grid.x_node(i);
        double ylo = grid.y_node(j - 1), yhi = grid.y_node(j);
        CellFactors f;
        f.s = fexprs.s[static_cast<std::size_t>(kappa - 1)];
        f.s_prime = fexprs.s_prime[static_cast<std::size_t>(kappa - 1)];
        f.s_tilde = fexprs.s_tilde[static_cast<std::size_t>(kappa - 1)];
        f.s_tilde_prime = fexprs.s_tilde_prime[static_cast<std::size_t>(kappa - 1)];
        f.ps = profile_expr_rect(f.s, xlo, xhi, ylo, yhi, profile_samples);
        f.psp = profile_expr_rect(f.s_prime, xlo, xhi, ylo, yhi, profile_samples);
        f.pst = profile_expr_rect(f.s_tilde, xlo, xhi, ylo, yhi, profile_samples);
        f.pstp = profile_expr_rect(f.s_tilde_prime, xlo, xhi, ylo, yhi, profile_samples);
        for (const FactorProfile* p : {&f.ps, &f.psp, &f.pst, &f.pstp})
            if (!(p->sup_abs < 1.0))
                raise(errc::not_contractive,
                      "cell " + std::to_string(kappa) + ": factor sup |.| = " + std::to_string(p->sup_abs) + " >= 1");
        double row = std::max(f.ps.sup_abs + f.pst.sup_abs, f.psp.sup_abs + f.pstp.sup_abs);
        if (row > s_bar) {
            s_bar = row;
            worst = kappa;
        }
        r.factors.push_back(std::move(f));
    }
    if (!(s_bar < 1.0 - kContractionMargin))
        raise(errc::not_contractive,
              "S_bar = " + std::to_string(s_bar) + " >= 1 (cell " + std::to_string(worst) + ")");
    r.S_bar = s_bar;
    r.M = build_surface_row_stochastic(part, n, m);
    r.C = build_connection(r.M);

    // boundary matching at sampled edge points
    double worst_mismatch = 0.0;
    for (int kappa = 1; kappa <= N; ++kappa) {
        auto [i, j] = tau_inv(kappa, n);
        int k = part.domain_of_cell(i, j, n);
        const SurfaceDomain& d = part.domain(k);
        double xs = grid.x_node(d.sx), xe = grid.x_node(d.ex);
        double ys = grid.y_node(d.sy), ye = grid.y_node(d.ey);
        auto mc = r.map_coeffs(i, j);
        auto check_point = [&](double x, double y) {
            double gz = grid.g1(x, y), gt = grid.g2(x, y);
            auto img = r.apply_F(i, j, x, y, gz, gt);
            double lx = mc[0] * x + mc[1], ly = mc[2] * y + mc[3];
            worst_mismatch = std::max({worst_mismatch, std::abs(img[0] - grid.g1(lx, ly)),
                                       std::abs(img[1] - grid.g2(lx, ly))});
        };
        for (int q = 0; q < boundary_samples; ++q) {
            double ty = ys + (ye - ys) * q / (boundary_samples - 1);
            double tx = xs + (xe - xs) * q / (boundary_samples - 1);
            check_point(xs, ty);
            check_point(xe, ty);
            check_point(tx, ys);
            check_point(tx, ye);
        }
    }
    if (worst_mismatch > 1e-10)
        raise(errc::hypothesis_violated,
              "boundary matching violated: max |F(edge, g) - g(L(edge))| = " + format_double(worst_mismatch));
    return r;
}

/// Sampled surface fixed point on a square evaluation lattice.
struct SampledField {
    std::vector<double> gx;  // Gx+1 abscissas
    std::vector<double> gy;  // Gy+1 ordinates
    std::vector<double> f1;  // row-major, index j*(Gx+1)+i
    std::vector<double> f2;
    int iterations = 0;
    double residual = 0.0;
    bool converged = false;
    std::vector<double> sweep_residuals;

    double f1_at(int i, int j) const { return f1[static_cast<std::size_t>(j) * gx.size() + i]; }
    double f2_at(int i, int j) const { return f2[static_cast<std::size_t>(j) * gx.size() + i]; }
};

/// Two-dimensional fixed-point iteration: bilinear off-grid reads, node
/// re-pinning, component-sum sup-norm residual.
inline SampledField rb_iterate_surface(const SurfaceRIFS& srifs, const IterOptions& opts = {}) {
    const GridDataSet& grid = srifs.grid;
    const int n = grid.n, m = grid.m;
    const int gp = opts.grid_points > 0 ? opts.grid_points : 64 * std::max(n, m);
    require(gp >= 16 * std::max(n, m), errc::invalid_parameter, "grid_points too small");
    require(opts.tol > 0 && opts.max_iter > 0, errc::invalid_parameter, "bad iteration parameters");

    SampledField out;
    out.gx.resize(static_cast<std::size_t>(gp) + 1);
    out.gy.resize(static_cast<std::size_t>(gp) + 1);
    for (int i = 0; i <= gp; ++i) {
        out.gx[static_cast<std::size_t>(i)] = (i == gp) ? grid.xn : grid.x0 + i * (grid.xn - grid.x0) / gp;
        out.gy[static_cast<std::size_t>(i)] = (i == gp) ? grid.ym : grid.y0 + i * (grid.ym - grid.y0) / gp;
    }
    const std::size_t W = out.gx.size();
    const std::size_t total = W * out.gy.size();

    // plan: everything that is constant across sweeps
    std::vector<int> iu(total), iv(total);
    std::vector<double> wu(total), wv(total);
    std::vector<double> S1(total), S2(total), S3(total), S4(total);
    std::vector<double> L1(total), L2(total), R1(total), R2(total);
    parallel_chunks(out.gy.size(), [&](std::size_t jb, std::size_t je) {
        for (std::size_t j = jb; j < je; ++j) {
            double y = out.gy[j];
            int cj = std::clamp(static_cast<int>((y - grid.y0) / (grid.ym - grid.y0) * m), 0, m - 1) + 1;
            for (std::size_t i = 0; i < W; ++i) {
                double x = out.gx[i];
                int ci = std::clamp(static_cast<int>((x - grid.x0) / (grid.xn - grid.x0) * n), 0, n - 1) + 1;
                std::size_t idx = j * W + i;
                auto mc = srifs.map_coeffs(ci, cj);
                double xp = (x - mc[1]) / mc[0];
                double yp = (y - mc[3]) / mc[2];
                int k = srifs.partition.domain_of_cell(ci, cj, n);
                const CellFactors& f = srifs.factors[static_cast<std::size_t>(tau(ci, cj, n) - 1)];
                S1[idx] = f.s.eval(x, y);
                S2[idx] = f.s_prime.eval(x, y);
                S3[idx] = f.s_tilde.eval(x, y);
                S4[idx] = f.s_tilde_prime.eval(x, y);
                L1[idx] = srifs.coons(0, k, xp, yp);
                L2[idx] = srifs.coons(1, k, xp, yp);
                R1[idx] = grid.g1(x, y);
                R2[idx] = grid.g2(x, y);
                double pu = (xp - grid.x0) / (grid.xn - grid.x0) * gp;
                double pv = (yp - grid.y0) / (grid.ym - grid.y0) * gp;
                int u0 = std::clamp(static_cast<int>(pu), 0, gp - 1);
                int v0 = std::clamp(static_cast<int>(pv), 0, gp - 1);
                iu[idx] = u0;
                iv[idx] = v0;
                wu[idx] = std::clamp(pu - u0, 0.0, 1.0);
                wv[idx] = std::clamp(pv - v0, 0.0, 1.0);
            }
        }
    });

    // initial iterate: the bilinear data interpolant (= R arrays)
    out.f1 = R1;
    out.f2 = R2;

    // node pins where the lattice hits data nodes
    struct Pin {
        std::size_t idx;
        double z, t;
    };
    std::vector<Pin> pins;
    if (opts.pin_nodes) {
        double hx = (grid.xn - grid.x0) / gp, hy = (grid.ym - grid.y0) / gp;
        for (int j = 0; j <= m; ++j) {
            int gj = static_cast<int>(std::lround((grid.y_node(j) - grid.y0) / hy));
            if (gj < 0 || gj > gp || std::abs(out.gy[static_cast<std::size_t>(gj)] - grid.y_node(j)) > 1e-12) continue;
            for (int i = 0; i <= n; ++i) {
                int gi = static_cast<int>(std::lround((grid.x_node(i) - grid.x0) / hx));
                if (gi < 0 || gi > gp || std::abs(out.gx[static_cast<std::size_t>(gi)] - grid.x_node(i)) > 1e-12) continue;
                pins.push_back({static_cast<std::size_t>(gj) * W + static_cast<std::size_t>(gi),
                                grid.z_at(i, j), grid.t_at(i, j)});
            }
        }
    }

    std::vector<double> nf1(total), nf2(total);
    for (int sweep = 1; sweep <= opts.max_iter; ++sweep) {
        parallel_chunks(total, [&](std::size_t b, std::size_t e) {
            for (std::size_t idx = b; idx < e; ++idx) {
                std::size_t base = static_cast<std::size_t>(iv[idx]) * W + iu[idx];
                double a = wu[idx], c = wv[idx];
                double r1 = out.f1[base] * (1 - a) * (1 - c) + out.f1[base + 1] * a * (1 - c) +
                            out.f1[base + W] * (1 - a) * c + out.f1[base + W + 1] * a * c;
                double r2 = out.f2[base] * (1 - a) * (1 - c) + out.f2[base + 1] * a * (1 - c) +
                            out.f2[base + W] * (1 - a) * c + out.f2[base + W + 1] * a * c;
                double d1 = r1 - L1[idx];
                double d2 = r2 - L2[idx];
                nf1[idx] = S1[idx] * d1 + S2[idx] * d2 + R1[idx];
                nf2[idx] = S3[idx] * d1 + S4[idx] * d2 + R2[idx];
            }
        });
        for (const Pin& p : pins) {
            nf1[p.idx] = p.z;
            nf2[p.idx] = p.t;
        }
        double res = 0.0;
        for (std::size_t idx = 0; idx < total; ++idx)
            res = std::max(res, std::abs(nf1[idx] - out.f1[idx]) + std::abs(nf2[idx] - out.f2[idx]));
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
              "residual " + std::to_string(out.residual) + " > tol after " + std::to_string(out.iterations) + " sweeps");
    return out;
}

/// Hypothesis checklist for the surface dimension bounds (2-D analogue of
/// the curve one).
inline HypothesisReport validate_surface_hypotheses(const SurfaceRIFS& srifs, int sign_samples = 32) {
    HypothesisReport rep;
    const GridDataSet& g = srifs.grid;
    const int n = g.n, m = g.m;

    double hx = (g.xn - g.x0) / n, hy = (g.ym - g.y0) / m;
    bool square = std::abs(hx - hy) <= 1e-9 * std::max(hx, hy);
    rep.add("square_cells", square, square ? "|Ix|/n = |Iy|/m" : "cells are not square");

    bool irred = check_irreducible(srifs.C);
    rep.add("irreducible", irred, irred ? "connection digraph strongly connected" : "connection digraph is reducible");

    bool signs = true;
    std::string sign_ev = "s*s' >= 0 and s~*s~' >= 0 on sampled cells";
    for (int kappa = 1; kappa <= srifs.N() && signs; ++kappa) {
        auto [i, j] = tau_inv(kappa, n);
        const CellFactors& f = srifs.factors[static_cast<std::size_t>(kappa - 1)];
        double xlo = g.x_node(i - 1), xhi = g.x_node(i);
        double ylo = g.y_node(j - 1), yhi = g.y_node(j);
        for (int a = 0; a < sign_samples && signs; ++a)
            for (int b = 0; b < sign_samples; ++b) {
                double x = xlo + (xhi - xlo) * a / (sign_samples - 1);
                double y = ylo + (yhi - ylo) * b / (sign_samples - 1);
                if (f.s.eval(x, y) * f.s_prime.eval(x, y) < -1e-12 ||
                    f.s_tilde.eval(x, y) * f.s_tilde_prime.eval(x, y) < -1e-12) {
                    signs = false;
                    sign_ev = "sign condition fails in cell " + std::to_string(kappa);
                    break;
                }
            }
    }
    rep.add("factor_signs", signs, sign_ev);

    // non-collinear triple along one grid line (x-column or y-row) with the
    // matched hidden ordering
    bool found = false;
    std::string where;
    auto try_line = [&](bool column, int fixed, int len, auto coord, auto zval, auto tval) {
        for (int a = 0; a <= len - 2 && !found; ++a)
            for (int b = a + 1; b <= len - 1 && !found; ++b)
                for (int c = b + 1; c <= len && !found; ++c) {
                    double scale = std::abs(coord(len) - coord(0));
                    if (detail::collinear(coord(a), zval(a), coord(b), zval(b), coord(c), zval(c), scale)) continue;
                    if (detail::collinear(coord(a), tval(a), coord(b), tval(b), coord(c), tval(c), scale)) continue;
                    if ((zval(a) - zval(b)) * (tval(a) - tval(b)) <= 0.0) continue;
                    if ((zval(a) - zval(c)) * (tval(a) - tval(c)) <= 0.0) continue;
                    if ((zval(b) - zval(c)) * (tval(b) - tval(c)) <= 0.0) continue;
                    found = true;
                    rep.triple[0] = a;
                    rep.triple[1] = b;
                    rep.triple[2] = c;
                    where = (column ? "column x_" : "row y_") + std::to_string(fixed);
                }
    };
    for (int alpha = 0; alpha <= n && !found; ++alpha)
        try_line(true, alpha, m, [&](int j) { return g.y_node(j); }, [&](int j) { return g.z_at(alpha, j); },
                 [&](int j) { return g.t_at(alpha, j); });
    for (int beta = 0; beta <= m && !found; ++beta)
        try_line(false, beta, n, [&](int i) { return g.x_node(i); }, [&](int i) { return g.z_at(i, beta); },
                 [&](int i) { return g.t_at(i, beta); });
    rep.add("non_collinear_triple", found,
            found ? "witness triple on " + where : "no grid line carries a qualifying triple");
    return rep;
}

/// Surface dimension bounds: lambda_... are the Perron-Frobenius radii of
/// the extrema-weighted connection matrices; base mu (common domain side).
///   (a) lambda_lower > mu:  [1 + log_mu lambda_lower, 1 + log_mu lambda_upper]
///   (b) lambda_upper <= mu: dim = 2.
inline DimensionBounds surface_dimension_bounds(const SurfaceRIFS& srifs) {
    HypothesisReport hyp = validate_surface_hypotheses(srifs);
    if (!hyp.all_pass) {
        std::string which;
        for (const auto& c : hyp.checks)
            if (!c.pass) which += (which.empty() ? "" : ", ") + c.name;
        raise(errc::hypothesis_violated, "failed checks: " + which);
    }
    const int N = srifs.N();
    std::vector<double> dlo(static_cast<std::size_t>(N)), dhi(static_cast<std::size_t>(N));
    for (int kappa = 0; kappa < N; ++kappa) {
        const CellFactors& f = srifs.factors[static_cast<std::size_t>(kappa)];
        dlo[static_cast<std::size_t>(kappa)] =
            std::min(f.ps.inf_abs, f.psp.inf_abs) + std::min(f.pst.inf_abs, f.pstp.inf_abs);
        dhi[static_cast<std::size_t>(kappa)] =
            std::max(f.ps.sup_abs, f.psp.sup_abs) + std::max(f.pst.sup_abs, f.pstp.sup_abs);
    }
    DimensionBounds out;
    out.rho_lower = spectral_radius(diag_times(dlo, srifs.C)).rho;
    out.rho_upper = spectral_radius(diag_times(dhi, srifs.C)).rho;
    out.eta_max = srifs.partition.mu;
    out.eta_min = srifs.partition.mu;
    const double log_mu = std::log(static_cast<double>(srifs.partition.mu));
    if (out.rho_lower > srifs.partition.mu) {
        out.dim_case = DimensionCase::case_i;
        out.dim_lower = 1.0 + std::log(out.rho_lower) / log_mu;
        out.dim_upper = 1.0 + std::log(out.rho_upper) / log_mu;
    } else if (out.rho_upper <= srifs.partition.mu) {
        out.dim_case = DimensionCase::case_ii;
        out.dim_lower = 2.0;
        out.dim_upper = 2.0;
    } else {
        out.dim_case = DimensionCase::inconclusive;
        out.dim_lower = 2.0;
        out.dim_upper = std::min(3.0, 1.0 + std::log(out.rho_upper) / log_mu);
        out.note = "lambda_lower <= mu < lambda_upper: the two-sided bounds do not cover this regime";
    }
    return out;
}

/// delta-mesh cubes meeting the sampled graph of f1 in R^3, anchored at
/// (x0, y0, min f1). Each sample cell marks the cube columns it touches with
/// the z-range of its corners (a conservative rasterization of the patch).
inline std::size_t box_count_surface(const SampledField& field, double delta) {
    require(delta > 0.0, errc::invalid_parameter, "delta must be positive");
    const auto& gx = field.gx;
    const auto& gy = field.gy;
    const double hx = (gx.back() - gx.front()) / (static_cast<double>(gx.size()) - 1);
    const double hy = (gy.back() - gy.front()) / (static_cast<double>(gy.size()) - 1);
    if (!(hx <= delta / 4.0 && hy <= delta / 4.0))
        raise(errc::delta_too_small, "sample spacing exceeds delta/4");

    double zlo = field.f1[0], zhi = field.f1[0];
    for (double v : field.f1) {
        zlo = std::min(zlo, v);
        zhi = std::max(zhi, v);
    }
    detail::MeshAxis ax(gx.front(), gx.back(), delta);
    detail::MeshAxis ay(gy.front(), gy.back(), delta);
    detail::MeshAxis az(zlo, zhi, delta);
    require(static_cast<long long>(ax.cells) * ay.cells < (1 << 24) && az.cells < (1 << 20),
            errc::delta_too_small, "mesh too fine");

    const std::size_t W = gx.size();
    const std::size_t ncell_rows = gy.size() - 1;
    const unsigned workers = worker_count();
    std::vector<detail::CellMarks> parts(std::max<unsigned>(1, workers));
    std::atomic<unsigned> next_part{0};
    parallel_chunks(ncell_rows, [&](std::size_t jb, std::size_t je) {
        detail::CellMarks local;
        for (std::size_t j = jb; j < je; ++j) {
            int cy1 = ay.index(gy[j]);
            int cy2 = ay.index(gy[j + 1]);
            for (std::size_t i = 0; i + 1 < W; ++i) {
                std::size_t base = j * W + i;
                double z1 = field.f1[base], z2 = field.f1[base + 1];
                double z3 = field.f1[base + W], z4 = field.f1[base + W + 1];
                int k1 = az.index(std::min(std::min(z1, z2), std::min(z3, z4)));
                int k2 = az.index(std::max(std::max(z1, z2), std::max(z3, z4)));
                int cx1 = ax.index(gx[i]);
                int cx2 = ax.index(gx[i + 1]);
                for (int cx = cx1; cx <= cx2; ++cx)
                    for (int cy = cy1; cy <= cy2; ++cy)
                        local.mark(cx * ay.cells + cy, k1, k2);
            }
        }
        unsigned slot = next_part.fetch_add(1);
        parts[slot % parts.size()].spans = std::move(local.spans);
    });
    detail::CellMarks all;
    for (auto& p : parts) all.spans.insert(all.spans.end(), p.spans.begin(), p.spans.end());
    return all.count();
}

inline SlopeFit estimate_dimension_surface(const SampledField& field, double delta_min, double delta_max,
                                           int levels) {
    std::vector<double> deltas = delta_ladder(delta_min, delta_max, levels);
    std::vector<std::size_t> counts;
    counts.reserve(deltas.size());
    for (double d : deltas) counts.push_back(box_count_surface(field, d));
    return fit_loglog(deltas, counts);
}

}  // namespace hvrfif
