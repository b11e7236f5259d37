#pragma once

// Test-only oracles, independent of the library's own computation paths:
// a dense eigensolver for spectral radii, brute-force reachability for
// irreducibility, dense sampling for factor extrema, and seeded random
// system generators shared by the property suites.

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "hvrfif/hvrfif.hpp"

namespace oracles {

/// max |lambda| via Eigen's dense (Schur-based) eigensolver.
inline double dense_spectral_radius(const hvrfif::Matrix& m) {
    Eigen::MatrixXd a(m.rows, m.cols);
    for (int i = 0; i < m.rows; ++i)
        for (int j = 0; j < m.cols; ++j) a(i, j) = m.at(i, j);
    Eigen::EigenSolver<Eigen::MatrixXd> es(a, false);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

/// Strong connectivity by boolean transitive closure (Floyd-Warshall).
inline bool closure_irreducible(const hvrfif::Matrix& m) {
    int n = m.rows;
    std::vector<std::vector<bool>> reach(n, std::vector<bool>(n, false));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) reach[i][j] = m.at(i, j) > 0.0;
    for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                if (reach[i][k] && reach[k][j]) reach[i][j] = true;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (i != j && !reach[i][j]) return false;
    return true;
}

/// Dense-sampling extrema of an expression (oracle for profile_expr).
struct DenseExtrema {
    double sup_abs = 0.0;
    double inf_abs = 1e300;
    double lipschitz = 0.0;
};

inline DenseExtrema dense_profile(const hvrfif::Expr& e, double lo, double hi, int samples = 1000000) {
    DenseExtrema d;
    double step = (hi - lo) / (samples - 1);
    double prev = 0.0;
    for (int i = 0; i < samples; ++i) {
        double x = (i == samples - 1) ? hi : lo + i * step;
        double v = e.eval(x);
        d.sup_abs = std::max(d.sup_abs, std::abs(v));
        d.inf_abs = std::min(d.inf_abs, std::abs(v));
        if (i > 0) d.lipschitz = std::max(d.lipschitz, std::abs(v - prev) / step);
        prev = v;
    }
    return d;
}

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
    return lo + (hi - lo) * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
}

inline int uniform_int(std::mt19937_64& rng, int lo, int hi) {
    return lo + static_cast<int>(rng() % static_cast<std::uint64_t>(hi - lo + 1));
}

/// Random factor expression string with sup|.| <= budget on any interval.
/// nonneg makes the factor pointwise nonnegative (sign conditions).
inline std::string random_factor(std::mt19937_64& rng, double budget, bool nonneg = false) {
    double t = uniform(rng, 0.3, 1.0);
    double u = budget * t;
    double v = budget * (1.0 - t);
    if (nonneg) {
        // u - v >= 0 keeps u + v*sin(.) nonnegative
        char buf[96];
        std::snprintf(buf, sizeof buf, "%.6f + %.6f*sin(%.3f*x)", u, v * 0.99, uniform(rng, 0.5, 6.0));
        return buf;
    }
    int form = uniform_int(rng, 0, 2);
    char buf[96];
    double sgn = rng() & 1 ? 1.0 : -1.0;
    switch (form) {
        case 0:
            std::snprintf(buf, sizeof buf, "%.6f", sgn * u);
            break;
        case 1:
            std::snprintf(buf, sizeof buf, "%.6f + %.6f*sin(%.3f*x)", sgn * u, v, uniform(rng, 0.5, 6.0));
            break;
        default:
            std::snprintf(buf, sizeof buf, "%.6f + %.6f*cos(%.3f*x)", sgn * u, v, uniform(rng, 0.5, 6.0));
            break;
    }
    return buf;
}

struct RandomCurveOptions {
    int n_min = 4;
    int n_max = 7;
    double pair_budget = 0.85;  // sup|s| + sup|s~| stays below this
    bool nonneg_factors = false;
    bool random_orientations = true;
};

struct RandomCurve {
    hvrfif::ExtendedDataSet ds;
    hvrfif::PartitionScheme part;
    hvrfif::FactorSet factors;
    std::vector<int> orientations;
    std::vector<std::string> factor_strings[4];
};

/// Uniform-grid random system with consecutive-chunk domains and a random
/// surjective gamma; construction guarantees no dead regions and S_bar < 1.
inline RandomCurve make_random_curve(std::mt19937_64& rng, const RandomCurveOptions& opt = {}) {
    RandomCurve rc;
    int n = uniform_int(rng, opt.n_min, opt.n_max);
    std::vector<hvrfif::DataPoint> pts;
    for (int i = 0; i <= n; ++i) {
        double y = uniform(rng, -1.0, 1.0);
        double z = opt.nonneg_factors ? y * 0.5 + 0.01 * i : uniform(rng, -1.0, 1.0);
        pts.push_back({static_cast<double>(i) / n, y, z});
    }
    rc.ds = hvrfif::validate_dataset(pts);

    // split node range 0..n into l chunks of >= 2 regions each
    int l_max = n / 2;
    int l = uniform_int(rng, std::min(2, l_max), l_max);
    std::vector<hvrfif::Domain> domains;
    std::vector<int> cuts{0};
    int remaining = n, pos = 0;
    for (int k = 0; k < l; ++k) {
        int min_here = 2;
        int max_here = remaining - 2 * (l - k - 1);
        int width = (k == l - 1) ? remaining : uniform_int(rng, min_here, max_here);
        pos += width;
        remaining -= width;
        domains.push_back({cuts.back(), pos});
        cuts.push_back(pos);
    }
    // first l entries cover every domain, rest random, then shuffle: gamma
    // stays surjective by construction
    std::vector<int> gamma(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) gamma[static_cast<std::size_t>(i)] = (i < l) ? i + 1 : uniform_int(rng, 1, l);
    for (int i = n - 1; i > 0; --i)
        std::swap(gamma[static_cast<std::size_t>(i)], gamma[rng() % static_cast<std::uint64_t>(i + 1)]);
    rc.part = hvrfif::build_partition(rc.ds, domains, gamma, false);

    for (int i = 0; i < n; ++i) {
        double a = oracles::uniform(rng, 0.05, opt.pair_budget - 0.1);
        double b = oracles::uniform(rng, 0.02, opt.pair_budget - a);
        double c = oracles::uniform(rng, 0.05, opt.pair_budget - 0.1);
        double d = oracles::uniform(rng, 0.02, opt.pair_budget - c);
        rc.factor_strings[0].push_back(random_factor(rng, a, opt.nonneg_factors));
        rc.factor_strings[2].push_back(random_factor(rng, b, opt.nonneg_factors));
        rc.factor_strings[1].push_back(random_factor(rng, c, opt.nonneg_factors));
        rc.factor_strings[3].push_back(random_factor(rng, d, opt.nonneg_factors));
    }
    for (int q = 0; q < 4; ++q) {
        auto& dst = q == 0   ? rc.factors.s
                    : q == 1 ? rc.factors.s_prime
                    : q == 2 ? rc.factors.s_tilde
                             : rc.factors.s_tilde_prime;
        for (const auto& str : rc.factor_strings[q]) dst.push_back(hvrfif::parse_expr(str));
    }
    rc.orientations.assign(static_cast<std::size_t>(n), 1);
    if (opt.random_orientations)
        for (auto& o : rc.orientations) o = (rng() & 1) ? 1 : -1;
    return rc;
}

inline hvrfif::RecurrentIFS assemble(const RandomCurve& rc) {
    return hvrfif::assemble_rifs(rc.ds, rc.part, rc.factors, rc.orientations);
}

struct RandomSurface {
    hvrfif::GridDataSet grid;
    hvrfif::SurfacePartition part;
    hvrfif::SurfaceFactorSet factors;
};

/// Random surface system: either one full-size domain (classical) on a 3x3
/// cell grid or four 2x2 corner domains on a 4x4 grid.
inline RandomSurface make_random_surface(std::mt19937_64& rng, bool classical, double pair_budget = 0.8) {
    RandomSurface rs;
    int n = classical ? 3 : 4;
    int m = n;
    std::vector<std::vector<double>> z(static_cast<std::size_t>(m + 1)), t(static_cast<std::size_t>(m + 1));
    for (int j = 0; j <= m; ++j)
        for (int i = 0; i <= n; ++i) {
            double zv = uniform(rng, -1.0, 1.0);
            z[static_cast<std::size_t>(j)].push_back(zv);
            t[static_cast<std::size_t>(j)].push_back(zv * 0.5 + 0.003 * (i + j));
        }
    rs.grid = hvrfif::validate_grid_dataset(0.0, 1.0, 0.0, 1.0, z, t);

    std::vector<hvrfif::SurfaceDomain> domains;
    if (classical) {
        domains.push_back({0, 3, 0, 3});
    } else {
        domains.push_back({0, 2, 0, 2});
        domains.push_back({2, 4, 0, 2});
        domains.push_back({0, 2, 2, 4});
        domains.push_back({2, 4, 2, 4});
    }
    int l = static_cast<int>(domains.size());
    int N = n * m;
    std::vector<int> gamma(static_cast<std::size_t>(N));
    for (int i = 0; i < N; ++i) gamma[static_cast<std::size_t>(i)] = (i < l) ? i + 1 : uniform_int(rng, 1, l);
    for (int i = N - 1; i > 0; --i)
        std::swap(gamma[static_cast<std::size_t>(i)], gamma[rng() % static_cast<std::uint64_t>(i + 1)]);
    rs.part = hvrfif::build_surface_partition(rs.grid, domains, gamma, classical);

    for (int kappa = 0; kappa < N; ++kappa) {
        double a = uniform(rng, 0.05, pair_budget - 0.1);
        double b = uniform(rng, 0.02, pair_budget - a);
        double c = uniform(rng, 0.05, pair_budget - 0.1);
        double d = uniform(rng, 0.02, pair_budget - c);
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.6f", a);
        rs.factors.s.push_back(hvrfif::parse_expr(buf, true));
        std::snprintf(buf, sizeof buf, "%.6f", c);
        rs.factors.s_prime.push_back(hvrfif::parse_expr(buf, true));
        std::snprintf(buf, sizeof buf, "%.6f + %.6f*sin(2*x)*cos(y)", b * 0.4, b * 0.4);
        rs.factors.s_tilde.push_back(hvrfif::parse_expr(buf, true));
        std::snprintf(buf, sizeof buf, "%.6f", d);
        rs.factors.s_tilde_prime.push_back(hvrfif::parse_expr(buf, true));
    }
    return rs;
}

/// Random irreducible nonnegative matrix: a full random permutation cycle
/// guarantees strong connectivity, plus random extra entries.
inline hvrfif::Matrix random_irreducible(std::mt19937_64& rng, int n, double density = 0.3) {
    hvrfif::Matrix m(n, n);
    std::vector<int> perm(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) perm[static_cast<std::size_t>(i)] = i;
    for (int i = n - 1; i > 0; --i) std::swap(perm[static_cast<std::size_t>(i)], perm[rng() % static_cast<std::uint64_t>(i + 1)]);
    for (int i = 0; i < n; ++i)
        m.at(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>((i + 1) % n)]) = uniform(rng, 0.1, 2.0);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (m.at(i, j) == 0.0 && uniform(rng, 0.0, 1.0) < density) m.at(i, j) = uniform(rng, 0.1, 2.0);
    return m;
}

}  // namespace oracles
