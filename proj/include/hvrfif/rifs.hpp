#pragma once

#include <array>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "hvrfif/errors.hpp"
#include "hvrfif/expr.hpp"
#include "hvrfif/matrix.hpp"
#include "hvrfif/model.hpp"

namespace hvrfif {

/// L_{i,k}: affine homeomorphism from the domain interval onto region i.
/// orientation +1 sends the domain's left endpoint to x_{i-1}, -1 swaps.
struct AffineMap1D {
    double a = 0.0;
    double b = 0.0;
    double src_lo = 0.0, src_hi = 0.0;
    double tgt_lo = 0.0, tgt_hi = 0.0;
    int orientation = +1;

    double apply(double x) const { return a * x + b; }
    double invert(double x) const { return (x - b) / a; }
};

inline std::vector<AffineMap1D> build_maps(const ExtendedDataSet& ds, const PartitionScheme& part,
                                           const std::vector<int>& orientations) {
    const int n = ds.n();
    require(static_cast<int>(orientations.size()) == n, errc::invalid_parameter,
            "need one orientation per region");
    std::vector<AffineMap1D> maps;
    maps.reserve(static_cast<std::size_t>(n));
    for (int i = 1; i <= n; ++i) {
        const Domain& d = part.domain(part.domain_of_region(i));
        double xs = ds.nodes[static_cast<std::size_t>(d.s)].x;
        double xe = ds.nodes[static_cast<std::size_t>(d.e)].x;
        double lo = ds.nodes[static_cast<std::size_t>(i - 1)].x;
        double hi = ds.nodes[static_cast<std::size_t>(i)].x;
        int om = orientations[static_cast<std::size_t>(i - 1)];
        require(om == 1 || om == -1, errc::invalid_parameter, "orientation must be +1 or -1");
        AffineMap1D m;
        m.src_lo = xs;
        m.src_hi = xe;
        m.tgt_lo = lo;
        m.tgt_hi = hi;
        m.orientation = om;
        m.a = om * (hi - lo) / (xe - xs);
        m.b = (om == 1) ? lo - m.a * xs : lo - m.a * xe;
        if (!(std::abs(m.a) < 1.0))
            raise(errc::non_contractive_map,
                  "region " + std::to_string(i) + ": |a| = " + std::to_string(std::abs(m.a)) + " >= 1");
        maps.push_back(m);
    }
    return maps;
}

/// Offset functions of Example-1 form: q = -s(L(x)) g(x) - s'(L(x)) g'(x) + h(L(x)),
/// with g, g' the domain chords of the (y, z) data and h, h~ the region chords.
/// Stored as slope/intercept pairs.
struct QPair {
    int region = 0;  // i (1-based)
    int domain = 0;  // gamma(i)
    double g_slope = 0.0, g_icpt = 0.0;    // y-chord over the domain
    double gq_slope = 0.0, gq_icpt = 0.0;  // z-chord over the domain
    double h_slope = 0.0, h_icpt = 0.0;    // y-chord over the region
    double ht_slope = 0.0, ht_icpt = 0.0;  // z-chord over the region

    double g(double x) const { return g_slope * x + g_icpt; }
    double g_hidden(double x) const { return gq_slope * x + gq_icpt; }
    double h(double x) const { return h_slope * x + h_icpt; }
    double h_hidden(double x) const { return ht_slope * x + ht_icpt; }
};

inline QPair build_qpair(const ExtendedDataSet& ds, const PartitionScheme& part, int region) {
    const Domain& d = part.domain(part.domain_of_region(region));
    const DataPoint& ps = ds.nodes[static_cast<std::size_t>(d.s)];
    const DataPoint& pe = ds.nodes[static_cast<std::size_t>(d.e)];
    const DataPoint& p0 = ds.nodes[static_cast<std::size_t>(region - 1)];
    const DataPoint& p1 = ds.nodes[static_cast<std::size_t>(region)];
    QPair q;
    q.region = region;
    q.domain = part.domain_of_region(region);
    q.g_slope = (pe.y - ps.y) / (pe.x - ps.x);
    q.g_icpt = ps.y - q.g_slope * ps.x;
    q.gq_slope = (pe.z - ps.z) / (pe.x - ps.x);
    q.gq_icpt = ps.z - q.gq_slope * ps.x;
    q.h_slope = (p1.y - p0.y) / (p1.x - p0.x);
    q.h_icpt = p0.y - q.h_slope * p0.x;
    q.ht_slope = (p1.z - p0.z) / (p1.x - p0.x);
    q.ht_icpt = p0.z - q.ht_slope * p0.x;
    return q;
}

/// The four function contractivity factors of one region with their profiles.
struct RegionFactors {
    Expr s, s_prime, s_tilde, s_tilde_prime;
    FactorProfile ps, psp, pst, pstp;
};

/// Per-region factor expressions for the whole system (index 0 = region 1).
struct FactorSet {
    std::vector<Expr> s, s_prime, s_tilde, s_tilde_prime;
};

/// Row-stochastic transition matrix. A positive entry p_st marks that map t
/// can follow: I_s lies inside the domain map t pulls from. Each positive
/// row entry is 1/a_s with a_s = |{t : I_s in domain(gamma(t))}|, which makes
/// rows sum to 1 even when several maps share one domain.
inline Matrix build_row_stochastic(const PartitionScheme& part) {
    const int n = static_cast<int>(part.gamma.size());
    Matrix m(n, n);
    for (int s = 1; s <= n; ++s) {
        int count = 0;
        for (int t = 1; t <= n; ++t)
            if (part.region_in_domain(s, part.domain_of_region(t))) ++count;
        if (count == 0)
            raise(errc::dead_region,
                  "region " + std::to_string(s) + " is contained in no domain used by gamma");
        for (int t = 1; t <= n; ++t)
            if (part.region_in_domain(s, part.domain_of_region(t)))
                m.at(s - 1, t - 1) = 1.0 / count;
    }
    return m;
}

/// Connection matrix: c_st = 1 iff p_ts > 0.
inline Matrix build_connection(const Matrix& m) {
    Matrix c(m.rows, m.cols);
    for (int i = 0; i < m.rows; ++i)
        for (int j = 0; j < m.cols; ++j) c.at(i, j) = m.at(j, i) > 0.0 ? 1.0 : 0.0;
    return c;
}

inline bool check_irreducible(const Matrix& c) { return strongly_connected(c); }

/// Assembled recurrent IFS for one curve system.
struct RecurrentIFS {
    ExtendedDataSet dataset;
    PartitionScheme partition;
    std::vector<int> orientations;
    std::vector<AffineMap1D> maps;       // one per region
    std::vector<RegionFactors> factors;  // one per region
    std::vector<QPair> qpairs;           // one per region
    Matrix M;
    Matrix C;
    double S_bar = 0.0;
    int profile_samples = kDefaultProfileSamples;

    int n() const { return dataset.n(); }

    /// F_{i,gamma(i)} evaluated at a domain point x with state (y, z).
    std::array<double, 2> apply_F(int region, double x, double y, double z) const {
        const AffineMap1D& L = maps[static_cast<std::size_t>(region - 1)];
        const RegionFactors& f = factors[static_cast<std::size_t>(region - 1)];
        const QPair& q = qpairs[static_cast<std::size_t>(region - 1)];
        double lx = L.apply(x);
        double sv = f.s.eval(lx), spv = f.s_prime.eval(lx);
        double stv = f.s_tilde.eval(lx), stpv = f.s_tilde_prime.eval(lx);
        double gy = q.g(x), gz = q.g_hidden(x);
        return {sv * (y - gy) + spv * (z - gz) + q.h(lx),
                stv * (y - gy) + stpv * (z - gz) + q.h_hidden(lx)};
    }

    /// W_i = (L_i, F_i) on a full state point.
    std::array<double, 3> apply_W(int region, double x, double y, double z) const {
        auto yz = apply_F(region, x, y, z);
        return {maps[static_cast<std::size_t>(region - 1)].apply(x), yz[0], yz[1]};
    }
};

inline constexpr double kContractionMargin = 1e-9;

/// Profiles every factor over its region, computes S_bar, and rejects
/// non-contractive systems. Factor expressions come in region order.
inline RecurrentIFS assemble_rifs(const ExtendedDataSet& ds, const PartitionScheme& part,
                                  const FactorSet& factor_exprs, const std::vector<int>& orientations,
                                  int profile_samples = kDefaultProfileSamples) {
    const int n = ds.n();
    require(static_cast<int>(factor_exprs.s.size()) == n &&
                static_cast<int>(factor_exprs.s_prime.size()) == n &&
                static_cast<int>(factor_exprs.s_tilde.size()) == n &&
                static_cast<int>(factor_exprs.s_tilde_prime.size()) == n,
            errc::invalid_parameter, "need four factor expressions per region");

    RecurrentIFS r;
    r.dataset = ds;
    r.partition = part;
    r.orientations = orientations;
    r.maps = build_maps(ds, part, orientations);
    r.profile_samples = profile_samples;

    double s_bar = 0.0;
    int worst_region = 0;
    for (int i = 1; i <= n; ++i) {
        double lo = ds.nodes[static_cast<std::size_t>(i - 1)].x;
        double hi = ds.nodes[static_cast<std::size_t>(i)].x;
        RegionFactors f;
        f.s = factor_exprs.s[static_cast<std::size_t>(i - 1)];
        f.s_prime = factor_exprs.s_prime[static_cast<std::size_t>(i - 1)];
        f.s_tilde = factor_exprs.s_tilde[static_cast<std::size_t>(i - 1)];
        f.s_tilde_prime = factor_exprs.s_tilde_prime[static_cast<std::size_t>(i - 1)];
        f.ps = profile_expr(f.s, lo, hi, profile_samples);
        f.psp = profile_expr(f.s_prime, lo, hi, profile_samples);
        f.pst = profile_expr(f.s_tilde, lo, hi, profile_samples);
        f.pstp = profile_expr(f.s_tilde_prime, lo, hi, profile_samples);
        for (const FactorProfile* p : {&f.ps, &f.psp, &f.pst, &f.pstp})
            if (!(p->sup_abs < 1.0))
                raise(errc::not_contractive,
                      "region " + std::to_string(i) + ": factor sup |.| = " + std::to_string(p->sup_abs) + " >= 1");
        double row = std::max(f.ps.sup_abs + f.pst.sup_abs, f.psp.sup_abs + f.pstp.sup_abs);
        if (row > s_bar) {
            s_bar = row;
            worst_region = i;
        }
        r.factors.push_back(std::move(f));
        r.qpairs.push_back(build_qpair(ds, part, i));
    }
    if (!(s_bar < 1.0 - kContractionMargin))
        raise(errc::not_contractive,
              "S_bar = " + std::to_string(s_bar) + " >= 1 (region " + std::to_string(worst_region) + ")");
    r.S_bar = s_bar;
    r.M = build_row_stochastic(part);
    r.C = build_connection(r.M);
    return r;
}

}  // namespace hvrfif
