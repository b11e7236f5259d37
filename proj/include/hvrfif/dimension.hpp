#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "hvrfif/errors.hpp"
#include "hvrfif/evaluator.hpp"
#include "hvrfif/matrix.hpp"
#include "hvrfif/rifs.hpp"
#include "hvrfif/util.hpp"

namespace hvrfif {

struct SpectralResult {
    double rho = 0.0;
    std::vector<double> eigvec;  // strictly positive and L1-normalized when
                                 // the input is irreducible; empty otherwise
};

namespace detail {

/// Power iteration on A + I for nonnegative A with strongly connected
/// support. The shift makes the iteration matrix primitive, so Rayleigh
/// quotients converge even when A is periodic; the Collatz-Wielandt bracket
/// min_i (Bv)_i/v_i <= rho(B) <= max_i (Bv)_i/v_i certifies the result.
inline SpectralResult power_iterate_irreducible(const Matrix& a, double tol, int max_iter) {
    const int n = a.rows;
    if (n == 1) return {a.at(0, 0), {1.0}};
    std::vector<double> v(static_cast<std::size_t>(n), 1.0 / n), bv(static_cast<std::size_t>(n));
    double prev_rq = -1.0;
    for (int it = 0; it < max_iter; ++it) {
        for (int i = 0; i < n; ++i) {
            double s = v[static_cast<std::size_t>(i)];
            for (int j = 0; j < n; ++j) s += a.at(i, j) * v[static_cast<std::size_t>(j)];
            bv[static_cast<std::size_t>(i)] = s;
        }
        double num = 0.0, den = 0.0, cw_lo = 1e300, cw_hi = 0.0;
        for (int i = 0; i < n; ++i) {
            num += v[static_cast<std::size_t>(i)] * bv[static_cast<std::size_t>(i)];
            den += v[static_cast<std::size_t>(i)] * v[static_cast<std::size_t>(i)];
            double ratio = bv[static_cast<std::size_t>(i)] / v[static_cast<std::size_t>(i)];
            cw_lo = std::min(cw_lo, ratio);
            cw_hi = std::max(cw_hi, ratio);
        }
        double rq = num / den;
        double norm1 = 0.0;
        for (double x : bv) norm1 += x;
        for (auto& x : bv) x /= norm1;
        v.swap(bv);
        if (it > 0 && std::abs(rq - prev_rq) < tol * std::max(1.0, std::abs(rq)) &&
            cw_hi - cw_lo < tol * std::max(1.0, cw_hi)) {
            SpectralResult r;
            r.rho = 0.5 * (cw_lo + cw_hi) - 1.0;
            if (r.rho < 0.0 && r.rho > -1e-15) r.rho = 0.0;
            r.eigvec = v;
            return r;
        }
        prev_rq = rq;
    }
    raise(errc::no_convergence, "power iteration did not converge");
}

}  // namespace detail

/// Spectral radius of a nonnegative matrix. With require_irreducible the
/// support digraph must be strongly connected (else Reducible) and the
/// strictly positive Perron eigenvector is returned. Otherwise the radius is
/// evaluated over the Frobenius normal form (maximum over the strongly
/// connected components), which covers matrices whose zero factor infima
/// produce zero rows; the eigenvector is then left empty unless the whole
/// support is one component.
inline SpectralResult spectral_radius(const Matrix& a, double tol = 1e-13, int max_iter = 100000,
                                      bool require_irreducible = false) {
    require(a.square(), errc::invalid_parameter, "spectral radius needs a square matrix");
    const int n = a.rows;
    for (double v : a.a)
        require(v >= 0.0, errc::invalid_parameter, "matrix must be nonnegative");
    if (n == 1) return {a.at(0, 0), {1.0}};
    if (strongly_connected(a)) return detail::power_iterate_irreducible(a, tol, max_iter);
    if (require_irreducible) raise(errc::reducible, "support digraph is not strongly connected");

    std::vector<int> comp = strong_components(a);
    int ncomp = 0;
    for (int c : comp) ncomp = std::max(ncomp, c + 1);
    SpectralResult out;
    for (int c = 0; c < ncomp; ++c) {
        std::vector<int> idx;
        for (int i = 0; i < n; ++i)
            if (comp[static_cast<std::size_t>(i)] == c) idx.push_back(i);
        if (idx.size() == 1) {
            out.rho = std::max(out.rho, a.at(idx[0], idx[0]));
            continue;
        }
        Matrix sub(static_cast<int>(idx.size()), static_cast<int>(idx.size()));
        for (std::size_t i = 0; i < idx.size(); ++i)
            for (std::size_t j = 0; j < idx.size(); ++j)
                sub.at(static_cast<int>(i), static_cast<int>(j)) = a.at(idx[i], idx[j]);
        out.rho = std::max(out.rho, detail::power_iterate_irreducible(sub, tol, max_iter).rho);
    }
    return out;
}

/// Diagonal factor extrema in region order:
///   hi[k]  = max(sup|s_k|, sup|s'_k|),  lo[k]  = min(inf|s_k|, inf|s'_k|),
/// and the tilde analogues.
struct FactorExtrema {
    std::vector<double> lo, lo_tilde, hi, hi_tilde;
};

inline FactorExtrema factor_extrema(const RecurrentIFS& rifs) {
    FactorExtrema e;
    for (const RegionFactors& f : rifs.factors) {
        e.hi.push_back(std::max(f.ps.sup_abs, f.psp.sup_abs));
        e.lo.push_back(std::min(f.ps.inf_abs, f.psp.inf_abs));
        e.hi_tilde.push_back(std::max(f.pst.sup_abs, f.pstp.sup_abs));
        e.lo_tilde.push_back(std::min(f.pst.inf_abs, f.pstp.inf_abs));
    }
    return e;
}

struct HypothesisCheck {
    std::string name;
    bool pass = false;
    std::string evidence;
};

struct HypothesisReport {
    std::vector<HypothesisCheck> checks;
    bool all_pass = true;
    int triple[3] = {-1, -1, -1};  // node indices of the witnessing triple

    void add(std::string name, bool pass, std::string evidence) {
        all_pass = all_pass && pass;
        checks.push_back({std::move(name), pass, std::move(evidence)});
    }
};

namespace detail {

inline bool collinear(double x1, double y1, double x2, double y2, double x3, double y3, double scale) {
    double area = (x2 - x1) * (y3 - y1) - (x3 - x1) * (y2 - y1);
    return std::abs(area) <= 1e-12 * std::max(1.0, scale);
}

}  // namespace detail

/// Checks the standing hypotheses of the dimension bounds: uniform data grid,
/// irreducible M, factor sign conditions, and the non-collinear triple with
/// matched hidden-variable ordering. Report-only; dimension_bounds refuses on
/// any failure.
inline HypothesisReport validate_hypotheses(const RecurrentIFS& rifs, int sign_samples = 512) {
    HypothesisReport rep;
    const auto& ds = rifs.dataset;
    const int n = ds.n();

    bool uniform = ds.uniform();
    rep.add("uniform_grid", uniform, uniform ? "x_i = x_0 + i*|I|/n" : "abscissas deviate from a uniform grid");

    bool irred = check_irreducible(rifs.C);
    rep.add("irreducible", irred, irred ? "connection digraph strongly connected" : "connection digraph is reducible");

    bool signs = true;
    std::string sign_ev = "s*s' >= 0 and s~*s~' >= 0 on sampled regions";
    for (int i = 0; i < n && signs; ++i) {
        const RegionFactors& f = rifs.factors[static_cast<std::size_t>(i)];
        double lo = ds.nodes[static_cast<std::size_t>(i)].x;
        double hi = ds.nodes[static_cast<std::size_t>(i) + 1].x;
        for (int j = 0; j < sign_samples; ++j) {
            double x = lo + (hi - lo) * j / (sign_samples - 1);
            if (f.s.eval(x) * f.s_prime.eval(x) < -1e-12 ||
                f.s_tilde.eval(x) * f.s_tilde_prime.eval(x) < -1e-12) {
                signs = false;
                sign_ev = "sign condition fails in region " + std::to_string(i + 1) + " near x = " + format_double(x);
                break;
            }
        }
    }
    rep.add("factor_signs", signs, sign_ev);

    // one triple must satisfy all three geometric conditions at once
    double yscale = 0.0, zscale = 0.0;
    for (const auto& p : ds.nodes) {
        yscale = std::max(yscale, std::abs(p.y));
        zscale = std::max(zscale, std::abs(p.z));
    }
    bool found = false;
    for (int a = 0; a <= n - 2 && !found; ++a)
        for (int b = a + 1; b <= n - 1 && !found; ++b)
            for (int c = b + 1; c <= n && !found; ++c) {
                const auto& pa = ds.nodes[static_cast<std::size_t>(a)];
                const auto& pb = ds.nodes[static_cast<std::size_t>(b)];
                const auto& pc = ds.nodes[static_cast<std::size_t>(c)];
                if (detail::collinear(pa.x, pa.y, pb.x, pb.y, pc.x, pc.y, ds.span() * yscale)) continue;
                if (detail::collinear(pa.x, pa.z, pb.x, pb.z, pc.x, pc.z, ds.span() * zscale)) continue;
                if ((pa.y - pb.y) * (pa.z - pb.z) <= 0.0) continue;
                if ((pa.y - pc.y) * (pa.z - pc.z) <= 0.0) continue;
                if ((pb.y - pc.y) * (pb.z - pc.z) <= 0.0) continue;
                found = true;
                rep.triple[0] = a;
                rep.triple[1] = b;
                rep.triple[2] = c;
            }
    rep.add("non_collinear_triple", found,
            found ? "nodes (" + std::to_string(rep.triple[0]) + ", " + std::to_string(rep.triple[1]) + ", " +
                        std::to_string(rep.triple[2]) + ") witness both triples with matched hidden ordering"
                  : "no node triple is non-collinear in y and z with (y_i-y_j)(z_i-z_j) > 0 pairwise");
    return rep;
}

enum class DimensionCase { case_i, case_ii, inconclusive };

inline const char* to_string(DimensionCase c) {
    switch (c) {
        case DimensionCase::case_i: return "case_i";
        case DimensionCase::case_ii: return "case_ii";
        case DimensionCase::inconclusive: return "inconclusive";
    }
    return "?";
}

struct DimensionBounds {
    double rho_lower = 0.0;  // rho of (S_lo + S~_lo) C
    double rho_upper = 0.0;  // rho of (S_hi + S~_hi) C
    int eta_max = 0;
    int eta_min = 0;
    DimensionCase dim_case = DimensionCase::inconclusive;
    double dim_lower = 1.0;
    double dim_upper = 2.0;
    std::string note;
};

/// Spectral-radius dimension bounds:
///   case (i)  rho_lower > 1:  [1 + log_eta_max(rho_lower),
///                              1 + log_eta_max(rho_upper) + (1 - log_eta_max(eta_min))]
///   case (ii) rho_upper <= 1: [1, 2 - log_eta_max(eta_min)]
/// The log base is eta_max throughout; for eta_max = eta_min both cases
/// collapse to the two-sided form with a common base.
inline DimensionBounds dimension_bounds(const RecurrentIFS& rifs) {
    HypothesisReport hyp = validate_hypotheses(rifs);
    if (!hyp.all_pass) {
        std::string which;
        for (const auto& c : hyp.checks)
            if (!c.pass) which += (which.empty() ? "" : ", ") + c.name;
        raise(errc::hypothesis_violated, "failed checks: " + which);
    }

    FactorExtrema ex = factor_extrema(rifs);
    const int n = rifs.n();
    std::vector<double> dlo(static_cast<std::size_t>(n)), dhi(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        dlo[static_cast<std::size_t>(i)] = ex.lo[static_cast<std::size_t>(i)] + ex.lo_tilde[static_cast<std::size_t>(i)];
        dhi[static_cast<std::size_t>(i)] = ex.hi[static_cast<std::size_t>(i)] + ex.hi_tilde[static_cast<std::size_t>(i)];
    }
    DimensionBounds out;
    out.rho_lower = spectral_radius(diag_times(dlo, rifs.C)).rho;
    out.rho_upper = spectral_radius(diag_times(dhi, rifs.C)).rho;
    out.eta_max = *std::max_element(rifs.partition.eta.begin(), rifs.partition.eta.end());
    out.eta_min = *std::min_element(rifs.partition.eta.begin(), rifs.partition.eta.end());

    const double log_eta = std::log(static_cast<double>(out.eta_max));
    const double spread = 1.0 - std::log(static_cast<double>(out.eta_min)) / log_eta;
    if (out.rho_lower > 1.0) {
        out.dim_case = DimensionCase::case_i;
        out.dim_lower = 1.0 + std::log(out.rho_lower) / log_eta;
        out.dim_upper = 1.0 + std::log(out.rho_upper) / log_eta + spread;
        if (out.dim_upper > 2.0)
            out.note = "upper-bound formula exceeds the trivial planar bound 2; the graph dimension is still <= 2";
        if (out.eta_max != out.eta_min)
            out.note += std::string(out.note.empty() ? "" : "; ") +
                        "unequal region counts per domain: log base eta_max used throughout";
    } else if (out.rho_upper <= 1.0) {
        out.dim_case = DimensionCase::case_ii;
        out.dim_lower = 1.0;
        out.dim_upper = 2.0 - std::log(static_cast<double>(out.eta_min)) / log_eta;
    } else {
        out.dim_case = DimensionCase::inconclusive;
        out.dim_lower = 1.0;
        out.dim_upper = std::min(2.0, 1.0 + std::log(out.rho_upper) / log_eta + spread);
        out.note = "rho_lower <= 1 < rho_upper: the two-sided bounds do not cover this regime";
    }
    return out;
}

namespace detail {

/// Half-open mesh cells [j*delta, (j+1)*delta) anchored at lo; the closed
/// right endpoint folds into the last cell.
struct MeshAxis {
    double lo = 0.0;
    double delta = 1.0;
    int cells = 1;

    MeshAxis(double lo_, double hi, double delta_) : lo(lo_), delta(delta_) {
        cells = std::max(1, static_cast<int>(std::ceil((hi - lo_) / delta_ - 1e-9)));
    }
    int index(double v) const {
        return std::clamp(static_cast<int>((v - lo) / delta), 0, cells - 1);
    }
};

/// (column, row-interval) marks; counting merges them per column.
struct CellMarks {
    std::vector<std::uint64_t> spans;  // packed (col << 40) | (k0 << 20) | k1

    void mark(int col, int k0, int k1) {
        spans.push_back((static_cast<std::uint64_t>(col) << 40) |
                        (static_cast<std::uint64_t>(k0) << 20) | static_cast<std::uint64_t>(k1));
    }

    std::size_t count() {
        std::sort(spans.begin(), spans.end());
        std::size_t total = 0;
        std::size_t i = 0;
        while (i < spans.size()) {
            std::uint64_t col = spans[i] >> 40;
            int cur_hi = -1;
            while (i < spans.size() && (spans[i] >> 40) == col) {
                int k0 = static_cast<int>((spans[i] >> 20) & 0xFFFFF);
                int k1 = static_cast<int>(spans[i] & 0xFFFFF);
                if (k0 > cur_hi) {
                    total += static_cast<std::size_t>(k1 - k0 + 1);
                    cur_hi = k1;
                } else if (k1 > cur_hi) {
                    total += static_cast<std::size_t>(k1 - cur_hi);
                    cur_hi = k1;
                }
                ++i;
            }
        }
        return total;
    }
};

}  // namespace detail

/// Number of delta-mesh squares meeting the sampled graph of f1. Cells are
/// anchored at (x_0, min f1); the polyline segment between horizontally
/// adjacent samples is rasterized so vertical gaps cannot be undercounted.
inline std::size_t box_count(const SampledPair& samples, double delta) {
    require(delta > 0.0, errc::invalid_parameter, "delta must be positive");
    const auto& xs = samples.grid;
    const auto& f = samples.f1;
    const double h = (xs.back() - xs.front()) / (static_cast<double>(xs.size()) - 1.0);
    if (!(h <= delta / 4.0))
        raise(errc::delta_too_small,
              "grid spacing " + format_double(h) + " exceeds delta/4 = " + format_double(delta / 4.0));

    double flo = f[0], fhi = f[0];
    for (double v : f) {
        flo = std::min(flo, v);
        fhi = std::max(fhi, v);
    }
    detail::MeshAxis ax(xs.front(), xs.back(), delta);
    detail::MeshAxis ay(flo, fhi, delta);
    require(ax.cells < (1 << 24) && ay.cells < (1 << 20), errc::delta_too_small, "mesh too fine");

    const std::size_t nseg = xs.size() - 1;
    const unsigned workers = worker_count();
    std::vector<detail::CellMarks> parts(std::max<unsigned>(1, workers));
    std::atomic<unsigned> next_part{0};
    parallel_chunks(nseg, [&](std::size_t b, std::size_t e) {
        detail::CellMarks local;
        for (std::size_t j = b; j < e; ++j) {
            double xa = xs[j], xb = xs[j + 1];
            double ya = f[j], yb = f[j + 1];
            int c1 = ax.index(xa), c2 = ax.index(xb);
            for (int c = std::min(c1, c2); c <= std::max(c1, c2); ++c) {
                double clo = std::max(xa, ax.lo + c * delta);
                double chi = std::min(xb, ax.lo + (c + 1) * delta);
                if (chi < clo) continue;
                double y1, y2;
                if (xb > xa) {
                    y1 = ya + (yb - ya) * (clo - xa) / (xb - xa);
                    y2 = ya + (yb - ya) * (chi - xa) / (xb - xa);
                } else {
                    y1 = ya;
                    y2 = yb;
                }
                int k1 = ay.index(std::min(y1, y2));
                int k2 = ay.index(std::max(y1, y2));
                local.mark(c, k1, k2);
            }
        }
        unsigned slot = next_part.fetch_add(1);
        parts[slot % parts.size()].spans = std::move(local.spans);
    });
    detail::CellMarks all;
    for (auto& p : parts)
        all.spans.insert(all.spans.end(), p.spans.begin(), p.spans.end());
    return all.count();
}

/// Point-cloud variant (chaos-game output): cells containing a sample only.
inline std::size_t box_count_points(const std::vector<std::array<double, 3>>& pts, double delta) {
    require(delta > 0.0, errc::invalid_parameter, "delta must be positive");
    require(!pts.empty(), errc::invalid_parameter, "empty point cloud");
    double xlo = pts[0][0], xhi = pts[0][0], ylo = pts[0][1], yhi = pts[0][1];
    for (const auto& p : pts) {
        xlo = std::min(xlo, p[0]);
        xhi = std::max(xhi, p[0]);
        ylo = std::min(ylo, p[1]);
        yhi = std::max(yhi, p[1]);
    }
    detail::MeshAxis ax(xlo, xhi, delta);
    detail::MeshAxis ay(ylo, yhi, delta);
    detail::CellMarks marks;
    for (const auto& p : pts) {
        int k = ay.index(p[1]);
        marks.mark(ax.index(p[0]), k, k);
    }
    return marks.count();
}

struct SlopeFit {
    double slope = 0.0;
    double r2 = 1.0;
    std::vector<double> deltas;
    std::vector<std::size_t> counts;
};

/// Least-squares slope of log N against -log delta.
inline SlopeFit fit_loglog(const std::vector<double>& deltas, const std::vector<std::size_t>& counts) {
    require(deltas.size() == counts.size() && deltas.size() >= 2, errc::invalid_parameter,
            "need at least two (delta, count) pairs");
    SlopeFit fit;
    fit.deltas = deltas;
    fit.counts = counts;
    const std::size_t m = deltas.size();
    double su = 0.0, sv = 0.0;
    std::vector<double> u(m), v(m);
    for (std::size_t i = 0; i < m; ++i) {
        u[i] = -std::log(deltas[i]);
        v[i] = std::log(static_cast<double>(counts[i]));
        su += u[i];
        sv += v[i];
    }
    double mu = su / m, mv = sv / m;
    double cuv = 0.0, cuu = 0.0, cvv = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        cuv += (u[i] - mu) * (v[i] - mv);
        cuu += (u[i] - mu) * (u[i] - mu);
        cvv += (v[i] - mv) * (v[i] - mv);
    }
    fit.slope = cuv / cuu;
    fit.r2 = cvv > 0.0 ? (cuv * cuv) / (cuu * cvv) : 1.0;
    return fit;
}

/// Geometric delta ladder from delta_max down to delta_min (dyadic when the
/// endpoints are powers of two and levels matches the exponent span).
inline std::vector<double> delta_ladder(double delta_min, double delta_max, int levels) {
    require(levels >= 4, errc::invalid_parameter, "need at least 4 ladder levels");
    require(0.0 < delta_min && delta_min < delta_max, errc::invalid_parameter,
            "need 0 < delta_min < delta_max");
    std::vector<double> out;
    double ratio = std::pow(delta_min / delta_max, 1.0 / (levels - 1));
    for (int i = 0; i < levels; ++i) out.push_back(delta_max * std::pow(ratio, i));
    out.back() = delta_min;
    return out;
}

inline SlopeFit estimate_dimension(const SampledPair& samples, double delta_min, double delta_max,
                                   int levels) {
    std::vector<double> deltas = delta_ladder(delta_min, delta_max, levels);
    std::vector<std::size_t> counts;
    counts.reserve(deltas.size());
    for (double d : deltas) counts.push_back(box_count(samples, d));
    return fit_loglog(deltas, counts);
}

}  // namespace hvrfif
