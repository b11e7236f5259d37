#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "hvrfif/errors.hpp"

namespace hvrfif {

struct DataPoint {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;  // hidden variable
};

/// Interpolation nodes (x_i, y_i) extended by hidden variables z_i.
/// Regions are I_i = [x_{i-1}, x_i], i = 1..n.
struct ExtendedDataSet {
    std::vector<DataPoint> nodes;

    int n() const { return static_cast<int>(nodes.size()) - 1; }
    double x0() const { return nodes.front().x; }
    double xn() const { return nodes.back().x; }
    double span() const { return xn() - x0(); }

    double max_abs_y() const {
        double m = 0.0;
        for (const auto& p : nodes) m = std::max(m, std::abs(p.y));
        return m;
    }
    double max_abs_z() const {
        double m = 0.0;
        for (const auto& p : nodes) m = std::max(m, std::abs(p.z));
        return m;
    }

    bool uniform(double rel_tol = 1e-9) const {
        double step = span() / n();
        for (int i = 0; i <= n(); ++i)
            if (std::abs(nodes[static_cast<std::size_t>(i)].x - (x0() + i * step)) > rel_tol * std::max(1.0, std::abs(span())))
                return false;
        return true;
    }

    /// Affine image of the abscissas onto [0,1]; ordinates untouched.
    ExtendedDataSet rescaled_to_unit() const {
        ExtendedDataSet out = *this;
        double lo = x0(), s = span();
        for (auto& p : out.nodes) p.x = (p.x - lo) / s;
        out.nodes.front().x = 0.0;
        out.nodes.back().x = 1.0;
        return out;
    }
};

inline ExtendedDataSet validate_dataset(const std::vector<DataPoint>& raw) {
    require(raw.size() >= 3, errc::too_few_points,
            "need at least 3 points, got " + std::to_string(raw.size()));
    for (std::size_t i = 0; i < raw.size(); ++i) {
        const auto& p = raw[i];
        if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(p.z))
            raise(errc::non_finite_value, "point " + std::to_string(i) + " has a non-finite coordinate");
        if (i > 0 && !(raw[i - 1].x < p.x))
            raise(errc::non_increasing_abscissa,
                  "x[" + std::to_string(i - 1) + "] >= x[" + std::to_string(i) + "]");
    }
    return ExtendedDataSet{raw};
}

/// One domain [x_{s}, x_{e}] given by node indices (never raw coordinates).
struct Domain {
    int s = 0;
    int e = 0;
};

/// Domains, the region-to-domain assignment gamma, and per-domain region
/// counts eta. Plain data; build_partition is the validating constructor.
struct PartitionScheme {
    int l = 0;
    std::vector<Domain> domains;
    std::vector<int> gamma;  // gamma[i-1] in {1..l} for region i
    std::vector<int> eta;    // eta[k-1] = e(k) - s(k)

    int domain_of_region(int i) const { return gamma[static_cast<std::size_t>(i - 1)]; }
    const Domain& domain(int k) const { return domains[static_cast<std::size_t>(k - 1)]; }

    /// True iff region I_s = [x_{s-1}, x_s] lies inside domain k.
    bool region_in_domain(int s, int k) const {
        const Domain& d = domain(k);
        return d.s <= s - 1 && s <= d.e;
    }
};

/// Checks all partition invariants; each violation maps to one error code.
/// l = 1 (classical, non-recurrent structure) is admitted only when
/// allow_classical is set.
inline PartitionScheme build_partition(const ExtendedDataSet& ds, const std::vector<Domain>& domains,
                                       const std::vector<int>& gamma, bool allow_classical = false) {
    const int n = ds.n();
    const int l = static_cast<int>(domains.size());
    const int l_min = allow_classical ? 1 : 2;
    if (l < l_min || l > n)
        raise(errc::domain_count_out_of_range,
              "domain count " + std::to_string(l) + " outside [" + std::to_string(l_min) + ", " +
                  std::to_string(n) + "]");
    for (int k = 1; k <= l; ++k) {
        const Domain& d = domains[static_cast<std::size_t>(k - 1)];
        if (d.s < 0 || d.e > n)
            raise(errc::domain_index_out_of_range,
                  "domain " + std::to_string(k) + " endpoints outside node range [0, " + std::to_string(n) + "]");
        if (d.e - d.s < 2)
            raise(errc::domain_too_narrow,
                  "domain " + std::to_string(k) + " spans " + std::to_string(d.e - d.s) +
                      " region(s); at least 2 required");
    }
    require(static_cast<int>(gamma.size()) == n, errc::gamma_size_mismatch,
            "gamma must assign every region: expected " + std::to_string(n) + " entries, got " +
                std::to_string(gamma.size()));
    std::vector<bool> used(static_cast<std::size_t>(l), false);
    for (int i = 1; i <= n; ++i) {
        int k = gamma[static_cast<std::size_t>(i - 1)];
        if (k < 1 || k > l)
            raise(errc::gamma_out_of_range,
                  "gamma[" + std::to_string(i) + "] = " + std::to_string(k) + " outside {1.." + std::to_string(l) + "}");
        used[static_cast<std::size_t>(k - 1)] = true;
    }
    for (int k = 1; k <= l; ++k)
        if (!used[static_cast<std::size_t>(k - 1)])
            raise(errc::unused_domain, "domain " + std::to_string(k) + " never appears in gamma");

    PartitionScheme p;
    p.l = l;
    p.domains = domains;
    p.gamma = gamma;
    p.eta.reserve(static_cast<std::size_t>(l));
    for (const Domain& d : domains) p.eta.push_back(d.e - d.s);
    return p;
}

}  // namespace hvrfif
