#pragma once

// The admissible set: background (sigma0, eps0) plus perturbations supported in
// the interior region, pointwise bounded and H1-capped, and the approximate
// projection onto it.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "mueit/errors.hpp"
#include "mueit/mesh.hpp"
#include "mueit/norms.hpp"
#include "mueit/pde.hpp"

namespace mueit {

struct AdmissibleParams {
    double sigma0 = 1.0;
    double eps0 = 1.0;
    double c1 = 0.1;
    double c2 = 10.0;
    double c4 = 10.0;
    /// Width of the cutoff ramp at the edge of the interior region, in grid spacings.
    double smooth_width = 2.0;
    double clamp_slack = 1e-3;
    int smoothing_passes = 2;
    /// Neighbour weight of one averaging pass; stable for values in [0, 0.25].
    double smoothing_weight = 0.005;

    void validate() const {
        auto fail = [](const std::string& m) { throw ValidationError("admissible: " + m); };
        if (!(c1 > 0.0)) fail("c1 must be positive");
        if (!(c1 < sigma0 && sigma0 < c2)) fail("need c1 < sigma0 < c2");
        if (!(c1 < eps0 && eps0 < c2)) fail("need c1 < eps0 < c2");
        if (!(c4 > 0.0)) fail("c4 must be positive");
        if (!(clamp_slack > 0.0 && c1 + clamp_slack < c2 - clamp_slack))
            fail("clamp_slack must be positive with c1 + slack < c2 - slack");
        if (!(smooth_width >= 0.0)) fail("smooth_width must be nonnegative");
        if (smoothing_passes < 0) fail("smoothing_passes must be nonnegative");
        if (!(smoothing_weight >= 0.0 && smoothing_weight <= 0.25))
            fail("smoothing_weight must lie in [0, 0.25]");
    }
};

enum class Constraint { sigma_bounds, eps_bounds, sigma_support, eps_support, sigma_h1, eps_h1 };

inline const char* to_string(Constraint c) {
    switch (c) {
    case Constraint::sigma_bounds: return "sigma_bounds";
    case Constraint::eps_bounds: return "eps_bounds";
    case Constraint::sigma_support: return "sigma_support";
    case Constraint::eps_support: return "eps_support";
    case Constraint::sigma_h1: return "sigma_h1";
    case Constraint::eps_h1: return "eps_h1";
    }
    return "unknown";
}

struct Violation {
    Constraint constraint;
    std::size_t node;  // worst offending node; unused for the H1 caps
    double magnitude;
};

struct MembershipReport {
    bool in_set = true;
    std::vector<Violation> violations;
};

inline constexpr double support_tolerance = 1e-12;

inline MembershipReport is_member(const AdmittivityField& a, const Grid& g,
                                  const AdmissibleParams& p) {
    detail::require_size(g, a.sigma, "is_member");
    detail::require_size(g, a.eps, "is_member");
    MembershipReport rep;
    const std::array<const RealField*, 2> fields{&a.sigma, &a.eps};
    const std::array<double, 2> background{p.sigma0, p.eps0};
    const std::array<Constraint, 3> sig{Constraint::sigma_bounds, Constraint::sigma_support,
                                        Constraint::sigma_h1};
    const std::array<Constraint, 3> eps{Constraint::eps_bounds, Constraint::eps_support,
                                        Constraint::eps_h1};
    for (std::size_t c = 0; c < 2; ++c) {
        const auto& f = *fields[c];
        const auto& ids = c == 0 ? sig : eps;
        Violation bound{ids[0], 0, 0.0}, support{ids[1], 0, 0.0};
        for (std::size_t k = 0; k < g.size(); ++k) {
            const double v = f[static_cast<Eigen::Index>(k)];
            double over = 0.0;
            if (!std::isfinite(v))
                over = std::numeric_limits<double>::infinity();
            else if (v <= p.c1)
                over = std::max(p.c1 - v, std::numeric_limits<double>::denorm_min());
            else if (v >= p.c2)
                over = std::max(v - p.c2, std::numeric_limits<double>::denorm_min());
            if (over > bound.magnitude) bound = {ids[0], k, over};
            if (!g.in_interior(k)) {
                const double dev = std::isfinite(v) ? std::abs(v - background[c])
                                                    : std::numeric_limits<double>::infinity();
                if (dev > support_tolerance && dev > support.magnitude) support = {ids[1], k, dev};
            }
        }
        if (bound.magnitude > 0.0) rep.violations.push_back(bound);
        if (support.magnitude > 0.0) rep.violations.push_back(support);
        if (f.allFinite()) {
            const double norm = h1_norm(g, RealField(f.array() - background[c]));
            if (norm > p.c4 * (1.0 + 1e-12)) rep.violations.push_back({ids[2], 0, norm - p.c4});
        }
    }
    rep.in_set = rep.violations.empty();
    return rep;
}

struct ProjectionReport {
    std::size_t nonfinite_replaced = 0;
    std::size_t clamped = 0;
    std::array<bool, 2> rescaled{false, false};
};

namespace detail {

// C2 ramp from 0 at the edge of the interior region to 1 at smooth_width spacings inside.
inline double cutoff(const Grid& g, std::size_t k, double width) {
    if (!g.in_interior(k)) return 0.0;
    if (width <= 0.0) return 1.0;
    const double s = (g.boundary_distance(k) - g.c0()) / (width * g.h());
    if (s >= 1.0) return 1.0;
    return s * s * s * (10.0 - 15.0 * s + 6.0 * s * s);
}

// One explicit diffusion step restricted to the interior region, zero outside.
inline void smooth_once(const Grid& g, RealField& eta, double weight) {
    const int n = g.n();
    RealField out = RealField::Zero(eta.size());
    for (int j = 1; j < n - 1; ++j) {
        for (int i = 1; i < n - 1; ++i) {
            const auto k = g.index(i, j);
            if (!g.in_interior(k)) continue;
            const auto e = static_cast<Eigen::Index>(k);
            auto nb = [&](Eigen::Index q) {
                return g.in_interior(static_cast<std::size_t>(q)) ? eta[q] : 0.0;
            };
            const double sum = nb(e - 1) + nb(e + 1) + nb(e - n) + nb(e + n);
            out[e] = eta[e] + weight * (sum - 4.0 * eta[e]);
        }
    }
    eta = std::move(out);
}

inline RealField project_perturbation(const Grid& g, RealField eta, double background,
                                      const AdmissibleParams& p, ProjectionReport& rep,
                                      std::size_t component) {
    for (std::size_t k = 0; k < g.size(); ++k)
        eta[static_cast<Eigen::Index>(k)] *= cutoff(g, k, p.smooth_width);
    for (int s = 0; s < p.smoothing_passes; ++s) smooth_once(g, eta, p.smoothing_weight);
    const double lo = p.c1 - background + p.clamp_slack;
    const double hi = p.c2 - background - p.clamp_slack;
    for (Eigen::Index k = 0; k < eta.size(); ++k) {
        const double v = std::clamp(eta[k], lo, hi);
        if (v != eta[k]) ++rep.clamped;
        eta[k] = v;
    }
    const double norm = h1_norm(g, eta);
    if (norm > p.c4) {
        eta *= p.c4 / norm;
        rep.rescaled[component] = true;
    }
    return eta;
}

} // namespace detail

/// Approximate projection onto the admissible set: cutoff, smoothing, clamp, H1 rescale.
/// Non-finite entries are reset to the background first and counted in `report`.
inline AdmittivityField project_T(const AdmittivityField& a, const Grid& g,
                                  const AdmissibleParams& p, ProjectionReport* report = nullptr) {
    detail::require_size(g, a.sigma, "project_T");
    detail::require_size(g, a.eps, "project_T");
    ProjectionReport rep;
    RealField ds = a.sigma.array() - p.sigma0;
    RealField de = a.eps.array() - p.eps0;
    for (Eigen::Index k = 0; k < ds.size(); ++k) {
        if (!std::isfinite(ds[k])) { ds[k] = 0.0; ++rep.nonfinite_replaced; }
        if (!std::isfinite(de[k])) { de[k] = 0.0; ++rep.nonfinite_replaced; }
    }
    AdmittivityField out;
    out.sigma = detail::project_perturbation(g, std::move(ds), p.sigma0, p, rep, 0).array() + p.sigma0;
    out.eps = detail::project_perturbation(g, std::move(de), p.eps0, p, rep, 1).array() + p.eps0;
    if (report) *report = rep;
    return out;
}

/// sqrt(h^2 sum over both components of |a - b|^2).
inline double field_distance(const Grid& g, const AdmittivityField& a, const AdmittivityField& b,
                             bool interior_only = false) {
    const double s = l2_norm(g, RealField(a.sigma - b.sigma), interior_only);
    const double e = l2_norm(g, RealField(a.eps - b.eps), interior_only);
    return std::hypot(s, e);
}

} // namespace mueit
