#pragma once

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "mueit/admissible.hpp"
#include "mueit/errors.hpp"
#include "mueit/mesh.hpp"
#include "mueit/objective.hpp"
#include "mueit/pde.hpp"

namespace mueit {

/// Compactly supported C2 bump (1 - r^2/R^2)^3, peak 1 at the centre.
inline double bump_profile(double dx, double dy, double radius) {
    const double s = (dx * dx + dy * dy) / (radius * radius);
    if (s >= 1.0) return 0.0;
    const double t = 1.0 - s;
    return t * t * t;
}

struct Inclusion {
    double cx = 0.5;
    double cy = 0.5;
    double radius = 0.1;
    double d_sigma = 0.0;
    double d_eps = 0.0;

    bool operator==(const Inclusion&) const = default;
};

struct PhantomSpec {
    std::string id = "constant";
    double sigma0 = 1.0;
    double eps0 = 1.0;
    std::vector<Inclusion> inclusions;

    bool operator==(const PhantomSpec&) const = default;

    /// Two bumps with opposite conductivity contrast.
    static PhantomSpec default_bump(double sigma0 = 1.0, double eps0 = 1.0) {
        return {"bump", sigma0, eps0,
                {{0.40, 0.42, 0.15, 0.5, 0.3}, {0.62, 0.60, 0.13, -0.3, 0.5}}};
    }
};

/// Nodal evaluation; rejects inclusions reaching outside the interior region or
/// leaving the admissible set.
inline AdmittivityField make_phantom(const PhantomSpec& spec, const Grid& g,
                                     const AdmissibleParams& params) {
    if (spec.sigma0 != params.sigma0 || spec.eps0 != params.eps0)
        throw ValidationError("phantom: background differs from the admissible background");
    for (const auto& inc : spec.inclusions) {
        if (!(inc.radius > 0.0)) throw ValidationError("phantom: inclusion radius must be positive");
        const double margin = std::min({inc.cx, 1.0 - inc.cx, inc.cy, 1.0 - inc.cy}) - inc.radius;
        if (!(margin > g.c0()))
            throw ValidationError("phantom: inclusion at (" + std::to_string(inc.cx) + ", " +
                                  std::to_string(inc.cy) + ") is not strictly inside the interior region");
    }
    AdmittivityField a = AdmittivityField::constant(g, spec.sigma0, spec.eps0);
    for (std::size_t k = 0; k < g.size(); ++k) {
        const auto e = static_cast<Eigen::Index>(k);
        for (const auto& inc : spec.inclusions) {
            const double p = bump_profile(g.x(k) - inc.cx, g.y(k) - inc.cy, inc.radius);
            a.sigma[e] += inc.d_sigma * p;
            a.eps[e] += inc.d_eps * p;
        }
    }
    const auto rep = is_member(a, g, params);
    if (!rep.in_set)
        throw ValidationError(std::string("phantom: outside the admissible set (") +
                              to_string(rep.violations.front().constraint) + ", magnitude " +
                              std::to_string(rep.violations.front().magnitude) + ")");
    return a;
}

/// Sum of a few bumps with random centres, radii and signed amplitudes, kept away from
/// the edge of the interior region. Resolution independent for a fixed rng state.
inline Direction random_smooth_direction(const Grid& g, std::mt19937_64& rng, int bumps = 3) {
    const double lo = g.c0() + 0.12, hi = 1.0 - g.c0() - 0.12;
    std::uniform_real_distribution<double> centre(lo, hi), radius(0.06, 0.11), amp(-1.0, 1.0);
    struct B { double cx, cy, r, ah, ak; };
    std::vector<B> list;
    for (int b = 0; b < bumps; ++b) {
        const double cx = centre(rng), cy = centre(rng), r = radius(rng);
        const double ah = amp(rng), ak = amp(rng);
        list.push_back({cx, cy, r, ah, ak});
    }
    const auto size = static_cast<Eigen::Index>(g.size());
    Direction d{RealField::Zero(size), RealField::Zero(size)};
    for (std::size_t k = 0; k < g.size(); ++k) {
        const auto e = static_cast<Eigen::Index>(k);
        for (const auto& b : list) {
            const double p = bump_profile(g.x(k) - b.cx, g.y(k) - b.cy, b.r);
            d.h[e] += b.ah * p;
            d.k[e] += b.ak * p;
        }
    }
    return d;
}

} // namespace mueit
