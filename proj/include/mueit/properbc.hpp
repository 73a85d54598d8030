#pragma once

// Boundary data and the frequency-integrated invertibility of grad u that
// makes the reconstruction well posed.

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "mueit/frequency.hpp"
#include "mueit/mesh.hpp"
#include "mueit/parallel.hpp"
#include "mueit/pde.hpp"

namespace mueit {

/// phi = (x, y) on the boundary ring.
inline BoundaryData canonical_phi(const Grid& g) {
    const ComplexField x = g.sample([](double x, double) { return cplx(x); });
    const ComplexField y = g.sample([](double, double y) { return cplx(y); });
    return {{g.trace(x), g.trace(y)}};
}

/// |det M| per node, M having rows grad u[0], grad u[1].
inline RealField det_gradient_map(const PotentialPair& u, const Grid& g) {
    const auto g0 = grad(u[0], g);
    const auto g1 = grad(u[1], g);
    RealField out(g0.x.size());
    for (Eigen::Index k = 0; k < out.size(); ++k)
        out[k] = std::abs(g0.x[k] * g1.y[k] - g0.y[k] * g1.x[k]);
    return out;
}

struct CoverageMap {
    /// Quadrature over frequency of |det grad u_omega| at each node.
    RealField m;
    /// Minimum of m over the interior region.
    double lambda = 0.0;
    std::vector<RealField> per_frequency;
};

inline CoverageMap coverage_lambda(const Grid& g, const AdmittivityField& a,
                                   const FrequencyGrid& freqs, const BoundaryData& phi) {
    freqs.validate();
    CoverageMap cov;
    cov.per_frequency.resize(freqs.size());
    parallel_for(freqs.size(), [&](std::size_t j) {
        cov.per_frequency[j] = det_gradient_map(solve_forward(g, a, freqs.nodes[j], phi), g);
    });
    cov.m = RealField::Zero(static_cast<Eigen::Index>(g.size()));
    for (std::size_t j = 0; j < freqs.size(); ++j) cov.m += freqs.weights[j] * cov.per_frequency[j];
    cov.lambda = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < g.size(); ++k)
        if (g.in_interior(k)) cov.lambda = std::min(cov.lambda, cov.m[static_cast<Eigen::Index>(k)]);
    return cov;
}

} // namespace mueit
