#pragma once

// Discrete inner products. The H1 pairing uses edge differences so that, for
// fields vanishing on the boundary ring, <f, g>_H1 = h^2 sum f * conj(g - lap g)
// holds exactly with the 5-point Laplacian.

#include <cmath>

#include "mueit/mesh.hpp"

namespace mueit {

/// h^2 sum f conj(g) + sum over edges (df) conj(dg).
template <typename VecA, typename VecB>
cplx h1_inner(const Grid& g, const VecA& f, const VecB& q) {
    detail::require_size(g, f, "h1_inner");
    detail::require_size(g, q, "h1_inner");
    cplx mass = 0.0, stiff = 0.0;
    for (Eigen::Index k = 0; k < f.size(); ++k) mass += cplx(f[k]) * std::conj(cplx(q[k]));
    for_each_face(g, [&](std::size_t a, std::size_t b) {
        const auto ia = static_cast<Eigen::Index>(a), ib = static_cast<Eigen::Index>(b);
        stiff += cplx(f[ib] - f[ia]) * std::conj(cplx(q[ib] - q[ia]));
    });
    return g.h() * g.h() * mass + stiff;
}

template <typename Vec>
double h1_norm_sq(const Grid& g, const Vec& f) {
    return std::real(h1_inner(g, f, f));
}

template <typename Vec>
double h1_norm(const Grid& g, const Vec& f) {
    return std::sqrt(h1_norm_sq(g, f));
}

/// h-weighted L2 norm, optionally restricted to the interior region.
template <typename Vec>
double l2_norm(const Grid& g, const Vec& f, bool interior_only = false) {
    detail::require_size(g, f, "l2_norm");
    double s = 0.0;
    for (Eigen::Index k = 0; k < f.size(); ++k)
        if (!interior_only || g.in_interior(static_cast<std::size_t>(k))) s += std::norm(cplx(f[k]));
    return g.h() * std::sqrt(s);
}

/// Proxy for the H2 norm: h^2 sum (|f|^2 + |grad f|^2 + |lap f|^2), edge gradients.
template <typename Vec>
double h2_proxy_norm(const Grid& g, const Vec& f) {
    const Vec lap = laplacian(f, g);
    double s = h1_norm_sq(g, f);
    for (Eigen::Index k = 0; k < f.size(); ++k) s += g.h() * g.h() * std::norm(cplx(lap[k]));
    return std::sqrt(s);
}

} // namespace mueit
