#pragma once

// Numerical checks of the gradient and of the lower bound on the linearized map.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include "mueit/harness/phantom.hpp"
#include "mueit/norms.hpp"
#include "mueit/objective.hpp"

namespace mueit {

struct GradientProbe {
    /// h^2 sum (h g_sigma + k g_eps) from the adjoint-state density.
    double adjoint = 0.0;
    /// Re sum_w weight_w <DF(h, k), F>_H1.
    double pairing = 0.0;
    /// (J(a + t d) - J(a - t d)) / (2 t).
    double finite_difference = 0.0;

    double fd_relative_error() const { return std::abs(adjoint - finite_difference) / std::abs(finite_difference); }
    double pairing_relative_error() const { return std::abs(adjoint - pairing) / std::abs(pairing); }
};

inline AdmittivityField shifted(const AdmittivityField& a, const Direction& d, double t) {
    return {a.sigma + t * d.h, a.eps + t * d.k};
}

inline std::vector<GradientProbe> check_gradient(const Grid& g, const AdmittivityField& a,
                                                 const Dataset& data,
                                                 const std::vector<Direction>& directions,
                                                 double t = 1e-5) {
    const MisfitEvaluation eval(g, a, data);
    const GradientPair grad = eval.gradient();
    std::vector<GradientProbe> out;
    for (const auto& d : directions) {
        GradientProbe p;
        p.adjoint = pair_with(g, d, grad);
        p.pairing = eval.directional_derivative(d);
        p.finite_difference =
            (misfit_J(g, shifted(a, d, t), data) - misfit_J(g, shifted(a, d, -t), data)) / (2.0 * t);
        out.push_back(p);
    }
    return out;
}

inline std::vector<Direction> random_directions(const Grid& g, int count, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<Direction> out;
    for (int i = 0; i < count; ++i) out.push_back(random_smooth_direction(g, rng));
    return out;
}

struct CoercivityEstimate {
    /// min over probes of sum_w weight_w ||DF(h, k)||_H1^2 for unit H2-proxy (h, k).
    double c_emp = std::numeric_limits<double>::infinity();
    std::vector<double> values;
};

inline double direction_h2_norm(const Grid& g, const Direction& d) {
    return std::hypot(h2_proxy_norm(g, d.h), h2_proxy_norm(g, d.k));
}

inline CoercivityEstimate empirical_coercivity(const Grid& g, const AdmittivityField& a,
                                               const Dataset& data,
                                               const std::vector<Direction>& directions) {
    const MisfitEvaluation eval(g, a, data);
    CoercivityEstimate out;
    for (auto d : directions) {
        const double len = direction_h2_norm(g, d);
        d.h /= len;
        d.k /= len;
        const auto v = eval.linearized(d);
        double s = 0.0;
        for (std::size_t j = 0; j < v.size(); ++j)
            s += data.freqs.weights[j] * (h1_norm_sq(g, v[j][0]) + h1_norm_sq(g, v[j][1]));
        out.values.push_back(s);
        out.c_emp = std::min(out.c_emp, s);
    }
    return out;
}

} // namespace mueit
