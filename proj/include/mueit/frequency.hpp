#pragma once

#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "mueit/errors.hpp"

namespace mueit {

/// Quadrature nodes and weights on the frequency band [omega_lo, omega_hi].
struct FrequencyGrid {
    double omega_lo = 1.0;
    double omega_hi = 2.0;
    std::vector<double> nodes;
    std::vector<double> weights;

    /// Trapezoid rule on `count` equispaced nodes; a single node sits at the midpoint
    /// and carries the whole band length.
    static FrequencyGrid trapezoid(double lo, double hi, int count) {
        if (!(lo < hi)) throw ValidationError("frequencies: need omega_lo < omega_hi");
        if (count < 1) throw ValidationError("frequencies: need at least one node");
        FrequencyGrid f{lo, hi, {}, {}};
        if (count == 1) {
            f.nodes = {0.5 * (lo + hi)};
            f.weights = {hi - lo};
        } else {
            const double step = (hi - lo) / (count - 1);
            for (int j = 0; j < count; ++j) {
                f.nodes.push_back(j == count - 1 ? hi : lo + j * step);
                f.weights.push_back(j == 0 || j == count - 1 ? 0.5 * step : step);
            }
        }
        return f;
    }

    std::size_t size() const noexcept { return nodes.size(); }
    double midpoint() const noexcept { return 0.5 * (omega_lo + omega_hi); }
    double length() const noexcept { return omega_hi - omega_lo; }

    void validate() const {
        if (!(omega_lo < omega_hi)) throw ValidationError("frequencies: need omega_lo < omega_hi");
        if (nodes.empty() || nodes.size() != weights.size())
            throw ValidationError("frequencies: nodes and weights must be nonempty and equal length");
        for (std::size_t j = 0; j < nodes.size(); ++j) {
            if (nodes[j] < omega_lo || nodes[j] > omega_hi)
                throw ValidationError("frequencies: node outside the band");
            if (j > 0 && !(nodes[j] > nodes[j - 1]))
                throw ValidationError("frequencies: nodes must be strictly increasing");
            if (!(weights[j] > 0.0)) throw ValidationError("frequencies: weights must be positive");
        }
        const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
        if (std::abs(total - length()) > 1e-12 * length())
            throw ValidationError("frequencies: weights must sum to the band length");
    }
};

} // namespace mueit
