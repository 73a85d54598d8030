#pragma once

// Synthetic measurements: forward solves on a refined grid, restricted by
// injection to the reconstruction grid, plus seeded complex Gaussian noise.

#include <cmath>
#include <cstdint>
#include <random>

#include "mueit/admissible.hpp"
#include "mueit/errors.hpp"
#include "mueit/frequency.hpp"
#include "mueit/harness/phantom.hpp"
#include "mueit/objective.hpp"
#include "mueit/parallel.hpp"
#include "mueit/properbc.hpp"

namespace mueit {

struct SynthesisOptions {
    /// Data grid has refinement * (n - 1) + 1 nodes per side; 1 is the inverse crime.
    int refinement = 2;
    SolverOptions solver{};
};

/// Injection from a grid refined by `factor` onto the coarse grid.
inline ComplexField restrict_injection(const ComplexField& fine, const Grid& fine_grid,
                                       const Grid& coarse, int factor) {
    if (fine_grid.n() != factor * (coarse.n() - 1) + 1)
        throw ValidationError("restrict: grids are not nested by the given factor");
    ComplexField out(static_cast<Eigen::Index>(coarse.size()));
    for (int j = 0; j < coarse.n(); ++j)
        for (int i = 0; i < coarse.n(); ++i)
            out[static_cast<Eigen::Index>(coarse.index(i, j))] =
                fine[static_cast<Eigen::Index>(fine_grid.index(factor * i, factor * j))];
    return out;
}

inline Dataset synthesize_data(const PhantomSpec& phantom, const Grid& g,
                               const FrequencyGrid& freqs, const AdmissibleParams& params,
                               const SynthesisOptions& opts = {}) {
    if (opts.refinement < 1 || opts.refinement > 3)
        throw ValidationError("synthesize: refinement factor must be 1, 2 or 3");
    freqs.validate();
    const Grid fine(opts.refinement * (g.n() - 1) + 1, g.c0());
    const AdmittivityField truth = make_phantom(phantom, fine, params);
    const BoundaryData phi_fine = canonical_phi(fine);
    Dataset d;
    d.n = g.n();
    d.c0 = g.c0();
    d.freqs = freqs;
    d.phi = canonical_phi(g);
    d.potentials.resize(freqs.size());
    parallel_for(freqs.size(), [&](std::size_t j) {
        const EllipticOperator op(fine, truth, freqs.nodes[j], opts.solver);
        const PotentialPair u = solve_forward(op, phi_fine);
        for (std::size_t c = 0; c < 2; ++c) {
            auto& coarse = d.potentials[j][c];
            coarse = restrict_injection(u[c], fine, g, opts.refinement);
            // Exact boundary data on the ring.
            for (std::size_t b = 0; b < g.boundary_index().size(); ++b)
                coarse[static_cast<Eigen::Index>(g.boundary_index()[b])] =
                    d.phi.phi[c][static_cast<Eigen::Index>(b)];
        }
    });
    d.meta.phantom_id = phantom.id;
    d.meta.refinement = opts.refinement;
    d.meta.generation_n = fine.n();
    d.meta.inverse_crime = opts.refinement == 1;
    return d;
}

/// Adds complex Gaussian noise with standard deviation level * RMS(U) per frequency and
/// component, leaving the boundary ring untouched.
inline Dataset add_noise(const Dataset& in, double level, std::uint64_t seed) {
    if (!(level >= 0.0)) throw ValidationError("noise: level must be nonnegative");
    Dataset out = in;
    out.meta.noise_level = level;
    out.meta.seed = seed;
    if (level == 0.0) return out;
    const Grid g = in.grid();
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (auto& pair : out.potentials) {
        for (std::size_t c = 0; c < 2; ++c) {
            auto& u = pair[c];
            const double rms = std::sqrt(u.squaredNorm() / static_cast<double>(u.size()));
            const double sd = level * rms / std::sqrt(2.0);
            for (std::size_t k = 0; k < g.size(); ++k) {
                if (g.on_boundary(k)) continue;
                const double re = normal(rng), im = normal(rng);
                u[static_cast<Eigen::Index>(k)] += sd * cplx(re, im);
            }
        }
    }
    return out;
}

} // namespace mueit
