#pragma once

// Misfit functional  J = 1/2 sum_w weight_w ||u_w - U_w||_H1^2, its linearization,
// and the adjoint-state gradient.
//
// The gradient density is the exact derivative of the discrete J: with face
// coefficients (kappa_a + kappa_b)/2, a perturbation dkappa changes J by
//   Re sum_w weight_w sum_faces (dkappa_a + dkappa_b)/2 * (du)(dp),
// where u is the forward potential, p the adjoint state, and du, dp are edge
// differences, summed over both potentials. The nodal density divides each
// node's share by h^2, so  dJ(h, k) = h^2 sum_nodes (h g_sigma + k g_eps).

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mueit/errors.hpp"
#include "mueit/frequency.hpp"
#include "mueit/mesh.hpp"
#include "mueit/norms.hpp"
#include "mueit/parallel.hpp"
#include "mueit/pde.hpp"
#include "mueit/properbc.hpp"

namespace mueit {

struct DatasetMetadata {
    std::string phantom_id = "unnamed";
    double noise_level = 0.0;
    std::uint64_t seed = 0;
    int refinement = 1;
    int generation_n = 0;
    bool inverse_crime = false;
};

/// Internal potentials per frequency node, on the reconstruction grid.
struct Dataset {
    int n = 0;
    double c0 = 0.0;
    FrequencyGrid freqs;
    BoundaryData phi;
    std::vector<PotentialPair> potentials;
    DatasetMetadata meta;

    Grid grid() const { return Grid(n, c0); }

    void validate(const Grid& g) const {
        if (g.n() != n) throw ValidationError("dataset: grid size mismatch");
        freqs.validate();
        if (potentials.size() != freqs.size())
            throw ValidationError("dataset: need one potential pair per frequency node");
        for (const auto& pp : potentials)
            for (std::size_t c = 0; c < 2; ++c) detail::require_size(g, pp[c], "dataset");
    }

    std::size_t frequency_index(double omega) const {
        for (std::size_t j = 0; j < freqs.size(); ++j)
            if (freqs.nodes[j] == omega) return j;
        throw ValidationError("dataset: frequency " + std::to_string(omega) + " is not a node");
    }
};

struct GradientPair {
    RealField g_sigma;
    RealField g_eps;
};

/// Perturbation direction (h, k) for (sigma, eps).
struct Direction {
    RealField h;
    RealField k;
};

namespace detail {

// -div((h + i omega k) grad u) with the same face averaging as the assembly.
inline ComplexField linearized_source(const Grid& g, const ComplexField& u,
                                      const ComplexField& dkappa) {
    const int n = g.n();
    const double inv_h2 = 1.0 / (g.h() * g.h());
    ComplexField src = ComplexField::Zero(u.size());
    for (int j = 1; j < n - 1; ++j) {
        for (int i = 1; i < n - 1; ++i) {
            const auto k = static_cast<Eigen::Index>(g.index(i, j));
            cplx acc = 0.0;
            for (Eigen::Index nb : {k - 1, k + 1, k - n, k + n})
                acc += 0.5 * (dkappa[k] + dkappa[nb]) * (u[nb] - u[k]);
            src[k] = -acc * inv_h2;
        }
    }
    return src;
}

// Per-node share  sum_{faces at node} (du)(dp)/2  summed over both potentials.
inline ComplexField face_contraction(const Grid& g, const PotentialPair& u, const PotentialPair& p) {
    ComplexField s = ComplexField::Zero(u[0].size());
    for_each_face(g, [&](std::size_t a, std::size_t b) {
        const auto ia = static_cast<Eigen::Index>(a), ib = static_cast<Eigen::Index>(b);
        cplx t = 0.0;
        for (std::size_t c = 0; c < 2; ++c) t += (u[c][ib] - u[c][ia]) * (p[c][ib] - p[c][ia]);
        s[ia] += 0.5 * t;
        s[ib] += 0.5 * t;
    });
    return s;
}

inline void zero_outside_interior(const Grid& g, RealField& f) {
    for (std::size_t k = 0; k < g.size(); ++k)
        if (!g.in_interior(k)) f[static_cast<Eigen::Index>(k)] = 0.0;
}

} // namespace detail

/// Forward state of one admittivity against a dataset: one factorization,
/// potential and residual per frequency node.
class MisfitEvaluation {
public:
    MisfitEvaluation(const Grid& g, const AdmittivityField& a, const Dataset& data,
                     SolverOptions opts = {})
        : grid_(g), a_(a), data_(&data) {
        data.validate(g);
        const auto count = data.freqs.size();
        ops_.resize(count);
        u_.resize(count);
        residual_.resize(count);
        parallel_for(count, [&](std::size_t j) {
            ops_[j].emplace(g, a, data.freqs.nodes[j], opts);
            u_[j] = solve_forward(*ops_[j], data.phi);
            residual_[j] = u_[j] - data.potentials[j];
            for (std::size_t c = 0; c < 2; ++c)
                for (auto k : g.boundary_index()) residual_[j][c][static_cast<Eigen::Index>(k)] = 0.0;
        });
        double j_sum = 0.0;
        for (std::size_t j = 0; j < count; ++j) {
            double norm = 0.0;
            for (std::size_t c = 0; c < 2; ++c) norm += h1_norm_sq(g, residual_[j][c]);
            j_sum += data.freqs.weights[j] * norm;
        }
        misfit_ = 0.5 * j_sum;
    }

    const Grid& grid() const noexcept { return grid_; }
    const AdmittivityField& admittivity() const noexcept { return a_; }
    const Dataset& data() const noexcept { return *data_; }
    std::size_t frequency_count() const noexcept { return ops_.size(); }
    double omega(std::size_t j) const { return data_->freqs.nodes[j]; }
    const EllipticOperator& op(std::size_t j) const { return *ops_[j]; }
    const PotentialPair& potential(std::size_t j) const { return u_[j]; }
    const PotentialPair& residual(std::size_t j) const { return residual_[j]; }

    double misfit() const noexcept { return misfit_; }

    /// Linearized potentials v_w = DF[a; w](h, k) for every frequency node.
    std::vector<PotentialPair> linearized(const Direction& d) const {
        std::vector<PotentialPair> v(frequency_count());
        parallel_for(frequency_count(), [&](std::size_t j) { v[j] = linearize_at(j, d); });
        return v;
    }

    PotentialPair linearize_at(std::size_t j, const Direction& d) const {
        detail::require_size(grid_, d.h, "dF");
        detail::require_size(grid_, d.k, "dF");
        const ComplexField dkappa = d.h.cast<cplx>() + cplx(0.0, omega(j)) * d.k.cast<cplx>();
        const auto ring = static_cast<Eigen::Index>(grid_.boundary_index().size());
        PotentialPair v;
        for (std::size_t c = 0; c < 2; ++c)
            v[c] = ops_[j]->solve(ComplexField::Zero(ring),
                                  detail::linearized_source(grid_, u_[j][c], dkappa));
        return v;
    }

    /// Adjoint-state gradient of J at this admittivity.
    GradientPair gradient() const { return apply_adjoint(residual_); }

    /// sum_w weight_w DF[a; w]^* r_w as a nodal density (zero outside the interior region).
    GradientPair apply_adjoint(const std::vector<PotentialPair>& r) const {
        if (r.size() != frequency_count())
            throw ValidationError("gradient: need one residual pair per frequency node");
        std::vector<ComplexField> shares(frequency_count());
        parallel_for(frequency_count(), [&](std::size_t j) {
            const PotentialPair p = solve_adjoint(*ops_[j], r[j]);
            shares[j] = detail::face_contraction(grid_, u_[j], p);
        });
        const double inv_h2 = 1.0 / (grid_.h() * grid_.h());
        const auto n = static_cast<Eigen::Index>(grid_.size());
        GradientPair g{RealField::Zero(n), RealField::Zero(n)};
        for (std::size_t j = 0; j < frequency_count(); ++j) {
            const double w = data_->freqs.weights[j] * inv_h2;
            g.g_sigma += w * shares[j].real();
            g.g_eps -= w * omega(j) * shares[j].imag();
        }
        detail::zero_outside_interior(grid_, g.g_sigma);
        detail::zero_outside_interior(grid_, g.g_eps);
        return g;
    }

    /// Gauss-Newton product  sum_w weight_w DF^* DF (h, k).
    GradientPair normal_apply(const Direction& d) const { return apply_adjoint(linearized(d)); }

    /// Re sum_w weight_w <DF(h, k), F>_H1.
    double directional_derivative(const Direction& d) const {
        const auto v = linearized(d);
        double s = 0.0;
        for (std::size_t j = 0; j < frequency_count(); ++j)
            for (std::size_t c = 0; c < 2; ++c)
                s += data_->freqs.weights[j] * std::real(h1_inner(grid_, v[j][c], residual_[j][c]));
        return s;
    }

private:
    Grid grid_;
    AdmittivityField a_;
    const Dataset* data_;
    std::vector<std::optional<EllipticOperator>> ops_;
    std::vector<PotentialPair> u_;
    std::vector<PotentialPair> residual_;
    double misfit_ = 0.0;
};

/// h^2 sum over nodes of (h g_sigma + k g_eps).
inline double pair_with(const Grid& g, const Direction& d, const GradientPair& grad) {
    return g.h() * g.h() * (d.h.dot(grad.g_sigma) + d.k.dot(grad.g_eps));
}

inline PotentialPair residual_F(const Grid& g, const AdmittivityField& a, double omega,
                                const Dataset& data) {
    const auto j = data.frequency_index(omega);
    PotentialPair r = solve_forward(g, a, omega, data.phi) - data.potentials[j];
    for (std::size_t c = 0; c < 2; ++c)
        for (auto k : g.boundary_index()) {
            const auto e = static_cast<Eigen::Index>(k);
            if (std::abs(r[c][e]) > 1e-12)
                throw ValidationError("residual_F: data disagree with boundary data on the ring");
            r[c][e] = 0.0;
        }
    return r;
}

inline double misfit_J(const Grid& g, const AdmittivityField& a, const Dataset& data) {
    return MisfitEvaluation(g, a, data).misfit();
}

/// Linearized potentials at one frequency for a precomputed forward pair u.
inline PotentialPair dF(const Grid& g, const AdmittivityField& a, double omega, const Direction& d,
                        const PotentialPair& u) {
    const EllipticOperator op(g, a, omega);
    const ComplexField dkappa = d.h.cast<cplx>() + cplx(0.0, omega) * d.k.cast<cplx>();
    const auto ring = static_cast<Eigen::Index>(g.boundary_index().size());
    PotentialPair v;
    for (std::size_t c = 0; c < 2; ++c)
        v[c] = op.solve(ComplexField::Zero(ring), detail::linearized_source(g, u[c], dkappa));
    return v;
}

inline GradientPair gradient_DJ(const Grid& g, const AdmittivityField& a, const Dataset& data) {
    return MisfitEvaluation(g, a, data).gradient();
}

} // namespace mueit
