#pragma once

// Initial guess from the data alone. With A = grad u (columns are the gradients
// of the two potentials) the forward equation gives  A^T grad(gamma) = -div A
// for gamma = log(sigma + i omega eps). Taking the divergence of the
// least-squares solution yields a Poisson problem for gamma per frequency;
// exp(gamma) is then averaged over the band.

#include <cmath>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

#include "mueit/admissible.hpp"
#include "mueit/mesh.hpp"
#include "mueit/objective.hpp"
#include "mueit/parallel.hpp"
#include "mueit/pde.hpp"

namespace mueit {

using Matrix2c = Eigen::Matrix2cd;
using Vector2c = Eigen::Vector2cd;

/// Moore-Penrose pseudo-inverse; singular values below tol * (largest) count as zero.
inline Matrix2c pinv2x2(const Matrix2c& m, double tol) {
    const Eigen::JacobiSVD<Matrix2c> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const auto& s = svd.singularValues();
    Matrix2c out = Matrix2c::Zero();
    if (!(s[0] > 0.0)) return out;
    for (int i = 0; i < 2; ++i)
        if (s[i] > tol * s[0])
            out += (1.0 / s[i]) * svd.matrixV().col(i) * svd.matrixU().col(i).adjoint();
    return out;
}

struct InitGuessOptions {
    double pinv_tol = 1e-8;
    /// Average sigma = Re e^gamma and eps = Im e^gamma / omega per frequency instead of
    /// dividing the averaged imaginary part by the band midpoint.
    bool per_frequency = false;
};

namespace detail {

// -(conj(A) A^T)^+ conj(A) s at every node, A(d, c) = d u_c / dx_d and s_c = div grad u_c.
inline VectorField2C log_gradient(const PotentialPair& u, const Grid& g, double tol) {
    const auto g0 = grad(u[0], g);
    const auto g1 = grad(u[1], g);
    const ComplexField s0 = div(g0, g);
    const ComplexField s1 = div(g1, g);
    VectorField2C q{ComplexField(g0.x.size()), ComplexField(g0.x.size())};
    for (Eigen::Index k = 0; k < q.x.size(); ++k) {
        Matrix2c A;
        A << g0.x[k], g1.x[k],
             g0.y[k], g1.y[k];
        const Vector2c s(s0[k], s1[k]);
        const Matrix2c Abar = A.conjugate();
        const Vector2c v = -pinv2x2(Abar * A.transpose(), tol) * (Abar * s);
        q.x[k] = v[0];
        q.y[k] = v[1];
    }
    return q;
}

} // namespace detail

/// Right-hand side of the Poisson problem for gamma.
inline ComplexField gamma_rhs(const PotentialPair& u, const Grid& g, double tol = 1e-8) {
    return div(detail::log_gradient(u, g, tol), g);
}

struct GammaField {
    ComplexField gamma;
    /// Nodes whose imaginary part, reduced modulo pi, is not below pi/2.
    std::size_t branch_violations = 0;
};

/// Solves for gamma = log(sigma + i omega eps) and reduces Im gamma into [0, pi).
inline GammaField solve_gamma(const PotentialPair& u, const Grid& g, double omega, double sigma0,
                              double eps0, double tol = 1e-8) {
    const cplx edge = std::log(cplx(sigma0, omega * eps0));
    const auto ring = static_cast<Eigen::Index>(g.boundary_index().size());
    GammaField out;
    out.gamma = solve_poisson(g, gamma_rhs(u, g, tol), ComplexField::Constant(ring, edge));
    for (Eigen::Index k = 0; k < out.gamma.size(); ++k) {
        double im = std::fmod(out.gamma[k].imag(), std::numbers::pi);
        if (im < 0.0) im += std::numbers::pi;
        if (!(im < 0.5 * std::numbers::pi)) ++out.branch_violations;
        out.gamma[k] = cplx(out.gamma[k].real(), im);
    }
    return out;
}

struct InitialGuess {
    /// Projected onto the admissible set.
    AdmittivityField field;
    /// Before projection.
    AdmittivityField raw;
    std::vector<GammaField> gammas;
};

inline InitialGuess initial_guess_detailed(const Dataset& data, const Grid& g,
                                           const AdmissibleParams& params,
                                           const InitGuessOptions& opts = {}) {
    data.validate(g);
    const auto count = data.freqs.size();
    InitialGuess out;
    out.gammas.resize(count);
    parallel_for(count, [&](std::size_t j) {
        out.gammas[j] = solve_gamma(data.potentials[j], g, data.freqs.nodes[j], params.sigma0,
                                    params.eps0, opts.pinv_tol);
    });
    const auto size = static_cast<Eigen::Index>(g.size());
    ComplexField mean = ComplexField::Zero(size);
    RealField eps_pf = RealField::Zero(size);
    for (std::size_t j = 0; j < count; ++j) {
        const ComplexField e = out.gammas[j].gamma.array().exp();
        mean += data.freqs.weights[j] * e;
        eps_pf += (data.freqs.weights[j] / data.freqs.nodes[j]) * e.imag();
    }
    const double len = data.freqs.length();
    mean /= len;
    out.raw.sigma = mean.real();
    out.raw.eps = opts.per_frequency ? RealField(eps_pf / len)
                                     : RealField(mean.imag() / data.freqs.midpoint());
    out.field = project_T(out.raw, g, params);
    return out;
}

inline AdmittivityField initial_guess(const Dataset& data, const Grid& g,
                                      const AdmissibleParams& params,
                                      const InitGuessOptions& opts = {}) {
    return initial_guess_detailed(data, g, params, opts).field;
}

} // namespace mueit
