#pragma once

// Complex divergence-form elliptic problems  div((sigma + i omega eps) grad u) = f
// with Dirichlet data on the unit square.

#include <array>
#include <cmath>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include "mueit/errors.hpp"
#include "mueit/mesh.hpp"

namespace mueit {

/// Nodal conductivity and permittivity.
struct AdmittivityField {
    RealField sigma;
    RealField eps;

    static AdmittivityField constant(const Grid& g, double sigma0, double eps0) {
        const auto n = static_cast<Eigen::Index>(g.size());
        return {RealField::Constant(n, sigma0), RealField::Constant(n, eps0)};
    }

    ComplexField admittivity(double omega) const {
        return sigma.cast<cplx>() + cplx(0.0, omega) * eps.cast<cplx>();
    }
};

/// Two Dirichlet traces, each indexed like Grid::boundary_index().
struct BoundaryData {
    std::array<ComplexField, 2> phi;
};

/// Two complex potentials, one per boundary datum.
struct PotentialPair {
    std::array<ComplexField, 2> u;

    ComplexField& operator[](std::size_t c) { return u[c]; }
    const ComplexField& operator[](std::size_t c) const { return u[c]; }

    static PotentialPair zero(const Grid& g) {
        const auto n = static_cast<Eigen::Index>(g.size());
        return {{ComplexField::Zero(n), ComplexField::Zero(n)}};
    }
};

inline PotentialPair operator-(const PotentialPair& a, const PotentialPair& b) {
    return {{a[0] - b[0], a[1] - b[1]}};
}

struct SolverOptions {
    /// Largest n solved by sparse LU; above it BiCGSTAB + ILUT is used.
    int direct_max_n = 129;
    double rtol = 1e-10;
    int max_iterations = 20000;
};

using SparseMatrixC = Eigen::SparseMatrix<cplx, Eigen::ColMajor, int>;

/// Assembled 5-point operator with identity rows on the boundary ring and its
/// factorization. Immutable once built; solves may run concurrently.
class EllipticOperator {
public:
    EllipticOperator(const Grid& g, const AdmittivityField& a, double omega,
                     SolverOptions opts = {})
        : grid_(g), omega_(omega), opts_(opts) {
        validate(a);
        assemble(a.admittivity(omega));
        factorize();
    }

    /// Operator for the plain Laplacian (coefficient 1, omega = 0).
    static EllipticOperator laplace(const Grid& g, SolverOptions opts = {}) {
        return EllipticOperator(g, AdmittivityField::constant(g, 1.0, 1.0), 0.0, opts);
    }

    const Grid& grid() const noexcept { return grid_; }
    double omega() const noexcept { return omega_; }
    const SparseMatrixC& matrix() const noexcept { return matrix_; }

    /// Solves with boundary values `bc` (boundary_index order) and interior source `src`.
    ComplexField solve(const ComplexField& bc, const ComplexField& src) const {
        detail::require_size(grid_, src, "solve_dirichlet");
        const auto& ring = grid_.boundary_index();
        if (static_cast<std::size_t>(bc.size()) != ring.size())
            throw ValidationError("solve_dirichlet: boundary trace has " +
                                  std::to_string(bc.size()) + " values, expected " +
                                  std::to_string(ring.size()));
        ComplexField rhs = src;
        for (std::size_t b = 0; b < ring.size(); ++b)
            rhs[static_cast<Eigen::Index>(ring[b])] = bc[static_cast<Eigen::Index>(b)];
        ComplexField x = solve_system(rhs);
        for (std::size_t b = 0; b < ring.size(); ++b)
            x[static_cast<Eigen::Index>(ring[b])] = bc[static_cast<Eigen::Index>(b)];
        return x;
    }

    /// Solves matrix() * x = rhs for a full right-hand side (boundary rows included).
    ComplexField solve_system(const ComplexField& rhs) const {
        const double bnorm = rhs.norm();
        if (bnorm == 0.0) return ComplexField::Zero(rhs.size());
        if (!rhs.allFinite())
            throw SolverError("solve_dirichlet: non-finite right-hand side",
                              std::numeric_limits<double>::quiet_NaN());
        ComplexField x;
        if (lu_) {
            x = lu_->solve(rhs);
            if (lu_->info() != Eigen::Success)
                throw SolverError("solve_dirichlet: sparse LU solve failed",
                                  std::numeric_limits<double>::quiet_NaN());
        } else {
            x = krylov_->solve(rhs);
        }
        const double limit = lu_ ? 1e-10 : opts_.rtol * 10.0;
        ComplexField r = rhs - matrix_ * x;
        double res = r.norm() / bnorm;
        // One refinement pass always, up to three while the residual is above the limit.
        for (int pass = 0; lu_ && pass < 3 && (pass == 0 || !(res <= limit)); ++pass) {
            x += lu_->solve(r);
            r = rhs - matrix_ * x;
            res = r.norm() / bnorm;
        }
        if (!(res <= limit))
            throw SolverError("solve_dirichlet: residual above tolerance", res);
        return x;
    }

private:
    void validate(const AdmittivityField& a) const {
        detail::require_size(grid_, a.sigma, "assemble");
        detail::require_size(grid_, a.eps, "assemble");
        if (!a.sigma.allFinite() || !a.eps.allFinite())
            throw ValidationError("assemble: non-finite admittivity");
        if (a.sigma.minCoeff() <= 0.0)
            throw ValidationError("assemble: conductivity must be positive everywhere");
        if (a.eps.minCoeff() <= 0.0)
            throw ValidationError("assemble: permittivity must be positive everywhere");
    }

    void assemble(const ComplexField& kappa) {
        const auto& g = grid_;
        const int n = g.n();
        const double inv_h2 = 1.0 / (g.h() * g.h());
        const auto size = static_cast<int>(g.size());
        std::vector<Eigen::Triplet<cplx, int>> trip;
        trip.reserve(static_cast<std::size_t>(size) * 5);
        for (int j = 0; j < n; ++j) {
            for (int i = 0; i < n; ++i) {
                const auto k = static_cast<int>(g.index(i, j));
                if (g.on_boundary(static_cast<std::size_t>(k))) {
                    trip.emplace_back(k, k, cplx(1.0));
                    continue;
                }
                cplx diag = 0.0;
                for (int nb : {k - 1, k + 1, k - n, k + n}) {
                    const cplx face = 0.5 * (kappa[k] + kappa[nb]) * inv_h2;
                    trip.emplace_back(k, nb, face);
                    diag -= face;
                }
                trip.emplace_back(k, k, diag);
            }
        }
        matrix_.resize(size, size);
        matrix_.setFromTriplets(trip.begin(), trip.end());
        matrix_.makeCompressed();
    }

    void factorize() {
        if (grid_.n() <= opts_.direct_max_n) {
            auto lu = std::make_shared<Eigen::SparseLU<SparseMatrixC, Eigen::COLAMDOrdering<int>>>();
            lu->analyzePattern(matrix_);
            lu->factorize(matrix_);
            if (lu->info() != Eigen::Success)
                throw SolverError("assemble: sparse LU factorization failed: " + lu->lastErrorMessage(),
                                  std::numeric_limits<double>::quiet_NaN());
            lu_ = std::move(lu);
        } else {
            auto it = std::make_shared<Eigen::BiCGSTAB<SparseMatrixC, Eigen::IncompleteLUT<cplx>>>();
            it->setTolerance(opts_.rtol);
            it->setMaxIterations(opts_.max_iterations);
            it->compute(matrix_);
            if (it->info() != Eigen::Success)
                throw SolverError("assemble: incomplete LU preconditioner failed",
                                  std::numeric_limits<double>::quiet_NaN());
            krylov_ = std::move(it);
        }
    }

    Grid grid_;
    double omega_;
    SolverOptions opts_;
    SparseMatrixC matrix_;
    std::shared_ptr<Eigen::SparseLU<SparseMatrixC, Eigen::COLAMDOrdering<int>>> lu_;
    std::shared_ptr<Eigen::BiCGSTAB<SparseMatrixC, Eigen::IncompleteLUT<cplx>>> krylov_;
};

inline EllipticOperator assemble(const Grid& g, const AdmittivityField& a, double omega,
                                 SolverOptions opts = {}) {
    return EllipticOperator(g, a, omega, opts);
}

inline ComplexField solve_dirichlet(const EllipticOperator& op, const ComplexField& bc,
                                    const ComplexField& src) {
    return op.solve(bc, src);
}

/// Both potentials for boundary data phi, sharing the factorization in `op`.
inline PotentialPair solve_forward(const EllipticOperator& op, const BoundaryData& phi) {
    const auto zero = ComplexField::Zero(static_cast<Eigen::Index>(op.grid().size()));
    return {{op.solve(phi.phi[0], zero), op.solve(phi.phi[1], zero)}};
}

inline PotentialPair solve_forward(const Grid& g, const AdmittivityField& a, double omega,
                                   const BoundaryData& phi) {
    return solve_forward(EllipticOperator(g, a, omega), phi);
}

/// Right-hand side  conj(F) - lap(conj(F))  of the adjoint problem for one component.
inline ComplexField adjoint_rhs(const ComplexField& residual, const Grid& g) {
    const ComplexField fc = residual.conjugate();
    ComplexField rhs = fc - laplacian(fc, g);
    for (auto k : g.boundary_index()) rhs[static_cast<Eigen::Index>(k)] = 0.0;
    return rhs;
}

/// Adjoint states for the residual pair F (which must vanish on the boundary ring).
inline PotentialPair solve_adjoint(const EllipticOperator& op, const PotentialPair& residual) {
    const auto& g = op.grid();
    const auto ring = static_cast<Eigen::Index>(g.boundary_index().size());
    PotentialPair p;
    for (std::size_t c = 0; c < 2; ++c) {
        detail::require_size(g, residual[c], "solve_adjoint");
        double worst = 0.0;
        for (auto k : g.boundary_index())
            worst = std::max(worst, std::abs(residual[c][static_cast<Eigen::Index>(k)]));
        if (worst > 1e-12)
            throw ValidationError("solve_adjoint: residual of size " + std::to_string(worst) +
                                  " on the boundary; data and model grids are inconsistent");
        p[c] = op.solve(ComplexField::Zero(ring), adjoint_rhs(residual[c], g));
    }
    return p;
}

inline PotentialPair solve_adjoint(const Grid& g, const AdmittivityField& a, double omega,
                                   const PotentialPair& residual) {
    return solve_adjoint(EllipticOperator(g, a, omega), residual);
}

/// lap(gamma) = rhs with Dirichlet data bc.
inline ComplexField solve_poisson(const Grid& g, const ComplexField& rhs, const ComplexField& bc) {
    return EllipticOperator::laplace(g).solve(bc, rhs);
}

} // namespace mueit
