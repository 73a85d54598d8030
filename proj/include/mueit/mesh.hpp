#pragma once

// Uniform node grid on the unit square and the finite-difference operators
// shared by the forward, adjoint and initial-guess solvers.
//
// Nodes are numbered row-major: index = j * n + i, with x = i * h, y = j * h.

#include <algorithm>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "mueit/errors.hpp"

namespace mueit {

using cplx = std::complex<double>;
using RealField = Eigen::VectorXd;
using ComplexField = Eigen::VectorXcd;

/// Discrete gradient (or any nodal 2-vector field) with complex entries.
struct VectorField2C {
    ComplexField x;
    ComplexField y;
};

class Grid {
public:
    Grid(int n, double c0) : n_(n), c0_(c0) {
        if (n < 9)
            throw ValidationError("grid: need n >= 9 nodes per side, got " + std::to_string(n));
        if (!(c0 > 0.0 && c0 < 0.5))
            throw ValidationError("grid: interior margin c0 must lie in (0, 0.5), got " +
                                  std::to_string(c0));
        h_ = 1.0 / (n - 1);
        const auto count = static_cast<std::size_t>(n) * n;
        interior_.assign(count, 0);
        boundary_.assign(count, 0);
        for (int j = 0; j < n; ++j) {
            for (int i = 0; i < n; ++i) {
                const auto k = index(i, j);
                interior_[k] = boundary_distance(i, j) > c0_ ? 1 : 0;
                if (i == 0 || j == 0 || i == n - 1 || j == n - 1)
                    boundary_[k] = 1;
            }
        }
        // Counter-clockwise ring starting at the origin.
        for (int i = 0; i < n - 1; ++i) boundary_index_.push_back(index(i, 0));
        for (int j = 0; j < n - 1; ++j) boundary_index_.push_back(index(n - 1, j));
        for (int i = n - 1; i > 0; --i) boundary_index_.push_back(index(i, n - 1));
        for (int j = n - 1; j > 0; --j) boundary_index_.push_back(index(0, j));
        if (std::none_of(interior_.begin(), interior_.end(), [](auto f) { return f != 0; }))
            throw ValidationError("grid: interior region is empty for c0 = " + std::to_string(c0));
    }

    int n() const noexcept { return n_; }
    double h() const noexcept { return h_; }
    double c0() const noexcept { return c0_; }
    std::size_t size() const noexcept { return static_cast<std::size_t>(n_) * n_; }

    std::size_t index(int i, int j) const noexcept {
        return static_cast<std::size_t>(j) * n_ + i;
    }
    int col(std::size_t k) const noexcept { return static_cast<int>(k % n_); }
    int row(std::size_t k) const noexcept { return static_cast<int>(k / n_); }
    double x(std::size_t k) const noexcept { return col(k) * h_; }
    double y(std::size_t k) const noexcept { return row(k) * h_; }

    double boundary_distance(int i, int j) const noexcept {
        const double x = i * h_, y = j * h_;
        return std::min({x, 1.0 - x, y, 1.0 - y});
    }
    double boundary_distance(std::size_t k) const noexcept {
        return boundary_distance(col(k), row(k));
    }

    /// Node belongs to the reconstruction region {dist(x, boundary) > c0}.
    bool in_interior(std::size_t k) const noexcept { return interior_[k] != 0; }
    /// Node lies on the outermost ring.
    bool on_boundary(std::size_t k) const noexcept { return boundary_[k] != 0; }

    const std::vector<std::uint8_t>& interior_mask() const noexcept { return interior_; }
    const std::vector<std::size_t>& boundary_index() const noexcept { return boundary_index_; }

    /// Evaluates f(x, y) at every node.
    template <typename F>
    auto sample(F&& f) const {
        using T = decltype(f(0.0, 0.0));
        Eigen::Matrix<T, Eigen::Dynamic, 1> out(static_cast<Eigen::Index>(size()));
        for (std::size_t k = 0; k < size(); ++k)
            out[static_cast<Eigen::Index>(k)] = f(x(k), y(k));
        return out;
    }

    /// Values of a nodal field on the boundary ring, in boundary_index order.
    template <typename Vec>
    auto trace(const Vec& f) const {
        Eigen::Matrix<typename Vec::Scalar, Eigen::Dynamic, 1> out(
            static_cast<Eigen::Index>(boundary_index_.size()));
        for (std::size_t b = 0; b < boundary_index_.size(); ++b)
            out[static_cast<Eigen::Index>(b)] = f[static_cast<Eigen::Index>(boundary_index_[b])];
        return out;
    }

    bool operator==(const Grid& o) const noexcept { return n_ == o.n_ && c0_ == o.c0_; }

private:
    int n_;
    double c0_;
    double h_ = 0.0;
    std::vector<std::uint8_t> interior_;
    std::vector<std::uint8_t> boundary_;
    std::vector<std::size_t> boundary_index_;
};

inline Grid build_grid(int n, double c0) { return Grid(n, c0); }

namespace detail {

template <typename Vec>
void require_size(const Grid& g, const Vec& f, const char* what) {
    if (static_cast<std::size_t>(f.size()) != g.size())
        throw ValidationError(std::string(what) + ": field has " + std::to_string(f.size()) +
                              " values, grid has " + std::to_string(g.size()));
}

// d/dx along a row (stride 1) or d/dy along a column (stride n); second order
// one-sided at the ends.
template <typename Vec, typename Out>
void derivative(const Grid& g, const Vec& f, Out& out, bool along_x) {
    const int n = g.n();
    const double inv2h = 0.5 / g.h();
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            const int p = along_x ? i : j;
            auto at = [&](int q) {
                return along_x ? f[static_cast<Eigen::Index>(g.index(q, j))]
                               : f[static_cast<Eigen::Index>(g.index(i, q))];
            };
            typename Out::Scalar d;
            if (p == 0)
                d = (-3.0 * at(0) + 4.0 * at(1) - at(2)) * inv2h;
            else if (p == n - 1)
                d = (3.0 * at(n - 1) - 4.0 * at(n - 2) + at(n - 3)) * inv2h;
            else
                d = (at(p + 1) - at(p - 1)) * inv2h;
            out[static_cast<Eigen::Index>(g.index(i, j))] = d;
        }
    }
}

} // namespace detail

/// Nodal gradient: central differences inside, one-sided second order on the ring.
inline VectorField2C grad(const ComplexField& f, const Grid& g) {
    detail::require_size(g, f, "grad");
    VectorField2C out{ComplexField(f.size()), ComplexField(f.size())};
    detail::derivative(g, f, out.x, true);
    detail::derivative(g, f, out.y, false);
    return out;
}

/// Divergence with the same stencils as grad.
inline ComplexField div(const VectorField2C& v, const Grid& g) {
    detail::require_size(g, v.x, "div");
    detail::require_size(g, v.y, "div");
    ComplexField dx(v.x.size()), dy(v.y.size());
    detail::derivative(g, v.x, dx, true);
    detail::derivative(g, v.y, dy, false);
    return dx + dy;
}

/// 5-point Laplacian on nodes off the ring. Ring entries are zero (undefined there).
template <typename Vec>
typename Vec::PlainObject laplacian(const Vec& f, const Grid& g) {
    detail::require_size(g, f, "laplacian");
    const int n = g.n();
    const double inv_h2 = 1.0 / (g.h() * g.h());
    using Out = typename Vec::PlainObject;
    Out out = Out::Zero(f.size());
    for (int j = 1; j < n - 1; ++j) {
        for (int i = 1; i < n - 1; ++i) {
            const auto k = static_cast<Eigen::Index>(g.index(i, j));
            out[k] = (f[k - 1] + f[k + 1] + f[k - n] + f[k + n] - 4.0 * f[k]) * inv_h2;
        }
    }
    return out;
}

/// Calls fn(a, b) once for every edge (a, b) of the 5-point stencil, b = right or upper neighbour.
template <typename Fn>
void for_each_face(const Grid& g, Fn&& fn) {
    const int n = g.n();
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            const auto k = g.index(i, j);
            if (i + 1 < n) fn(k, k + 1);
            if (j + 1 < n) fn(k, k + static_cast<std::size_t>(n));
        }
    }
}

} // namespace mueit
