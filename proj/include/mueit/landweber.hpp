#pragma once

// Projected Landweber iteration
//
//     x_{n+1} = T[x_n] - mu * sum_w weight_w DF[T[x_n]; w]^* F[T[x_n]; w]
//
// as a generic engine over any problem exposing residuals, the adjoint of the
// derivative, a projection and an inner product, plus the admittivity
// reconstruction built on the adjoint-state gradient.

#include <cmath>
#include <concepts>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "mueit/admissible.hpp"
#include "mueit/errors.hpp"
#include "mueit/objective.hpp"
#include "mueit/properbc.hpp"

namespace mueit {

struct IterationRecord {
    int n = 0;
    /// Misfit at the projected iterate T[x_n].
    double J = 0.0;
    double grad_norm = 0.0;
    /// ||x_n - x*||, NaN without a reference solution.
    double err_to_truth = std::numeric_limits<double>::quiet_NaN();
    /// ||T[x_n] - x_n||.
    double proj_dev = 0.0;
};

enum class StopReason { max_iters, plateau, floor, discrepancy };

inline const char* to_string(StopReason r) {
    switch (r) {
    case StopReason::max_iters: return "max_iters";
    case StopReason::plateau: return "plateau";
    case StopReason::floor: return "floor";
    case StopReason::discrepancy: return "discrepancy";
    }
    return "unknown";
}

struct LandweberConfig {
    /// Step size; 0 selects mu_safety / L with L from power iteration at x0.
    double mu = 0.0;
    double mu_safety = 0.9;
    int power_iterations = 20;
    int max_iters = 200;
    /// Stop when J decreased by less than stop_tol * J over the last `window` steps.
    double stop_tol = 1e-5;
    int window = 10;
    /// Stop once J falls to this absolute level.
    double j_floor = 1e-20;
    /// Discrepancy principle: stop when J <= tau * noise_floor (disabled if noise_floor <= 0).
    double tau = 1.1;
    double noise_floor = 0.0;
    int log_every = 10;
    /// Refuse to start when the coverage constant at x0 is below this.
    double lambda_min = 1e-6;
    bool skip_coverage_gate = false;

    void validate() const {
        if (!(mu >= 0.0)) throw ValidationError("landweber: mu must be nonnegative (0 = automatic)");
        if (!(mu_safety > 0.0 && mu_safety < 2.0))
            throw ValidationError("landweber: mu_safety must lie in (0, 2)");
        if (max_iters < 1) throw ValidationError("landweber: max_iters must be at least 1");
        if (!(stop_tol >= 0.0)) throw ValidationError("landweber: stop_tol must be nonnegative");
        if (window < 1) throw ValidationError("landweber: window must be at least 1");
        if (power_iterations < 1) throw ValidationError("landweber: power_iterations must be >= 1");
    }
};

namespace detail {

inline std::optional<StopReason> check_stop(const std::vector<IterationRecord>& traj,
                                            const LandweberConfig& cfg) {
    const double J = traj.back().J;
    if (J <= cfg.j_floor) return StopReason::floor;
    if (cfg.noise_floor > 0.0 && J <= cfg.tau * cfg.noise_floor) return StopReason::discrepancy;
    const auto w = static_cast<std::size_t>(cfg.window);
    if (traj.size() > w) {
        const double before = traj[traj.size() - 1 - w].J;
        if (before - J < cfg.stop_tol * before) return StopReason::plateau;
    }
    return std::nullopt;
}

} // namespace detail

// ---------------------------------------------------------------------------
// Generic engine

/// Problem interface for generic_run. Residuals are per-frequency values of F;
/// adjoint() returns the quadrature sum of DF^* applied to them.
template <typename P>
concept GenericProblem = requires(const P& p, const typename P::Point& x,
                                  const typename P::Residuals& r) {
    { p.residuals(x) } -> std::same_as<typename P::Residuals>;
    { p.misfit(r) } -> std::convertible_to<double>;
    { p.adjoint(x, r) } -> std::same_as<typename P::Point>;
    { p.project(x) } -> std::same_as<typename P::Point>;
    { p.inner(x, x) } -> std::convertible_to<double>;
    { p.axpy(x, 1.0, x) } -> std::same_as<typename P::Point>;
};

/// Adds the linearization and the residual-space pairing needed for adjoint checks.
template <typename P>
concept AdjointCheckable = GenericProblem<P> && requires(const P& p, const typename P::Point& x,
                                                         const typename P::Residuals& r) {
    { p.derivative(x, x) } -> std::same_as<typename P::Residuals>;
    { p.inner_residual(r, r) } -> std::convertible_to<double>;
};

template <typename Point>
struct GenericResult {
    Point last;
    Point projected;
    std::vector<IterationRecord> trajectory;
    StopReason reason = StopReason::max_iters;
};

/// |<DF(h), y>_Y - <h, DF^*(y)>_X| for one probe.
template <AdjointCheckable P>
double adjoint_mismatch(const P& p, const typename P::Point& x, const typename P::Point& h,
                        const typename P::Residuals& y) {
    return std::abs(p.inner_residual(p.derivative(x, h), y) - p.inner(h, p.adjoint(x, y)));
}

template <GenericProblem P>
GenericResult<typename P::Point> generic_run(const P& p, typename P::Point x0, const LandweberConfig& cfg,
                                             const std::optional<typename P::Point>& truth = std::nullopt) {
    cfg.validate();
    if (!(cfg.mu > 0.0)) throw ValidationError("generic_run: an explicit step size mu > 0 is required");
    using Point = typename P::Point;
    auto distance = [&](const Point& a, const Point& b) {
        const Point d = p.axpy(a, -1.0, b);
        return std::sqrt(std::max(0.0, p.inner(d, d)));
    };
    GenericResult<Point> out{x0, x0, {}, StopReason::max_iters};
    Point x = std::move(x0);
    for (int n = 0; n < cfg.max_iters; ++n) {
        const Point t = p.project(x);
        const auto r = p.residuals(t);
        const Point g = p.adjoint(t, r);
        IterationRecord rec;
        rec.n = n;
        rec.J = p.misfit(r);
        rec.grad_norm = std::sqrt(std::max(0.0, p.inner(g, g)));
        rec.proj_dev = distance(t, x);
        if (truth) rec.err_to_truth = distance(x, *truth);
        out.trajectory.push_back(rec);
        x = p.axpy(t, -cfg.mu, g);
        if (auto stop = detail::check_stop(out.trajectory, cfg)) {
            out.reason = *stop;
            break;
        }
    }
    out.projected = p.project(x);
    out.last = std::move(x);
    return out;
}

// ---------------------------------------------------------------------------
// Admittivity reconstruction

struct StepResult {
    AdmittivityField next;
    IterationRecord record;
    ProjectionReport projection;
};

inline double field_inner(const Grid& g, const AdmittivityField& a, const AdmittivityField& b) {
    return g.h() * g.h() * (a.sigma.dot(b.sigma) + a.eps.dot(b.eps));
}

/// One step: a' = T[x_n], then x_{n+1} = a' - mu * gradient(a'). x_{n+1} is left
/// unprojected; the next step projects it.
inline StepResult step(const Grid& g, const AdmittivityField& x, const Dataset& data, double mu,
                       const AdmissibleParams& params,
                       const AdmittivityField* truth = nullptr) {
    StepResult out;
    const AdmittivityField t = project_T(x, g, params, &out.projection);
    const MisfitEvaluation eval(g, t, data);
    const GradientPair grad = eval.gradient();
    out.record.J = eval.misfit();
    out.record.grad_norm =
        std::sqrt(g.h() * g.h() * (grad.g_sigma.squaredNorm() + grad.g_eps.squaredNorm()));
    out.record.proj_dev = field_distance(g, t, x);
    if (truth) out.record.err_to_truth = field_distance(g, x, *truth);
    out.next.sigma = t.sigma - mu * grad.g_sigma;
    out.next.eps = t.eps - mu * grad.g_eps;
    return out;
}

/// Power-iteration estimate of the largest eigenvalue of sum_w weight_w DF^* DF at `a`
/// (h^2-weighted L2 on the interior region).
inline double normal_operator_norm(const Grid& g, const AdmittivityField& a, const Dataset& data,
                                   int iterations, std::uint64_t seed = 0x5eed) {
    const MisfitEvaluation eval(g, a, data);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    const auto size = static_cast<Eigen::Index>(g.size());
    Direction d{RealField::Zero(size), RealField::Zero(size)};
    for (std::size_t k = 0; k < g.size(); ++k) {
        if (!g.in_interior(k)) continue;
        const auto e = static_cast<Eigen::Index>(k);
        d.h[e] = 1.0 + 0.5 * unit(rng);
        d.k[e] = 1.0 + 0.5 * unit(rng);
    }
    auto norm = [&](const RealField& p, const RealField& q) {
        return g.h() * std::sqrt(p.squaredNorm() + q.squaredNorm());
    };
    double estimate = 0.0;
    for (int it = 0; it < iterations; ++it) {
        const double len = norm(d.h, d.k);
        d.h /= len;
        d.k /= len;
        const GradientPair hv = eval.normal_apply(d);
        estimate = norm(hv.g_sigma, hv.g_eps);
        if (!(estimate > 0.0)) return 0.0;
        d.h = hv.g_sigma;
        d.k = hv.g_eps;
    }
    return estimate;
}

struct RunResult {
    /// T applied to the last iterate.
    AdmittivityField final_field;
    AdmittivityField last_iterate;
    std::vector<IterationRecord> trajectory;
    StopReason reason = StopReason::max_iters;
    double mu = 0.0;
    double lambda = std::numeric_limits<double>::quiet_NaN();
    std::size_t nonfinite_replaced = 0;
};

using IterationCallback = std::function<void(const IterationRecord&)>;

inline double resolve_step_size(const Grid& g, const AdmittivityField& x0, const Dataset& data,
                                const LandweberConfig& cfg, const AdmissibleParams& params) {
    if (cfg.mu > 0.0) return cfg.mu;
    const double L = normal_operator_norm(g, project_T(x0, g, params), data, cfg.power_iterations);
    if (!(L > 0.0)) return 1.0;
    return cfg.mu_safety / L;
}

inline RunResult run(const Grid& g, const AdmittivityField& x0, const Dataset& data,
                     const LandweberConfig& cfg, const AdmissibleParams& params,
                     const AdmittivityField* truth = nullptr, const IterationCallback& on_record = {}) {
    cfg.validate();
    params.validate();
    data.validate(g);
    RunResult out;
    if (!cfg.skip_coverage_gate) {
        out.lambda = coverage_lambda(g, project_T(x0, g, params), data.freqs, data.phi).lambda;
        if (!(out.lambda >= cfg.lambda_min))
            throw ValidationError("reconstruct: coverage constant " + std::to_string(out.lambda) +
                                  " is below lambda_min " + std::to_string(cfg.lambda_min));
    }
    out.mu = resolve_step_size(g, x0, data, cfg, params);
    AdmittivityField x = x0;
    for (int n = 0; n < cfg.max_iters; ++n) {
        StepResult s = step(g, x, data, out.mu, params, truth);
        s.record.n = n;
        out.nonfinite_replaced += s.projection.nonfinite_replaced;
        out.trajectory.push_back(s.record);
        if (on_record) on_record(s.record);
        x = std::move(s.next);
        if (auto stop = detail::check_stop(out.trajectory, cfg)) {
            out.reason = *stop;
            break;
        }
    }
    out.final_field = project_T(x, g, params);
    out.last_iterate = std::move(x);
    return out;
}

/// Doubles mu from `start` until J(T[x - mu g]) >= J(T[x]) at x0 and returns the last
/// step size that still decreased J.
inline double find_safe_step(const Grid& g, const AdmittivityField& x0, const Dataset& data,
                             const AdmissibleParams& params, double start, int max_doublings = 30) {
    const AdmittivityField t = project_T(x0, g, params);
    const MisfitEvaluation eval(g, t, data);
    const GradientPair grad = eval.gradient();
    double mu = start, safe = 0.0;
    for (int i = 0; i < max_doublings; ++i, mu *= 2.0) {
        AdmittivityField trial{t.sigma - mu * grad.g_sigma, t.eps - mu * grad.g_eps};
        const AdmittivityField pt = project_T(trial, g, params);
        if (!(misfit_J(g, pt, data) < eval.misfit())) break;
        safe = mu;
    }
    return safe;
}

/// Relative L2 error of (sigma, eps) against a reference on the interior region.
inline double relative_error(const Grid& g, const AdmittivityField& a, const AdmittivityField& ref) {
    const double den = std::hypot(l2_norm(g, ref.sigma, true), l2_norm(g, ref.eps, true));
    return field_distance(g, a, ref, true) / den;
}

} // namespace mueit
