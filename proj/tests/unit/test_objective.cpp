#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "mueit/harness/diagnostics.hpp"
#include "mueit/harness/synth.hpp"
#include "mueit/objective.hpp"

using namespace mueit;

namespace {

struct Setup {
    Grid g{17, 0.2};
    AdmissibleParams params;
    FrequencyGrid freqs = FrequencyGrid::trapezoid(1.0, 2.0, 3);
    AdmittivityField truth = make_phantom(PhantomSpec::default_bump(), g, params);
    Dataset clean = synthesize_data(PhantomSpec::default_bump(), g, freqs, params, {1});
};

const Setup& setup() {
    static const Setup s;
    return s;
}

Direction direction(const Grid& g, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    return random_smooth_direction(g, rng);
}

double pair_norm(const Grid& g, const PotentialPair& p) {
    return std::sqrt(h1_norm_sq(g, p[0]) + h1_norm_sq(g, p[1]));
}

}  // namespace

TEST(Residual, VanishesAtTruth) {
    const auto& s = setup();
    for (double w : s.freqs.nodes) {
        const auto F = residual_F(s.g, s.truth, w, s.clean);
        EXPECT_LT(F[0].cwiseAbs().maxCoeff() + F[1].cwiseAbs().maxCoeff(), 1e-11);
    }
}

TEST(Residual, ConstantMediumAgainstConstantData) {
    const Grid g(17, 0.2);
    PhantomSpec flat;
    const auto d = synthesize_data(flat, g, FrequencyGrid::trapezoid(1.0, 2.0, 3), {}, {2});
    const auto F = residual_F(g, AdmittivityField::constant(g, 1.0, 1.0), 1.5, d);
    EXPECT_LT(F[0].cwiseAbs().maxCoeff() + F[1].cwiseAbs().maxCoeff(), 1e-11);
}

TEST(Residual, GrowsWithPerturbation) {
    const auto& s = setup();
    const Direction d = direction(s.g, 3);
    double prev = 0.0;
    for (double t : {0.01, 0.02, 0.04}) {
        const auto F = residual_F(s.g, shifted(s.truth, d, t), 1.5, s.clean);
        const double norm = pair_norm(s.g, F);
        EXPECT_GT(norm, prev);
        prev = norm;
    }
    for (auto k : s.g.boundary_index())
        EXPECT_EQ(residual_F(s.g, shifted(s.truth, d, 0.01), 1.0, s.clean)[0][static_cast<Eigen::Index>(k)],
                  cplx(0.0));
}

TEST(Residual, RejectsUnknownFrequency) {
    const auto& s = setup();
    EXPECT_THROW(residual_F(s.g, s.truth, 1.234, s.clean), ValidationError);
}

TEST(Misfit, FloorAtTruthAndNonnegative) {
    const auto& s = setup();
    EXPECT_LE(misfit_J(s.g, s.truth, s.clean), 1e-18);
    EXPECT_GT(misfit_J(s.g, AdmittivityField::constant(s.g, 1.0, 1.0), s.clean), 0.0);
}

TEST(Misfit, QuadraticInNoiseLevel) {
    const auto& s = setup();
    const double j1 = misfit_J(s.g, s.truth, add_noise(s.clean, 0.01, 42));
    const double j2 = misfit_J(s.g, s.truth, add_noise(s.clean, 0.02, 42));
    EXPECT_NEAR(j2 / j1, 4.0, 1e-3);
}

TEST(Misfit, InvariantUnderFrequencyRelabelling) {
    // J as a sum of single-node datasets accumulated in either order.
    const auto& s = setup();
    const auto a = AdmittivityField::constant(s.g, 1.0, 1.0);
    std::vector<double> parts;
    for (std::size_t j = 0; j < s.freqs.size(); ++j) {
        Dataset one = s.clean;
        const double w = s.freqs.weights[j], node = s.freqs.nodes[j];
        one.freqs = {node - 0.5 * w, node + 0.5 * w, {node}, {w}};
        one.potentials = {s.clean.potentials[j]};
        parts.push_back(misfit_J(s.g, a, one));
    }
    const double forward = parts[0] + parts[1] + parts[2];
    const double backward = parts[2] + parts[1] + parts[0];
    const double full = misfit_J(s.g, a, s.clean);
    EXPECT_NEAR(forward, full, 1e-13 * full);
    EXPECT_NEAR(backward, full, 1e-13 * full);
}

TEST(Linearized, ZeroAndLinear) {
    const auto& s = setup();
    const auto u = solve_forward(s.g, s.truth, 1.5, s.clean.phi);
    const auto size = static_cast<Eigen::Index>(s.g.size());
    const auto v0 = dF(s.g, s.truth, 1.5, {RealField::Zero(size), RealField::Zero(size)}, u);
    EXPECT_EQ(v0[0].cwiseAbs().maxCoeff(), 0.0);
    const Direction d = direction(s.g, 5);
    const auto v1 = dF(s.g, s.truth, 1.5, d, u);
    const auto v2 = dF(s.g, s.truth, 1.5, {2.0 * d.h, 2.0 * d.k}, u);
    for (std::size_t c = 0; c < 2; ++c)
        EXPECT_LT((v2[c] - 2.0 * v1[c]).cwiseAbs().maxCoeff(), 1e-12 * v1[c].cwiseAbs().maxCoeff());
}

TEST(Linearized, TaylorRemainderIsSecondOrder) {
    const auto& s = setup();
    const double w = 2.0;
    const auto u = solve_forward(s.g, s.truth, w, s.clean.phi);
    const Direction d = direction(s.g, 8);
    const auto v = dF(s.g, s.truth, w, d, u);
    auto remainder = [&](double t) {
        const auto ut = solve_forward(s.g, shifted(s.truth, d, t), w, s.clean.phi);
        PotentialPair r;
        for (std::size_t c = 0; c < 2; ++c) r[c] = ut[c] - u[c] - t * v[c];
        return pair_norm(s.g, r);
    };
    const double ratio = remainder(1e-2) / remainder(5e-3);
    EXPECT_GT(ratio, 3.6);
    EXPECT_LT(ratio, 4.4);
}

TEST(Gradient, VanishesAtTruth) {
    const auto& s = setup();
    const auto grad = gradient_DJ(s.g, s.truth, s.clean);
    EXPECT_LT(grad.g_sigma.cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_LT(grad.g_eps.cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Gradient, SupportedInInterior) {
    const auto& s = setup();
    const auto grad = gradient_DJ(s.g, AdmittivityField::constant(s.g, 1.0, 1.0), s.clean);
    for (std::size_t k = 0; k < s.g.size(); ++k) {
        if (s.g.in_interior(k)) continue;
        EXPECT_EQ(grad.g_sigma[static_cast<Eigen::Index>(k)], 0.0);
        EXPECT_EQ(grad.g_eps[static_cast<Eigen::Index>(k)], 0.0);
    }
    EXPECT_GT(grad.g_sigma.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Gradient, MatchesFiniteDifferencesAndPairing) {
    const auto& s = setup();
    const auto a = AdmittivityField::constant(s.g, 1.0, 1.0);
    for (const auto& p : check_gradient(s.g, a, s.clean, random_directions(s.g, 3, 21))) {
        EXPECT_LT(p.fd_relative_error(), 1e-4);
        EXPECT_LT(p.pairing_relative_error(), 1e-8);
    }
}

TEST(Gradient, DescentSign) {
    // A small step against the gradient lowers J.
    const auto& s = setup();
    const auto a = AdmittivityField::constant(s.g, 1.0, 1.0);
    const auto grad = gradient_DJ(s.g, a, s.clean);
    const double j0 = misfit_J(s.g, a, s.clean);
    const AdmittivityField b{a.sigma - 1e-2 * grad.g_sigma, a.eps - 1e-2 * grad.g_eps};
    EXPECT_LT(misfit_J(s.g, b, s.clean), j0);
}

TEST(Forward, NegativeFrequencyConjugates) {
    const auto& s = setup();
    for (double w : {1.0, 1.5, 2.0}) {
        const auto up = solve_forward(s.g, s.truth, w, s.clean.phi);
        const auto dn = solve_forward(s.g, s.truth, -w, s.clean.phi);
        for (std::size_t c = 0; c < 2; ++c)
            EXPECT_LT((dn[c] - up[c].conjugate()).cwiseAbs().maxCoeff(), 1e-12);
    }
}

TEST(Coercivity, PositiveOnRandomDirections) {
    const auto& s = setup();
    const auto est = empirical_coercivity(s.g, s.truth, s.clean, random_directions(s.g, 5, 4));
    EXPECT_EQ(est.values.size(), 5u);
    EXPECT_GT(est.c_emp, 0.0);
}
