#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "mueit/harness/synth.hpp"
#include "mueit/initguess.hpp"
#include "mueit/landweber.hpp"

using namespace mueit;

namespace {

Matrix2c random_matrix(std::mt19937_64& rng) {
    std::normal_distribution<double> n(0.0, 1.0);
    Matrix2c m;
    for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 2; ++c) m(r, c) = cplx(n(rng), n(rng));
    return m;
}

}  // namespace

TEST(Pinv, IdentityAndProjector) {
    EXPECT_LT((pinv2x2(Matrix2c::Identity(), 1e-8) - Matrix2c::Identity()).norm(), 1e-15);
    Matrix2c p = Matrix2c::Zero();
    p(0, 0) = 1.0;
    EXPECT_LT((pinv2x2(p, 1e-8) - p).norm(), 1e-15);
    EXPECT_EQ(pinv2x2(Matrix2c::Zero(), 1e-8), Matrix2c::Zero());
}

TEST(Pinv, PenroseIdentities) {
    std::mt19937_64 rng(17);
    for (int t = 0; t < 20; ++t) {
        const Matrix2c m = random_matrix(rng);
        const Matrix2c x = pinv2x2(m, 1e-8);
        EXPECT_LT((x * m - Matrix2c::Identity()).norm(), 1e-12);
        EXPECT_LT((m * x * m - m).norm(), 1e-12 * m.norm());
        EXPECT_LT((x * m * x - x).norm(), 1e-12 * x.norm());
        EXPECT_LT(((m * x).adjoint() - m * x).norm(), 1e-12);
        EXPECT_LT(((x * m).adjoint() - x * m).norm(), 1e-12);
    }
}

TEST(Pinv, RankDeficient) {
    std::mt19937_64 rng(3);
    const Matrix2c v = random_matrix(rng);
    const Matrix2c m = v.col(0) * v.row(1);  // rank one
    const Matrix2c x = pinv2x2(m, 1e-8);
    EXPECT_LT((m * x * m - m).norm(), 1e-12 * m.norm());
    EXPECT_LT((x * m * x - x).norm(), 1e-12 * x.norm());
    EXPECT_LT(((m * x).adjoint() - m * x).norm(), 1e-12);
}

TEST(GammaRhs, ConstantMediumIsZero) {
    const Grid g(17, 0.2);
    const auto u = solve_forward(g, AdmittivityField::constant(g, 1.0, 1.0), 1.5, canonical_phi(g));
    EXPECT_LT(gamma_rhs(u, g).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(GammaRhs, QuadraticPotentialClosedForm) {
    // u = (x^2, y): A = diag(2x, 1), s = (2, 0), inner vector -(1/x, 0).
    const Grid g(33, 0.2);
    const PotentialPair u{{g.sample([](double x, double) { return cplx(x * x); }),
                           g.sample([](double, double y) { return cplx(y); })}};
    const ComplexField rhs = gamma_rhs(u, g);
    const double h = g.h();
    for (int j = 2; j < g.n() - 2; ++j)
        for (int i = 3; i < g.n() - 2; ++i) {
            const double expect = (-1.0 / ((i + 1) * h) + 1.0 / ((i - 1) * h)) / (2 * h);
            EXPECT_NEAR(std::abs(rhs[static_cast<Eigen::Index>(g.index(i, j))] - expect), 0.0,
                        1e-10 * std::abs(expect));
        }
}

TEST(GammaRhs, AsymmetricPotentialMatchesRawEvaluation) {
    const Grid g(33, 0.2);
    const PotentialPair u{{g.sample([](double x, double y) { return cplx(x * x + 1, 0.3 * x * y); }),
                           g.sample([](double x, double y) { return cplx(y + 0.2 * x * x, 0.1 * y * y); })}};
    const auto q = detail::log_gradient(u, g, 1e-8);
    // Invertible A: the inner vector solves A^T q = -s; written out with the 2x2 inverse.
    for (int j = 1; j < g.n() - 1; ++j)
        for (int i = 1; i < g.n() - 1; ++i) {
            const double x = i * g.h(), y = j * g.h();
            const cplx a00(2 * x, 0.3 * y), a10(0.0, 0.3 * x);  // d/dx, d/dy of u0
            const cplx a01(0.4 * x, 0.0), a11(1.0, 0.2 * y);    // d/dx, d/dy of u1
            const cplx s0(2.0, 0.0), s1(0.4, 0.2);
            const cplx det = a00 * a11 - a10 * a01;
            // A^T = [[a00, a10], [a01, a11]]
            const cplx qx = -(a11 * s0 - a10 * s1) / det;
            const cplx qy = -(-a01 * s0 + a00 * s1) / det;
            const auto k = static_cast<Eigen::Index>(g.index(i, j));
            EXPECT_LT(std::abs(q.x[k] - qx), 1e-10 * std::abs(qx) + 1e-12);
            EXPECT_LT(std::abs(q.y[k] - qy), 1e-10 * std::abs(qy) + 1e-12);
        }
}

TEST(GammaRhs, InvariantUnderComplexScaling) {
    const Grid g(33, 0.2);
    const auto a = make_phantom(PhantomSpec::default_bump(), g, AdmissibleParams{});
    const auto u = solve_forward(g, a, 1.5, canonical_phi(g));
    const ComplexField base = gamma_rhs(u, g);
    for (cplx c : {cplx(2.0, 0.0), cplx(0.0, 1.0)}) {
        const PotentialPair cu{{c * u[0], c * u[1]}};
        EXPECT_LT((gamma_rhs(cu, g) - base).cwiseAbs().maxCoeff(), 1e-10 * base.cwiseAbs().maxCoeff());
    }
}

TEST(SolveGamma, ConstantDataAndBoundaryValue) {
    const Grid g(17, 0.2);
    const double omega = 0.5;
    const auto u = solve_forward(g, AdmittivityField::constant(g, 1.0, 1.0), omega, canonical_phi(g));
    const auto gamma = solve_gamma(u, g, omega, 1.0, 1.0);
    EXPECT_EQ(gamma.branch_violations, 0u);
    const cplx edge(0.11157177565710488, 0.46364760900080615);
    EXPECT_LT((gamma.gamma.array() - edge).abs().maxCoeff(), 1e-11);
    EXPECT_NEAR(gamma.gamma[0].real(), 0.11157, 5e-6);
    EXPECT_NEAR(gamma.gamma[0].imag(), 0.46365, 5e-6);
}

TEST(SolveGamma, BumpCloserThanBackground) {
    const Grid g(33, 0.2);
    const AdmissibleParams params;
    const auto truth = make_phantom(PhantomSpec::default_bump(), g, params);
    const auto freqs = FrequencyGrid::trapezoid(1.0, 2.0, 3);
    const auto data = synthesize_data(PhantomSpec::default_bump(), g, freqs, params);
    for (std::size_t j = 0; j < freqs.size(); ++j) {
        const double w = freqs.nodes[j];
        const auto gamma = solve_gamma(data.potentials[j], g, w, 1.0, 1.0);
        EXPECT_EQ(gamma.branch_violations, 0u);
        const ComplexField kappa = truth.admittivity(w);
        const ComplexField est = gamma.gamma.array().exp();
        const ComplexField bg = ComplexField::Constant(kappa.size(), cplx(1.0, w));
        double e_est = 0.0, e_bg = 0.0;
        for (std::size_t k = 0; k < g.size(); ++k) {
            if (!g.in_interior(k)) continue;
            const auto e = static_cast<Eigen::Index>(k);
            e_est += std::norm(est[e] - kappa[e]);
            e_bg += std::norm(bg[e] - kappa[e]);
        }
        EXPECT_LT(e_est, e_bg) << w;
    }
}

TEST(InitialGuess, ExactOnConstantMedia) {
    const Grid g(33, 0.2);
    AdmissibleParams params;
    params.sigma0 = 2.0;
    params.eps0 = 0.5;
    PhantomSpec flat;
    flat.sigma0 = 2.0;
    flat.eps0 = 0.5;
    for (auto band : {std::pair{1.0, 2.0}, std::pair{2.0, 3.0}}) {
        const auto data = synthesize_data(flat, g, FrequencyGrid::trapezoid(band.first, band.second, 9), params);
        for (bool per_frequency : {false, true}) {
            const auto ig = initial_guess(data, g, params, {1e-8, per_frequency});
            EXPECT_LT((ig.sigma.array() - 2.0).abs().maxCoeff(), 1e-10);
            EXPECT_LT((ig.eps.array() - 0.5).abs().maxCoeff(), 1e-10);
        }
    }
}

TEST(InitialGuess, SingleFrequencyAtMidpoint) {
    const Grid g(17, 0.2);
    AdmissibleParams params;
    params.eps0 = 3.0;
    PhantomSpec flat;
    flat.eps0 = 3.0;
    const auto data = synthesize_data(flat, g, FrequencyGrid::trapezoid(1.0, 2.0, 1), params);
    const auto ig = initial_guess_detailed(data, g, params);
    EXPECT_LT((ig.raw.eps.array() - 3.0).abs().maxCoeff(), 1e-10);
}

TEST(InitialGuess, BumpCloserThanBackground) {
    const Grid g(33, 0.2);
    const AdmissibleParams params;
    const auto truth = make_phantom(PhantomSpec::default_bump(), g, params);
    const auto data = synthesize_data(PhantomSpec::default_bump(), g, FrequencyGrid::trapezoid(1.0, 2.0, 9), params);
    const auto ig = initial_guess_detailed(data, g, params);
    const auto bg = AdmittivityField::constant(g, 1.0, 1.0);
    EXPECT_LT(relative_error(g, ig.field, truth), relative_error(g, bg, truth));
    EXPECT_TRUE(is_member(ig.field, g, params).in_set);
    for (const auto& gm : ig.gammas) EXPECT_EQ(gm.branch_violations, 0u);
}
