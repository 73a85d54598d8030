#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "mueit/admissible.hpp"
#include "mueit/harness/phantom.hpp"

using namespace mueit;

namespace {

bool has(const MembershipReport& r, Constraint c) {
    for (const auto& v : r.violations)
        if (v.constraint == c) return true;
    return false;
}

AdmittivityField random_smooth_field(const Grid& g, std::uint64_t seed, double scale = 0.4) {
    std::mt19937_64 rng(seed);
    const Direction d = random_smooth_direction(g, rng);
    return {RealField(1.0 + scale * d.h.array()), RealField(1.0 + scale * d.k.array())};
}

}  // namespace

TEST(Params, DefaultsValidate) {
    const AdmissibleParams p;
    EXPECT_NO_THROW(p.validate());
    EXPECT_EQ(p.c1, 0.1);
    EXPECT_EQ(p.c2, 10.0);
    EXPECT_EQ(p.c4, 10.0);
    EXPECT_EQ(p.smooth_width, 2.0);
    EXPECT_EQ(p.clamp_slack, 1e-3);
    EXPECT_EQ(p.smoothing_passes, 2);
}

TEST(Params, RejectsInconsistentBounds) {
    AdmissibleParams p;
    p.c1 = 1.5;
    EXPECT_THROW(p.validate(), ValidationError);
    p = {};
    p.c2 = 0.9;
    EXPECT_THROW(p.validate(), ValidationError);
    p = {};
    p.c4 = 0.0;
    EXPECT_THROW(p.validate(), ValidationError);
    p = {};
    p.clamp_slack = 5.0;
    EXPECT_THROW(p.validate(), ValidationError);
    p = {};
    p.smoothing_weight = 0.3;
    EXPECT_THROW(p.validate(), ValidationError);
}

TEST(IsMember, Background) {
    const Grid g(17, 0.2);
    const auto rep = is_member(AdmittivityField::constant(g, 1.0, 1.0), g, AdmissibleParams{});
    EXPECT_TRUE(rep.in_set);
    EXPECT_TRUE(rep.violations.empty());
}

TEST(IsMember, BoundViolation) {
    const Grid g(17, 0.2);
    auto a = AdmittivityField::constant(g, 1.0, 1.0);
    const auto node = g.index(8, 8);
    a.sigma[static_cast<Eigen::Index>(node)] = 10.1;
    AdmissibleParams p;
    p.c4 = 1e6;
    const auto rep = is_member(a, g, p);
    ASSERT_FALSE(rep.in_set);
    ASSERT_EQ(rep.violations.size(), 1u);
    EXPECT_EQ(rep.violations[0].constraint, Constraint::sigma_bounds);
    EXPECT_EQ(rep.violations[0].node, node);
    EXPECT_NEAR(rep.violations[0].magnitude, 0.1, 1e-12);
}

TEST(IsMember, SupportViolation) {
    const Grid g(17, 0.2);
    auto a = AdmittivityField::constant(g, 1.0, 1.0);
    a.eps[static_cast<Eigen::Index>(g.index(1, 1))] = 1.01;
    const auto rep = is_member(a, g, AdmissibleParams{});
    EXPECT_FALSE(rep.in_set);
    EXPECT_TRUE(has(rep, Constraint::eps_support));
    EXPECT_FALSE(has(rep, Constraint::sigma_support));
}

TEST(IsMember, H1Cap) {
    const Grid g(33, 0.2);
    AdmissibleParams p;
    p.c4 = 1e-3;
    const auto rep = is_member(make_phantom(PhantomSpec::default_bump(), g, AdmissibleParams{}), g, p);
    EXPECT_TRUE(has(rep, Constraint::sigma_h1));
    EXPECT_TRUE(has(rep, Constraint::eps_h1));
}

TEST(ProjectT, BackgroundUnchanged) {
    const Grid g(17, 0.2);
    const auto a = AdmittivityField::constant(g, 1.0, 1.0);
    const auto t = project_T(a, g, AdmissibleParams{});
    EXPECT_EQ(t.sigma, a.sigma);
    EXPECT_EQ(t.eps, a.eps);
}

TEST(ProjectT, PlateauAboveUpperBoundIsClamped) {
    const Grid g(33, 0.2);
    AdmissibleParams p;
    p.c4 = 1e6;
    auto a = AdmittivityField::constant(g, 1.0, 1.0);
    for (std::size_t k = 0; k < g.size(); ++k)
        if (g.in_interior(k)) a.sigma[static_cast<Eigen::Index>(k)] = p.c2 + 1.0;
    ProjectionReport rep;
    const auto t = project_T(a, g, p, &rep);
    EXPECT_GT(rep.clamped, 0u);
    EXPECT_LE(t.sigma.maxCoeff(), p.c2 - p.clamp_slack);
    EXPECT_TRUE(is_member(t, g, p).in_set);
}

TEST(ProjectT, OutputAlwaysAdmissible) {
    const Grid g(33, 0.2);
    const AdmissibleParams p;
    std::mt19937_64 rng(11);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int trial = 0; trial < 10; ++trial) {
        AdmittivityField a = AdmittivityField::constant(g, 1.0, 1.0);
        const double amp = std::pow(10.0, trial - 3);
        for (Eigen::Index k = 0; k < a.sigma.size(); ++k) {
            a.sigma[k] += amp * normal(rng);
            a.eps[k] += amp * normal(rng);
        }
        const auto t = project_T(a, g, p);
        const auto rep = is_member(t, g, p);
        EXPECT_TRUE(rep.in_set) << "trial " << trial;
        for (std::size_t k = 0; k < g.size(); ++k) {
            if (g.in_interior(k)) continue;
            EXPECT_EQ(t.sigma[static_cast<Eigen::Index>(k)], p.sigma0);
            EXPECT_EQ(t.eps[static_cast<Eigen::Index>(k)], p.eps0);
        }
    }
}

TEST(ProjectT, LargePerturbationRescaledToCap) {
    const Grid g(33, 0.2);
    AdmissibleParams p;
    p.c4 = 0.05;
    ProjectionReport rep;
    const auto t = project_T(make_phantom(PhantomSpec::default_bump(), g, AdmissibleParams{}), g, p, &rep);
    EXPECT_TRUE(rep.rescaled[0]);
    EXPECT_TRUE(rep.rescaled[1]);
    EXPECT_NEAR(h1_norm(g, RealField(t.sigma.array() - 1.0)), p.c4, 1e-12);
}

TEST(ProjectT, NonFiniteReplaced) {
    const Grid g(17, 0.2);
    auto a = AdmittivityField::constant(g, 1.0, 1.0);
    a.sigma[100] = std::numeric_limits<double>::quiet_NaN();
    a.eps[120] = std::numeric_limits<double>::infinity();
    ProjectionReport rep;
    const auto t = project_T(a, g, AdmissibleParams{}, &rep);
    EXPECT_EQ(rep.nonfinite_replaced, 2u);
    EXPECT_TRUE(t.sigma.allFinite());
    EXPECT_TRUE(is_member(t, g, AdmissibleParams{}).in_set);
}

TEST(ProjectT, NearIdempotent) {
    const Grid g(65, 0.2);
    const AdmissibleParams p;
    const auto bg = AdmittivityField::constant(g, 1.0, 1.0);
    for (std::uint64_t seed : {1, 2, 3}) {
        const auto t = project_T(random_smooth_field(g, seed), g, p);
        const auto tt = project_T(t, g, p);
        EXPECT_LE(field_distance(g, tt, t), 1e-2 * field_distance(g, t, bg)) << seed;
    }
}

TEST(ProjectT, SmoothMemberMovesByTheSmoothingDeviationOnly) {
    const Grid g(65, 0.2);
    const AdmissibleParams p;
    const auto a = make_phantom(PhantomSpec::default_bump(), g, p);
    const auto t = project_T(a, g, p);
    const auto bg = AdmittivityField::constant(g, 1.0, 1.0);
    EXPECT_LE(field_distance(g, t, a), 5e-3 * field_distance(g, a, bg));
}

TEST(ProjectT, ClampNonExpansive) {
    const Grid g(33, 0.2);
    AdmissibleParams p;
    p.smooth_width = 0.0;
    p.smoothing_passes = 0;
    p.c4 = 1e9;
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> wide(-5.0, 20.0), inside(p.c1 + 0.01, p.c2 - 0.01);
    AdmittivityField x = AdmittivityField::constant(g, 1.0, 1.0);
    for (Eigen::Index k = 0; k < x.sigma.size(); ++k) {
        x.sigma[k] = wide(rng);
        x.eps[k] = wide(rng);
    }
    const auto t = project_T(x, g, p);
    for (int trial = 0; trial < 100; ++trial) {
        AdmittivityField y = AdmittivityField::constant(g, 1.0, 1.0);
        for (std::size_t k = 0; k < g.size(); ++k) {
            if (!g.in_interior(k)) continue;
            y.sigma[static_cast<Eigen::Index>(k)] = inside(rng);
            y.eps[static_cast<Eigen::Index>(k)] = inside(rng);
        }
        for (Eigen::Index k = 0; k < x.sigma.size(); ++k) {
            if (!g.in_interior(static_cast<std::size_t>(k))) continue;
            ASSERT_LE(std::abs(t.sigma[k] - y.sigma[k]), std::abs(x.sigma[k] - y.sigma[k]) + 1e-15);
            ASSERT_LE(std::abs(t.eps[k] - y.eps[k]), std::abs(x.eps[k] - y.eps[k]) + 1e-15);
        }
    }
}

TEST(ProjectT, Deterministic) {
    const Grid g(33, 0.2);
    const auto a = random_smooth_field(g, 9);
    const auto t1 = project_T(a, g, AdmissibleParams{});
    const auto t2 = project_T(a, g, AdmissibleParams{});
    EXPECT_EQ(t1.sigma, t2.sigma);
    EXPECT_EQ(t1.eps, t2.eps);
}
