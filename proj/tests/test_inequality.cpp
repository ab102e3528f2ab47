#include <gtest/gtest.h>

#include <Eigen/Dense>

#include "jext/jext.hpp"

using namespace jext;

namespace {

struct Lab {
    Domain<2> dom;
    GridSpec<2> grid;
    std::unique_ptr<TestFieldGenerator<2>> gen;
    std::unique_ptr<FieldBasis<2>> basis;
};

Lab lab(const std::string& tag, double h, BoundaryCondition bc, FieldSpec spec = {}, int level = 2) {
    Lab l{gallery<2>(tag, {{"level", static_cast<double>(level)}}), {}, nullptr, nullptr};
    l.grid = GridSpec<2>::covering(l.dom.bounding_box(), h);
    l.gen = std::make_unique<TestFieldGenerator<2>>(l.dom, l.grid, bc, spec);
    l.basis = std::make_unique<FieldBasis<2>>(*l.gen);
    return l;
}

// sqrt of the top generalized eigenvalue of the two p = 2 Gram matrices
double dense_oracle(const FieldBasis<2>& basis) {
    Eigen::MatrixXd A, B;
    basis.gram(A, B);
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(A, B);
    EXPECT_EQ(es.info(), Eigen::Success);
    return std::sqrt(es.eigenvalues().maxCoeff());
}

}  // namespace

TEST(Ratios, Homogeneous) {
    auto d = gallery<2>("l_shape");
    auto g = GridSpec<2>::covering(d.bounding_box(), 1.0 / 64);
    for (auto bc : {BoundaryCondition::normal_zero, BoundaryCondition::tangential_zero}) {
        auto v = generate_test_field(d, g, bc, {3, 0, 9});
        for (double p : {1.5, 2.0, 3.0, double(INFINITY)}) {
            double f = friedrichs_ratio(v, p).value, q = gaffney_ratio(v, p).value;
            for (double a : {-3.0, 1e-3, 7.0}) {
                GridField<2> w = v;
                for (auto& x : w.values) x *= a;
                EXPECT_NEAR(friedrichs_ratio(w, p).value, f, 1e-12 * f);
                EXPECT_NEAR(gaffney_ratio(w, p).value, q, 1e-12 * q);
            }
            // friedrichs has the larger denominator
            EXPECT_LE(f, q);
            EXPECT_GT(f, 0.0);
        }
    }
}

TEST(Ratios, GradientFieldPositive) {
    auto d = gallery<2>("koch_snowflake", {{"level", 2}});
    auto g = GridSpec<2>::covering(d.bounding_box(), 1.0 / 64);
    auto v = generate_test_field(d, g, BoundaryCondition::tangential_zero, {3, 0, 2});
    auto r = gaffney_ratio(v, 2.0);
    EXPECT_GT(r.value, 0.0);
    EXPECT_TRUE(std::isfinite(r.value));
    EXPECT_FALSE(r.unbounded);
}

TEST(Ratios, FieldDominatedFriedrichsNearOne) {
    auto d = gallery<2>("unit_square");
    auto g = GridSpec<2>::covering(d.bounding_box(), 1.0 / 64);
    GridField<2> v(g, 2, membership_mask(d, g));
    for (std::size_t l = 0; l < v.nodes(); ++l) {
        if (!v.interior(l)) continue;
        v.at(l, 0) = 1.0 + 0.01 * std::sin(g.point(l)[1]);
        v.at(l, 1) = -0.5;
    }
    double r = friedrichs_ratio(v, 2.0).value;
    // |grad v| = 0.01 |cos y| next to |v| ~ 1.1 and curl = -0.01 cos y
    EXPECT_GE(r, 0.98);
    EXPECT_LE(r, 1.0 + 1e-4);
    GridField<2> c(g, 2, v.mask);
    for (std::size_t l = 0; l < c.nodes(); ++l)
        if (c.interior(l)) c.at(l, 0) = 2.0;
    EXPECT_NEAR(friedrichs_ratio(c, 3.0).value, 1.0, 1e-12);
    EXPECT_TRUE(gaffney_ratio(c, 2.0).unbounded);
}

TEST(Ratios, ZeroFieldRejected) {
    auto d = gallery<2>("unit_square");
    auto g = GridSpec<2>::covering(d.bounding_box(), 1.0 / 16);
    GridField<2> v(g, 2, membership_mask(d, g));
    EXPECT_THROW(gaffney_ratio(v, 2.0), Error);
}

TEST(Basis, MatchesDirectNorms) {
    auto L = lab("l_shape", 1.0 / 48, BoundaryCondition::normal_zero);
    for (uint64_t seed : {1, 5}) {
        auto c = L.gen->random_coefficients(seed);
        auto direct = norm_report(L.gen->field(c), 2.5);
        auto viab = L.basis->norms(L.basis->combine(c), 2.5);
        EXPECT_NEAR(viab.lp_field, direct.lp_field, 1e-11 * direct.lp_field);
        EXPECT_NEAR(viab.lp_grad, direct.lp_grad, 1e-11 * direct.lp_grad);
        EXPECT_NEAR(viab.lp_curl, direct.lp_curl, 1e-11 * direct.lp_curl);
        EXPECT_NEAR(viab.lp_div, direct.lp_div, 1e-11 * (direct.lp_grad + direct.lp_div));
    }
}

TEST(Basis, RatioGradientMatchesFiniteDifferences) {
    auto L = lab("unit_square", 1.0 / 32, BoundaryCondition::tangential_zero);
    auto c = L.gen->random_coefficients(3);
    for (auto q : {Inequality::gaffney, Inequality::friedrichs})
        for (double p : {2.0, 3.0}) {
            std::vector<double> g;
            L.basis->ratio_gradient(c, q, p, g);
            double worst = 0.0, scale = 0.0;
            for (std::size_t m = 0; m < c.size(); m += 7) {
                const double s = 1e-5;
                auto cp = c, cm = c;
                cp[m] += s;
                cm[m] -= s;
                double fd = (L.basis->ratio(cp, q, p).value - L.basis->ratio(cm, q, p).value) / (2 * s);
                worst = std::max(worst, std::abs(fd - g[m]));
                scale = std::max(scale, std::abs(g[m]));
            }
            EXPECT_LE(worst, 1e-5 * scale + 1e-10) << p;
        }
}

TEST(Estimate, SingleSampleAndRunningMax) {
    auto L = lab("unit_square", 1.0 / 32, BoundaryCondition::normal_zero);
    auto one = estimate_constant(*L.basis, Inequality::gaffney, 2.0, 1, 17, 0);
    auto direct = gaffney_ratio(generate_test_field(L.dom, L.grid, BoundaryCondition::normal_zero, {3, 0, 17}), 2.0);
    EXPECT_NEAR(one.sample_max, direct.value, 1e-10 * direct.value);
    EXPECT_EQ(one.max_ratio, one.sample_max);
    double prev = 0.0;
    for (std::size_t s : {1, 2, 4, 8, 16}) {
        auto e = estimate_constant(*L.basis, Inequality::gaffney, INFINITY, s, 17);
        EXPECT_GE(e.sample_max, prev);
        EXPECT_TRUE(e.traces.empty());  // sampling only at p = inf
        prev = e.sample_max;
        for (double r : e.sample_ratios) EXPECT_LE(r, e.max_ratio);
    }
}

TEST(Estimate, Errors) {
    auto L = lab("unit_square", 1.0 / 32, BoundaryCondition::normal_zero);
    EXPECT_THROW(estimate_constant(*L.basis, Inequality::gaffney, 2.0, 0, 1), Error);
    EXPECT_THROW(estimate_constant(*L.basis, Inequality::gaffney, 0.5, 3, 1), Error);
    auto c = L.gen->random_coefficients(1);
    EXPECT_THROW(maximize_ratio(*L.basis, Inequality::gaffney, INFINITY, c, 5), Error);
    EXPECT_THROW(maximize_ratio(*L.basis, Inequality::gaffney, 1.0, c, 5), Error);
    EXPECT_THROW(maximize_ratio(*L.basis, Inequality::gaffney, 2.0, std::vector<double>(c.size(), 0.0), 5), Error);
    auto N = lab("unit_square", 1.0 / 32, BoundaryCondition::none);
    EXPECT_THROW(estimate_constant(*N.basis, Inequality::gaffney, 2.0, 3, 1), Error);
    EXPECT_NO_THROW(estimate_constant(*N.basis, Inequality::friedrichs, 2.0, 3, 1, 2));
}

TEST(Ascent, TraceNondecreasingAndFixedPoint) {
    auto L = lab("l_shape", 1.0 / 64, BoundaryCondition::tangential_zero);
    for (double p : {1.5, 2.0, 3.0}) {
        auto tr = maximize_ratio(*L.basis, Inequality::gaffney, p, L.gen->random_coefficients(4), 200);
        for (std::size_t i = 1; i < tr.ratios.size(); ++i) EXPECT_GE(tr.ratios[i], tr.ratios[i - 1]);
        EXPECT_GT(tr.ratios.back(), tr.ratios.front());
        // normalized output
        EXPECT_NEAR(L.basis->norms(L.basis->combine(tr.coefficients), p).w1p, 1.0, 1e-12);
        if (!tr.converged) continue;
        auto again = maximize_ratio(*L.basis, Inequality::gaffney, p, tr.coefficients, 50);
        for (double r : again.ratios) EXPECT_NEAR(r, tr.ratios.back(), 1e-6 * tr.ratios.back()) << p;
    }
}

TEST(Ascent, QuadraticCaseMatchesDenseOracle) {
    for (auto bc : {BoundaryCondition::normal_zero, BoundaryCondition::tangential_zero}) {
        auto L = lab("unit_square", 1.0 / 32, bc);
        double oracle = dense_oracle(*L.basis);
        auto e = estimate_constant(*L.basis, Inequality::gaffney, 2.0, 10, 1, 300);
        EXPECT_LE(e.max_ratio, oracle * (1 + 1e-9));
        EXPECT_NEAR(e.max_ratio, oracle, 0.02 * oracle);
        EXPECT_LE(e.max_ratio, 1.05);
    }
}

TEST(Spectral, ConvexSquareNearOne) {
    auto d = gallery<2>("unit_square");
    for (double h : {1.0 / 32, 1.0 / 64}) {
        auto g = GridSpec<2>::covering(d.bounding_box(), h);
        for (auto bc : {BoundaryCondition::normal_zero, BoundaryCondition::tangential_zero}) {
            auto s = spectral_oracle_p2(d, g, bc, 0.0);
            EXPECT_GE(s.gaffney_constant_p2, 1.0 - 1e-9);
            EXPECT_LE(s.gaffney_constant_p2, 1.05);
            auto r = gaffney_ratio(s.eigenfield, 2.0);
            EXPECT_NEAR(r.value, s.gaffney_constant_p2, 1e-6 * r.value);
        }
    }
}

TEST(Spectral, AgreesWithAscentOnSquare) {
    auto L = lab("unit_square", 1.0 / 32, BoundaryCondition::normal_zero);
    auto s = spectral_oracle_p2(L.dom, L.grid, BoundaryCondition::normal_zero, L.gen->spec().collar_width);
    auto e = estimate_constant(*L.basis, Inequality::gaffney, 2.0, 10, 1, 300);
    EXPECT_NEAR(e.max_ratio, s.gaffney_constant_p2, 0.02 * s.gaffney_constant_p2);
}

TEST(Spectral, KochFiniteAndErrors) {
    auto d = gallery<2>("koch_snowflake", {{"level", 2}});
    auto g = GridSpec<2>::covering(d.bounding_box(), 1.0 / 48);
    auto s = spectral_oracle_p2(d, g, BoundaryCondition::normal_zero, 0.0);
    EXPECT_TRUE(std::isfinite(s.gaffney_constant_p2));
    EXPECT_GE(s.gaffney_constant_p2, 1.0);
    EXPECT_THROW(spectral_oracle_p2(d, g, BoundaryCondition::none, 0.0), Error);
    EXPECT_THROW(spectral_oracle_p2(d, g, BoundaryCondition::normal_zero, g.h), Error);  // collar below 2h
    auto c = gallery<3>("unit_cube");
    auto g3 = GridSpec<3>::covering(c.bounding_box(), 1.0 / 8);
    try {
        spectral_oracle_p2(c, g3, BoundaryCondition::normal_zero, 0.0);
        ADD_FAILURE() << "3D vector potentials must be rejected";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::numerical);
    }
    EXPECT_NO_THROW(spectral_oracle_p2(c, g3, BoundaryCondition::tangential_zero, 0.25));
}

TEST(Witness, NoCounterexamples) {
    for (std::string tag : {"unit_square", "koch_snowflake"}) {
        for (auto bc : {BoundaryCondition::normal_zero, BoundaryCondition::tangential_zero}) {
            auto L = lab(tag, 1.0 / 64, bc);
            auto w = contradiction_witness(*L.basis, 1000, 1);
            EXPECT_EQ(w.fields, 1000u);
            EXPECT_EQ(w.counterexamples, 0u);
            EXPECT_GT(w.min_relative_denominator, 0.0);
        }
    }
}

TEST(Witness, FlagsFieldsAboveTolerance) {
    // with a huge tolerance every field meets the hypothesis and is counted
    auto L = lab("unit_square", 1.0 / 32, BoundaryCondition::normal_zero);
    auto w = contradiction_witness(*L.basis, 20, 1, 1e9, 1e-8);
    EXPECT_EQ(w.hypothesis_hits, 20u);
    EXPECT_EQ(w.counterexamples, 20u);
}

TEST(Stability, SquareEstimateUnderRefinement) {
    double prev = 0.0;
    for (double h : {1.0 / 32, 1.0 / 64}) {
        auto L = lab("unit_square", h, BoundaryCondition::normal_zero, {3, 1.0 / 16, 0, 1.0 / 4});
        auto e = estimate_constant(*L.basis, Inequality::gaffney, 2.0, 8, 1, 100);
        if (prev > 0.0) {
            EXPECT_NEAR(e.max_ratio, prev, 0.25 * prev);
        }
        prev = e.max_ratio;
    }
}

TEST(Study, FiniteRows) {
    auto rows = prefractal_study({0, 1}, {BoundaryCondition::normal_zero, BoundaryCondition::tangential_zero},
                                 {1.5, 2.0}, 1.0 / 64, 3, 1, 10);
    EXPECT_EQ(rows.size(), 8u);
    for (const auto& r : rows) {
        EXPECT_TRUE(r.finite);
        EXPECT_GE(r.max_ratio, r.sample_max);
    }
}

TEST(Basis, ThreeDimensionalFields) {
    auto d = gallery<3>("unit_cube");
    auto g = GridSpec<3>::covering(d.bounding_box(), 1.0 / 16);
    TestFieldGenerator<3> gen(d, g, BoundaryCondition::tangential_zero, {2, 1.0 / 8, 0, 1.0 / 8});
    FieldBasis<3> basis(gen);
    auto c = gen.random_coefficients(2);
    auto r = basis.ratio(c, Inequality::gaffney, 2.0);
    EXPECT_TRUE(std::isfinite(r.value));
    EXPECT_NEAR(r.value, gaffney_ratio(gen.field(c), 2.0).value, 1e-10 * r.value);
}
