#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "jext/jext.hpp"

using namespace jext;

namespace {

// brute-force distance from p to the closed segment ab
double seg_dist(Point2 p, Point2 a, Point2 b) {
    double dx = b[0] - a[0], dy = b[1] - a[1];
    double t = ((p[0] - a[0]) * dx + (p[1] - a[1]) * dy) / (dx * dx + dy * dy);
    t = std::clamp(t, 0.0, 1.0);
    return std::hypot(p[0] - a[0] - t * dx, p[1] - a[1] - t * dy);
}

double brute_distance(const std::vector<Point2>& v, Point2 p) {
    double d = INFINITY;
    for (std::size_t i = 0; i < v.size(); ++i) d = std::min(d, seg_dist(p, v[i], v[(i + 1) % v.size()]));
    return d;
}

// nearest boundary point, brute force
Point2 brute_nearest(const std::vector<Point2>& v, Point2 p) {
    double best = INFINITY;
    Point2 w{};
    for (std::size_t i = 0; i < v.size(); ++i) {
        Point2 a = v[i], b = v[(i + 1) % v.size()];
        double dx = b[0] - a[0], dy = b[1] - a[1];
        double t = std::clamp(((p[0] - a[0]) * dx + (p[1] - a[1]) * dy) / (dx * dx + dy * dy), 0.0, 1.0);
        Point2 q{a[0] + t * dx, a[1] + t * dy};
        double d = std::hypot(p[0] - q[0], p[1] - q[1]);
        if (d < best) best = d, w = q;
    }
    return w;
}

// Koch snowflake by complex-number recursion, independent of the Eisenstein build
std::vector<Point2> koch_reference(int level) {
    std::vector<Point2> v{{0, 0}, {1, 0}, {0.5, std::sqrt(3.0) / 2}};
    for (int l = 0; l < level; ++l) {
        std::vector<Point2> n;
        for (std::size_t i = 0; i < v.size(); ++i) {
            Point2 a = v[i], b = v[(i + 1) % v.size()];
            Point2 d{(b[0] - a[0]) / 3, (b[1] - a[1]) / 3};
            Point2 p1{a[0] + d[0], a[1] + d[1]};
            // outward peak: rotate d by -60 degrees (boundary is counter-clockwise)
            double c = 0.5, s = -std::sqrt(3.0) / 2;
            Point2 pk{p1[0] + c * d[0] - s * d[1], p1[1] + s * d[0] + c * d[1]};
            n.push_back(a);
            n.push_back(p1);
            n.push_back(pk);
            n.push_back({a[0] + 2 * d[0], a[1] + 2 * d[1]});
        }
        v = n;
    }
    return v;
}

double shoelace(const std::vector<Point2>& v) {
    double a = 0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        auto p = v[i], q = v[(i + 1) % v.size()];
        a += p[0] * q[1] - q[0] * p[1];
    }
    return 0.5 * a;
}

}  // namespace

TEST(Gallery, UnitSquareMembership) {
    auto d = gallery<2>("unit_square");
    EXPECT_TRUE(d.contains({0.5, 0.5}));
    EXPECT_FALSE(d.contains({1.5, 0.5}));
    EXPECT_EQ(d.bounding_box().lo[0], -0.1);
    EXPECT_EQ(d.bounding_box().hi[1], 1.1);
    EXPECT_DOUBLE_EQ(d.epsilon(), 0.4);
}

TEST(Gallery, KochLevelZeroIsTriangle) {
    auto d = gallery<2>("koch_snowflake", {{"level", 0}});
    EXPECT_EQ(d.section().vertices().size(), 3u);
    EXPECT_TRUE(d.contains({0.5, std::sqrt(3.0) / 6}));
    EXPECT_NEAR(std::abs(d.section().area()), std::sqrt(3.0) / 4, 1e-15);
}

TEST(Gallery, KochMatchesIndependentRecursion) {
    for (int k = 0; k <= 4; ++k) {
        auto d = gallery<2>("koch_snowflake", {{"level", double(k)}});
        auto ref = koch_reference(k);
        const auto& v = d.section().vertices();
        ASSERT_EQ(v.size(), ref.size());
        ASSERT_EQ(v.size(), 3u * (1u << (2 * k)));
        for (std::size_t i = 0; i < v.size(); ++i) {
            EXPECT_NEAR(v[i][0], ref[i][0], 1e-12);
            EXPECT_NEAR(v[i][1], ref[i][1], 1e-12);
        }
        // perimeter 3 (4/3)^k, area from the shoelace of the reference
        EXPECT_NEAR(d.section().perimeter(), 3 * std::pow(4.0 / 3.0, k), 1e-12);
        EXPECT_NEAR(std::abs(d.section().area()), std::abs(shoelace(ref)), 1e-12);
    }
}

TEST(Gallery, KochSamplesNearPreviousLevel) {
    auto d3 = gallery<2>("koch_snowflake", {{"level", 3}});
    auto ref2 = koch_reference(2);
    for (const auto& p : d3.boundary_sample(1000)) EXPECT_LE(brute_distance(ref2, p), std::pow(1.0 / 3.0, 3) + 1e-12);
}

TEST(Gallery, Errors) {
    EXPECT_THROW(gallery<2>("triangle"), Error);
    try {
        gallery<2>("nope");
    } catch (const Error& e) {
        EXPECT_NE(std::string(e.what()).find("unknown gallery tag"), std::string::npos);
        EXPECT_EQ(e.kind(), ErrorKind::config);
    }
    EXPECT_THROW(gallery<2>("koch_snowflake", {{"level", -1}}), Error);
    EXPECT_THROW(gallery<3>("unit_square"), Error);
}

TEST(Gallery, BoundingBoxContainsDomain) {
    for (const auto& tag : gallery_tags()) {
        if (gallery_dimension(tag) != 2) continue;
        auto d = gallery<2>(tag, {{"level", 2}});
        for (const auto& v : d.section().vertices()) {
            EXPECT_GT(v[0], d.bounding_box().lo[0]);
            EXPECT_LT(v[0], d.bounding_box().hi[0]);
            EXPECT_GT(v[1], d.bounding_box().lo[1]);
            EXPECT_LT(v[1], d.bounding_box().hi[1]);
        }
        EXPECT_GT(d.epsilon(), 0.0);
        EXPECT_LE(d.epsilon(), 1.0);
    }
}

TEST(Distance, UnitSquareExamples) {
    auto d = gallery<2>("unit_square");
    EXPECT_DOUBLE_EQ(d.distance_to_complement({0.5, 0.5}), 0.5);
    EXPECT_NEAR(d.distance_to_complement({0.1, 0.3}), 0.1, 1e-15);
    EXPECT_THROW(d.distance_to_complement({1.5, 0.5}), Error);
}

TEST(Distance, KochCentroidMatchesBruteForce) {
    auto d = gallery<2>("koch_snowflake", {{"level", 2}});
    Point2 c{0.5, std::sqrt(3.0) / 6};
    EXPECT_NEAR(d.distance_to_complement(c), brute_distance(d.section().vertices(), c), 1e-9);
}

TEST(Distance, RandomPointsMatchBruteForceAndCrossBoundary) {
    std::mt19937_64 rng(7);
    for (std::string tag : {"unit_square", "l_shape", "koch_snowflake"}) {
        auto d = gallery<2>(tag, {{"level", 3}});
        const auto& v = d.section().vertices();
        auto bb = d.bounding_box();
        std::uniform_real_distribution<double> ux(bb.lo[0], bb.hi[0]), uy(bb.lo[1], bb.hi[1]);
        int tested = 0;
        while (tested < 300) {
            Point2 x{ux(rng), uy(rng)};
            if (!d.contains(x)) continue;
            ++tested;
            double dist = d.distance_to_complement(x);
            EXPECT_GT(dist, 0.0);
            EXPECT_NEAR(dist, brute_distance(v, x), 1e-12);
            Point2 w = brute_nearest(v, x);
            const double tol = 1e-6;
            Point2 beyond{x[0] + (w[0] - x[0]) * (1 + 2 * tol), x[1] + (w[1] - x[1]) * (1 + 2 * tol)};
            EXPECT_FALSE(d.contains(beyond)) << tag << " " << x[0] << "," << x[1];
        }
    }
}

TEST(Distance, CylinderDistance) {
    auto d = gallery<3>("unit_cube");
    EXPECT_DOUBLE_EQ(d.distance_to_complement({0.5, 0.5, 0.5}), 0.5);
    EXPECT_NEAR(d.distance_to_complement({0.5, 0.4, 0.05}), 0.05, 1e-15);
    EXPECT_FALSE(d.contains({0.5, 0.5, 1.2}));
    EXPECT_NEAR(d.boundary_distance({1.3, 0.5, 1.4}), std::hypot(0.3, 0.4), 1e-12);
}

TEST(Probe, ConvexSquare) {
    auto d = gallery<2>("unit_square");
    auto w1 = whitney_decompose(d, Side::interior, 7);
    auto r = epsilon_delta_probe(d, w1, 500, 3);
    EXPECT_EQ(r.pairs, 500u);
    EXPECT_LE(r.worst_length_ratio, std::sqrt(2.0) + probe_length_slack);
    EXPECT_GE(r.worst_length_ratio, 1.0);
    EXPECT_GE(r.worst_cigar_ratio, 0.4);
}

TEST(Probe, ConvexCube) {
    auto d = gallery<3>("unit_cube");
    auto w1 = whitney_decompose(d, Side::interior, 5);
    auto r = epsilon_delta_probe(d, w1, 100, 3);
    EXPECT_GE(r.worst_cigar_ratio, 0.4);
}

TEST(Probe, Deterministic) {
    auto d = gallery<2>("koch_snowflake", {{"level", 3}});
    auto w1 = whitney_decompose(d, Side::interior, 7);
    auto a = epsilon_delta_probe(d, w1, 500, 11);
    auto b = epsilon_delta_probe(d, w1, 500, 11);
    ASSERT_EQ(a.witnesses.size(), b.witnesses.size());
    for (std::size_t i = 0; i < a.witnesses.size(); ++i) {
        EXPECT_EQ(a.witnesses[i].x, b.witnesses[i].x);
        EXPECT_EQ(a.witnesses[i].y, b.witnesses[i].y);
        EXPECT_EQ(a.witnesses[i].length_ratio, b.witnesses[i].length_ratio);
    }
    EXPECT_EQ(a.worst_cigar_ratio, b.worst_cigar_ratio);
    EXPECT_THROW(epsilon_delta_probe(d, w1, 0, 1), Error);
}

TEST(Probe, PairsRespectDelta) {
    auto d = gallery<2>("l_shape");
    auto w1 = whitney_decompose(d, Side::interior, 7);
    auto r = epsilon_delta_probe(d, w1, 200, 5);
    for (const auto& w : r.witnesses) {
        EXPECT_LT(distance<2>(w.x, w.y), d.delta());
        EXPECT_TRUE(d.contains(w.x));
        EXPECT_TRUE(d.contains(w.y));
    }
}

TEST(DSet, SquareIsOneSet) {
    auto d = gallery<2>("unit_square");
    auto r = dset_check(d, geometric_radii(0.3, 0.003, 8), 20);
    EXPECT_NEAR(r.estimated_d, 1.0, 0.05);
    EXPECT_LE(r.c1_hat, r.c2_hat);
    EXPECT_GE(r.estimated_d, 0.0);
    EXPECT_LE(r.estimated_d, 2.0);
}

TEST(DSet, KochDimension) {
    auto d = gallery<2>("koch_snowflake", {{"level", 5}});
    auto r = dset_check(d, geometric_radii(0.2, 0.004, 8), 20);
    EXPECT_NEAR(r.estimated_d, std::log(4.0) / std::log(3.0), 0.05);
    EXPECT_LE(r.c1_hat, r.c2_hat);
}

TEST(DSet, Errors) {
    auto d = gallery<2>("unit_square");
    try {
        dset_check(d, {0.1}, 5);
        FAIL();
    } catch (const Error& e) {
        EXPECT_NE(std::string(e.what()).find("insufficient radii"), std::string::npos);
    }
    EXPECT_THROW(dset_check(d, {0.1, 0.2}, 5), Error);
    EXPECT_THROW(dset_check(d, {0.2, 0.1}, 0), Error);
}

TEST(Descriptor, RoundTrip) {
    auto d = gallery<2>("koch_snowflake", {{"level", 2}});
    auto j = descriptor_json(d);
    EXPECT_EQ(j["tag"], "koch_snowflake");
    EXPECT_EQ(j["params"]["level"], 2);
    j["epsilon"] = 0.15;
    auto e = domain_from_descriptor<2>(j);
    EXPECT_DOUBLE_EQ(e.epsilon(), 0.15);
    EXPECT_DOUBLE_EQ(e.delta(), d.delta());
    EXPECT_EQ(e.section().vertices().size(), d.section().vertices().size());
    j["epsilon"] = 1.5;
    EXPECT_THROW(domain_from_descriptor<2>(j), Error);
}
