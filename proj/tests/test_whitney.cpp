#include <gtest/gtest.h>

#include <deque>
#include <map>

#include "jext/jext.hpp"

using namespace jext;

namespace {

// distance from a box to the boundary of [0,1]^2, for boxes strictly inside; -1 otherwise
double square_inner_gap(const Box<2>& b) {
    if (b.lo[0] <= 0 || b.lo[1] <= 0 || b.hi[0] >= 1 || b.hi[1] >= 1) return -1.0;
    return std::min({b.lo[0], b.lo[1], 1 - b.hi[0], 1 - b.hi[1]});
}

// Independent quadtree: a cell is a Whitney cube iff it satisfies the rule and
// no ancestor does. Counts per level.
std::map<int, std::size_t> reference_quadtree(int max_level) {
    auto fr = DyadicFrame<2>::from_box(gallery<2>("unit_square").bounding_box());
    auto ok = [&](int L, int64_t i, int64_t j) {
        double g = square_inner_gap(fr.box({L, {i, j}}));
        return g >= fr.edge(L);
    };
    std::map<int, std::size_t> counts;
    for (int L = 0; L <= max_level; ++L) {
        int64_t n = int64_t{1} << L;
        for (int64_t i = 0; i < n; ++i)
            for (int64_t j = 0; j < n; ++j) {
                if (!ok(L, i, j)) continue;
                bool maximal = true;
                for (int A = L - 1; A >= 0 && maximal; --A)
                    if (ok(A, i >> (L - A), j >> (L - A))) maximal = false;
                if (maximal) ++counts[L];
            }
    }
    return counts;
}

template <int N>
std::size_t bfs_distance(const WhitneyDecomposition<N>& w, uint32_t a, uint32_t b) {
    // adjacency recomputed from geometry, not from the stored graph
    std::vector<int> dist(w.size(), -1);
    std::deque<uint32_t> q{a};
    dist[a] = 0;
    while (!q.empty()) {
        uint32_t u = q.front();
        q.pop_front();
        for (uint32_t v = 0; v < w.size(); ++v)
            if (dist[v] < 0 && cubes_touch(w.cubes[u], w.cubes[v])) {
                dist[v] = dist[u] + 1;
                q.push_back(v);
            }
    }
    return static_cast<std::size_t>(dist[b]);
}

}  // namespace

TEST(Whitney, UnitSquareMatchesReferenceQuadtree) {
    auto d = gallery<2>("unit_square");
    for (int M : {6, 8}) {
        auto w = whitney_decompose(d, Side::interior, M);
        std::map<int, std::size_t> counts;
        for (const auto& c : w.cubes) ++counts[c.level];
        EXPECT_EQ(counts, reference_quadtree(M)) << "max_level " << M;
    }
}

TEST(Whitney, UnitSquareWhitneyBoundsAndLargestCubesCentral) {
    auto d = gallery<2>("unit_square");
    auto w = whitney_decompose(d, Side::interior, 8);
    for (std::size_t i = 0; i < w.size(); ++i) {
        double r = d.box_boundary_distance(w.box(i)) / w.edge(i);
        EXPECT_GE(r, 1.0);
        EXPECT_LE(r, 4 * std::sqrt(2.0));
    }
    auto c = w.locate({0.5, 0.5});
    ASSERT_TRUE(c);
    EXPECT_EQ(w.cubes[*c].level, w.min_level);
}

TEST(Whitney, PropertiesOnAllGalleryDomains) {
    for (const auto& tag : gallery_tags()) {
        if (gallery_dimension(tag) == 2) {
            auto d = gallery<2>(tag, {{"level", 3}});
            for (int M : {7, 9})
                for (Side s : {Side::interior, Side::complement}) {
                    auto w = whitney_decompose(d, s, M);
                    auto chk = check_whitney(w, d);
                    EXPECT_TRUE(chk.ok()) << tag << " " << side_name(s) << " " << M;
                    EXPECT_GT(w.size(), 0u);
                    EXPECT_GE(chk.w3_min, 0.25);
                    EXPECT_LE(chk.w3_max, 4.0);
                }
        } else {
            auto d = gallery<3>(tag, {{"level", 2}});
            for (Side s : {Side::interior, Side::complement}) {
                auto w = whitney_decompose(d, s, 5);
                EXPECT_TRUE(check_whitney(w, d).ok()) << tag << " " << side_name(s);
            }
        }
    }
}

TEST(Whitney, TouchingRatiosArePowersOfTwo) {
    auto d = gallery<2>("koch_snowflake", {{"level", 3}});
    auto w = whitney_decompose(d, Side::complement, 9);
    for (std::size_t i = 0; i < w.size(); ++i)
        for (uint32_t j : w.neighbors(i)) {
            int gap = std::abs(w.cubes[i].level - w.cubes[j].level);
            EXPECT_LE(gap, 2);
            EXPECT_TRUE(cubes_touch(w.cubes[i], w.cubes[j]));
        }
}

TEST(Whitney, AdjacencyMatchesBruteForce) {
    auto d = gallery<2>("l_shape");
    auto w = whitney_decompose(d, Side::interior, 6);
    for (std::size_t i = 0; i < w.size(); ++i) {
        std::vector<uint32_t> ref;
        for (uint32_t j = 0; j < w.size(); ++j)
            if (j != i && cubes_touch(w.cubes[i], w.cubes[j])) ref.push_back(j);
        auto nb = w.neighbors(i);
        EXPECT_EQ(std::vector<uint32_t>(nb.begin(), nb.end()), ref);
    }
}

TEST(Whitney, DeterministicAndNested) {
    auto d = gallery<2>("koch_snowflake", {{"level", 3}});
    auto a = whitney_decompose(d, Side::interior, 8);
    auto b = whitney_decompose(d, Side::interior, 8);
    EXPECT_EQ(a.cubes, b.cubes);
    auto c = whitney_decompose(d, Side::interior, 9);
    std::vector<DyadicCube<2>> coarse;
    for (const auto& q : c.cubes)
        if (q.level <= 8) coarse.push_back(q);
    EXPECT_EQ(a.cubes, coarse);
    EXPECT_GT(a.truncation.cubes, 0u);
    EXPECT_EQ(a.truncation.level, 8);
}

TEST(Whitney, Errors) {
    auto d = gallery<2>("unit_square");
    EXPECT_THROW(whitney_decompose(d, Side::interior, 0), Error);
    EXPECT_THROW(whitney_decompose(d, Side::interior, 40), Error);
    auto w1 = whitney_decompose(d, Side::interior, 5);
    EXPECT_THROW(select_w3(w1, d), Error);
}

TEST(SelectW3, ThresholdFormula) {
    auto d = gallery<2>("unit_square");
    d.set_parameters(0.4, 1.2, 1.0);
    EXPECT_NEAR(w3_threshold(d), 0.015, 1e-15);
    auto w2 = whitney_decompose(d, Side::complement, 9);
    auto w3 = select_w3(w2, d);
    EXPECT_FALSE(w3.empty());
    for (uint32_t i = 0; i < w2.size(); ++i) {
        bool in = std::binary_search(w3.begin(), w3.end(), i);
        EXPECT_EQ(in, w2.edge(i) <= 0.015);
    }
    // too coarse: every cube is above the threshold
    auto coarse = whitney_decompose(d, Side::complement, 5);
    EXPECT_TRUE(select_w3(coarse, d).empty());
}

TEST(SelectW3, KochExhaustiveCount) {
    auto d = gallery<2>("koch_snowflake", {{"level", 3}});
    auto w2 = whitney_decompose(d, Side::complement, 10);
    const double t = d.epsilon() * d.delta() / 32.0;
    std::size_t count = 0;
    for (const auto& c : w2.cubes)
        if (w2.frame.box(c).extent(0) <= t) ++count;
    EXPECT_EQ(select_w3(w2, d).size(), count);
    EXPECT_GT(count, 0u);
    EXPECT_EQ(min_w3_level(d), 10);
}

TEST(CubeGraphPath, TrivialCases) {
    auto d = gallery<2>("unit_square");
    auto w = whitney_decompose(d, Side::interior, 6);
    EXPECT_EQ(cube_graph_path(w, 3, 3), std::vector<uint32_t>{3});
    uint32_t nb = w.neighbors(3)[0];
    EXPECT_EQ(cube_graph_path(w, 3, nb), (std::vector<uint32_t>{3, nb}));
    EXPECT_THROW(cube_graph_path(w, 0, static_cast<uint32_t>(w.size())), Error);
}

TEST(CubeGraphPath, FarCornersMatchBfs) {
    auto d = gallery<2>("unit_square");
    auto w = whitney_decompose(d, Side::interior, 7);
    auto a = *w.locate({0.03, 0.03});
    auto b = *w.locate({0.97, 0.97});
    auto path = cube_graph_path(w, a, b);
    EXPECT_EQ(path.front(), a);
    EXPECT_EQ(path.back(), b);
    EXPECT_EQ(path.size() - 1, bfs_distance(w, a, b));
    for (std::size_t k = 1; k < path.size(); ++k) EXPECT_TRUE(cubes_touch(w.cubes[path[k - 1]], w.cubes[path[k]]));
}

TEST(DyadicCube, ExactGeometry) {
    DyadicFrame<2> fr{{-0.1, -0.1}, 1.2};
    DyadicCube<2> c{10, {513, 7}};
    auto b = fr.box(c);
    EXPECT_EQ(b.lo[0], -0.1 + std::ldexp(1.2, -10) * 513);
    EXPECT_EQ(c.child(3).parent(), c);
    EXPECT_TRUE(cubes_touch(c, DyadicCube<2>{10, {514, 8}}));
    EXPECT_FALSE(cubes_overlap(c, DyadicCube<2>{10, {514, 8}}));
    EXPECT_TRUE(cubes_overlap(c, c.parent()));
    EXPECT_EQ(cube_gap_squared(c, DyadicCube<2>{10, {516, 7}}, 10), 4);
}
