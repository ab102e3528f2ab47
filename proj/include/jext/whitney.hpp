#pragma once

#include <algorithm>
#include <cmath>
#include <deque>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "domain.hpp"
#include "dyadic.hpp"

namespace jext {

enum class Side { interior, complement };

inline const char* side_name(Side s) { return s == Side::interior ? "interior" : "complement"; }

/// Cubes that would have to be finer than max_level.
struct TruncationLedger {
    int level = 0;
    std::size_t cubes = 0;
    double volume = 0.0;
};

template <int N>
class WhitneyDecomposition {
public:
    using Cube = DyadicCube<N>;

    Side side = Side::interior;
    DyadicFrame<N> frame;
    std::vector<Cube> cubes;            // sorted by (level, index)
    std::vector<double> boundary_dist;  // dist(S, boundary) per cube
    std::vector<uint32_t> adj_offsets;  // CSR adjacency, neighbours sorted by id
    std::vector<uint32_t> adj;
    int min_level = 0;
    int max_level = 0;
    TruncationLedger truncation;

    std::size_t size() const { return cubes.size(); }
    double edge(std::size_t i) const { return frame.edge(cubes[i].level); }
    Box<N> box(std::size_t i) const { return frame.box(cubes[i]); }
    Vec<N> center(std::size_t i) const { return frame.center(cubes[i]); }

    std::span<const uint32_t> neighbors(std::size_t i) const {
        return {adj.data() + adj_offsets[i], adj.data() + adj_offsets[i + 1]};
    }

    std::optional<uint32_t> find(const Cube& c) const {
        auto it = lookup_.find(c);
        if (it == lookup_.end()) return std::nullopt;
        return it->second;
    }

    /// Id of the cube containing p (closed cubes; lowest id wins on shared faces).
    std::optional<uint32_t> locate(const Vec<N>& p) const {
        for (int L = min_level; L <= max_level; ++L) {
            Cube c = frame.locate(p, L);
            if (auto id = find(c); id && frame.box(c).contains(p)) return id;
        }
        return std::nullopt;
    }

    void rebuild_lookup() {
        lookup_.clear();
        lookup_.reserve(cubes.size());
        for (uint32_t i = 0; i < cubes.size(); ++i) lookup_.emplace(cubes[i], i);
    }

    void rebuild_adjacency() {
        std::vector<std::vector<uint32_t>> nb(cubes.size());
        parallel_for(
            cubes.size(),
            [&](std::size_t b, std::size_t e) {
                for (std::size_t i = b; i < e; ++i) nb[i] = touching_ids(cubes[i], static_cast<uint32_t>(i));
            },
            256);
        adj_offsets.assign(cubes.size() + 1, 0);
        adj.clear();
        for (std::size_t i = 0; i < cubes.size(); ++i) {
            adj.insert(adj.end(), nb[i].begin(), nb[i].end());
            adj_offsets[i + 1] = static_cast<uint32_t>(adj.size());
        }
    }

private:
    // Neighbours can only be within two levels (w3); enumerate the candidate
    // index ranges per level and keep the ones that exist and touch.
    std::vector<uint32_t> touching_ids(const Cube& c, uint32_t self) const {
        std::vector<uint32_t> out;
        for (int L = std::max(min_level, c.level - 2); L <= std::min(max_level, c.level + 2); ++L) {
            std::array<int64_t, N> lo, hi;
            if (L <= c.level) {
                int sh = c.level - L;
                for (int i = 0; i < N; ++i) {
                    lo[i] = (c.index[i] >> sh) - 1;
                    hi[i] = (c.index[i] >> sh) + 1;
                }
            } else {
                int64_t f = int64_t{1} << (L - c.level);
                for (int i = 0; i < N; ++i) {
                    lo[i] = c.index[i] * f - 1;
                    hi[i] = (c.index[i] + 1) * f;
                }
            }
            int64_t cells = int64_t{1} << L;
            for (int i = 0; i < N; ++i) {
                lo[i] = std::max<int64_t>(lo[i], 0);
                hi[i] = std::min<int64_t>(hi[i], cells - 1);
            }
            Cube q{L, lo};
            while (true) {
                if (auto id = find(q); id && *id != self && cubes_touch(c, q)) out.push_back(*id);
                int ax = 0;
                for (; ax < N; ++ax) {
                    if (++q.index[ax] <= hi[ax]) break;
                    q.index[ax] = lo[ax];
                }
                if (ax == N) break;
            }
        }
        std::sort(out.begin(), out.end());
        return out;
    }

    std::unordered_map<Cube, uint32_t, DyadicCubeHash<N>> lookup_;
};

/// Maximal dyadic cubes S with dist(S, boundary) >= edge(S) inside the chosen
/// side of the boundary, restricted to the domain's root box. Cubes still
/// undecided at max_level go to the truncation ledger.
template <int N>
WhitneyDecomposition<N> whitney_decompose(const Domain<N>& dom, Side side, int max_level) {
    if (max_level < 1) fail_config("max_level must be at least 1");
    if (max_level > 24) fail_config("max_level above 24 is not supported");
    using Cube = DyadicCube<N>;
    WhitneyDecomposition<N> w;
    w.side = side;
    w.frame = DyadicFrame<N>::from_box(dom.bounding_box());
    w.max_level = max_level;
    w.truncation.level = max_level;

    enum class Verdict : uint8_t { accept, split, drop, truncate };
    std::vector<Cube> frontier{Cube{0, {}}};
    std::vector<std::pair<Cube, double>> accepted;
    for (int L = 0; L <= max_level && !frontier.empty(); ++L) {
        std::vector<Verdict> verdict(frontier.size());
        std::vector<double> dist(frontier.size());
        const double e = w.frame.edge(L);
        parallel_for(
            frontier.size(),
            [&](std::size_t b, std::size_t end) {
                for (std::size_t i = b; i < end; ++i) {
                    Box<N> box = w.frame.box(frontier[i]);
                    double d = dom.box_boundary_distance(box);
                    dist[i] = d;
                    Verdict v;
                    if (d == 0.0) {
                        v = Verdict::split;
                    } else {
                        bool inside = dom.contains(box.center());
                        if (inside != (side == Side::interior)) v = Verdict::drop;
                        else if (d >= e) v = Verdict::accept;
                        else v = Verdict::split;
                    }
                    if (v == Verdict::split && L == max_level) v = Verdict::truncate;
                    verdict[i] = v;
                }
            },
            64);
        std::vector<Cube> next;
        for (std::size_t i = 0; i < frontier.size(); ++i) {
            switch (verdict[i]) {
                case Verdict::accept: accepted.push_back({frontier[i], dist[i]}); break;
                case Verdict::split:
                    for (int c = 0; c < (1 << N); ++c) next.push_back(frontier[i].child(c));
                    break;
                case Verdict::truncate:
                    ++w.truncation.cubes;
                    w.truncation.volume += std::pow(e, N);
                    break;
                case Verdict::drop: break;
            }
        }
        frontier = std::move(next);
    }
    std::sort(accepted.begin(), accepted.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    w.cubes.reserve(accepted.size());
    w.boundary_dist.reserve(accepted.size());
    for (auto& [c, d] : accepted) {
        w.cubes.push_back(c);
        w.boundary_dist.push_back(d);
    }
    w.min_level = w.cubes.empty() ? 0 : w.cubes.front().level;
    if (!w.cubes.empty()) w.max_level = w.cubes.back().level;
    w.rebuild_lookup();
    w.rebuild_adjacency();
    return w;
}

/// Cubes of the complement decomposition with edge <= eps * delta / (16 n).
template <int N>
double w3_threshold(const Domain<N>& dom) {
    return dom.epsilon() * dom.delta() / (16.0 * N);
}

/// Coarsest level whose cubes fit under the W3 threshold.
template <int N>
int min_w3_level(const Domain<N>& dom) {
    auto fr = DyadicFrame<N>::from_box(dom.bounding_box());
    int L = 0;
    while (fr.edge(L) > w3_threshold(dom)) ++L;
    return L;
}

template <int N>
std::vector<uint32_t> select_w3(const WhitneyDecomposition<N>& w2, const Domain<N>& dom) {
    if (w2.side != Side::complement) fail_config("select_w3 needs the complement decomposition");
    const double t = w3_threshold(dom);
    std::vector<uint32_t> out;
    for (uint32_t i = 0; i < w2.size(); ++i)
        if (w2.edge(i) <= t) out.push_back(i);
    return out;
}

/// Shortest path in the touching-cube graph (breadth-first, neighbour order by id).
template <int N>
std::vector<uint32_t> cube_graph_path(const WhitneyDecomposition<N>& w, uint32_t a, uint32_t b) {
    if (a >= w.size() || b >= w.size()) fail_config("cube_graph_path: cube id out of range");
    if (a == b) return {a};
    std::vector<uint32_t> prev(w.size(), UINT32_MAX);
    std::deque<uint32_t> queue{a};
    prev[a] = a;
    while (!queue.empty()) {
        uint32_t u = queue.front();
        queue.pop_front();
        for (uint32_t v : w.neighbors(u)) {
            if (prev[v] != UINT32_MAX) continue;
            prev[v] = u;
            if (v == b) {
                std::vector<uint32_t> path{b};
                while (path.back() != a) path.push_back(prev[path.back()]);
                std::reverse(path.begin(), path.end());
                return path;
            }
            queue.push_back(v);
        }
    }
    fail_invariant("cube_graph_path: cubes lie in disconnected components");
}

/// Outcome of re-checking the three Whitney properties on a decomposition.
struct WhitneyCheck {
    std::size_t cubes = 0;
    std::size_t w1_violations = 0;  // 1 <= dist/edge <= 4 sqrt(n)
    std::size_t w2_violations = 0;  // interiors pairwise disjoint
    std::size_t w3_violations = 0;  // touching edge ratio in [1/4, 4]
    std::size_t touch_violations = 0;
    double w1_min = 0.0, w1_max = 0.0;
    double w3_min = 0.0, w3_max = 0.0;
    bool ok() const { return w1_violations + w2_violations + w3_violations + touch_violations == 0; }
};

/// Independent re-check: distances recomputed from the domain, overlaps from
/// ancestor lookups, edge ratios from the stored adjacency.
template <int N>
WhitneyCheck check_whitney(const WhitneyDecomposition<N>& w, const Domain<N>& dom) {
    WhitneyCheck r;
    r.cubes = w.size();
    const double upper = 4.0 * std::sqrt(static_cast<double>(N));
    r.w1_min = std::numeric_limits<double>::infinity();
    r.w3_min = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < w.size(); ++i) {
        double ratio = dom.box_boundary_distance(w.box(i)) / w.edge(i);
        r.w1_min = std::min(r.w1_min, ratio);
        r.w1_max = std::max(r.w1_max, ratio);
        if (!(ratio >= 1.0 && ratio <= upper)) ++r.w1_violations;
        auto c = w.cubes[i];
        while (c.level > 0) {
            c = c.parent();
            if (w.find(c)) {
                ++r.w2_violations;
                break;
            }
        }
        for (uint32_t j : w.neighbors(i)) {
            double q = w.edge(i) / w.edge(j);
            r.w3_min = std::min(r.w3_min, q);
            r.w3_max = std::max(r.w3_max, q);
            if (!(q >= 0.25 && q <= 4.0)) ++r.w3_violations;
            if (!cubes_touch(w.cubes[i], w.cubes[j]) || cubes_overlap(w.cubes[i], w.cubes[j])) ++r.touch_violations;
        }
        // every coarser-or-equal toucher, at any level gap, must be a listed
        // neighbour within two levels
        auto nb = w.neighbors(i);
        const auto& ci = w.cubes[i];
        for (int L = w.min_level; L <= ci.level; ++L) {
            int sh = ci.level - L;
            std::array<int64_t, N> base;
            for (int a = 0; a < N; ++a) base[a] = ci.index[a] >> sh;
            for (int code = 0; code < static_cast<int>(std::pow(3, N)); ++code) {
                DyadicCube<N> q{L, base};
                int t = code;
                for (int a = 0; a < N; ++a, t /= 3) q.index[a] += t % 3 - 1;
                auto id = w.find(q);
                if (!id || *id == i || !cubes_touch(ci, q)) continue;
                if (sh > 2) ++r.w3_violations;
                else if (!std::binary_search(nb.begin(), nb.end(), *id)) ++r.touch_violations;
            }
        }
    }
    if (w.size() == 0) r.w1_min = r.w3_min = 0.0;
    if (r.w3_min == std::numeric_limits<double>::infinity()) r.w3_min = r.w3_max = 1.0;
    return r;
}

}  // namespace jext
