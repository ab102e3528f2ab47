#pragma once

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <unordered_map>
#include <vector>

#include "whitney.hpp"

namespace jext {

/// Reflected cubes: for each W3 cube (given by its id in W2) the chosen W1 cube.
struct ReflectionMap {
    std::vector<uint32_t> w3;          // ids into W2
    std::vector<uint32_t> reflected;   // ids into W1, parallel to w3
    std::vector<double> size_ratio;    // edge(Q*) / edge(Q)
    std::vector<double> dist_ratio;    // dist(Q, Q*) / edge(Q)
    double c_refl = 0.0;               // max dist_ratio
    std::size_t size() const { return w3.size(); }
};

/// W1 cube closest to `q` among edges in [edge(q), 4 edge(q)]. The index box
/// grows geometrically until no unvisited cube can be closer. Ties go to the
/// lexicographically smallest (level, index).
template <int N>
uint32_t nearest_reflection(const WhitneyDecomposition<N>& w1, const DyadicCube<N>& q, int64_t* gap_sq_out = nullptr) {
    const int Lq = q.level;
    int64_t best_sq = std::numeric_limits<int64_t>::max();
    uint32_t best = UINT32_MAX;
    const int64_t limit = int64_t{1} << Lq;
    for (int64_t R = 2;; R *= 2) {
        for (int L = Lq; L >= std::max(0, Lq - 2); --L) {
            if (L < w1.min_level || L > w1.max_level) continue;
            int sh = Lq - L;
            int64_t cells = int64_t{1} << L;
            std::array<int64_t, N> lo, hi;
            for (int a = 0; a < N; ++a) {
                int64_t c = q.index[a] >> sh;
                lo[a] = std::max<int64_t>(0, c - R);
                hi[a] = std::min<int64_t>(cells - 1, c + R);
            }
            DyadicCube<N> s{L, lo};
            while (true) {
                if (auto id = w1.find(s)) {
                    int64_t g = cube_gap_squared(q, s, Lq);
                    if (g < best_sq || (g == best_sq && s < w1.cubes[best])) {
                        best_sq = g;
                        best = *id;
                    }
                }
                int a = 0;
                for (; a < N; ++a) {
                    if (++s.index[a] <= hi[a]) break;
                    s.index[a] = lo[a];
                }
                if (a == N) break;
            }
        }
        // anything outside the box is at least R edges of q away
        if (best != UINT32_MAX && best_sq <= R * R) break;
        if (R > limit) break;
    }
    if (best == UINT32_MAX)
        fail_numerical("no interior cube in the admissible size band near a W3 cube; raise max_level");
    if (gap_sq_out) *gap_sq_out = best_sq;
    return best;
}

template <int N>
ReflectionMap build_reflection(const WhitneyDecomposition<N>& w1, const WhitneyDecomposition<N>& w2,
                               const std::vector<uint32_t>& w3) {
    if (w1.side != Side::interior) fail_config("build_reflection needs the interior decomposition as W1");
    if (w3.empty()) fail_config("build_reflection: W3 is empty; raise max_level");
    ReflectionMap m;
    m.w3 = w3;
    m.reflected.resize(w3.size());
    m.size_ratio.resize(w3.size());
    m.dist_ratio.resize(w3.size());
    parallel_for(
        w3.size(),
        [&](std::size_t b, std::size_t e) {
            for (std::size_t i = b; i < e; ++i) {
                const auto& q = w2.cubes[w3[i]];
                int64_t g = 0;
                uint32_t s = nearest_reflection(w1, q, &g);
                m.reflected[i] = s;
                m.size_ratio[i] = std::ldexp(1.0, q.level - w1.cubes[s].level);
                m.dist_ratio[i] = std::sqrt(static_cast<double>(g));
            }
        },
        64);
    for (double r : m.dist_ratio) m.c_refl = std::max(m.c_refl, r);
    return m;
}

/// Shortest path in W1 (breadth-first, neighbours by ascending id), local
/// bookkeeping so nearby endpoints stay cheap.
template <int N>
std::vector<uint32_t> local_cube_path(const WhitneyDecomposition<N>& w, uint32_t a, uint32_t b) {
    if (a == b) return {a};
    std::unordered_map<uint32_t, uint32_t> prev;
    prev.emplace(a, a);
    std::deque<uint32_t> queue{a};
    while (!queue.empty()) {
        uint32_t u = queue.front();
        queue.pop_front();
        for (uint32_t v : w.neighbors(u)) {
            if (!prev.emplace(v, u).second) continue;
            if (v == b) {
                std::vector<uint32_t> path{b};
                while (path.back() != a) path.push_back(prev[path.back()]);
                std::reverse(path.begin(), path.end());
                return path;
            }
            queue.push_back(v);
        }
    }
    fail_invariant("reflected cubes lie in different components of the interior decomposition");
}

/// Chains between reflected cubes of touching W3 cubes (self pairs included).
struct ChainSet {
    // W3 positions (indices into ReflectionMap::w3) touching each W3 cube, self first
    std::vector<std::vector<uint32_t>> partners;
    // chains[i][t] joins reflected[i] to reflected[partners[i][t]] (ids into W1)
    std::vector<std::vector<std::vector<uint32_t>>> chains;
    std::size_t max_length = 0;
    std::size_t pair_count = 0;  // unordered touching pairs, self excluded
};

template <int N>
ChainSet build_chains(const ReflectionMap& refl, const WhitneyDecomposition<N>& w1,
                      const WhitneyDecomposition<N>& w2) {
    ChainSet cs;
    const std::size_t n = refl.size();
    std::unordered_map<uint32_t, uint32_t> pos;  // W2 id -> W3 position
    for (uint32_t i = 0; i < n; ++i) pos.emplace(refl.w3[i], i);
    cs.partners.resize(n);
    cs.chains.resize(n);
    for (uint32_t i = 0; i < n; ++i) {
        cs.partners[i].push_back(i);
        for (uint32_t nb : w2.neighbors(refl.w3[i]))
            if (auto it = pos.find(nb); it != pos.end()) cs.partners[i].push_back(it->second);
    }
    // forward chains for i <= k, then mirror
    std::vector<std::vector<std::vector<uint32_t>>> fwd(n);
    parallel_for(
        n,
        [&](std::size_t b, std::size_t e) {
            for (std::size_t i = b; i < e; ++i) {
                fwd[i].resize(cs.partners[i].size());
                for (std::size_t t = 0; t < cs.partners[i].size(); ++t) {
                    uint32_t k = cs.partners[i][t];
                    if (k < i) continue;
                    fwd[i][t] = local_cube_path(w1, refl.reflected[i], refl.reflected[k]);
                }
            }
        },
        16);
    for (uint32_t i = 0; i < n; ++i) {
        cs.chains[i].resize(cs.partners[i].size());
        for (std::size_t t = 0; t < cs.partners[i].size(); ++t) {
            uint32_t k = cs.partners[i][t];
            if (k >= i) {
                cs.chains[i][t] = std::move(fwd[i][t]);
                if (k > i) ++cs.pair_count;
            }
        }
    }
    for (uint32_t i = 0; i < n; ++i)
        for (std::size_t t = 0; t < cs.partners[i].size(); ++t) {
            uint32_t k = cs.partners[i][t];
            if (k < i) {
                auto& src = cs.chains[k];
                auto back = std::find(cs.partners[k].begin(), cs.partners[k].end(), i) - cs.partners[k].begin();
                cs.chains[i][t] = std::vector<uint32_t>(src[back].rbegin(), src[back].rend());
            }
            cs.max_length = std::max(cs.max_length, cs.chains[i][t].size());
        }
    return cs;
}

/// Union of the chains from W3 position i to all its partners (W1 ids, sorted).
inline std::vector<uint32_t> chain_union(const ChainSet& cs, std::size_t i) {
    std::vector<uint32_t> u;
    for (const auto& c : cs.chains[i]) u.insert(u.end(), c.begin(), c.end());
    std::sort(u.begin(), u.end());
    u.erase(std::unique(u.begin(), u.end()), u.end());
    return u;
}

struct OverlapStatistic {
    // per W3 cube j: max over points of sum_k chi(F_{j,k}), evaluated on W1 cubes
    std::size_t max_multiplicity = 0;
    std::map<std::size_t, std::size_t> histogram;  // per-j maximum -> number of j
    // for each W1 cube, how many of the unions F(Q_j) contain it
    std::size_t global_max = 0;
    std::map<std::size_t, std::size_t> global_histogram;
};

inline OverlapStatistic overlap_statistic(const ChainSet& cs, std::size_t w1_size) {
    OverlapStatistic o;
    std::vector<std::size_t> global(w1_size, 0);
    std::unordered_map<uint32_t, std::size_t> count;
    for (std::size_t j = 0; j < cs.chains.size(); ++j) {
        count.clear();
        for (const auto& c : cs.chains[j]) {
            std::vector<uint32_t> u(c.begin(), c.end());
            std::sort(u.begin(), u.end());
            u.erase(std::unique(u.begin(), u.end()), u.end());
            for (uint32_t s : u) ++count[s];
        }
        std::size_t m = 0;
        for (auto& [s, k] : count) {
            m = std::max(m, k);
            ++global[s];
        }
        o.max_multiplicity = std::max(o.max_multiplicity, m);
        ++o.histogram[m];
    }
    for (std::size_t g : global) {
        o.global_max = std::max(o.global_max, g);
        ++o.global_histogram[g];
    }
    return o;
}

}  // namespace jext
