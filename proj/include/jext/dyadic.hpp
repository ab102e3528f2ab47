#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <tuple>

#include "core.hpp"

namespace jext {

/// Cube 2^-L * ([k1, k1+1] x ... ) relative to a root cube.
template <int N>
struct DyadicCube {
    int level = 0;
    std::array<int64_t, N> index{};

    friend bool operator==(const DyadicCube& a, const DyadicCube& b) {
        return a.level == b.level && a.index == b.index;
    }
    friend bool operator<(const DyadicCube& a, const DyadicCube& b) {
        return std::tie(a.level, a.index) < std::tie(b.level, b.index);
    }

    DyadicCube parent() const {
        DyadicCube p{level - 1, {}};
        for (int i = 0; i < N; ++i) p.index[i] = index[i] >> 1;  // floor division
        return p;
    }

    /// Child number `c` in [0, 2^N), bit i selects the upper half along axis i.
    DyadicCube child(int c) const {
        DyadicCube ch{level + 1, {}};
        for (int i = 0; i < N; ++i) ch.index[i] = 2 * index[i] + ((c >> i) & 1);
        return ch;
    }
};

template <int N>
struct DyadicCubeHash {
    std::size_t operator()(const DyadicCube<N>& c) const {
        uint64_t h = 0x9e3779b97f4a7c15ull ^ static_cast<uint64_t>(c.level);
        for (int i = 0; i < N; ++i) {
            h ^= static_cast<uint64_t>(c.index[i]) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
        }
        return static_cast<std::size_t>(h);
    }
};

/// Closed cubes touch (share at least one point). Works across levels in
/// integer arithmetic.
template <int N>
bool cubes_touch(const DyadicCube<N>& a, const DyadicCube<N>& b) {
    int m = std::max(a.level, b.level);
    int64_t fa = int64_t{1} << (m - a.level);
    int64_t fb = int64_t{1} << (m - b.level);
    for (int i = 0; i < N; ++i) {
        int64_t alo = a.index[i] * fa, ahi = alo + fa;
        int64_t blo = b.index[i] * fb, bhi = blo + fb;
        if (alo > bhi || blo > ahi) return false;
    }
    return true;
}

/// Closed cubes share interior points.
template <int N>
bool cubes_overlap(const DyadicCube<N>& a, const DyadicCube<N>& b) {
    int m = std::max(a.level, b.level);
    int64_t fa = int64_t{1} << (m - a.level);
    int64_t fb = int64_t{1} << (m - b.level);
    for (int i = 0; i < N; ++i) {
        int64_t alo = a.index[i] * fa, ahi = alo + fa;
        int64_t blo = b.index[i] * fb, bhi = blo + fb;
        if (alo >= bhi || blo >= ahi) return false;
    }
    return true;
}

/// Squared gap between two cubes in units of the finer level's edge, exact.
template <int N>
int64_t cube_gap_squared(const DyadicCube<N>& a, const DyadicCube<N>& b, int at_level) {
    int64_t fa = int64_t{1} << (at_level - a.level);
    int64_t fb = int64_t{1} << (at_level - b.level);
    int64_t s = 0;
    for (int i = 0; i < N; ++i) {
        int64_t alo = a.index[i] * fa, ahi = alo + fa;
        int64_t blo = b.index[i] * fb, bhi = blo + fb;
        int64_t g = std::max<int64_t>({0, blo - ahi, alo - bhi});
        s += g * g;
    }
    return s;
}

/// Maps dyadic indices to geometry. Corners are recomputed from (L, k) every
/// time, so there is no accumulated drift.
template <int N>
struct DyadicFrame {
    Vec<N> origin{};
    double side = 1.0;

    static DyadicFrame from_box(const Box<N>& root) { return {root.lo, root.extent(0)}; }

    double edge(int level) const { return std::ldexp(side, -level); }

    Box<N> box(const DyadicCube<N>& c) const {
        double e = edge(c.level);
        Box<N> b;
        for (int i = 0; i < N; ++i) {
            b.lo[i] = origin[i] + e * static_cast<double>(c.index[i]);
            b.hi[i] = origin[i] + e * static_cast<double>(c.index[i] + 1);
        }
        return b;
    }

    Vec<N> center(const DyadicCube<N>& c) const { return box(c).center(); }

    /// Scaled cube (same centre, edge multiplied by `factor`).
    Box<N> scaled_box(const DyadicCube<N>& c, double factor) const {
        Box<N> b = box(c);
        double half = 0.5 * factor * edge(c.level);
        Vec<N> m = b.center();
        for (int i = 0; i < N; ++i) {
            b.lo[i] = m[i] - half;
            b.hi[i] = m[i] + half;
        }
        return b;
    }

    /// Cube of the given level containing p (clamped to the root).
    DyadicCube<N> locate(const Vec<N>& p, int level) const {
        DyadicCube<N> c{level, {}};
        int64_t cells = int64_t{1} << level;
        for (int i = 0; i < N; ++i) {
            int64_t k = static_cast<int64_t>(std::floor((p[i] - origin[i]) / edge(level)));
            c.index[i] = std::clamp<int64_t>(k, 0, cells - 1);
        }
        return c;
    }
};

}  // namespace jext
