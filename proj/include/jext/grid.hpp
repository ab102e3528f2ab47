#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "domain.hpp"
#include "dyadic.hpp"

namespace jext {

/// Uniform node lattice origin + h * i, i in [0, dims).
template <int N>
struct GridSpec {
    Vec<N> origin{};
    double h = 1.0;
    std::array<int64_t, N> dims{};

    std::size_t count() const {
        std::size_t c = 1;
        for (int i = 0; i < N; ++i) c *= static_cast<std::size_t>(dims[i]);
        return c;
    }
    std::size_t stride(int axis) const {
        std::size_t s = 1;
        for (int i = 0; i < axis; ++i) s *= static_cast<std::size_t>(dims[i]);
        return s;
    }
    std::size_t linear(const std::array<int64_t, N>& idx) const {
        std::size_t l = 0;
        for (int i = N - 1; i >= 0; --i) l = l * static_cast<std::size_t>(dims[i]) + static_cast<std::size_t>(idx[i]);
        return l;
    }
    std::array<int64_t, N> multi(std::size_t l) const {
        std::array<int64_t, N> idx;
        for (int i = 0; i < N; ++i) {
            idx[i] = static_cast<int64_t>(l % static_cast<std::size_t>(dims[i]));
            l /= static_cast<std::size_t>(dims[i]);
        }
        return idx;
    }
    Vec<N> point(const std::array<int64_t, N>& idx) const {
        Vec<N> p;
        for (int i = 0; i < N; ++i) p[i] = origin[i] + h * static_cast<double>(idx[i]);
        return p;
    }
    Vec<N> point(std::size_t l) const { return point(multi(l)); }
    double cell_volume() const { return std::pow(h, N); }

    /// Nodes at the corners of all level-G cubes of the root.
    static GridSpec dyadic(const Box<N>& root, int G) {
        if (G < 1 || G > 14) fail_config("grid level must lie in [1, 14]");
        GridSpec g;
        g.origin = root.lo;
        g.h = std::ldexp(root.extent(0), -G);
        for (int i = 0; i < N; ++i) g.dims[i] = (int64_t{1} << G) + 1;
        if (static_cast<double>(g.count()) > 3e8) fail_config("grid too large");
        return g;
    }

    /// Smallest lattice with spacing h starting at box.lo and covering box.
    static GridSpec covering(const Box<N>& box, double h) {
        if (!(h > 0.0)) fail_config("grid spacing must be positive");
        GridSpec g;
        g.origin = box.lo;
        g.h = h;
        for (int i = 0; i < N; ++i) g.dims[i] = static_cast<int64_t>(std::ceil(box.extent(i) / h - 1e-9)) + 1;
        if (static_cast<double>(g.count()) > 3e8) fail_config("grid too large");
        return g;
    }

    /// Level G with h = side * 2^-G if the lattice is aligned with the frame, else -1.
    int dyadic_level(const DyadicFrame<N>& fr) const {
        for (int i = 0; i < N; ++i)
            if (std::abs(origin[i] - fr.origin[i]) > 1e-12 * fr.side) return -1;
        double q = std::log2(fr.side / h);
        int G = static_cast<int>(std::lround(q));
        if (std::abs(q - G) > 1e-9) return -1;
        for (int i = 0; i < N; ++i)
            if (dims[i] != (int64_t{1} << G) + 1) return -1;
        return G;
    }

    friend bool operator==(const GridSpec& a, const GridSpec& b) {
        return a.origin == b.origin && a.h == b.h && a.dims == b.dims;
    }
};

/// Node classes: outside the domain, inside it, or in the uncovered
/// truncation shell of the complement.
enum NodeClass : uint8_t { node_exterior = 0, node_interior = 1, node_shell = 2 };

/// Multi-component field sampled on a grid; values[node * comps + c].
template <int N>
struct GridField {
    GridSpec<N> grid;
    int comps = N;
    std::vector<double> values;
    std::vector<uint8_t> mask;

    GridField() = default;
    GridField(const GridSpec<N>& g, int c, std::vector<uint8_t> m)
        : grid(g), comps(c), values(g.count() * static_cast<std::size_t>(c), 0.0), mask(std::move(m)) {
        if (mask.size() != g.count()) fail_config("mask size does not match the grid");
    }

    double& at(std::size_t node, int c) { return values[node * comps + c]; }
    double at(std::size_t node, int c) const { return values[node * comps + c]; }
    std::size_t nodes() const { return grid.count(); }
    bool interior(std::size_t node) const { return mask[node] == node_interior; }
};

/// Open-set membership of every node. Rows are filled from sorted boundary
/// crossings; nodes that sit on a crossing (or rows through a vertex) fall
/// back to the exact predicate.
template <int N>
std::vector<uint8_t> membership_mask(const Domain<N>& dom, const GridSpec<N>& g) {
    const Polygon& poly = dom.section();
    const int64_t nx = g.dims[0], ny = g.dims[1];
    std::vector<uint8_t> plane(static_cast<std::size_t>(nx * ny), node_exterior);
    std::vector<double> vy;
    for (const auto& v : poly.vertices()) vy.push_back(v[1]);
    std::sort(vy.begin(), vy.end());
    const double tol = 1e-9 * g.h;
    parallel_for(
        static_cast<std::size_t>(ny),
        [&](std::size_t b, std::size_t e) {
            for (std::size_t j = b; j < e; ++j) {
                double y = g.origin[1] + g.h * static_cast<double>(j);
                auto it = std::lower_bound(vy.begin(), vy.end(), y - tol);
                bool vertex_row = it != vy.end() && *it <= y + tol;
                uint8_t* row = plane.data() + j * nx;
                if (vertex_row) {
                    for (int64_t i = 0; i < nx; ++i)
                        row[i] = poly.contains({g.origin[0] + g.h * static_cast<double>(i), y}) ? node_interior
                                                                                                 : node_exterior;
                    continue;
                }
                auto xs = poly.row_crossings(y);
                for (std::size_t c = 0; c + 1 < xs.size(); c += 2) {
                    int64_t i0 = std::max<int64_t>(0, static_cast<int64_t>(std::ceil((xs[c] - g.origin[0]) / g.h)));
                    int64_t i1 = std::min<int64_t>(nx - 1,
                                                   static_cast<int64_t>(std::floor((xs[c + 1] - g.origin[0]) / g.h)));
                    for (int64_t i = i0; i <= i1; ++i) {
                        double x = g.origin[0] + g.h * static_cast<double>(i);
                        if (x - xs[c] <= tol || xs[c + 1] - x <= tol)
                            row[i] = poly.contains({x, y}) ? node_interior : node_exterior;
                        else
                            row[i] = node_interior;
                    }
                }
                // nodes just outside a crossing pair can still be on the boundary; the
                // exact test above handles the near ones, the rest are exterior
            }
        },
        16);
    if constexpr (N == 2) {
        return plane;
    } else {
        std::vector<uint8_t> mask(g.count(), node_exterior);
        const std::size_t layer = static_cast<std::size_t>(nx * ny);
        for (int64_t k = 0; k < g.dims[2]; ++k) {
            double z = g.origin[2] + g.h * static_cast<double>(k);
            if (!(z > 0.0 && z < dom.height())) continue;
            std::copy(plane.begin(), plane.end(), mask.begin() + k * layer);
        }
        return mask;
    }
}

/// Trapezoid weights of the grid nodes inside a closed box (h^n included).
/// Nodes on a face get 1/2 per face they lie on.
template <int N>
struct BoxNodes {
    std::array<int64_t, N> lo{}, hi{};
    std::array<std::array<double, 2>, N> end_weight{};  // weight at lo / hi end per axis
    bool empty = true;

    template <class F>
    void for_each(const GridSpec<N>& g, F&& f) const {
        if (empty) return;
        const double cell = g.cell_volume();
        std::array<int64_t, N> idx = lo;
        while (true) {
            double w = cell;
            for (int a = 0; a < N; ++a) {
                if (lo[a] == hi[a]) w *= 1.0;
                else if (idx[a] == lo[a]) w *= end_weight[a][0];
                else if (idx[a] == hi[a]) w *= end_weight[a][1];
            }
            f(g.linear(idx), w);
            int a = 0;
            for (; a < N; ++a) {
                if (++idx[a] <= hi[a]) break;
                idx[a] = lo[a];
            }
            if (a == N) break;
        }
    }
};

template <int N>
BoxNodes<N> box_nodes(const GridSpec<N>& g, const Box<N>& b) {
    BoxNodes<N> r;
    r.empty = false;
    for (int a = 0; a < N; ++a) {
        double tl = (b.lo[a] - g.origin[a]) / g.h;
        double th = (b.hi[a] - g.origin[a]) / g.h;
        int64_t il = static_cast<int64_t>(std::ceil(tl - 1e-9));
        int64_t ih = static_cast<int64_t>(std::floor(th + 1e-9));
        il = std::max<int64_t>(il, 0);
        ih = std::min<int64_t>(ih, g.dims[a] - 1);
        if (il > ih) {
            r.empty = true;
            return r;
        }
        r.lo[a] = il;
        r.hi[a] = ih;
        r.end_weight[a][0] = std::abs(il - tl) < 1e-9 ? 0.5 : 1.0;
        r.end_weight[a][1] = std::abs(ih - th) < 1e-9 ? 0.5 : 1.0;
    }
    return r;
}

}  // namespace jext
