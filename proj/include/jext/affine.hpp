#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <type_traits>
#include <vector>

#include "calculus.hpp"
#include "dyadic.hpp"

namespace jext {

template <int N>
using Mat = std::array<double, N * N>;  // row-major

/// A cube or the union of two touching cubes.
template <int N>
struct Region {
    std::vector<Box<N>> boxes;

    double volume() const {
        double v = 0.0;
        for (const auto& b : boxes) v += b.volume();
        return v;
    }
    double diameter() const {
        Box<N> hull = boxes.front();
        for (const auto& b : boxes)
            for (int i = 0; i < N; ++i) {
                hull.lo[i] = std::min(hull.lo[i], b.lo[i]);
                hull.hi[i] = std::max(hull.hi[i], b.hi[i]);
            }
        return hull.diameter();
    }
};

template <int N>
Region<N> cube_region(const DyadicFrame<N>& fr, const DyadicCube<N>& q) {
    return Region<N>{{fr.box(q)}};
}

template <int N>
Region<N> pair_region(const DyadicFrame<N>& fr, const DyadicCube<N>& a, const DyadicCube<N>& b) {
    if (!cubes_touch(a, b)) fail_config("regions are cubes or unions of two touching cubes");
    return Region<N>{{fr.box(a), fr.box(b)}};
}

/// Trapezoid node weights of a region, restricted to nodes of one class.
template <int N>
struct RegionQuadrature {
    std::vector<std::size_t> nodes;
    std::vector<double> weights;
    std::size_t dropped = 0;  // region nodes of other classes
    double measure() const {
        double s = 0.0;
        for (double w : weights) s += w;
        return s;
    }
};

template <int N>
RegionQuadrature<N> region_quadrature(const GridSpec<N>& g, const std::vector<uint8_t>& mask, const Region<N>& r,
                                      uint8_t keep = node_interior) {
    if (r.boxes.empty() || r.boxes.size() > 2) fail_config("regions are cubes or unions of two touching cubes");
    std::vector<std::pair<std::size_t, double>> all;
    for (const auto& b : r.boxes)
        box_nodes(g, b).for_each(g, [&](std::size_t l, double w) { all.push_back({l, w}); });
    std::sort(all.begin(), all.end());
    RegionQuadrature<N> q;
    for (std::size_t i = 0; i < all.size();) {
        std::size_t l = all[i].first;
        double w = 0.0;
        for (; i < all.size() && all[i].first == l; ++i) w += all[i].second;
        if (mask[l] == keep) {
            q.nodes.push_back(l);
            q.weights.push_back(w);
        } else {
            ++q.dropped;
        }
    }
    return q;
}

/// P(x) = a + B (x - xbar) with B symmetric.
template <int N>
struct AffinePolynomial {
    Vec<N> a{};
    Mat<N> B{};
    Vec<N> xbar{};
    Region<N> region;
    bool partial = false;      // region only partly interior on the grid
    std::size_t nodes = 0;     // quadrature nodes used
    double measure = 0.0;      // discrete |S|
    double mean_div = 0.0;     // discrete mean of div u over S

    Vec<N> operator()(const Vec<N>& x) const {
        Vec<N> r = a;
        for (int i = 0; i < N; ++i)
            for (int j = 0; j < N; ++j) r[i] += B[i * N + j] * (x[j] - xbar[j]);
        return r;
    }
};

template <int N>
Vec<N> eval_affine(const AffinePolynomial<N>& P, const std::type_identity_t<Vec<N>>& x) {
    return P(x);
}

/// Frobenius norm of a matrix block.
template <int N>
double frobenius(const double* M) {
    double s = 0.0;
    for (int k = 0; k < N * N; ++k) s += M[k] * M[k];
    return std::sqrt(s);
}

/// a = mean of u, B = symmetric part of the mean discrete gradient, xbar the
/// discrete barycenter; all by the same masked trapezoid quadrature.
template <int N>
AffinePolynomial<N> fit_affine(const GridField<N>& u, const Region<N>& S) {
    if (u.comps != N) fail_config("fit_affine needs an N-component field");
    auto q = region_quadrature(u.grid, u.mask, S);
    if (q.nodes.empty()) fail_numerical("fit_affine: region has no interior nodes; refine the grid");
    AffinePolynomial<N> P;
    P.region = S;
    P.partial = q.dropped > 0;
    P.nodes = q.nodes.size();
    Mat<N> G{};
    double W = 0.0, dsum = 0.0;
    double J[N * N];
    for (std::size_t k = 0; k < q.nodes.size(); ++k) {
        std::size_t l = q.nodes[k];
        double w = q.weights[k];
        auto idx = u.grid.multi(l);
        Vec<N> x = u.grid.point(idx);
        node_gradient(u, l, idx, J);
        W += w;
        for (int i = 0; i < N; ++i) {
            P.a[i] += w * u.values[l * N + i];
            P.xbar[i] += w * x[i];
        }
        for (int m = 0; m < N * N; ++m) G[m] += w * J[m];
        dsum += w * div_of<N>(J);
    }
    for (int i = 0; i < N; ++i) {
        P.a[i] /= W;
        P.xbar[i] /= W;
    }
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j) P.B[i * N + j] = 0.5 * (G[i * N + j] + G[j * N + i]) / W;
    // exact symmetry after rounding
    for (int i = 0; i < N; ++i)
        for (int j = i + 1; j < N; ++j) P.B[j * N + i] = P.B[i * N + j];
    P.measure = W;
    P.mean_div = dsum / W;
    return P;
}

template <int N>
struct ResidualReport {
    Vec<N> mean_residual{};  // (1/|S|) sum w (u - P)
    double lp_residual = 0.0;
    double poincare_ratio = 0.0;
    bool zero_denominator = false;
    bool violation_candidate = false;  // zero denominator with a non-zero residual
};

template <int N>
ResidualReport<N> residual_report(const GridField<N>& u, const AffinePolynomial<N>& P, double p) {
    check_exponent(p);
    auto q = region_quadrature(u.grid, u.mask, P.region);
    ResidualReport<N> r;
    PowerSum res(p), dv(p), cu(p);
    double J[N * N];
    double umax = 0.0;
    for (std::size_t k = 0; k < q.nodes.size(); ++k) {
        std::size_t l = q.nodes[k];
        double w = q.weights[k];
        auto idx = u.grid.multi(l);
        Vec<N> Px = P(u.grid.point(idx));
        double d[N];
        for (int i = 0; i < N; ++i) {
            d[i] = u.values[l * N + i] - Px[i];
            r.mean_residual[i] += w * d[i];
            umax = std::max(umax, std::abs(u.values[l * N + i]));
        }
        res.add(d, N, w);
        node_gradient(u, l, idx, J);
        double dd = div_of<N>(J), c[3];
        curl_of<N>(J, c);
        dv.add(&dd, 1, w);
        cu.add(c, curl_components<N>(), w);
    }
    for (int i = 0; i < N; ++i) r.mean_residual[i] /= q.measure();
    r.lp_residual = res.value();
    double den = P.region.diameter() * (cu.value() + dv.value());
    if (den <= 1e-14 * std::max(umax, 1e-300)) {
        r.zero_denominator = true;
        r.violation_candidate = r.lp_residual > 1e-12 * std::max(umax, 1e-300);
        r.poincare_ratio = 0.0;
    } else {
        r.poincare_ratio = r.lp_residual / den;
    }
    return r;
}

struct GradientComparison {
    double ratio = 0.0;      // |grad(u - P)|_p / |grad u|_p
    double ratio_inf = 0.0;  // |grad P|_inf / |grad u|_inf
};

template <int N>
GradientComparison gradient_comparison(const GridField<N>& u, const AffinePolynomial<N>& P, double p) {
    check_exponent(p);
    auto q = region_quadrature(u.grid, u.mask, P.region);
    PowerSum diff(p), full(p);
    double J[N * N], D[N * N];
    double jmax = 0.0;
    for (std::size_t k = 0; k < q.nodes.size(); ++k) {
        std::size_t l = q.nodes[k];
        node_gradient(u, l, u.grid.multi(l), J);
        for (int m = 0; m < N * N; ++m) D[m] = J[m] - P.B[m];
        diff.add(D, N * N, q.weights[k]);
        full.add(J, N * N, q.weights[k]);
        jmax = std::max(jmax, frobenius<N>(J));
    }
    GradientComparison g;
    if (full.value() > 0.0) g.ratio = diff.value() / full.value();
    if (jmax > 0.0) g.ratio_inf = frobenius<N>(P.B.data()) / jmax;
    return g;
}

struct ChainDifference {
    double lhs = 0.0;         // |P_first - P_last|_{L^p(S_1)}
    double rhs_factor = 0.0;  // edge(S_1) (|curl v|_p + |div v|_p) over the chain
    double ratio = 0.0;
    double lhs_inf = 0.0;         // |P_first - P_last|_{L^inf(S_1)}
    double rhs_factor_inf = 0.0;  // edge(S_1) |grad v|_inf over the chain
    double ratio_inf = 0.0;
    bool violation_candidate = false;
};

/// Compares the polynomials at both ends of a chain of touching cubes.
template <int N>
ChainDifference chain_difference(const GridField<N>& v, const DyadicFrame<N>& fr,
                                 const std::vector<DyadicCube<N>>& chain, double p) {
    if (chain.empty()) fail_config("chain_difference: empty chain");
    for (std::size_t i = 1; i < chain.size(); ++i)
        if (!cubes_touch(chain[i - 1], chain[i])) fail_config("chain_difference: consecutive cubes must touch");
    const auto first = fit_affine(v, cube_region(fr, chain.front()));
    const auto last = chain.size() == 1 ? first : fit_affine(v, cube_region(fr, chain.back()));
    ChainDifference r;
    const double edge = fr.edge(chain.front().level);
    // lhs on S_1 (P - P is affine, so the box is sampled at its nodes)
    auto q1 = region_quadrature(v.grid, v.mask, cube_region(fr, chain.front()));
    PowerSum lhs(p), lhsi(INFINITY);
    for (std::size_t k = 0; k < q1.nodes.size(); ++k) {
        Vec<N> x = v.grid.point(q1.nodes[k]);
        Vec<N> d = first(x) - last(x);
        lhs.add(d.data(), N, q1.weights[k]);
        lhsi.add(d.data(), N, 1.0);
    }
    PowerSum dv(p), cu(p), gi(INFINITY);
    double J[N * N];
    for (const auto& c : chain) {
        auto q = region_quadrature(v.grid, v.mask, cube_region(fr, c));
        for (std::size_t k = 0; k < q.nodes.size(); ++k) {
            std::size_t l = q.nodes[k];
            node_gradient(v, l, v.grid.multi(l), J);
            double dd = div_of<N>(J), cc[3];
            curl_of<N>(J, cc);
            dv.add(&dd, 1, q.weights[k]);
            cu.add(cc, curl_components<N>(), q.weights[k]);
            gi.add(J, N * N, 1.0);
        }
    }
    r.lhs = lhs.value();
    r.lhs_inf = lhsi.value();
    r.rhs_factor = edge * (cu.value() + dv.value());
    r.rhs_factor_inf = edge * gi.value();
    auto ratio = [&](double a, double b, double& out) {
        if (b > 0.0) out = a / b;
        else if (a > 1e-12) r.violation_candidate = true;
    };
    ratio(r.lhs, r.rhs_factor, r.ratio);
    ratio(r.lhs_inf, r.rhs_factor_inf, r.ratio_inf);
    return r;
}

}  // namespace jext
