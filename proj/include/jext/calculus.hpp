#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <type_traits>
#include <vector>

#include "grid.hpp"
#include "whitney.hpp"

namespace jext {

/// First-derivative stencil at one node: up to three (offset, weight) taps.
struct Stencil {
    int taps = 0;
    std::ptrdiff_t off[3] = {0, 0, 0};
    double w[3] = {0, 0, 0};
};

/// Central where both axis neighbours are interior, otherwise second-order
/// one-sided, otherwise first-order one-sided. Returns false if the node has
/// no interior neighbour along the axis.
template <int N>
bool derivative_stencil(const GridSpec<N>& g, const uint8_t* mask, std::size_t node, int64_t idx_axis, int axis,
                        Stencil& s) {
    const std::ptrdiff_t st = static_cast<std::ptrdiff_t>(g.stride(axis));
    const int64_t n = g.dims[axis];
    auto in = [&](int64_t k) {
        int64_t j = idx_axis + k;
        return j >= 0 && j < n && mask[static_cast<std::ptrdiff_t>(node) + k * st] == node_interior;
    };
    const double h = g.h;
    bool m1 = in(-1), p1 = in(1);
    if (m1 && p1) {
        s = {2, {-st, st, 0}, {-0.5 / h, 0.5 / h, 0}};
    } else if (p1 && in(2)) {
        s = {3, {0, st, 2 * st}, {-1.5 / h, 2.0 / h, -0.5 / h}};
    } else if (m1 && in(-2)) {
        s = {3, {0, -st, -2 * st}, {1.5 / h, -2.0 / h, 0.5 / h}};
    } else if (p1) {
        s = {2, {0, st, 0}, {-1.0 / h, 1.0 / h, 0}};
    } else if (m1) {
        s = {2, {0, -st, 0}, {1.0 / h, -1.0 / h, 0}};
    } else {
        s = {};
        return false;
    }
    return true;
}

/// Iterates nodes in linear order handing the multi-index along.
template <int N, class F>
void for_each_node(const GridSpec<N>& g, std::size_t begin, std::size_t end, F&& f) {
    if (begin >= end) return;
    auto idx = g.multi(begin);
    for (std::size_t l = begin; l < end; ++l) {
        f(l, idx);
        for (int a = 0; a < N; ++a) {
            if (++idx[a] < g.dims[a]) break;
            idx[a] = 0;
        }
    }
}

/// Gradient block J[c * N + j] = d_j f_c at one interior node; false if some
/// axis has no interior neighbour (that row is left at 0).
template <int N>
bool node_gradient(const GridField<N>& f, std::size_t l, const std::type_identity_t<std::array<int64_t, N>>& idx, double* J) {
    bool ok = true;
    for (int k = 0; k < f.comps * N; ++k) J[k] = 0.0;
    for (int j = 0; j < N; ++j) {
        Stencil s;
        if (!derivative_stencil(f.grid, f.mask.data(), l, idx[j], j, s)) {
            ok = false;
            continue;
        }
        for (int c = 0; c < f.comps; ++c) {
            double d = 0.0;
            for (int t = 0; t < s.taps; ++t)
                d += s.w[t] * f.values[(static_cast<std::ptrdiff_t>(l) + s.off[t]) * f.comps + c];
            J[c * N + j] = d;
        }
    }
    return ok;
}

/// Gradient of every component; component c * N + j holds d_j f_c. Only
/// interior nodes get values; isolated interior nodes get 0 and are listed.
template <int N>
GridField<N> discrete_grad(const GridField<N>& f, std::vector<std::size_t>* isolated = nullptr) {
    const auto& g = f.grid;
    GridField<N> out(g, f.comps * N, f.mask);
    std::vector<uint8_t> flag(isolated ? g.count() : 0, 0);
    parallel_for(g.count(), [&](std::size_t b, std::size_t e) {
        for_each_node<N>(g, b, e, [&](std::size_t l, const std::array<int64_t, N>& idx) {
            if (f.mask[l] != node_interior) return;
            for (int j = 0; j < N; ++j) {
                Stencil s;
                if (!derivative_stencil(g, f.mask.data(), l, idx[j], j, s)) {
                    if (isolated) flag[l] = 1;
                    continue;
                }
                for (int c = 0; c < f.comps; ++c) {
                    double d = 0.0;
                    for (int t = 0; t < s.taps; ++t)
                        d += s.w[t] * f.values[(static_cast<std::ptrdiff_t>(l) + s.off[t]) * f.comps + c];
                    out.values[l * out.comps + c * N + j] = d;
                }
            }
        });
    });
    if (isolated) {
        isolated->clear();
        for (std::size_t l = 0; l < flag.size(); ++l)
            if (flag[l]) isolated->push_back(l);
    }
    return out;
}

/// Pointwise div / curl from an N x N gradient block (row c = component).
template <int N>
inline double div_of(const double* J) {
    double s = 0.0;
    for (int i = 0; i < N; ++i) s += J[i * N + i];
    return s;
}

/// 2D: scalar d1 v2 - d2 v1. 3D: the usual vector.
template <int N>
inline void curl_of(const double* J, double* out) {
    if constexpr (N == 2) {
        out[0] = J[1 * 2 + 0] - J[0 * 2 + 1];
    } else {
        out[0] = J[2 * 3 + 1] - J[1 * 3 + 2];
        out[1] = J[0 * 3 + 2] - J[2 * 3 + 0];
        out[2] = J[1 * 3 + 0] - J[0 * 3 + 1];
    }
}

template <int N>
constexpr int curl_components() {
    return N == 2 ? 1 : 3;
}

template <int N>
GridField<N> div_from_grad(const GridField<N>& grad) {
    GridField<N> out(grad.grid, 1, grad.mask);
    for (std::size_t l = 0; l < grad.nodes(); ++l) out.values[l] = div_of<N>(&grad.values[l * N * N]);
    return out;
}

template <int N>
GridField<N> curl_from_grad(const GridField<N>& grad) {
    constexpr int k = curl_components<N>();
    GridField<N> out(grad.grid, k, grad.mask);
    for (std::size_t l = 0; l < grad.nodes(); ++l) curl_of<N>(&grad.values[l * N * N], &out.values[l * k]);
    return out;
}

template <int N>
GridField<N> discrete_div(const GridField<N>& f, std::vector<std::size_t>* isolated = nullptr) {
    if (f.comps != N) fail_config("discrete_div needs an N-component field");
    return div_from_grad(discrete_grad(f, isolated));
}

template <int N>
GridField<N> discrete_curl(const GridField<N>& f, std::vector<std::size_t>* isolated = nullptr) {
    if (f.comps != N) fail_config("discrete_curl needs an N-component field");
    return curl_from_grad(discrete_grad(f, isolated));
}

/// Accumulates sum |g|^p (or the max for p = inf) of one node's block.
struct PowerSum {
    double p;
    double acc = 0.0;
    std::size_t count = 0;

    explicit PowerSum(double p_) : p(p_) {}
    void add(const double* v, int comps, double weight) {
        double s = 0.0;
        for (int c = 0; c < comps; ++c) s += v[c] * v[c];
        add_magnitude(std::sqrt(s), weight);
    }
    void add_magnitude(double m, double weight) {
        ++count;
        if (std::isinf(p)) acc = std::max(acc, m);
        else if (p == 2.0) acc += weight * m * m;
        else acc += weight * std::pow(m, p);
    }
    double value() const {
        if (std::isinf(p)) return acc;
        if (p == 2.0) return std::sqrt(acc);
        return std::pow(acc, 1.0 / p);
    }
};

inline void check_exponent(double p) {
    if (!(p >= 1.0)) fail_config("norm exponent must lie in [1, inf]");
}

/// Riemann-sum L^p norm over the nodes picked by `select(node)`; pointwise
/// magnitude is the Euclidean (Frobenius) norm of the node's components.
template <int N, class Select>
double lp_norm(const GridField<N>& g, double p, Select&& select) {
    check_exponent(p);
    PowerSum ps(p);
    const double w = g.grid.cell_volume();
    for (std::size_t l = 0; l < g.nodes(); ++l)
        if (select(l)) ps.add(&g.values[l * g.comps], g.comps, w);
    if (ps.count == 0) fail_config("lp_norm: empty region");
    return ps.value();
}

/// L^p norm over the interior nodes.
template <int N>
double lp_norm(const GridField<N>& g, double p) {
    return lp_norm(g, p, [&](std::size_t l) { return g.mask[l] == node_interior; });
}

struct NormReport {
    double p = 2.0;
    double lp_field = 0.0, lp_div = 0.0, lp_curl = 0.0, lp_grad = 0.0, w1p = 0.0;
};

/// W^{1,p} = (|v|_p^p + |grad v|_p^p)^{1/p}; max of the two for p = inf.
inline double combine_w1p(double field, double grad, double p) {
    if (std::isinf(p)) return std::max(field, grad);
    if (p == 2.0) return std::hypot(field, grad);
    return std::pow(std::pow(field, p) + std::pow(grad, p), 1.0 / p);
}

/// All norms of an N-component field over the interior nodes in one pass.
template <int N>
NormReport norm_report(const GridField<N>& v, double p) {
    check_exponent(p);
    if (v.comps != N) fail_config("norm_report needs an N-component field");
    auto J = discrete_grad(v);
    PowerSum f(p), d(p), c(p), gr(p);
    const double w = v.grid.cell_volume();
    constexpr int k = curl_components<N>();
    for (std::size_t l = 0; l < v.nodes(); ++l) {
        if (v.mask[l] != node_interior) continue;
        const double* j = &J.values[l * N * N];
        double cu[3];
        curl_of<N>(j, cu);
        double dv = div_of<N>(j);
        f.add(&v.values[l * N], N, w);
        gr.add(j, N * N, w);
        d.add(&dv, 1, w);
        c.add(cu, k, w);
    }
    if (f.count == 0) fail_config("norm_report: no interior nodes");
    NormReport r;
    r.p = p;
    r.lp_field = f.value();
    r.lp_grad = gr.value();
    r.lp_div = d.value();
    r.lp_curl = c.value();
    r.w1p = combine_w1p(r.lp_field, r.lp_grad, p);
    return r;
}

/// |sum over interior nodes of (u . grad w + w div u) h^n|.
template <int N>
double discrete_green_residual(const GridField<N>& u, const GridField<N>& w) {
    if (u.comps != N || w.comps != 1) fail_config("discrete_green_residual: need a vector u and a scalar w");
    if (!(u.grid == w.grid)) fail_config("discrete_green_residual: grids differ");
    auto gw = discrete_grad(w);
    auto du = discrete_div(u);
    double s = 0.0;
    for (std::size_t l = 0; l < u.nodes(); ++l) {
        if (u.mask[l] != node_interior) continue;
        double t = du.values[l] * w.values[l];
        for (int i = 0; i < N; ++i) t += u.values[l * N + i] * gw.values[l * N + i];
        s += t;
    }
    return std::abs(s * u.grid.cell_volume());
}

// ---------------------------------------------------------------------------
// Test fields

enum class BoundaryCondition { normal_zero, tangential_zero, none };

inline std::string bc_name(BoundaryCondition bc) {
    switch (bc) {
        case BoundaryCondition::normal_zero: return "normal_zero";
        case BoundaryCondition::tangential_zero: return "tangential_zero";
        default: return "none";
    }
}

inline BoundaryCondition parse_bc(std::string s) {
    for (auto& ch : s)
        if (ch == '-') ch = '_';
    if (s == "normal_zero") return BoundaryCondition::normal_zero;
    if (s == "tangential_zero") return BoundaryCondition::tangential_zero;
    if (s == "none") return BoundaryCondition::none;
    fail_config("unknown boundary condition '" + s + "'");
}

struct FieldSpec {
    int modes = 3;              // max |k_i| of the Fourier modes
    double collar_width = 0.0;  // 0 picks 4h; the field vanishes where d < collar_width
    uint64_t seed = 0;
    double ramp_width = 0.0;    // width of the cutoff's rise; 0 picks 4 * collar_width
};

/// Integer wave vectors with |k_i| <= K in a half space (first non-zero
/// entry positive) plus k = 0.
template <int N>
std::vector<std::array<int, N>> wave_vectors(int K) {
    std::vector<std::array<int, N>> out;
    std::array<int, N> k;
    k.fill(-K);
    while (true) {
        int first = 0;
        for (int a = 0; a < N && first == 0; ++a) first = k[a];
        if (first >= 0) out.push_back(k);
        int a = 0;
        for (; a < N; ++a) {
            if (++k[a] <= K) break;
            k[a] = -K;
        }
        if (a == N) break;
    }
    return out;
}

/// Kernel (315/256)(1 - t^2)^4 on [-1, 1] and its distribution function.
inline double kernel_cdf(double t) {
    if (t <= -1.0) return 0.0;
    if (t >= 1.0) return 1.0;
    double t2 = t * t;
    return 0.5 + (315.0 / 256.0) * t * (1.0 + t2 * (-4.0 / 3.0 + t2 * (6.0 / 5.0 + t2 * (-4.0 / 7.0 + t2 / 9.0))));
}

/// Dyadic boxes of the bounding box lying inside the domain at distance >= t
/// from the boundary: maximal ones, subdividing undecided boxes down to edge e.
template <int N>
std::vector<Box<N>> deep_boxes(const Domain<N>& dom, double t, double e) {
    const auto fr = DyadicFrame<N>::from_box(dom.bounding_box());
    std::vector<Box<N>> out;
    std::vector<DyadicCube<N>> stack{DyadicCube<N>{}};
    while (!stack.empty()) {
        auto q = stack.back();
        stack.pop_back();
        Box<N> b = fr.box(q);
        Vec<N> m = b.center();
        double half_diag = 0.5 * b.diameter();
        bool inside = dom.contains(m);
        double bd = dom.box_boundary_distance(b);
        if (inside && bd >= t) {
            out.push_back(b);
            continue;
        }
        if (!inside && bd > 0.0) continue;                             // box misses the domain
        if (inside && dom.boundary_distance(m) + half_diag < t) continue;  // box too shallow
        if (fr.edge(q.level) <= e || q.level >= 24) continue;
        for (int c = 0; c < (1 << N); ++c) stack.push_back(q.child(c));
    }
    return out;
}

/// Smooth cutoff vanishing on the collar {d < c}: the indicator of the union A
/// of interior boxes at distance >= c + r sqrt(n) from the boundary,
/// convolved with the tensor kernel of radius r = ramp / (2 sqrt(n)). Each
/// cube contributes a product of kernel CDF differences, so chi is the same
/// continuous function on every lattice. chi = 1 once the kernel box sits in A.
template <int N>
std::vector<double> collar_cutoff(const Domain<N>& dom, const GridSpec<N>& g, double c, double ramp) {
    if (!(c > 0.0) || !(ramp > 0.0)) fail_config("collar and ramp widths must be positive");
    const double r = ramp / (2.0 * std::sqrt(double(N)));
    const double thr = c + r * std::sqrt(double(N));
    auto deep = deep_boxes(dom, thr, r / 4.0);
    std::vector<double> chi(g.count(), 0.0);
    const bool any = !deep.empty();
    for (const Box<N>& q : deep) {
        std::array<std::vector<double>, N> f;
        auto nodes = box_nodes(g, q.expanded(r));
        if (nodes.empty) continue;
        for (int a = 0; a < N; ++a)
            for (int64_t k = nodes.lo[a]; k <= nodes.hi[a]; ++k) {
                double x = g.origin[a] + g.h * static_cast<double>(k);
                f[a].push_back(kernel_cdf((q.hi[a] - x) / r) - kernel_cdf((q.lo[a] - x) / r));
            }
        std::array<int64_t, N> idx = nodes.lo;
        while (true) {
            double v = 1.0;
            for (int a = 0; a < N; ++a) v *= f[a][idx[a] - nodes.lo[a]];
            chi[g.linear(idx)] += v;
            int a = 0;
            for (; a < N; ++a) {
                if (++idx[a] <= nodes.hi[a]) break;
                idx[a] = nodes.lo[a];
            }
            if (a == N) break;
        }
    }
    if (!any) fail_config("collar thicker than domain inradius");
    for (auto& x : chi) x = std::clamp(x, 0.0, 1.0);
    return chi;
}

/// Linear map from potential coefficients to a grid field satisfying the
/// boundary condition by construction.
///   normal_zero:     2D v = (-d2 psi, d1 psi); 3D v = curl A
///   tangential_zero: v = grad phi
///   none:            v = R (no cutoff)
/// Potentials are chi * R with R a Fourier sum over the bounding box;
/// derivatives are central differences on the full lattice.
template <int N>
class TestFieldGenerator {
public:
    TestFieldGenerator(const Domain<N>& dom, const GridSpec<N>& g, BoundaryCondition bc, const FieldSpec& spec)
        : grid_(g), bc_(bc), spec_(spec) {
        if (spec.modes < 0 || spec.modes > 16) fail_config("modes must lie in [0, 16]");
        if (spec_.collar_width == 0.0) spec_.collar_width = 4.0 * g.h;
        if (spec_.ramp_width == 0.0) spec_.ramp_width = 4.0 * spec_.collar_width;
        if (bc != BoundaryCondition::none && spec_.collar_width < 2.0 * g.h * (1.0 - 1e-12))
            fail_config("collar width must be at least 2h");
        mask_ = membership_mask(dom, g);
        if (bc != BoundaryCondition::none) chi_ = collar_cutoff(dom, g, spec_.collar_width, spec_.ramp_width);
        waves_ = wave_vectors<N>(spec.modes);
        potentials_ = (bc == BoundaryCondition::normal_zero && N == 3) ? 3 : (bc == BoundaryCondition::none ? N : 1);
        period_ = dom.bounding_box().extent(0);
        for (int a = 0; a < N; ++a) period_ = std::max(period_, dom.bounding_box().extent(a));
        // per-axis phase tables e^{i kappa k x}
        const double kappa = 2.0 * M_PI / period_;
        const int K = spec.modes;
        for (int a = 0; a < N; ++a) {
            table_[a].assign(static_cast<std::size_t>((2 * K + 1) * g.dims[a]), {});
            for (int k = -K; k <= K; ++k)
                for (int64_t i = 0; i < g.dims[a]; ++i)
                    table_[a][(k + K) * g.dims[a] + i] =
                        std::polar(1.0, kappa * k * (g.h * static_cast<double>(i)));
        }
    }

    const GridSpec<N>& grid() const { return grid_; }
    const std::vector<uint8_t>& mask() const { return mask_; }
    const std::vector<double>& cutoff() const { return chi_; }
    const FieldSpec& spec() const { return spec_; }
    BoundaryCondition bc() const { return bc_; }
    int potentials() const { return potentials_; }
    const std::vector<std::array<int, N>>& waves() const { return waves_; }

    /// cos and sin per wave vector (sin of k = 0 is dropped), per potential.
    std::size_t per_potential() const { return 2 * waves_.size() - 1; }
    std::size_t coefficient_count() const { return per_potential() * potentials_; }

    /// N(0,1) / (1 + |k|^2) coefficients drawn in a fixed order.
    std::vector<double> random_coefficients(uint64_t seed) const {
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> gauss(0.0, 1.0);
        std::vector<double> c;
        c.reserve(coefficient_count());
        for (int s = 0; s < potentials_; ++s)
            for (std::size_t m = 0; m < waves_.size(); ++m) {
                double k2 = 0.0;
                for (int a = 0; a < N; ++a) k2 += waves_[m][a] * waves_[m][a];
                double damp = 1.0 / (1.0 + k2);
                c.push_back(gauss(rng) * damp);
                if (m != zero_wave()) c.push_back(gauss(rng) * damp);
            }
        return c;
    }

    /// Potential component s (chi * R, or R for bc = none) at every node.
    std::vector<double> potential(const std::vector<double>& coeffs, int s) const {
        const int K = spec_.modes;
        const std::size_t W = waves_.size();
        // complex amplitudes C_k = a_k - i b_k so that Re(C e^{i theta}) = a cos + b sin
        std::vector<std::complex<double>> C(W);
        std::size_t pos = per_potential() * s;
        for (std::size_t m = 0; m < W; ++m) {
            double a = coeffs[pos++];
            double b = m != zero_wave() ? coeffs[pos++] : 0.0;
            C[m] = {a, -b};
        }
        std::vector<double> out(grid_.count(), 0.0);
        const int64_t nx = grid_.dims[0];
        const std::size_t rows = grid_.count() / static_cast<std::size_t>(nx);
        const bool cut = bc_ != BoundaryCondition::none;
        parallel_for(
            rows,
            [&](std::size_t b, std::size_t e) {
                std::vector<std::complex<double>> D(2 * K + 1);
                for (std::size_t r = b; r < e; ++r) {
                    // row multi-index over axes 1..N-1
                    std::array<int64_t, N> idx{};
                    std::size_t t = r;
                    for (int a = 1; a < N; ++a) {
                        idx[a] = static_cast<int64_t>(t % static_cast<std::size_t>(grid_.dims[a]));
                        t /= static_cast<std::size_t>(grid_.dims[a]);
                    }
                    const std::size_t base = r * static_cast<std::size_t>(nx);
                    if (cut) {
                        bool live = false;
                        for (int64_t i = 0; i < nx && !live; ++i) live = chi_[base + i] > 0.0;
                        if (!live) continue;
                    }
                    std::fill(D.begin(), D.end(), std::complex<double>{});
                    for (std::size_t m = 0; m < W; ++m) {
                        std::complex<double> z = C[m];
                        for (int a = 1; a < N; ++a) z *= table_[a][(waves_[m][a] + K) * grid_.dims[a] + idx[a]];
                        D[waves_[m][0] + K] += z;
                    }
                    for (int64_t i = 0; i < nx; ++i) {
                        double chi = cut ? chi_[base + i] : 1.0;
                        if (chi == 0.0) continue;
                        double sum = 0.0;
                        for (int k = 0; k < 2 * K + 1; ++k) sum += (D[k] * table_[0][k * nx + i]).real();
                        out[base + i] = chi * sum;
                    }
                }
            },
            8);
        return out;
    }

    /// The field for a coefficient vector, zero off the interior.
    GridField<N> field(const std::vector<double>& coeffs) const {
        if (coeffs.size() != coefficient_count()) fail_config("coefficient vector has the wrong length");
        GridField<N> v(grid_, N, mask_);
        if (bc_ == BoundaryCondition::none) {
            for (int s = 0; s < N; ++s) {
                auto R = potential(coeffs, s);
                for (std::size_t l = 0; l < grid_.count(); ++l)
                    if (mask_[l] == node_interior) v.values[l * N + s] = R[l];
            }
            return v;
        }
        if (bc_ == BoundaryCondition::tangential_zero) {
            auto phi = potential(coeffs, 0);
            for (int j = 0; j < N; ++j) central(phi, j, 1.0, v, j);
        } else if constexpr (N == 2) {
            auto psi = potential(coeffs, 0);
            central(psi, 1, -1.0, v, 0);
            central(psi, 0, 1.0, v, 1);
        } else {
            for (int s = 0; s < 3; ++s) {
                auto A = potential(coeffs, s);
                // (curl A)_i = d_j A_k - d_k A_j over cyclic (i, j, k); A_s feeds two components
                int i1 = (s + 1) % 3, i2 = (s + 2) % 3;
                central(A, i2, 1.0, v, i1);   // d_{s+2} A_s -> component s+1
                central(A, i1, -1.0, v, i2);  // -d_{s+1} A_s -> component s+2
            }
        }
        for (std::size_t l = 0; l < grid_.count(); ++l)
            if (mask_[l] != node_interior)
                for (int c = 0; c < N; ++c) v.values[l * N + c] = 0.0;
        return v;
    }

private:
    std::size_t zero_wave() const {
        for (std::size_t m = 0; m < waves_.size(); ++m) {
            bool z = true;
            for (int a = 0; a < N; ++a) z = z && waves_[m][a] == 0;
            if (z) return m;
        }
        return waves_.size();
    }

    // v[., comp] += sign * D_axis f (central, zero outside the lattice)
    void central(const std::vector<double>& f, int axis, double sign, GridField<N>& v, int comp) const {
        const std::size_t st = grid_.stride(axis);
        const double s = sign * 0.5 / grid_.h;
        for_each_node<N>(grid_, 0, grid_.count(), [&](std::size_t l, const std::array<int64_t, N>& idx) {
            double fp = idx[axis] + 1 < grid_.dims[axis] ? f[l + st] : 0.0;
            double fm = idx[axis] > 0 ? f[l - st] : 0.0;
            v.values[l * N + comp] += s * (fp - fm);
        });
    }

    GridSpec<N> grid_;
    BoundaryCondition bc_;
    FieldSpec spec_;
    std::vector<uint8_t> mask_;
    std::vector<double> chi_;
    std::vector<std::array<int, N>> waves_;
    int potentials_ = 1;
    double period_ = 1.0;
    std::array<std::vector<std::complex<double>>, N> table_;
};

template <int N>
GridField<N> generate_test_field(const Domain<N>& dom, const GridSpec<N>& g, BoundaryCondition bc,
                                 const FieldSpec& spec) {
    TestFieldGenerator<N> gen(dom, g, bc, spec);
    return gen.field(gen.random_coefficients(spec.seed));
}

}  // namespace jext
