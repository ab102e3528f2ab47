#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <unordered_map>
#include <vector>

#include "affine.hpp"
#include "partition.hpp"
#include "reflection.hpp"

namespace jext {

/// Field-independent part of the extension: decompositions, reflected
/// cubes, chains, partition of unity and the per-node partition terms on the
/// lattice. Ev is linear in v, so one geometry serves any number of fields.
template <int N>
struct ExtensionGeometry {
    using Term = typename PartitionOfUnity<N>::Term;

    const Domain<N>* domain = nullptr;
    int max_level = 0;
    WhitneyDecomposition<N> w1, w2;
    std::vector<uint32_t> w3;  // ids into w2
    ReflectionMap reflection;
    ChainSet chains;
    PartitionOfUnity<N> partition;

    GridSpec<N> grid;
    int grid_level = 0;
    std::vector<uint8_t> mask;  // interior / exterior / shell
    std::size_t complement_nodes = 0, shell_nodes = 0;

    // complement nodes inside some support, sorted, with their partition terms
    std::vector<std::size_t> nodes;
    std::vector<uint32_t> term_offsets;
    std::vector<Term> terms;

    // Fringe-adapted Gauss rule on the W2 cubes that meet a support (W3 and
    // their far neighbours). Points of cube rule_cubes[c] are
    // [rule_offsets[c], rule_offsets[c + 1]); Ev there is sum phi_j P_j with the
    // stored partition terms. Elsewhere in the complement Ev = 0.
    std::vector<uint32_t> rule_cubes;
    std::vector<uint32_t> rule_offsets;
    std::vector<Vec<N>> qpoints;
    std::vector<double> qweights;
    std::vector<uint32_t> qterm_offsets;
    std::vector<Term> qterms;
    int fringe_order = 0, core_order = 0;  // Gauss points per fringe / core subinterval
    // fringe integrals of the e^{-1/t} profile are within ~0.5% from 16 points on
    bool quadrature_resolved() const { return fringe_order >= 16; }

    std::size_t rule_of(uint32_t w2_id) const {
        auto it = std::lower_bound(rule_cubes.begin(), rule_cubes.end(), w2_id);
        return it != rule_cubes.end() && *it == w2_id ? static_cast<std::size_t>(it - rule_cubes.begin()) : SIZE_MAX;
    }

    std::size_t find(std::size_t l) const {
        auto it = std::lower_bound(nodes.begin(), nodes.end(), l);
        return it != nodes.end() && *it == l ? static_cast<std::size_t>(it - nodes.begin()) : SIZE_MAX;
    }
    Region<N> reflected_region(std::size_t j) const {
        return cube_region(w1.frame, w1.cubes[reflection.reflected[j]]);
    }
};

namespace detail {

// nodes and weights on [-1, 1] by Newton iteration from the Chebyshev guesses
inline void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
    x.assign(n, 0.0);
    w.assign(n, 0.0);
    for (int i = 0; i < n; ++i) {
        double t = std::cos(M_PI * (i + 0.75) / (n + 0.5)), d = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p = std::legendre(n, t), q = std::legendre(n - 1, t);
            d = n * (t * p - q) / (t * t - 1.0);
            double dt = p / d;
            t -= dt;
            if (std::abs(dt) < 1e-16) break;
        }
        x[n - 1 - i] = t;
        w[n - 1 - i] = 2.0 / ((1.0 - t * t) * d * d);
    }
}

// 1D composite rule on [lo, hi] split at the faces and fringe ends of the
// supports that reach the cube; subintervals no longer than the widest
// possible fringe get the fringe order
inline void axis_rule(double lo, double hi, std::vector<double> cuts, int nf, int nc, std::vector<double>& x,
                      std::vector<double>& w) {
    cuts.push_back(lo);
    cuts.push_back(hi);
    std::sort(cuts.begin(), cuts.end());
    const double tiny = 1e-12 * (hi - lo), wide = (hi - lo) / 8.0;
    std::vector<double> gx, gw;
    x.clear();
    w.clear();
    double prev = lo;
    for (double c : cuts) {
        if (c <= prev + tiny || c > hi) continue;
        gauss_legendre(c - prev <= wide * (1.0 + 1e-12) ? nf : nc, gx, gw);
        for (std::size_t i = 0; i < gx.size(); ++i) {
            x.push_back(0.5 * (prev + c) + 0.5 * (c - prev) * gx[i]);
            w.push_back(0.5 * (c - prev) * gw[i]);
        }
        prev = c;
    }
}

}  // namespace detail

/// Fills the complement rule, taking the highest (fringe, core) order whose
/// points and partition terms fit the byte budget.
template <int N>
void build_complement_rule(ExtensionGeometry<N>& geo, std::size_t budget) {
    using Term = typename ExtensionGeometry<N>::Term;
    std::unordered_map<uint32_t, uint32_t> pos;
    for (uint32_t j = 0; j < geo.w3.size(); ++j) pos.emplace(geo.w3[j], j);
    std::vector<uint32_t> rel(geo.w3.begin(), geo.w3.end());
    for (uint32_t id : geo.w3)
        for (uint32_t nb : geo.w2.neighbors(id))
            if (!pos.count(nb)) rel.push_back(nb);
    std::sort(rel.begin(), rel.end());
    rel.erase(std::unique(rel.begin(), rel.end()), rel.end());

    // per cube and axis, the cut positions of every support reaching it
    std::vector<std::array<std::vector<double>, N>> cuts(rel.size());
    for (std::size_t c = 0; c < rel.size(); ++c) {
        std::vector<uint32_t> sup;
        if (pos.count(rel[c])) sup.push_back(rel[c]);
        for (uint32_t nb : geo.w2.neighbors(rel[c]))
            if (pos.count(nb)) sup.push_back(nb);
        for (uint32_t k : sup) {
            Box<N> q = geo.w2.box(k);
            for (int a = 0; a < N; ++a) {
                double f = (q.hi[a] - q.lo[a]) * (0.5 * PartitionOfUnity<N>::fringe);
                for (double t : {q.lo[a] - f, q.lo[a], q.hi[a], q.hi[a] + f}) cuts[c][a].push_back(t);
            }
        }
    }
    const std::array<std::pair<int, int>, 7> ladder{{{24, 4}, {16, 3}, {12, 3}, {8, 3}, {6, 2}, {4, 2}, {2, 1}}};
    std::vector<double> x, w;
    std::size_t pick = ladder.size() - 1;
    for (std::size_t o = 0; o < ladder.size(); ++o) {
        std::size_t points = 0;
        for (std::size_t c = 0; c < rel.size(); ++c) {
            Box<N> b = geo.w2.box(rel[c]);
            std::size_t per = 1;
            for (int a = 0; a < N; ++a) {
                detail::axis_rule(b.lo[a], b.hi[a], cuts[c][a], ladder[o].first, ladder[o].second, x, w);
                per *= x.size();
            }
            points += per;
        }
        // point, weight, offset and about 1.2 terms each
        if (points * (sizeof(Vec<N>) + sizeof(double) + sizeof(uint32_t) + 1.2 * sizeof(Term)) <= budget) {
            pick = o;
            break;
        }
    }
    geo.fringe_order = ladder[pick].first;
    geo.core_order = ladder[pick].second;

    geo.rule_cubes = rel;
    geo.rule_offsets.assign(1, 0);
    std::array<std::vector<double>, N> ax, aw;
    for (std::size_t c = 0; c < rel.size(); ++c) {
        Box<N> b = geo.w2.box(rel[c]);
        for (int a = 0; a < N; ++a)
            detail::axis_rule(b.lo[a], b.hi[a], cuts[c][a], geo.fringe_order, geo.core_order, ax[a], aw[a]);
        std::array<std::size_t, N> i{};
        while (true) {
            Vec<N> p;
            double wt = 1.0;
            for (int a = 0; a < N; ++a) p[a] = ax[a][i[a]], wt *= aw[a][i[a]];
            geo.qpoints.push_back(p);
            geo.qweights.push_back(wt);
            int a = 0;
            for (; a < N; ++a) {
                if (++i[a] < ax[a].size()) break;
                i[a] = 0;
            }
            if (a == N) break;
        }
        geo.rule_offsets.push_back(static_cast<uint32_t>(geo.qpoints.size()));
    }
    cuts.clear();
    cuts.shrink_to_fit();

    const std::size_t n = geo.qpoints.size();
    geo.qterm_offsets.assign(1, 0);
    geo.qterm_offsets.reserve(n + 1);
    constexpr std::size_t chunk = std::size_t(1) << 16;
    for (std::size_t b0 = 0; b0 < n; b0 += chunk) {
        const std::size_t e0 = std::min(n, b0 + chunk);
        std::vector<std::vector<Term>> per(e0 - b0);
        parallel_for(
            e0 - b0,
            [&](std::size_t b, std::size_t e) {
                for (std::size_t k = b; k < e; ++k) per[k] = geo.partition.eval(geo.qpoints[b0 + k]);
            },
            1024);
        for (const auto& t : per) {
            geo.qterms.insert(geo.qterms.end(), t.begin(), t.end());
            geo.qterm_offsets.push_back(static_cast<uint32_t>(geo.qterms.size()));
        }
    }
}

template <int N>
std::shared_ptr<const ExtensionGeometry<N>> build_extension_geometry(const Domain<N>& dom, const GridSpec<N>& g,
                                                                     int max_level,
                                                                     std::size_t quadrature_budget = std::size_t(1) << 30) {
    auto geo = std::make_shared<ExtensionGeometry<N>>();
    geo->domain = &dom;
    geo->max_level = max_level;
    geo->grid = g;
    geo->w1 = whitney_decompose(dom, Side::interior, max_level);
    geo->w2 = whitney_decompose(dom, Side::complement, max_level);
    geo->grid_level = g.dyadic_level(geo->w2.frame);
    if (geo->grid_level < 0) fail_config("grid/domain mismatch: the lattice must be the dyadic grid of the bounding box");
    if (geo->grid_level < max_level) fail_config("grid/domain mismatch: grid level below max_level");
    geo->w3 = select_w3(geo->w2, dom);
    if (geo->w3.empty()) fail_config("W3 is empty; raise max_level");
    geo->reflection = build_reflection(geo->w1, geo->w2, geo->w3);
    geo->chains = build_chains(geo->reflection, geo->w1, geo->w2);
    geo->partition = build_partition(geo->w2, geo->w3);

    geo->mask = membership_mask(dom, g);
    std::vector<uint8_t> covered(g.count(), 0);
    for (std::size_t i = 0; i < geo->w2.size(); ++i)
        box_nodes(g, geo->w2.box(i)).for_each(g, [&](std::size_t l, double) { covered[l] = 1; });
    for (std::size_t l = 0; l < g.count(); ++l) {
        if (geo->mask[l] == node_interior) continue;
        ++geo->complement_nodes;
        if (!covered[l]) {
            geo->mask[l] = node_shell;
            ++geo->shell_nodes;
        }
    }
    covered.clear();
    covered.shrink_to_fit();

    for (std::size_t j = 0; j < geo->w3.size(); ++j)
        if (region_quadrature(g, geo->mask, geo->reflected_region(j)).nodes.empty())
            fail_numerical("a reflected cube has no interior grid nodes; refine the grid");

    std::vector<std::size_t> cand;
    for (const auto& q : geo->partition.cubes())
        box_nodes(g, geo->partition.frame().scaled_box(q, 17.0 / 16.0)).for_each(g, [&](std::size_t l, double) {
            if (geo->mask[l] != node_interior) cand.push_back(l);
        });
    std::sort(cand.begin(), cand.end());
    cand.erase(std::unique(cand.begin(), cand.end()), cand.end());
    std::vector<std::vector<typename ExtensionGeometry<N>::Term>> per(cand.size());
    parallel_for(
        cand.size(),
        [&](std::size_t b, std::size_t e) {
            for (std::size_t k = b; k < e; ++k) per[k] = geo->partition.eval(g.point(cand[k]));
        },
        1024);
    geo->term_offsets.push_back(0);
    for (std::size_t k = 0; k < cand.size(); ++k) {
        if (per[k].empty()) continue;
        geo->nodes.push_back(cand[k]);
        geo->terms.insert(geo->terms.end(), per[k].begin(), per[k].end());
        geo->term_offsets.push_back(static_cast<uint32_t>(geo->terms.size()));
    }
    per.clear();
    per.shrink_to_fit();
    build_complement_rule(*geo, quadrature_budget);
    return geo;
}

/// Ev for one field: polynomials on the reflected cubes and the assembled
/// values and analytic Jacobians at the complement nodes with partition terms.
/// Holds a reference to v, which must outlive the assembly.
template <int N>
struct ExtensionAssembly {
    std::shared_ptr<const ExtensionGeometry<N>> geo;
    const GridField<N>* v = nullptr;
    std::vector<AffinePolynomial<N>> polys;  // P_j per W3 position
    std::vector<double> ev;                  // geo->nodes.size() * N
    std::vector<double> jac;                 // geo->nodes.size() * N * N, J[c * N + k] = d_k Ev_c

    /// Ev and its Jacobian at node l (zero away from the supports; v on the interior
    /// with a discrete gradient).
    void at(std::size_t l, double* e, double* J) const {
        if (v->mask[l] == node_interior) {
            for (int c = 0; c < N; ++c) e[c] = v->values[l * N + c];
            node_gradient(*v, l, v->grid.multi(l), J);
            return;
        }
        std::size_t k = geo->find(l);
        for (int c = 0; c < N; ++c) e[c] = k == SIZE_MAX ? 0.0 : ev[k * N + c];
        for (int m = 0; m < N * N; ++m) J[m] = k == SIZE_MAX ? 0.0 : jac[k * N * N + m];
    }

    /// Ev and its Jacobian at complement quadrature point k.
    void quad_at(std::size_t k, double* e, double* J) const {
        std::fill(e, e + N, 0.0);
        std::fill(J, J + N * N, 0.0);
        const Vec<N>& x = geo->qpoints[k];
        for (uint32_t t = geo->qterm_offsets[k]; t < geo->qterm_offsets[k + 1]; ++t) {
            const auto& term = geo->qterms[t];
            const auto& P = polys[term.j];
            Vec<N> Px = P(x);
            for (int c = 0; c < N; ++c) {
                e[c] += term.value * Px[c];
                for (int d = 0; d < N; ++d) J[c * N + d] += term.value * P.B[c * N + d] + Px[c] * term.grad[d];
            }
        }
    }

    /// Full Ev on the lattice; the mask flags the truncation shell.
    GridField<N> materialize() const {
        GridField<N> out(geo->grid, N, geo->mask);
        for (std::size_t l = 0; l < out.nodes(); ++l)
            if (geo->mask[l] == node_interior)
                for (int c = 0; c < N; ++c) out.values[l * N + c] = v->values[l * N + c];
        for (std::size_t k = 0; k < geo->nodes.size(); ++k)
            for (int c = 0; c < N; ++c) out.values[geo->nodes[k] * N + c] = ev[k * N + c];
        return out;
    }
};

template <int N>
ExtensionAssembly<N> extend(std::shared_ptr<const ExtensionGeometry<N>> geo, const GridField<N>& v) {
    if (!(v.grid == geo->grid) || v.comps != N) fail_config("grid/domain mismatch: field grid differs from the extension grid");
    for (std::size_t l = 0; l < v.nodes(); ++l)
        if ((v.mask[l] == node_interior) != (geo->mask[l] == node_interior))
            fail_config("grid/domain mismatch: field mask disagrees with the domain");
    ExtensionAssembly<N> a;
    a.geo = geo;
    a.v = &v;
    const std::size_t m = geo->w3.size();
    a.polys.resize(m);
    parallel_for(
        m, [&](std::size_t b, std::size_t e) {
            for (std::size_t j = b; j < e; ++j) a.polys[j] = fit_affine(v, geo->reflected_region(j));
        },
        64);
    const std::size_t n = geo->nodes.size();
    a.ev.assign(n * N, 0.0);
    a.jac.assign(n * N * N, 0.0);
    parallel_for(
        n,
        [&](std::size_t b, std::size_t e) {
            for (std::size_t k = b; k < e; ++k) {
                Vec<N> x = geo->grid.point(geo->nodes[k]);
                double* E = &a.ev[k * N];
                double* J = &a.jac[k * N * N];
                for (uint32_t t = geo->term_offsets[k]; t < geo->term_offsets[k + 1]; ++t) {
                    const auto& term = geo->terms[t];
                    const auto& P = a.polys[term.j];
                    Vec<N> Px = P(x);
                    for (int c = 0; c < N; ++c) {
                        E[c] += term.value * Px[c];
                        for (int d = 0; d < N; ++d) J[c * N + d] += term.value * P.B[c * N + d] + Px[c] * term.grad[d];
                    }
                }
            }
        },
        4096);
    return a;
}

/// Builds the geometry on the dyadic grid the field lives on and extends.
template <int N>
ExtensionAssembly<N> extend(const GridField<N>& v, const Domain<N>& dom, int max_level) {
    return extend(build_extension_geometry(dom, v.grid, max_level), v);
}

/// Collar fields for extension runs: collar c = max(2h, edge(max_level) / 2),
/// ramp 4c. The cutoff has risen past its onset on every W1 cube (d >= edge),
/// so the reflected cubes carry a field of bulk size; the spec does not
/// depend on h once h <= edge(max_level) / 4.
template <int N>
FieldSpec extension_field_spec(const Domain<N>& dom, const GridSpec<N>& g, int max_level, uint64_t seed = 0) {
    const double e = DyadicFrame<N>::from_box(dom.bounding_box()).edge(max_level);
    const double c = std::max(2.0 * g.h, 0.5 * e);
    return FieldSpec{3, c, seed, 4.0 * c};
}

// ---------------------------------------------------------------------------
// Reports

/// Norm pieces of v over one interior cube for a fixed exponent.
struct CubeStats {
    PowerSum field, div, curl;
    double field_max = 0.0, grad_max = 0.0;
    explicit CubeStats(double p = 2.0) : field(p), div(p), curl(p) {}
    void merge(const CubeStats& o) {
        for (auto [a, b] : {std::pair{&field, &o.field}, {&div, &o.div}, {&curl, &o.curl}}) {
            if (std::isinf(a->p)) a->acc = std::max(a->acc, b->acc);
            else a->acc += b->acc;
            a->count += b->count;
        }
        field_max = std::max(field_max, o.field_max);
        grad_max = std::max(grad_max, o.grad_max);
    }
};

template <int N>
CubeStats cube_stats(const GridField<N>& v, const Region<N>& S, double p) {
    CubeStats s(p);
    auto q = region_quadrature(v.grid, v.mask, S);
    double J[N * N];
    for (std::size_t k = 0; k < q.nodes.size(); ++k) {
        std::size_t l = q.nodes[k];
        node_gradient(v, l, v.grid.multi(l), J);
        double d = div_of<N>(J), c[3];
        curl_of<N>(J, c);
        s.field.add(&v.values[l * N], N, q.weights[k]);
        s.div.add(&d, 1, q.weights[k]);
        s.curl.add(c, curl_components<N>(), q.weights[k]);
        double m = 0.0;
        for (int i = 0; i < N; ++i) m += v.values[l * N + i] * v.values[l * N + i];
        s.field_max = std::max(s.field_max, std::sqrt(m));
        s.grad_max = std::max(s.grad_max, frobenius<N>(J));
    }
    return s;
}

/// Measured sides of the four cube estimates: [0] L^p of Ev, [1] L^p of
/// curl + div, [2] L^inf of Ev, [3] L^inf of the gradient.
struct CubeEstimate {
    uint32_t cube = 0;  // id into W2
    double lhs[4] = {0, 0, 0, 0};
    double rhs[4] = {0, 0, 0, 0};
    double ratio[4] = {0, 0, 0, 0};
    bool violation = false;
    std::size_t contributors = 0;  // far cubes: touching W3 cubes
    bool asserted_zero = false;    // far cubes with no contributor: Ev == 0 checked
    bool length_ok = true;         // far cubes: every contributor has edge >= edge(Q0) / 4
    // lhs below these counts as zero when rhs = 0; derivative terms carry
    // roundoff of order |Ev| |grad phi| ~ 32 |Ev| / edge
    double zero_tol[4] = {1e-12, 1e-12, 1e-12, 1e-12};

    void finish() {
        for (int i = 0; i < 4; ++i) {
            if (rhs[i] > 0.0) ratio[i] = lhs[i] / rhs[i];
            else if (lhs[i] > zero_tol[i]) violation = true;
        }
    }
};

namespace detail {

// lhs pieces of Ev over a complement cube: the fringe-adapted rule where a
// support reaches the cube, otherwise the lattice nodes of its closed box
template <int N>
void complement_lhs(const ExtensionAssembly<N>& a, uint32_t w2_id, double p, CubeEstimate& r) {
    const auto& geo = *a.geo;
    PowerSum f(p), dv(p), cu(p);
    double fmax = 0.0, gmax = 0.0;
    double E[N], J[N * N];
    auto add = [&](double w) {
        double d = div_of<N>(J), c[3];
        curl_of<N>(J, c);
        f.add(E, N, w);
        dv.add(&d, 1, w);
        cu.add(c, curl_components<N>(), w);
        double m = 0.0;
        for (int i = 0; i < N; ++i) m += E[i] * E[i];
        fmax = std::max(fmax, std::sqrt(m));
        gmax = std::max(gmax, frobenius<N>(J));
    };
    std::size_t c = geo.rule_of(w2_id);
    if (c != SIZE_MAX) {
        for (std::size_t k = geo.rule_offsets[c]; k < geo.rule_offsets[c + 1]; ++k) {
            a.quad_at(k, E, J);
            add(geo.qweights[k]);
        }
    } else {
        auto q = region_quadrature(geo.grid, geo.mask, Region<N>{{geo.w2.box(w2_id)}}, node_exterior);
        for (std::size_t k = 0; k < q.nodes.size(); ++k) {
            a.at(q.nodes[k], E, J);
            add(q.weights[k]);
        }
    }
    r.lhs[0] = f.value();
    r.lhs[1] = cu.value() + dv.value();
    r.lhs[2] = fmax;
    r.lhs[3] = gmax;
    Box<N> b = geo.w2.box(w2_id);
    const double edge = b.extent(0);
    const double dtol = 1e-10 * fmax / edge;
    r.zero_tol[1] = std::max(1e-12, dtol * (std::isinf(p) ? 1.0 : std::pow(b.volume(), 1.0 / p)));
    r.zero_tol[3] = std::max(1e-12, dtol);
}

}  // namespace detail

/// Per-field cache of interior cube statistics for one exponent.
template <int N>
class CubeStatsCache {
public:
    CubeStatsCache(const ExtensionAssembly<N>& a, double p) : a_(a), p_(p) {}
    const CubeStats& get(uint32_t w1_id) {
        auto it = cache_.find(w1_id);
        if (it != cache_.end()) return it->second;
        const auto& w1 = a_.geo->w1;
        return cache_.emplace(w1_id, cube_stats(*a_.v, cube_region(w1.frame, w1.cubes[w1_id]), p_)).first->second;
    }

private:
    const ExtensionAssembly<N>& a_;
    double p_;
    std::unordered_map<uint32_t, CubeStats> cache_;
};

/// Cube estimates for the W3 cube at position j.
template <int N>
CubeEstimate per_cube_report_w3(const ExtensionAssembly<N>& a, std::size_t j, double p, CubeStatsCache<N>& cache) {
    const auto& geo = *a.geo;
    CubeEstimate r;
    r.cube = geo.w3[j];
    detail::complement_lhs(a, r.cube, p, r);
    const CubeStats& star = cache.get(geo.reflection.reflected[j]);
    CubeStats F(p);
    for (uint32_t s : chain_union(geo.chains, j)) F.merge(cache.get(s));
    const double edge = geo.w2.edge(r.cube);
    const double cd = F.curl.value() + F.div.value();
    r.rhs[0] = star.field.value() + edge * cd;
    r.rhs[1] = cd;
    r.rhs[2] = star.field_max + edge * F.grad_max;
    r.rhs[3] = F.grad_max;
    r.finish();
    return r;
}

template <int N>
CubeEstimate per_cube_report_w3(const ExtensionAssembly<N>& a, std::size_t j, double p) {
    CubeStatsCache<N> cache(a, p);
    return per_cube_report_w3(a, j, p, cache);
}

/// Cube estimates for a W2 cube outside W3 (by W2 id).
template <int N>
CubeEstimate per_cube_report_far(const ExtensionAssembly<N>& a, uint32_t w2_id, double p, CubeStatsCache<N>& cache,
                                 const std::unordered_map<uint32_t, uint32_t>& w3_pos) {
    const auto& geo = *a.geo;
    if (w3_pos.count(w2_id)) fail_config("per_cube_report_far: cube belongs to W3");
    CubeEstimate r;
    r.cube = w2_id;
    detail::complement_lhs(a, w2_id, p, r);
    const double edge0 = geo.w2.edge(w2_id);
    for (uint32_t nb : geo.w2.neighbors(w2_id)) {
        auto it = w3_pos.find(nb);
        if (it == w3_pos.end()) continue;
        ++r.contributors;
        if (geo.w2.edge(nb) < 0.25 * edge0 * (1.0 - 1e-12)) r.length_ok = false;
        const CubeStats& s = cache.get(geo.reflection.reflected[it->second]);
        double lp = s.field.value() + s.curl.value() + s.div.value();
        double li = s.field_max + s.grad_max;
        r.rhs[0] += lp;
        r.rhs[1] += lp;
        r.rhs[2] += li;
        r.rhs[3] += li;
    }
    if (r.contributors == 0) {
        r.asserted_zero = true;
        if (r.lhs[0] != 0.0 || r.lhs[2] != 0.0 || r.lhs[3] != 0.0) r.violation = true;
        return r;
    }
    r.finish();
    return r;
}

template <int N>
std::unordered_map<uint32_t, uint32_t> w3_positions(const ExtensionGeometry<N>& geo) {
    std::unordered_map<uint32_t, uint32_t> pos;
    for (uint32_t j = 0; j < geo.w3.size(); ++j) pos.emplace(geo.w3[j], j);
    return pos;
}

struct GlobalReport {
    double corol1_ratio = 0.0;
    double corol2_ratio = 0.0;
    double lhs1 = 0.0, rhs1 = 0.0, lhs2 = 0.0, rhs2 = 0.0;
    bool zero_field = false;  // 0/0 reported as 0
    bool violation = false;   // zero rhs with non-zero lhs
};

/// Ratios of the complement norms of Ev (on the fringe-adapted rule) to the
/// lattice norms of v over the domain.
template <int N>
GlobalReport global_report(const ExtensionAssembly<N>& a, double p) {
    check_exponent(p);
    const auto& geo = *a.geo;
    const double w = geo.grid.cell_volume();
    PowerSum cf(p), cd(p), cc(p);
    double cfi = 0.0, cgi = 0.0;
    double E[N], Jc[N * N];
    for (std::size_t k = 0; k < geo.qpoints.size(); ++k) {
        a.quad_at(k, E, Jc);
        const double qw = geo.qweights[k];
        double d = div_of<N>(Jc), c[3];
        curl_of<N>(Jc, c);
        cf.add(E, N, qw);
        cd.add(&d, 1, qw);
        cc.add(c, curl_components<N>(), qw);
        double m = 0.0;
        for (int i = 0; i < N; ++i) m += E[i] * E[i];
        cfi = std::max(cfi, std::sqrt(m));
        cgi = std::max(cgi, frobenius<N>(Jc));
    }
    PowerSum df(p), dd(p), dc(p);
    double dfi = 0.0, dgi = 0.0;
    const auto& v = *a.v;
    double J[N * N];
    for_each_node<N>(v.grid, 0, v.nodes(), [&](std::size_t l, const std::array<int64_t, N>& idx) {
        if (v.mask[l] != node_interior) return;
        node_gradient(v, l, idx, J);
        double d = div_of<N>(J), c[3];
        curl_of<N>(J, c);
        df.add(&v.values[l * N], N, w);
        dd.add(&d, 1, w);
        dc.add(c, curl_components<N>(), w);
        double m = 0.0;
        for (int i = 0; i < N; ++i) m += v.values[l * N + i] * v.values[l * N + i];
        dfi = std::max(dfi, std::sqrt(m));
        dgi = std::max(dgi, frobenius<N>(J));
    });
    GlobalReport r;
    r.lhs1 = cf.value() + cd.value() + cc.value();
    r.rhs1 = df.value() + dd.value() + dc.value();
    r.lhs2 = std::max(cfi, cgi);
    r.rhs2 = std::max(dfi, dgi);
    auto ratio = [&](double l, double rr, double& out) {
        if (rr > 0.0) out = l / rr;
        else if (l > 0.0) r.violation = true;
        else r.zero_field = true;
    };
    ratio(r.lhs1, r.rhs1, r.corol1_ratio);
    ratio(r.lhs2, r.rhs2, r.corol2_ratio);
    return r;
}

/// Extremes of the cube estimates over W3 and over the far cubes touching W3.
struct ExtensionReport {
    double p = 2.0;
    double w3_max[4] = {0, 0, 0, 0};
    uint32_t w3_argmax[4] = {0, 0, 0, 0};
    double far_max[4] = {0, 0, 0, 0};
    uint32_t far_argmax[4] = {0, 0, 0, 0};
    std::size_t w3_cubes = 0, far_cubes = 0, far_trivial = 0;
    std::size_t violations = 0, length_failures = 0;
    std::size_t partial_polynomials = 0;
    std::size_t quadrature_points = 0;
    int fringe_order = 0, core_order = 0;
    bool quadrature_resolved = false;
    GlobalReport global;
};

template <int N>
ExtensionReport extension_report(const ExtensionAssembly<N>& a, double p) {
    const auto& geo = *a.geo;
    ExtensionReport rep;
    rep.p = p;
    rep.quadrature_points = geo.qpoints.size();
    rep.fringe_order = geo.fringe_order;
    rep.core_order = geo.core_order;
    rep.quadrature_resolved = geo.quadrature_resolved();
    CubeStatsCache<N> cache(a, p);
    auto pos = w3_positions(geo);
    for (std::size_t j = 0; j < geo.w3.size(); ++j) {
        auto r = per_cube_report_w3(a, j, p, cache);
        ++rep.w3_cubes;
        rep.violations += r.violation;
        for (int i = 0; i < 4; ++i)
            if (r.ratio[i] > rep.w3_max[i]) {
                rep.w3_max[i] = r.ratio[i];
                rep.w3_argmax[i] = r.cube;
            }
        rep.partial_polynomials += a.polys[j].partial;
    }
    // far cubes that touch W3; the rest carry no partition term
    std::vector<uint32_t> far;
    for (uint32_t id : geo.w3)
        for (uint32_t nb : geo.w2.neighbors(id))
            if (!pos.count(nb)) far.push_back(nb);
    std::sort(far.begin(), far.end());
    far.erase(std::unique(far.begin(), far.end()), far.end());
    for (uint32_t id : far) {
        auto r = per_cube_report_far(a, id, p, cache, pos);
        ++rep.far_cubes;
        rep.far_trivial += r.asserted_zero;
        rep.violations += r.violation;
        rep.length_failures += !r.length_ok;
        for (int i = 0; i < 4; ++i)
            if (r.ratio[i] > rep.far_max[i]) {
                rep.far_max[i] = r.ratio[i];
                rep.far_argmax[i] = r.cube;
            }
    }
    rep.global = global_report(a, p);
    rep.violations += rep.global.violation;
    return rep;
}

}  // namespace jext
