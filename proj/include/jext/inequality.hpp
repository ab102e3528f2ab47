#pragma once

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "calculus.hpp"

namespace jext {

enum class Inequality { friedrichs, gaffney };

inline std::string inequality_name(Inequality q) { return q == Inequality::friedrichs ? "friedrichs" : "gaffney"; }

inline Inequality parse_inequality(const std::string& s) {
    if (s == "friedrichs") return Inequality::friedrichs;
    if (s == "gaffney") return Inequality::gaffney;
    fail_config("unknown inequality '" + s + "'");
}

struct RatioResult {
    double value = 0.0;
    bool unbounded = false;  // denominator below 1e-14 |v|_{W^{1,p}}
    NormReport norms;
};

inline RatioResult ratio_from_norms(const NormReport& n, Inequality q) {
    RatioResult r;
    r.norms = n;
    double den = n.lp_curl + n.lp_div + (q == Inequality::friedrichs ? n.lp_field : 0.0);
    if (n.w1p == 0.0) fail_config("ratio of the zero field is undefined");
    if (den < 1e-14 * n.w1p) {
        r.unbounded = true;
        r.value = INFINITY;
    } else {
        r.value = n.w1p / den;
    }
    return r;
}

/// |v|_{W^{1,p}} / (|v|_p + |curl v|_p + |div v|_p)
template <int N>
RatioResult friedrichs_ratio(const GridField<N>& v, double p) {
    return ratio_from_norms(norm_report(v, p), Inequality::friedrichs);
}

/// |v|_{W^{1,p}} / (|curl v|_p + |div v|_p)
template <int N>
RatioResult gaffney_ratio(const GridField<N>& v, double p) {
    return ratio_from_norms(norm_report(v, p), Inequality::gaffney);
}

/// Basis fields of a generator restricted to the interior nodes: values,
/// gradients, div and curl per coefficient. Fields are linear in the
/// coefficients, so norms of any combination come from these arrays.
template <int N>
class FieldBasis {
public:
    static constexpr int K = curl_components<N>();
    static constexpr int stride = N + N * N;  // v, J per node

    explicit FieldBasis(const TestFieldGenerator<N>& gen) : gen_(&gen) {
        const auto& mask = gen.mask();
        for (std::size_t l = 0; l < mask.size(); ++l)
            if (mask[l] == node_interior) nodes_.push_back(l);
        m_ = gen.coefficient_count();
        data_.assign(m_ * nodes_.size() * stride, 0.0);
        std::vector<double> e(m_, 0.0);
        for (std::size_t m = 0; m < m_; ++m) {
            e[m] = 1.0;
            auto v = gen.field(e);
            auto J = discrete_grad(v);
            e[m] = 0.0;
            double* out = &data_[m * nodes_.size() * stride];
            for (std::size_t k = 0; k < nodes_.size(); ++k) {
                std::size_t l = nodes_[k];
                for (int c = 0; c < N; ++c) out[k * stride + c] = v.values[l * N + c];
                for (int c = 0; c < N * N; ++c) out[k * stride + N + c] = J.values[l * N * N + c];
            }
        }
        w_ = gen.grid().cell_volume();
    }

    std::size_t size() const { return m_; }
    std::size_t nodes() const { return nodes_.size(); }
    const TestFieldGenerator<N>& generator() const { return *gen_; }

    /// Per-node v and J of the combination.
    std::vector<double> combine(const std::vector<double>& c) const {
        std::vector<double> out(nodes_.size() * stride, 0.0);
        for (std::size_t m = 0; m < m_; ++m) {
            if (c[m] == 0.0) continue;
            const double* b = &data_[m * nodes_.size() * stride];
            for (std::size_t i = 0; i < out.size(); ++i) out[i] += c[m] * b[i];
        }
        return out;
    }

    NormReport norms(const std::vector<double>& block, double p) const {
        PowerSum f(p), g(p), d(p), cu(p);
        for (std::size_t k = 0; k < nodes_.size(); ++k) {
            const double* x = &block[k * stride];
            double dv = div_of<N>(x + N), cc[3];
            curl_of<N>(x + N, cc);
            f.add(x, N, w_);
            g.add(x + N, N * N, w_);
            d.add(&dv, 1, w_);
            cu.add(cc, K, w_);
        }
        NormReport r;
        r.p = p;
        r.lp_field = f.value();
        r.lp_grad = g.value();
        r.lp_div = d.value();
        r.lp_curl = cu.value();
        r.w1p = combine_w1p(r.lp_field, r.lp_grad, p);
        return r;
    }

    RatioResult ratio(const std::vector<double>& c, Inequality q, double p) const {
        return ratio_from_norms(norms(combine(c), p), q);
    }

    /// Ratio and its gradient with respect to the coefficients (finite p).
    double ratio_gradient(const std::vector<double>& c, Inequality q, double p, std::vector<double>& grad) const {
        auto block = combine(c);
        NormReport n = norms(block, p);
        // per-node adjoint weights: d|f|_p / d f = |f|_p^{1-p} |f|^{p-2} f w
        const double sf = std::pow(n.lp_field, 1.0 - p), sg = std::pow(n.lp_grad, 1.0 - p);
        const double sd = n.lp_div > 0 ? std::pow(n.lp_div, 1.0 - p) : 0.0;
        const double sc = n.lp_curl > 0 ? std::pow(n.lp_curl, 1.0 - p) : 0.0;
        auto pw = [&](double mag) { return mag > 0.0 ? std::pow(mag, p - 2.0) : 0.0; };
        // adjoint blocks for the numerator and denominator pieces
        std::vector<double> af(nodes_.size() * stride, 0.0), ad(nodes_.size() * stride, 0.0);
        const double Wp = std::pow(n.w1p, 1.0 - p);  // dW/d|v|_p = W^{1-p} |v|_p^{p-1}
        const double kf = Wp * std::pow(n.lp_field, p - 1.0), kg = Wp * std::pow(n.lp_grad, p - 1.0);
        const bool fr = q == Inequality::friedrichs;
        for (std::size_t k = 0; k < nodes_.size(); ++k) {
            const double* x = &block[k * stride];
            double* A = &af[k * stride];
            double* D = &ad[k * stride];
            double mv = 0.0, mj = 0.0;
            for (int i = 0; i < N; ++i) mv += x[i] * x[i];
            for (int i = 0; i < N * N; ++i) mj += x[N + i] * x[N + i];
            double tv = pw(std::sqrt(mv)) * w_, tj = pw(std::sqrt(mj)) * w_;
            for (int i = 0; i < N; ++i) A[i] = kf * sf * tv * x[i];
            for (int i = 0; i < N * N; ++i) A[N + i] = kg * sg * tj * x[N + i];
            if (fr)
                for (int i = 0; i < N; ++i) D[i] = sf * tv * x[i];
            // div and curl pull back onto J entries
            double dv = div_of<N>(x + N), cc[3];
            curl_of<N>(x + N, cc);
            double td = sd * pw(std::abs(dv)) * w_ * dv;
            for (int i = 0; i < N; ++i) D[N + i * N + i] += td;
            double mc = 0.0;
            for (int i = 0; i < K; ++i) mc += cc[i] * cc[i];
            double tc = sc * pw(std::sqrt(mc)) * w_;
            if constexpr (N == 2) {
                D[N + 2] += tc * cc[0];
                D[N + 1] -= tc * cc[0];
            } else {
                D[N + 7] += tc * cc[0];
                D[N + 5] -= tc * cc[0];
                D[N + 2] += tc * cc[1];
                D[N + 6] -= tc * cc[1];
                D[N + 3] += tc * cc[2];
                D[N + 1] -= tc * cc[2];
            }
        }
        const double num = n.w1p;
        const double den = n.lp_curl + n.lp_div + (fr ? n.lp_field : 0.0);
        const double R = num / den;
        grad.assign(m_, 0.0);
        for (std::size_t m = 0; m < m_; ++m) {
            const double* b = &data_[m * nodes_.size() * stride];
            double gn = 0.0, gd = 0.0;
            for (std::size_t i = 0; i < af.size(); ++i) {
                gn += af[i] * b[i];
                gd += ad[i] * b[i];
            }
            grad[m] = (gn - R * gd) / den;
        }
        return R;
    }

    /// Gram matrices of the p = 2 forms: |v|^2 + |grad v|^2 and |div v|^2 + |curl v|^2.
    void gram(Eigen::MatrixXd& A, Eigen::MatrixXd& B) const {
        const std::size_t n = nodes_.size();
        A.setZero(m_, m_);
        B.setZero(m_, m_);
        std::vector<double> dc(m_ * n * (1 + K));
        for (std::size_t m = 0; m < m_; ++m)
            for (std::size_t k = 0; k < n; ++k) {
                const double* x = &data_[(m * n + k) * stride];
                dc[(m * n + k) * (1 + K)] = div_of<N>(x + N);
                curl_of<N>(x + N, &dc[(m * n + k) * (1 + K) + 1]);
            }
        for (std::size_t a = 0; a < m_; ++a)
            for (std::size_t b = a; b < m_; ++b) {
                const double* x = &data_[a * n * stride];
                const double* y = &data_[b * n * stride];
                double s = 0.0;
                for (std::size_t i = 0; i < n * stride; ++i) s += x[i] * y[i];
                const double* u = &dc[a * n * (1 + K)];
                const double* z = &dc[b * n * (1 + K)];
                double t = 0.0;
                for (std::size_t i = 0; i < n * (1 + K); ++i) t += u[i] * z[i];
                A(a, b) = A(b, a) = s * w_;
                B(a, b) = B(b, a) = t * w_;
            }
    }

private:
    const TestFieldGenerator<N>* gen_;
    std::vector<std::size_t> nodes_;
    std::size_t m_ = 0;
    std::vector<double> data_;
    double w_ = 1.0;
};

struct AscentTrace {
    std::vector<double> ratios;        // nondecreasing
    std::vector<double> coefficients;  // final iterate, scaled to |v|_{W^{1,p}} = 1
    bool converged = false;
};

/// Ascent of the ratio in coefficient space: quasi-Newton (L-BFGS) directions
/// with backtracking, accepting only increases. The ratio is scale invariant;
/// the returned coefficients are scaled to |v|_{W^{1,p}} = 1.
template <int N>
AscentTrace maximize_ratio(const FieldBasis<N>& basis, Inequality q, double p, std::vector<double> c, int iters,
                           double tol = 1e-9) {
    if (!(p > 1.0) || std::isinf(p)) fail_config("maximize_ratio needs 1 < p < inf");
    if (std::all_of(c.begin(), c.end(), [](double x) { return x == 0.0; })) fail_config("maximize_ratio: zero initial field");
    const std::size_t n = c.size();
    auto dot = [](const std::vector<double>& x, const std::vector<double>& y) {
        double s = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
        return s;
    };
    {
        double s = basis.norms(basis.combine(c), p).w1p;
        for (auto& v : c) v /= s;
    }
    AscentTrace tr;
    std::vector<double> g;
    double R = basis.ratio_gradient(c, q, p, g);
    tr.ratios.push_back(R);
    std::vector<std::vector<double>> S, Y;  // history for -R
    const std::size_t mem = 8;
    for (int it = 0; it < iters; ++it) {
        if (std::sqrt(dot(g, g) * dot(c, c)) <= tol * R) {
            tr.converged = true;
            break;
        }
        // two-loop recursion on the minimisation of -R, gradient -g
        std::vector<double> d(g);
        std::vector<double> alpha(S.size());
        for (std::size_t k = S.size(); k-- > 0;) {
            alpha[k] = dot(S[k], d) / dot(Y[k], S[k]);
            for (std::size_t i = 0; i < n; ++i) d[i] -= alpha[k] * Y[k][i];
        }
        double gamma = S.empty() ? 0.1 * std::sqrt(dot(c, c) / dot(g, g)) * R
                                 : dot(S.back(), Y.back()) / dot(Y.back(), Y.back());
        for (auto& x : d) x *= gamma;
        for (std::size_t k = 0; k < S.size(); ++k) {
            double beta = dot(Y[k], d) / dot(Y[k], S[k]);
            for (std::size_t i = 0; i < n; ++i) d[i] += (alpha[k] - beta) * S[k][i];
        }
        if (dot(d, g) <= 0.0) {  // not an ascent direction
            S.clear();
            Y.clear();
            d = g;
            for (auto& x : d) x *= 0.1 * std::sqrt(dot(c, c) / dot(g, g)) * R;
        }
        bool moved = false;
        double t = 1.0;
        for (int bt = 0; bt < 40; ++bt, t *= 0.5) {
            std::vector<double> trial(n);
            for (std::size_t i = 0; i < n; ++i) trial[i] = c[i] + t * d[i];
            std::vector<double> tg;
            double TR = basis.ratio_gradient(trial, q, p, tg);
            if (TR > R) {
                std::vector<double> s(n), y(n);
                for (std::size_t i = 0; i < n; ++i) {
                    s[i] = trial[i] - c[i];
                    y[i] = g[i] - tg[i];
                }
                if (dot(s, y) > 1e-14 * std::sqrt(dot(s, s) * dot(y, y))) {
                    S.push_back(std::move(s));
                    Y.push_back(std::move(y));
                    if (S.size() > mem) {
                        S.erase(S.begin());
                        Y.erase(Y.begin());
                    }
                }
                bool small = TR - R <= tol * R;
                c = std::move(trial);
                g = std::move(tg);
                R = TR;
                tr.ratios.push_back(R);
                moved = true;
                if (small) tr.converged = true;
                break;
            }
        }
        if (!moved) {
            // stagnation: only call it converged if the gradient is negligible
            tr.converged = std::sqrt(dot(g, g) * dot(c, c)) <= 1e-6 * R;
            break;
        }
        if (tr.converged) break;
    }
    double s = basis.norms(basis.combine(c), p).w1p;
    for (auto& v : c) v /= s;
    tr.coefficients = c;
    return tr;
}

struct ConstantEstimate {
    Inequality inequality = Inequality::gaffney;
    BoundaryCondition bc = BoundaryCondition::normal_zero;
    double p = 2.0;
    std::size_t samples = 0;
    uint64_t seed = 0;
    std::vector<double> sample_ratios;
    double sample_max = 0.0;
    double max_ratio = 0.0;
    std::size_t unbounded_candidates = 0;
    std::vector<AscentTrace> traces;
    std::vector<double> maximizer;  // coefficients of the best field
};

/// Max ratio over seeded collar fields (sample i uses seed + i, the same field
/// generate_test_field builds), refined by ascent from the best three.
template <int N>
ConstantEstimate estimate_constant(const FieldBasis<N>& basis, Inequality q, double p, std::size_t samples,
                                   uint64_t seed, int iters = 60) {
    if (samples < 1) fail_config("samples must be >= 1");
    check_exponent(p);
    const auto& gen = basis.generator();
    if (q == Inequality::gaffney && gen.bc() == BoundaryCondition::none)
        fail_config("the gaffney ratio needs a boundary condition");
    ConstantEstimate e;
    e.inequality = q;
    e.bc = gen.bc();
    e.p = p;
    e.samples = samples;
    e.seed = seed;
    std::vector<std::vector<double>> coeffs(samples);
    for (std::size_t i = 0; i < samples; ++i) {
        coeffs[i] = gen.random_coefficients(seed + i);
        auto r = basis.ratio(coeffs[i], q, p);
        e.unbounded_candidates += r.unbounded;
        e.sample_ratios.push_back(r.value);
    }
    std::vector<std::size_t> order(samples);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return e.sample_ratios[a] > e.sample_ratios[b]; });
    e.sample_max = e.sample_ratios[order[0]];
    e.max_ratio = e.sample_max;
    e.maximizer = coeffs[order[0]];
    if (p > 1.0 && !std::isinf(p) && std::isfinite(e.sample_max)) {
        for (std::size_t t = 0; t < std::min<std::size_t>(3, samples); ++t) {
            auto tr = maximize_ratio(basis, q, p, coeffs[order[t]], iters);
            if (tr.ratios.back() > e.max_ratio) {
                e.max_ratio = tr.ratios.back();
                e.maximizer = tr.coefficients;
            }
            e.traces.push_back(std::move(tr));
        }
    }
    return e;
}

/// Fields with small div and curl must themselves be small.
struct WitnessReport {
    std::size_t fields = 0;
    std::size_t hypothesis_hits = 0;  // (|div| + |curl|) <= tol |v|_{W^{1,2}}
    std::size_t counterexamples = 0;  // hits with |v|_{W^{1,2}} > eps_w
    double tol = 1e-6, eps_w = 1e-8;
    double min_relative_denominator = INFINITY;
};

template <int N>
WitnessReport contradiction_witness(const FieldBasis<N>& basis, std::size_t fields, uint64_t seed,
                                    double tol = 1e-6, double eps_w = 1e-8) {
    WitnessReport w;
    w.tol = tol;
    w.eps_w = eps_w;
    const auto& gen = basis.generator();
    for (std::size_t i = 0; i < fields; ++i) {
        auto n = basis.norms(basis.combine(gen.random_coefficients(seed + i)), 2.0);
        ++w.fields;
        double rel = n.w1p > 0.0 ? (n.lp_div + n.lp_curl) / n.w1p : 0.0;
        w.min_relative_denominator = std::min(w.min_relative_denominator, rel);
        if (n.lp_div + n.lp_curl <= tol * n.w1p) {
            ++w.hypothesis_hits;
            if (n.w1p > eps_w) ++w.counterexamples;
        }
    }
    return w;
}

struct StudyRow {
    int level = 0;
    BoundaryCondition bc = BoundaryCondition::normal_zero;
    double p = 2.0;
    double h = 0.0;
    std::size_t samples = 0;
    double sample_max = 0.0;
    double max_ratio = 0.0;
    bool finite = false;
};

/// Gaffney ratio estimates on Koch prefractals of the given levels.
inline std::vector<StudyRow> prefractal_study(const std::vector<int>& levels, const std::vector<BoundaryCondition>& bcs,
                                              const std::vector<double>& ps, double h, std::size_t samples,
                                              uint64_t seed, int iters = 40, const FieldSpec& spec = {}) {
    std::vector<StudyRow> rows;
    for (int level : levels) {
        auto dom = gallery<2>("koch_snowflake", {{"level", static_cast<double>(level)}});
        auto g = GridSpec<2>::covering(dom.bounding_box(), h);
        for (auto bc : bcs) {
            TestFieldGenerator<2> gen(dom, g, bc, spec);
            FieldBasis<2> basis(gen);
            for (double p : ps) {
                auto e = estimate_constant(basis, Inequality::gaffney, p, samples, seed, iters);
                rows.push_back({level, bc, p, g.h, samples, e.sample_max, e.max_ratio, std::isfinite(e.max_ratio)});
            }
        }
    }
    return rows;
}

// ---------------------------------------------------------------------------
// p = 2 oracle over all node potentials supported where d >= collar

template <int N>
struct SpectralResult {
    double gaffney_constant_p2 = 0.0;  // sqrt of the top generalized eigenvalue
    double top_eigenvalue = 0.0;
    std::size_t unknowns = 0;
    int iterations = 0;
    GridField<N> eigenfield;
};

template <int N>
SpectralResult<N> spectral_oracle_p2(const Domain<N>& dom, const GridSpec<N>& g, BoundaryCondition bc, double collar) {
    using SpMat = Eigen::SparseMatrix<double>;
    using Trip = Eigen::Triplet<double>;
    if (bc == BoundaryCondition::none) fail_config("spectral oracle needs a boundary condition");
    if (N == 3 && bc == BoundaryCondition::normal_zero)
        fail_numerical("singular constraint space: vector potentials carry a gradient gauge");
    if (collar == 0.0) collar = 4.0 * g.h;
    if (collar < 2.0 * g.h * (1.0 - 1e-12)) fail_config("collar width must be at least 2h");
    auto mask = membership_mask(dom, g);
    std::vector<int64_t> unk(g.count(), -1), row(g.count(), -1);
    std::size_t nu = 0, ni = 0;
    for (std::size_t l = 0; l < g.count(); ++l) {
        if (mask[l] != node_interior) continue;
        row[l] = static_cast<int64_t>(ni++);
        if (dom.boundary_distance(g.point(l)) >= collar) unk[l] = static_cast<int64_t>(nu++);
    }
    if (nu == 0) fail_config("collar thicker than domain inradius");
    if (nu > 200000) fail_config("spectral oracle: too many unknowns");
    // L: potentials -> v at interior nodes (central differences)
    std::vector<Trip> lt;
    const double s = 0.5 / g.h;
    for_each_node<N>(g, 0, g.count(), [&](std::size_t l, const std::array<int64_t, N>& idx) {
        if (row[l] < 0) return;
        for (int axis = 0; axis < N; ++axis) {
            const std::size_t st = g.stride(axis);
            for (int sign : {-1, 1}) {
                int64_t j = idx[axis] + sign;
                if (j < 0 || j >= g.dims[axis]) continue;
                std::size_t m = sign > 0 ? l + st : l - st;
                if (unk[m] < 0) continue;
                double w = sign * s;
                if (bc == BoundaryCondition::tangential_zero) {
                    lt.emplace_back(row[l] * N + axis, unk[m], w);
                } else {  // 2D: v = (-d2 psi, d1 psi)
                    if (axis == 1) lt.emplace_back(row[l] * N + 0, unk[m], -w);
                    else lt.emplace_back(row[l] * N + 1, unk[m], w);
                }
            }
        }
    });
    SpMat L(ni * N, nu);
    L.setFromTriplets(lt.begin(), lt.end());
    // Gm: v -> J at interior nodes with the masked stencils
    std::vector<Trip> gt;
    for_each_node<N>(g, 0, g.count(), [&](std::size_t l, const std::array<int64_t, N>& idx) {
        if (row[l] < 0) return;
        for (int j = 0; j < N; ++j) {
            Stencil st;
            if (!derivative_stencil(g, mask.data(), l, idx[j], j, st)) continue;
            for (int t = 0; t < st.taps; ++t) {
                std::size_t m = static_cast<std::size_t>(static_cast<std::ptrdiff_t>(l) + st.off[t]);
                for (int c = 0; c < N; ++c) gt.emplace_back(row[l] * N * N + c * N + j, row[m] * N + c, st.w[t]);
            }
        }
    });
    SpMat Gm(ni * N * N, ni * N);
    Gm.setFromTriplets(gt.begin(), gt.end());
    // Dm: J -> (div, curl)
    constexpr int K = curl_components<N>();
    std::vector<Trip> dt;
    for (std::size_t k = 0; k < ni; ++k) {
        const int64_t r0 = static_cast<int64_t>(k * (1 + K)), c0 = static_cast<int64_t>(k * N * N);
        for (int i = 0; i < N; ++i) dt.emplace_back(r0, c0 + i * N + i, 1.0);
        if constexpr (N == 2) {
            dt.emplace_back(r0 + 1, c0 + 2, 1.0);
            dt.emplace_back(r0 + 1, c0 + 1, -1.0);
        } else {
            dt.emplace_back(r0 + 1, c0 + 7, 1.0);
            dt.emplace_back(r0 + 1, c0 + 5, -1.0);
            dt.emplace_back(r0 + 2, c0 + 2, 1.0);
            dt.emplace_back(r0 + 2, c0 + 6, -1.0);
            dt.emplace_back(r0 + 3, c0 + 3, 1.0);
            dt.emplace_back(r0 + 3, c0 + 1, -1.0);
        }
    }
    SpMat Dm(ni * (1 + K), ni * N * N);
    Dm.setFromTriplets(dt.begin(), dt.end());
    const double w = g.cell_volume();
    SpMat GL = Gm * L;
    SpMat DGL = Dm * GL;
    SpMat B = SpMat(DGL.transpose() * DGL) * w;
    SpMat A = SpMat(SpMat(L.transpose() * L) + SpMat(GL.transpose() * GL)) * w;
    SpMat M = A - B;
    Eigen::SimplicialLDLT<SpMat> solver(B);
    if (solver.info() != Eigen::Success) fail_numerical("singular constraint space: div/curl form not definite");
    Eigen::VectorXd x(nu);
    std::mt19937_64 rng(12345);
    std::normal_distribution<double> gauss;
    for (std::size_t i = 0; i < nu; ++i) x[i] = gauss(rng);
    double mu = 0.0, prev = -1.0;
    SpectralResult<N> res;
    res.unknowns = nu;
    for (int it = 0; it < 5000; ++it) {
        Eigen::VectorXd y = solver.solve(M * x);
        if (solver.info() != Eigen::Success) fail_numerical("spectral oracle: solve failed");
        x = y / y.norm();
        mu = x.dot(M * x) / x.dot(B * x);
        res.iterations = it + 1;
        if (std::abs(mu - prev) <= 1e-12 * std::max(1.0, std::abs(mu))) break;
        prev = mu;
    }
    res.top_eigenvalue = 1.0 + mu;
    res.gaffney_constant_p2 = std::sqrt(1.0 + mu);
    // eigenfield v = L x
    Eigen::VectorXd v = L * x;
    res.eigenfield = GridField<N>(g, N, mask);
    for (std::size_t l = 0; l < g.count(); ++l)
        if (row[l] >= 0)
            for (int c = 0; c < N; ++c) res.eigenfield.values[l * N + c] = v[row[l] * N + c];
    return res;
}

}  // namespace jext
