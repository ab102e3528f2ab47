#pragma once

#include <algorithm>
#include <cmath>
#include <unordered_map>
#include <vector>

#include "whitney.hpp"

namespace jext {

/// Smooth partition of unity over a cube family (the W3 cubes).
///
/// psi_j is a tensor product of 1D profiles, 1 on Q_j and falling to 0 across
/// a fringe of width edge/32, so supp psi_j = (17/16) Q_j. With
/// sigma = sum_k psi_k the bumps are phi_j = psi_j * g(sigma),
/// g(s) = step(min(s, 1)) / s; g = 1/sigma wherever sigma >= 1 (in particular
/// on the union of the cubes) and g fades out smoothly where sigma < 1.
template <int N>
class PartitionOfUnity {
public:
    struct Term {
        uint32_t j;    // position in the cube family
        double value;  // phi_j(x)
        Vec<N> grad;   // grad phi_j(x)
    };

    static constexpr double fringe = 1.0 / 16.0;  // in half-edge units

    PartitionOfUnity() = default;
    PartitionOfUnity(DyadicFrame<N> frame, std::vector<DyadicCube<N>> cubes)
        : frame_(frame), cubes_(std::move(cubes)) {
        lookup_.reserve(cubes_.size());
        for (uint32_t i = 0; i < cubes_.size(); ++i) {
            lookup_.emplace(cubes_[i], i);
            if (std::find(levels_.begin(), levels_.end(), cubes_[i].level) == levels_.end())
                levels_.push_back(cubes_[i].level);
        }
        std::sort(levels_.begin(), levels_.end());
    }

    const std::vector<DyadicCube<N>>& cubes() const { return cubes_; }
    const DyadicFrame<N>& frame() const { return frame_; }
    std::size_t size() const { return cubes_.size(); }

    /// 1D profile and its derivative in s = |t| / half-edge.
    static void profile(double s, double& rho, double& drho) {
        if (s <= 1.0) {
            rho = 1.0;
            drho = 0.0;
        } else if (s >= 1.0 + fringe) {
            rho = 0.0;
            drho = 0.0;
        } else {
            double u = (s - 1.0) / fringe;
            rho = 1.0 - smooth_step(u);
            drho = -smooth_step_derivative(u) / fringe;
        }
    }

    /// psi_j(x) and its gradient.
    double psi(uint32_t j, const Vec<N>& x, Vec<N>* grad = nullptr) const {
        const auto& c = cubes_[j];
        const double half = 0.5 * frame_.edge(c.level);
        const Vec<N> m = frame_.center(c);
        double r[N], dr[N];
        for (int i = 0; i < N; ++i) {
            double t = x[i] - m[i];
            profile(std::abs(t) / half, r[i], dr[i]);
            if (r[i] == 0.0) {
                if (grad) grad->fill(0.0);
                return 0.0;
            }
            dr[i] *= (t < 0.0 ? -1.0 : 1.0) / half;
        }
        double v = 1.0;
        for (int i = 0; i < N; ++i) v *= r[i];
        if (grad) {
            for (int i = 0; i < N; ++i) {
                double g = dr[i];
                for (int k = 0; k < N; ++k)
                    if (k != i) g *= r[k];
                (*grad)[i] = g;
            }
        }
        return v;
    }

    /// Cubes whose support (17/16 Q) contains x, by ascending position.
    std::vector<uint32_t> candidates(const Vec<N>& x) const {
        std::vector<uint32_t> out;
        for (int L : levels_) {
            DyadicCube<N> base = frame_.locate(x, L);
            for (int code = 0; code < ipow3(); ++code) {
                DyadicCube<N> q = base;
                int t = code;
                for (int a = 0; a < N; ++a, t /= 3) q.index[a] += t % 3 - 1;
                auto it = lookup_.find(q);
                if (it == lookup_.end()) continue;
                if (frame_.scaled_box(q, 1.0 + fringe).contains(x)) out.push_back(it->second);
            }
        }
        std::sort(out.begin(), out.end());
        return out;
    }

    /// Non-zero phi_j at x with analytic gradients.
    std::vector<Term> eval(const Vec<N>& x) const {
        std::vector<Term> terms;
        auto cand = candidates(x);
        double sigma = 0.0;
        Vec<N> dsigma{};
        for (uint32_t j : cand) {
            Vec<N> g;
            double p = psi(j, x, &g);
            if (p <= 0.0) continue;
            terms.push_back({j, p, g});
            sigma += p;
            for (int i = 0; i < N; ++i) dsigma[i] += g[i];
        }
        if (terms.empty()) return terms;
        double G, dG;
        normalizer(sigma, G, dG);
        for (auto& t : terms) {
            double p = t.value;
            for (int i = 0; i < N; ++i) t.grad[i] = G * t.grad[i] + p * dG * dsigma[i];
            t.value = p * G;
        }
        return terms;
    }

    /// g(s) = step(min(s,1)) / s and g'(s).
    static void normalizer(double s, double& g, double& dg) {
        if (s >= 1.0) {
            g = 1.0 / s;
            dg = -1.0 / (s * s);
        } else {
            double S = smooth_step(s), dS = smooth_step_derivative(s);
            g = S / s;
            dg = (dS * s - S) / (s * s);
        }
    }

private:
    static constexpr int ipow3() { return N == 2 ? 9 : 27; }

    DyadicFrame<N> frame_;
    std::vector<DyadicCube<N>> cubes_;
    std::unordered_map<DyadicCube<N>, uint32_t, DyadicCubeHash<N>> lookup_;
    std::vector<int> levels_;
};

template <int N>
PartitionOfUnity<N> build_partition(const WhitneyDecomposition<N>& w2, const std::vector<uint32_t>& w3) {
    std::vector<DyadicCube<N>> cubes;
    cubes.reserve(w3.size());
    for (uint32_t id : w3) cubes.push_back(w2.cubes[id]);
    // (w3) among the family is what keeps the number of overlapping bumps
    // bounded: no member may touch a member more than two levels coarser
    std::unordered_map<DyadicCube<N>, uint32_t, DyadicCubeHash<N>> members;
    int lo = INT32_MAX;
    for (uint32_t i = 0; i < cubes.size(); ++i) {
        members.emplace(cubes[i], i);
        lo = std::min(lo, cubes[i].level);
    }
    for (const auto& c : cubes)
        for (int L = lo; L < c.level - 2; ++L) {
            int sh = c.level - L;
            for (int code = 0; code < (N == 2 ? 9 : 27); ++code) {
                DyadicCube<N> q{L, {}};
                int t = code;
                for (int a = 0; a < N; ++a, t /= 3) q.index[a] = (c.index[a] >> sh) + t % 3 - 1;
                if (members.count(q) && cubes_touch(c, q))
                    fail_invariant("build_partition: touching cubes violate the size ratio (w3)");
            }
        }
    return PartitionOfUnity<N>(w2.frame, std::move(cubes));
}

/// Sampled quality numbers of a partition.
struct PartitionReport {
    std::size_t points = 0;
    double max_sum_error = 0.0;         // |sum phi - 1| on the union of cubes
    std::size_t support_violations = 0; // phi_j > 0 outside (17/16) Q_j
    std::size_t range_violations = 0;   // phi_j outside [0, 1]
    double c_phi = 0.0;                 // max |grad phi_j| * edge(Q_j)
    std::vector<double> c_phi_per_cube;
};

/// Evaluates the partition at quasi-random points of the supports, cycling
/// over cubes. The sum is checked only where a point lies in some cube.
template <int N>
PartitionReport partition_report(const PartitionOfUnity<N>& pu, std::size_t points) {
    PartitionReport r;
    r.c_phi_per_cube.assign(pu.size(), 0.0);
    if (pu.size() == 0) return r;
    const auto& fr = pu.frame();
    std::vector<double> err(points, 0.0);
    std::vector<uint8_t> sup(points, 0), rng(points, 0);
    std::vector<std::vector<std::pair<uint32_t, double>>> cphi(points);
    parallel_for(
        points,
        [&](std::size_t b, std::size_t e) {
            for (std::size_t k = b; k < e; ++k) {
                std::size_t j = (k * 2654435761u) % pu.size();
                Box<N> box = fr.scaled_box(pu.cubes()[j], 17.0 / 16.0);
                Vec<N> x;
                // additive recurrence with irrational steps, one per axis
                static const double alpha[3] = {0.7548776662466927, 0.5698402909980532, 0.4301597090019468};
                for (int i = 0; i < N; ++i) x[i] = box.lo[i] + std::fmod(0.5 + (k + 1) * alpha[i], 1.0) * box.extent(i);
                auto terms = pu.eval(x);
                double s = 0.0;
                bool covered = false;
                for (const auto& t : terms) {
                    s += t.value;
                    covered = covered || fr.box(pu.cubes()[t.j]).contains(x);
                    if (t.value < 0.0 || t.value > 1.0) rng[k] = 1;
                    if (!fr.scaled_box(pu.cubes()[t.j], 17.0 / 16.0).contains(x)) sup[k] = 1;
                    cphi[k].push_back({t.j, norm(t.grad) * fr.edge(pu.cubes()[t.j].level)});
                }
                if (covered) err[k] = std::abs(s - 1.0);
            }
        },
        256);
    r.points = points;
    for (std::size_t k = 0; k < points; ++k) {
        r.max_sum_error = std::max(r.max_sum_error, err[k]);
        r.support_violations += sup[k];
        r.range_violations += rng[k];
        for (auto [j, c] : cphi[k]) {
            r.c_phi_per_cube[j] = std::max(r.c_phi_per_cube[j], c);
            r.c_phi = std::max(r.c_phi, c);
        }
    }
    return r;
}

}  // namespace jext
