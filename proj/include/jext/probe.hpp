#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <random>
#include <vector>

#include "whitney.hpp"

namespace jext {

template <int N>
struct ProbeWitness {
    Vec<N> x{}, y{};
    double length_ratio = 0.0;  // length(path) / |x - y|
    double cigar = 0.0;         // min over path of d(z) |x-y| / (|x-z| |y-z|)
    std::size_t path_vertices = 0;
};

template <int N>
struct ProbeReport {
    std::size_t pairs = 0;
    double worst_length_ratio = 0.0;
    double worst_cigar_ratio = std::numeric_limits<double>::infinity();
    double implied_epsilon = 0.0;  // min(1 / worst_length_ratio, worst_cigar_ratio)
    ProbeWitness<N> length_witness, cigar_witness;
    std::vector<ProbeWitness<N>> witnesses;  // one per pair, in sampling order
};

namespace detail {

template <int N>
Vec<N> uniform_point_in(const Domain<N>& dom, std::mt19937_64& rng) {
    Box<2> sb = dom.section().bounds();
    std::uniform_real_distribution<double> ux(sb.lo[0], sb.hi[0]), uy(sb.lo[1], sb.hi[1]), uz(0.0, 1.0);
    for (int tries = 0; tries < 1000000; ++tries) {
        Vec<N> p;
        p[0] = ux(rng);
        p[1] = uy(rng);
        if constexpr (N == 3) p[2] = uz(rng) * dom.height();
        if (dom.contains(p)) return p;
    }
    fail_numerical("could not sample a point inside the domain");
}

// Walks the segment with steps of half the local boundary distance, so each
// step stays inside a ball contained in the domain. Returns false if the
// segment leaves the domain; otherwise folds the cigar quantity into `cigar`.
template <int N>
bool walk_segment(const Domain<N>& dom, const Vec<N>& a, const Vec<N>& b, const Vec<N>& x, const Vec<N>& y,
                  double floor_cigar, double& cigar) {
    const double len = distance(a, b);
    const double xy = distance(x, y);
    const double min_step = 1e-9 * std::max(xy, 1e-12);
    double t = 0.0;
    double local = cigar;
    while (true) {
        Vec<N> z = a + (len > 0.0 ? t / len : 0.0) * (b - a);
        if (!dom.contains(z)) return false;
        double d = dom.boundary_distance(z);
        double p = distance(x, z) * distance(y, z);
        if (p > 0.0) {
            double c = d * xy / p;
            if (c < floor_cigar) return false;
            local = std::min(local, c);
        }
        if (t >= len) break;
        t = std::min(len, t + std::max(0.5 * d, min_step));
    }
    cigar = local;
    return true;
}

}  // namespace detail

/// Absolute allowance on length ratios for paths built from cube centres.
inline constexpr double probe_length_slack = 0.1;

/// Empirical check of the length and cigar conditions: for random pairs with
/// |x - y| < delta, builds a path through the interior cube graph (Dijkstra
/// with quasi-hyperbolic edge weights), shortcuts it greedily while keeping the
/// cigar quantity above the domain's epsilon, and reports the worst ratios.
template <int N>
ProbeReport<N> epsilon_delta_probe(const Domain<N>& dom, const WhitneyDecomposition<N>& w1, std::size_t pair_count,
                                   uint64_t seed) {
    if (pair_count < 1) fail_config("pair_count must be at least 1");
    if (w1.side != Side::interior || w1.size() == 0)
        fail_config("epsilon_delta_probe needs a non-empty interior decomposition");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);

    std::vector<double> center_dist(w1.size());
    for (std::size_t i = 0; i < w1.size(); ++i) center_dist[i] = dom.boundary_distance(w1.center(i));

    ProbeReport<N> rep;
    rep.pairs = pair_count;
    rep.worst_length_ratio = 0.0;
    rep.worst_cigar_ratio = std::numeric_limits<double>::infinity();
    const double delta = std::min(dom.delta(), dom.diameter());

    for (std::size_t pair = 0; pair < pair_count; ++pair) {
        Vec<N> x, y;
        std::optional<uint32_t> cx, cy;
        for (int tries = 0;; ++tries) {
            if (tries > 100000) fail_numerical("epsilon_delta_probe: could not sample an admissible pair");
            x = detail::uniform_point_in(dom, rng);
            Vec<N> dir;
            for (int i = 0; i < N; ++i) dir[i] = gauss(rng);
            double nd = norm(dir);
            if (nd == 0.0) continue;
            double r = unit(rng) * delta;
            y = x + (r / nd) * dir;
            if (r <= 0.0 || !dom.contains(y)) continue;
            cx = w1.locate(x);
            cy = w1.locate(y);
            if (cx && cy) break;
        }

        // Dijkstra: weight |c_i - c_j| * 2 / (d_i + d_j)
        std::vector<double> dist(w1.size(), std::numeric_limits<double>::infinity());
        std::vector<uint32_t> prev(w1.size(), UINT32_MAX);
        using Item = std::pair<double, uint32_t>;
        std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
        dist[*cx] = 0.0;
        pq.push({0.0, *cx});
        while (!pq.empty()) {
            auto [du, u] = pq.top();
            pq.pop();
            if (du > dist[u]) continue;
            if (u == *cy) break;
            for (uint32_t v : w1.neighbors(u)) {
                double wgt = distance(w1.center(u), w1.center(v)) * 2.0 / (center_dist[u] + center_dist[v]);
                if (du + wgt < dist[v]) {
                    dist[v] = du + wgt;
                    prev[v] = u;
                    pq.push({dist[v], v});
                }
            }
        }
        if (dist[*cy] == std::numeric_limits<double>::infinity())
            fail_invariant("epsilon_delta_probe: interior cube graph is disconnected");
        std::vector<Vec<N>> pts{y};
        for (uint32_t c = *cy; c != *cx; c = prev[c]) pts.push_back(w1.center(c));
        pts.push_back(w1.center(*cx));
        pts.push_back(x);
        std::reverse(pts.begin(), pts.end());

        // greedy shortcuts; candidate targets on a halving ladder from the end
        std::vector<Vec<N>> path{x};
        double cigar = std::numeric_limits<double>::infinity();
        std::size_t i = 0;
        const std::size_t last = pts.size() - 1;
        while (i < last) {
            std::size_t gap = last - i;
            bool moved = false;
            while (gap >= 1) {
                std::size_t j = i + gap;
                double c = cigar;
                if (detail::walk_segment<N>(dom, pts[i], pts[j], x, y, dom.epsilon(), c)) {
                    cigar = c;
                    path.push_back(pts[j]);
                    i = j;
                    moved = true;
                    break;
                }
                if (gap == 1) break;
                gap /= 2;
            }
            if (!moved) {
                // keep the cube-path leg as is, recording its cigar value
                double c = cigar;
                if (!detail::walk_segment<N>(dom, pts[i], pts[i + 1], x, y, 0.0, c))
                    fail_invariant("epsilon_delta_probe: cube path leaves the domain");
                cigar = c;
                path.push_back(pts[i + 1]);
                ++i;
            }
        }
        double len = 0.0;
        for (std::size_t k = 1; k < path.size(); ++k) len += distance(path[k - 1], path[k]);
        ProbeWitness<N> wit{x, y, len / distance(x, y), cigar, path.size()};
        rep.witnesses.push_back(wit);
        if (wit.length_ratio > rep.worst_length_ratio) {
            rep.worst_length_ratio = wit.length_ratio;
            rep.length_witness = wit;
        }
        if (wit.cigar < rep.worst_cigar_ratio) {
            rep.worst_cigar_ratio = wit.cigar;
            rep.cigar_witness = wit;
        }
    }
    rep.implied_epsilon = std::min(1.0 / rep.worst_length_ratio, rep.worst_cigar_ratio);
    return rep;
}

struct DSetReport {
    double estimated_d = 0.0;
    double c1_hat = 0.0;
    double c2_hat = 0.0;
    std::vector<double> radii_tested;
    std::vector<double> mean_measure;               // per radius
    std::vector<std::vector<std::size_t>> counts;  // [point][radius]
    std::size_t boundary_samples = 0;
    bool undersampled = false;  // smallest radius saw fewer than 10 samples somewhere
    std::vector<std::size_t> undersampled_points;
};

/// Box-counting style estimate of the boundary dimension: mu(B(P, r)) is
/// estimated from a measure-uniform boundary sample, d is the least-squares
/// slope of log mean mu against log r.
template <int N>
DSetReport dset_check(const Domain<N>& dom, const std::vector<double>& radii, std::size_t points,
                      std::size_t boundary_samples = 0) {
    if (radii.size() < 2) fail_config("insufficient radii: at least two are needed to fit a slope");
    for (std::size_t i = 0; i < radii.size(); ++i) {
        if (!(radii[i] > 0.0)) fail_config("radii must be positive");
        if (i > 0 && !(radii[i] < radii[i - 1])) fail_config("radii must be strictly descending");
    }
    if (points < 1) fail_config("points must be at least 1");
    if (boundary_samples == 0) boundary_samples = N == 2 ? 200000 : 400000;
    auto sample = dom.boundary_sample(boundary_samples);
    const double weight = dom.boundary_measure() / static_cast<double>(sample.size());

    DSetReport rep;
    rep.radii_tested = radii;
    rep.boundary_samples = sample.size();
    rep.counts.assign(points, std::vector<std::size_t>(radii.size(), 0));
    std::size_t stride = std::max<std::size_t>(1, sample.size() / points);
    parallel_for(
        points,
        [&](std::size_t b, std::size_t e) {
            for (std::size_t p = b; p < e; ++p) {
                const Vec<N>& c = sample[(p * stride + stride / 2) % sample.size()];
                for (const auto& q : sample) {
                    double d = distance(c, q);
                    for (std::size_t r = 0; r < radii.size() && d <= radii[r]; ++r) ++rep.counts[p][r];
                }
            }
        },
        1);
    rep.mean_measure.assign(radii.size(), 0.0);
    for (std::size_t p = 0; p < points; ++p) {
        if (rep.counts[p].back() < 10) {
            rep.undersampled = true;
            rep.undersampled_points.push_back(p);
        }
        for (std::size_t r = 0; r < radii.size(); ++r) rep.mean_measure[r] += rep.counts[p][r] * weight / points;
    }
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double m = static_cast<double>(radii.size());
    for (std::size_t r = 0; r < radii.size(); ++r) {
        double lx = std::log(radii[r]), ly = std::log(rep.mean_measure[r]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    rep.estimated_d = std::clamp((m * sxy - sx * sy) / (m * sxx - sx * sx), 0.0, static_cast<double>(N));
    rep.c1_hat = std::numeric_limits<double>::infinity();
    rep.c2_hat = 0.0;
    for (std::size_t p = 0; p < points; ++p)
        for (std::size_t r = 0; r < radii.size(); ++r) {
            double c = rep.counts[p][r] * weight / std::pow(radii[r], rep.estimated_d);
            rep.c1_hat = std::min(rep.c1_hat, c);
            rep.c2_hat = std::max(rep.c2_hat, c);
        }
    return rep;
}

/// Geometric radii from r_max down to r_min.
inline std::vector<double> geometric_radii(double r_max, double r_min, std::size_t count) {
    std::vector<double> r(count);
    for (std::size_t i = 0; i < count; ++i)
        r[i] = r_max * std::pow(r_min / r_max, count == 1 ? 0.0 : static_cast<double>(i) / (count - 1));
    return r;
}

}  // namespace jext
