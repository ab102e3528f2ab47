#pragma once

#include <string>
#include <vector>

#include "report.hpp"

namespace jext {

struct VerifyCheck {
    std::string tag;
    bool pass = true;
    json detail;
};

struct VerifyOptions {
    int max_level = 0;   // 0: the coarsest level with a non-empty W3, at least 8 (2D) / 5 (3D)
    int grid_level = 0;  // 0: max_level + 2 in 2D, max_level in 3D
    std::size_t fields = 3;   // seeded collar fields for the analytic checks
    uint64_t seed = 1;
    std::size_t partition_points = 10000;
    std::string inject_fault;  // "", "w3"
};

/// Shrinks one W2 cube by 2^5 in place, so it touches neighbours far outside
/// the admissible size ratio.
template <int N>
void inject_w3_fault(WhitneyDecomposition<N>& w) {
    if (w.size() == 0) fail_config("cannot inject a fault into an empty decomposition");
    std::size_t i = w.size() / 2;
    auto& c = w.cubes[i];
    c.level += 5;
    for (auto& k : c.index) k *= 32;
    w.max_level = std::max(w.max_level, c.level);
    w.rebuild_lookup();
    w.rebuild_adjacency();
}

template <int N>
std::vector<VerifyCheck> verify_suite(const Domain<N>& dom, VerifyOptions opt) {
    if (opt.max_level == 0) opt.max_level = std::max(N == 2 ? 8 : 5, min_w3_level(dom));
    if (opt.grid_level == 0) opt.grid_level = N == 2 ? opt.max_level + 2 : opt.max_level;
    if (!opt.inject_fault.empty() && opt.inject_fault != "w3")
        fail_config("unknown fault '" + opt.inject_fault + "' (supported: w3)");
    std::vector<VerifyCheck> out;
    auto add = [&](std::string tag, bool pass, json detail) { out.push_back({std::move(tag), pass, std::move(detail)}); };

    auto g = GridSpec<N>::dyadic(dom.bounding_box(), opt.grid_level);
    auto geo = build_extension_geometry(dom, g, opt.max_level);

    // Whitney properties on both sides
    WhitneyCheck c1 = check_whitney(geo->w1, dom);
    WhitneyDecomposition<N> w2 = geo->w2;
    if (opt.inject_fault == "w3") inject_w3_fault(w2);
    WhitneyCheck c2 = check_whitney(w2, dom);
    json wd = {{"interior", whitney_check_json(c1)}, {"complement", whitney_check_json(c2)}};
    add("(w1)", c1.w1_violations + c2.w1_violations == 0, wd);
    add("(w2)", c1.w2_violations + c2.w2_violations == 0, wd);
    add("(w3)", c1.w3_violations + c1.touch_violations + c2.w3_violations + c2.touch_violations == 0, wd);

    // reflected cubes and chains
    const auto& R = geo->reflection;
    std::size_t size_bad = 0;
    double dmax = 0.0;
    for (std::size_t i = 0; i < R.size(); ++i) {
        if (!(R.size_ratio[i] >= 1.0 && R.size_ratio[i] <= 4.0)) ++size_bad;
        dmax = std::max(dmax, R.dist_ratio[i]);
    }
    add("(numero)", size_bad == 0 && std::isfinite(R.c_refl) && dmax <= R.c_refl,
        {{"w3_cubes", R.size()}, {"size_clause_failures", size_bad}, {"c_refl", num(R.c_refl)}});
    std::size_t broken = 0;
    for (const auto& per : geo->chains.chains)
        for (const auto& ch : per)
            for (std::size_t k = 1; k < ch.size(); ++k)
                if (!cubes_touch(geo->w1.cubes[ch[k - 1]], geo->w1.cubes[ch[k]])) ++broken;
    add("chains", broken == 0, {{"pairs", geo->chains.pair_count}, {"max_m", geo->chains.max_length}, {"broken_links", broken}});

    // partition of unity
    auto pr = partition_report(geo->partition, opt.partition_points);
    add("partition", pr.max_sum_error <= 1e-12 && pr.support_violations == 0 && pr.range_violations == 0,
        {{"points", pr.points}, {"max_sum_error", pr.max_sum_error}, {"support_violations", pr.support_violations},
         {"range_violations", pr.range_violations}, {"c_phi", pr.c_phi}});

    // analytic checks on seeded collar fields
    TestFieldGenerator<N> gen(dom, g, BoundaryCondition::normal_zero, extension_field_spec(dom, g, opt.max_level));
    std::size_t prop2_bad = 0, divp_bad = 0, pinf_bad = 0, ev_bad = 0, fin_bad = 0, viol = 0;
    double prop2_worst = 0.0, divp_worst = 0.0, pinf_worst = 0.0, c1max = 0.0, c2max = 0.0, fr = 0.0, ga = 0.0;
    std::size_t cube_viol[4] = {0, 0, 0, 0};
    for (std::size_t f = 0; f < opt.fields; ++f) {
        auto v = gen.field(gen.random_coefficients(opt.seed + f));
        auto a = extend(geo, v);
        double umax = 0.0;  // sup of the field over the domain
        for (std::size_t l = 0; l < v.nodes(); ++l)
            if (v.mask[l] == node_interior)
                for (int c = 0; c < N; ++c) umax = std::max(umax, std::abs(v.values[l * N + c]));
        for (std::size_t j = 0; j < a.polys.size(); ++j) {
            const auto& P = a.polys[j];
            auto rr = residual_report(v, P, 2.0);
            auto gc = gradient_comparison(v, P, INFINITY);
            double gmax = 0.0, J[N * N];
            for (std::size_t l : region_quadrature(v.grid, v.mask, P.region).nodes) {
                node_gradient(v, l, v.grid.multi(l), J);
                gmax = std::max(gmax, frobenius<N>(J));
            }
            double m = 0.0;
            for (int c = 0; c < N; ++c) m = std::max(m, std::abs(rr.mean_residual[c]));
            prop2_worst = std::max(prop2_worst, umax > 0 ? m / umax : 0.0);
            if (m > 1e-10 * umax) ++prop2_bad;
            double tr = 0.0;
            for (int c = 0; c < N; ++c) tr += P.B[c * N + c];
            const double edge = P.region.diameter() / std::sqrt(double(N));
            const double bound = (g.h / edge) * (g.h / edge) * gmax + 1e-13 * gmax;
            divp_worst = std::max(divp_worst, gmax > 0 ? std::abs(tr - P.mean_div) / gmax : 0.0);
            if (std::abs(tr - P.mean_div) > bound) ++divp_bad;
            pinf_worst = std::max(pinf_worst, gc.ratio_inf);
            if (gc.ratio_inf > 1.02) ++pinf_bad;
        }
        auto Ev = a.materialize();
        for (std::size_t l = 0; l < v.nodes(); ++l)
            if (v.mask[l] == node_interior)
                for (int c = 0; c < N; ++c) ev_bad += Ev.values[l * N + c] != v.values[l * N + c];
        auto rep = extension_report(a, 2.0);
        viol += rep.violations + rep.length_failures + rep.global.violation;
        for (int i = 0; i < 4; ++i) cube_viol[i] += !std::isfinite(rep.w3_max[i]) || !std::isfinite(rep.far_max[i]);
        c1max = std::max(c1max, rep.global.corol1_ratio);
        c2max = std::max(c2max, rep.global.corol2_ratio);
        if (!std::isfinite(rep.global.corol1_ratio) || !std::isfinite(rep.global.corol2_ratio)) ++fin_bad;
        auto fr_r = friedrichs_ratio(v, 2.0);
        auto ga_r = gaffney_ratio(v, 2.0);
        fr = std::max(fr, fr_r.value);
        ga = std::max(ga, ga_r.value);
    }
    json fd = {{"fields", opt.fields}, {"seed", opt.seed}};
    add("(prop2)", prop2_bad == 0, {{"failures", prop2_bad}, {"worst_relative_mean", prop2_worst}, {"setup", fd}});
    add("(diveP)", divp_bad == 0, {{"failures", divp_bad}, {"worst_relative_gap", divp_worst}, {"setup", fd}});
    add("(stimaPinf)", pinf_bad == 0, {{"failures", pinf_bad}, {"worst_ratio", pinf_worst}, {"setup", fd}});
    add("extension_on_domain", ev_bad == 0, {{"mismatched_values", ev_bad}});
    static const char* tags[4] = {"(stima1)", "(stima2)", "(stima3)", "(stima4)"};
    for (int i = 0; i < 4; ++i) add(tags[i], cube_viol[i] == 0 && viol == 0, {{"non_finite", cube_viol[i]}, {"violations", viol}});
    add("(corol1)", fin_bad == 0 && viol == 0, {{"max_ratio", num(c1max)}});
    add("(corol2)", fin_bad == 0 && viol == 0, {{"max_ratio", num(c2max)}});
    add("(friedrichs)", std::isfinite(fr), {{"max_ratio", num(fr)}});
    add("(gaffney)", std::isfinite(ga), {{"max_ratio", num(ga)}});
    return out;
}

inline json verify_json(const std::vector<VerifyCheck>& checks) {
    json arr = json::array();
    bool all = true;
    for (const auto& c : checks) {
        arr.push_back({{"tag", c.tag}, {"pass", c.pass}, {"detail", c.detail}});
        all = all && c.pass;
    }
    return json{{"checks", arr}, {"pass", all}};
}

}  // namespace jext
