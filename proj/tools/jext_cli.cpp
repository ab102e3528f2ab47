#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <iostream>

#include "jext/jext.hpp"

using namespace jext;
namespace fs = std::filesystem;

namespace {

struct Config {
    std::string command;
    std::string gallery;
    std::string domain_file;
    int koch_level = 3;
    std::string out_dir;
    int max_level = 0;
    int grid_level = 0;
    double h = 0.0;
    double p = 2.0;
    std::string bc = "normal_zero";
    std::string inequality = "gaffney";
    int samples = 50;
    uint64_t seed = 1;
    int modes = 3;
    double collar = 0.0;
    double ramp = 0.0;
    int iters = 60;
    std::string field;
    std::string format = "bin";
    std::string fault;
    bool oracle = false;
    int pairs = 500;
    int points = 20;
    std::vector<int> levels{0, 1, 2, 3, 4};
    std::vector<double> ps{1.5, 2.0, 3.0};
    unsigned threads = 0;

    json echo() const {
        json j = {{"command", command}, {"max_level", max_level}, {"grid_level", grid_level}, {"h", h},
                  {"p", num(p)},        {"bc", bc},               {"samples", samples},       {"seed", seed},
                  {"out_dir", out_dir}, {"threads", threads}};
        if (!gallery.empty()) j["gallery"] = gallery, j["koch_level"] = koch_level;
        if (!domain_file.empty()) j["domain_file"] = domain_file;
        if (command == "estimate" || command == "study") j["inequality"] = inequality, j["iters"] = iters;
        if (command == "generate-field" || command == "estimate" || command == "study")
            j["field_spec"] = {{"modes", modes}, {"collar", collar}, {"ramp", ramp}};
        if (command == "extend") j["field"] = field;
        if (command == "verify") j["inject_fault"] = fault;
        if (command == "probe") j["pairs"] = pairs;
        if (command == "dset") j["points"] = points;
        return j;
    }
};

std::string tag_of(const Config& c, int dim) {
    std::string tag = c.gallery;
    if (!c.domain_file.empty()) tag = read_json(c.domain_file).value("tag", std::string("domain"));
    if (tag.empty()) fail_config("either --gallery or --domain is required");
    int d = gallery_dimension(tag);
    if (dim != 0 && d != dim) fail_config("dimension mismatch");
    return tag;
}

std::string file_stem(const Config& c) {
    std::string tag = tag_of(c, 0);
    if (tag.rfind("koch", 0) == 0) tag += "_" + std::to_string(c.koch_level);
    return (fs::path(c.out_dir) / tag).string();
}

template <int N>
Domain<N> load_domain(const Config& c) {
    if (!c.domain_file.empty()) {
        json j = read_json(c.domain_file);
        if (j.contains("tag") && j["tag"].is_string() && j["tag"].get<std::string>().rfind("koch", 0) == 0 &&
            !(j.contains("params") && j["params"].contains("level")))
            j["params"]["level"] = c.koch_level;
        return domain_from_descriptor<N>(j);
    }
    Params pr;
    if (c.gallery.rfind("koch", 0) == 0) pr["level"] = c.koch_level;
    return gallery<N>(c.gallery, pr);
}

int default_max_level(int n) { return n == 2 ? 8 : 5; }

/// Extension needs a non-empty W3.
template <int N>
int extension_level(const Config& c, const Domain<N>& dom) {
    return c.max_level ? c.max_level : std::max(default_max_level(N), min_w3_level(dom));
}

template <int N>
GridSpec<N> field_grid(const Config& c, const Domain<N>& dom, int max_level) {
    if (c.h > 0.0) return GridSpec<N>::covering(dom.bounding_box(), c.h);
    return GridSpec<N>::dyadic(dom.bounding_box(), c.grid_level > 0 ? c.grid_level : max_level + 2 * (N == 2));
}

FieldSpec field_spec(const Config& c) { return FieldSpec{c.modes, c.collar, c.seed, c.ramp}; }

void finish(const Config& c, const std::string& path, json body) {
    json out = envelope(c.command, c.echo());
    out.update(body);
    write_json(path, out);
    std::cout << path << "\n";
}

template <int N>
int cmd_decompose(const Config& c) {
    auto dom = load_domain<N>(c);
    int L = c.max_level ? c.max_level : default_max_level(N);
    auto w1 = whitney_decompose(dom, Side::interior, L);
    auto w2 = whitney_decompose(dom, Side::complement, L);
    auto w3 = select_w3(w2, dom);
    auto k1 = check_whitney(w1, dom), k2 = check_whitney(w2, dom);
    std::string stem = file_stem(c);
    write_text(stem + "_w1.csv", whitney_csv(w1));
    write_text(stem + "_w2.csv", whitney_csv(w2, w3));
    std::cout << stem + "_w1.csv\n" << stem + "_w2.csv\n";
    bool ok = k1.ok() && k2.ok();
    finish(c, stem + "_decompose.json",
           {{"domain", descriptor_json(dom)},
            {"w1", whitney_summary(w1, k1)},
            {"w2", whitney_summary(w2, k2)},
            {"w3", {{"cubes", w3.size()}, {"threshold", w3_threshold(dom)}}},
            {"violations", k1.w1_violations + k1.w2_violations + k1.w3_violations + k1.touch_violations +
                               k2.w1_violations + k2.w2_violations + k2.w3_violations + k2.touch_violations}});
    if (!ok) {
        std::cerr << "invariant violation in the Whitney decomposition\n";
        return 2;
    }
    return 0;
}

template <int N>
int cmd_generate(const Config& c) {
    auto dom = load_domain<N>(c);
    int L = extension_level(c, dom);
    auto g = field_grid(c, dom, L);
    // on a dyadic grid the defaults follow the extension scale
    FieldSpec spec = field_spec(c);
    if (c.h == 0.0) {
        FieldSpec e = extension_field_spec(dom, g, L, c.seed);
        if (spec.collar_width == 0.0) spec.collar_width = e.collar_width;
        if (spec.ramp_width == 0.0) spec.ramp_width = e.ramp_width;
    }
    auto v = generate_test_field(dom, g, parse_bc(c.bc), spec);
    std::string base = file_stem(c) + "_field";
    write_grid(v, base, c.format);
    auto n = norm_report(v, c.p);
    finish(c, base + "_report.json",
           {{"domain", descriptor_json(dom)},
            {"grid", grid_sidecar(v, c.format)},
            {"norms", {{"field", n.lp_field}, {"grad", n.lp_grad}, {"div", n.lp_div}, {"curl", n.lp_curl}, {"w1p", n.w1p}}}});
    return 0;
}

template <int N>
int cmd_extend(const Config& c) {
    if (c.field.empty()) fail_config("--field is required");
    if (!fs::exists(grid_base(c.field) + ".json")) fail_config("missing input file '" + c.field + "'");
    auto dom = load_domain<N>(c);
    int L = extension_level(c, dom);
    auto v = read_grid<N>(c.field);
    if (v.comps != N) fail_config("grid/domain mismatch: field must have n components");
    auto geo = build_extension_geometry(dom, v.grid, L);
    for (std::size_t l = 0; l < v.nodes(); ++l)
        if (v.mask[l] != node_interior && geo->mask[l] == node_interior)
            fail_config("grid/domain mismatch: field does not cover the domain");
    // values outside the domain are never read; the domain decides the mask
    v.mask = membership_mask(dom, v.grid);
    auto a = extend(geo, v);
    auto rep = extension_report(a, c.p);
    std::string base = file_stem(c) + "_ev";
    write_grid(a.materialize(), base, c.format);
    write_text(file_stem(c) + "_polynomials.csv", polynomial_csv(a));
    std::cout << file_stem(c) + "_polynomials.csv\n";
    finish(c, file_stem(c) + "_extend.json",
           {{"domain", descriptor_json(dom)},
            {"report", extension_report_json(rep)},
            {"truncation", {{"shell_nodes", geo->shell_nodes}, {"complement_nodes", geo->complement_nodes},
                            {"w2_truncated_cubes", geo->w2.truncation.cubes}, {"w2_truncated_volume", geo->w2.truncation.volume}}}});
    return rep.violations + rep.global.violation ? 2 : 0;
}

template <int N>
int cmd_estimate(const Config& c) {
    if (c.samples < 1) fail_config("samples must be ≥ 1");
    auto dom = load_domain<N>(c);
    const double h = c.h > 0.0 ? c.h : 1.0 / 128.0;
    auto g = GridSpec<N>::covering(dom.bounding_box(), h);
    auto bc = parse_bc(c.bc);
    auto q = parse_inequality(c.inequality);
    TestFieldGenerator<N> gen(dom, g, bc, field_spec(c));
    FieldBasis<N> basis(gen);
    auto e = estimate_constant(basis, q, c.p, static_cast<std::size_t>(c.samples), c.seed, c.iters);
    std::string stem = file_stem(c) + "_" + c.inequality + "_" + bc_name(bc);
    auto best = gen.field(e.maximizer);
    write_grid(best, stem + "_maximizer", c.format);
    json body = {{"domain", descriptor_json(dom)}, {"grid", grid_sidecar(best, c.format)}, {"estimate", estimate_json(e)},
                 {"maximizer", stem + "_maximizer.json"}};
    if (c.oracle) {
        if (c.p != 2.0 || q != Inequality::gaffney) fail_config("--oracle needs --inequality gaffney --p 2");
        auto s = spectral_oracle_p2(dom, g, bc, gen.spec().collar_width);
        write_grid(s.eigenfield, stem + "_eigenfield", c.format);
        body["spectral_oracle"] = {{"gaffney_constant_p2", s.gaffney_constant_p2}, {"unknowns", s.unknowns},
                                   {"iterations", s.iterations}, {"eigenfield", stem + "_eigenfield.json"}};
    }
    finish(c, stem + "_estimate.json", body);
    return 0;
}

template <int N>
int cmd_verify(const Config& c) {
    auto dom = load_domain<N>(c);
    VerifyOptions o;
    o.max_level = c.max_level;
    o.grid_level = c.grid_level;
    o.seed = c.seed;
    o.inject_fault = c.fault;
    auto checks = verify_suite(dom, o);
    json v = verify_json(checks);
    finish(c, file_stem(c) + "_verify.json", {{"domain", descriptor_json(dom)}, {"suite", v}});
    std::string failed;
    for (const auto& k : checks)
        if (!k.pass) failed += (failed.empty() ? "" : ", ") + k.tag;
    if (!failed.empty()) {
        std::cerr << "invariant violation: " << failed << "\n";
        return 2;
    }
    return 0;
}

template <int N>
int cmd_probe(const Config& c) {
    if (c.pairs < 1) fail_config("pairs must be ≥ 1");
    auto dom = load_domain<N>(c);
    int L = c.max_level ? c.max_level : default_max_level(N);
    auto w1 = whitney_decompose(dom, Side::interior, L);
    auto r = epsilon_delta_probe(dom, w1, static_cast<std::size_t>(c.pairs), c.seed);
    auto wit = [](const ProbeWitness<N>& w) {
        return json{{"x", w.x}, {"y", w.y}, {"length_ratio", num(w.length_ratio)}, {"cigar", num(w.cigar)}};
    };
    finish(c, file_stem(c) + "_probe.json",
           {{"domain", descriptor_json(dom)},
            {"pairs", r.pairs},
            {"worst_length_ratio", num(r.worst_length_ratio)},
            {"worst_cigar_ratio", num(r.worst_cigar_ratio)},
            {"implied_epsilon", num(r.implied_epsilon)},
            {"length_witness", wit(r.length_witness)},
            {"cigar_witness", wit(r.cigar_witness)}});
    return 0;
}

template <int N>
int cmd_dset(const Config& c) {
    if (c.points < 1) fail_config("points must be ≥ 1");
    auto dom = load_domain<N>(c);
    const double diam = dom.diameter();
    auto radii = geometric_radii(diam / 4.0, diam / 256.0, 7);
    auto r = dset_check(dom, radii, static_cast<std::size_t>(c.points));
    write_text(file_stem(c) + "_boundary.csv", boundary_csv<N>(dom.boundary_sample(r.boundary_samples)));
    std::cout << file_stem(c) + "_boundary.csv\n";
    finish(c, file_stem(c) + "_dset.json",
           {{"domain", descriptor_json(dom)},
            {"estimated_d", r.estimated_d},
            {"c1_hat", r.c1_hat},
            {"c2_hat", r.c2_hat},
            {"radii", r.radii_tested},
            {"mean_measure", r.mean_measure},
            {"undersampled", r.undersampled}});
    return 0;
}

int cmd_study(const Config& c) {
    if (c.samples < 1) fail_config("samples must be ≥ 1");
    const double h = c.h > 0.0 ? c.h : 1.0 / 128.0;
    auto rows = prefractal_study(c.levels, {BoundaryCondition::normal_zero, BoundaryCondition::tangential_zero}, c.ps, h,
                                 static_cast<std::size_t>(c.samples), c.seed, c.iters, field_spec(c));
    std::string stem = (fs::path(c.out_dir) / "koch_study").string();
    write_text(stem + ".csv", study_csv(rows));
    std::cout << stem + ".csv\n";
    json arr = json::array();
    bool finite = true;
    for (const auto& r : rows) {
        arr.push_back({{"koch_level", r.level}, {"bc", bc_name(r.bc)}, {"p", r.p}, {"max_ratio", num(r.max_ratio)}});
        finite = finite && r.finite;
    }
    finish(c, stem + ".json", {{"inequality", "(gaffney)"}, {"rows", arr}, {"all_finite", finite}});
    return 0;
}

template <int N>
int dispatch(const Config& c) {
    if (c.command == "decompose") return cmd_decompose<N>(c);
    if (c.command == "generate-field") return cmd_generate<N>(c);
    if (c.command == "extend") return cmd_extend<N>(c);
    if (c.command == "estimate") return cmd_estimate<N>(c);
    if (c.command == "verify") return cmd_verify<N>(c);
    if (c.command == "probe") return cmd_probe<N>(c);
    if (c.command == "dset") return cmd_dset<N>(c);
    fail_config("unknown command");
}

void domain_options(CLI::App* s, Config& c) {
    s->add_option("--gallery", c.gallery, "gallery tag (unit_square, l_shape, koch_snowflake, unit_cube, koch_cylinder_3d)");
    s->add_option("--domain", c.domain_file, "domain descriptor JSON {tag, params, epsilon, delta, d}");
    s->add_option("--koch-level", c.koch_level, "prefractal level for Koch domains")->check(CLI::Range(0, 6));
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Whitney decomposition, extension operator and Friedrichs/Gaffney constant estimates"};
    app.require_subcommand(1);
    Config c;
    const char* env = std::getenv("JEXT_OUT_DIR");
    c.out_dir = env && *env ? env : ".";
    app.add_option("--out", c.out_dir, "output directory (default: $JEXT_OUT_DIR or .)");
    app.add_option("--threads", c.threads, "cap on worker threads (0: all cores)");

    auto* dec = app.add_subcommand("decompose", "Whitney decompositions W1, W2, W3 with invariant checks");
    auto* gen = app.add_subcommand("generate-field", "seeded collar test field on the domain grid");
    auto* ext = app.add_subcommand("extend", "extension of a field across the boundary");
    auto* est = app.add_subcommand("estimate", "Friedrichs/Gaffney constant estimate");
    auto* ver = app.add_subcommand("verify", "full invariant suite");
    auto* prb = app.add_subcommand("probe", "empirical (epsilon, delta) probe");
    auto* dst = app.add_subcommand("dset", "boundary d-set check");
    auto* stu = app.add_subcommand("study", "Gaffney ratio against Koch prefractal level (CSV)");

    for (auto* s : {dec, gen, ext, est, ver, prb, dst}) domain_options(s, c);
    for (auto* s : {dec, gen, ext, ver, prb})
        s->add_option("--max-level", c.max_level, "finest dyadic level (default 8 in 2D, 5 in 3D)")->check(CLI::Range(1, 14));
    for (auto* s : {gen, ver}) s->add_option("--grid-level", c.grid_level, "dyadic grid level (default max_level + 2 in 2D, max_level in 3D)")->check(CLI::Range(1, 14));
    for (auto* s : {gen, est, stu}) {
        s->add_option("--grid-h", c.h, "grid spacing");
        s->add_option("--modes", c.modes, "Fourier modes per axis of the potentials");
        s->add_option("--collar", c.collar, "collar width (default 4h)");
        s->add_option("--ramp", c.ramp, "cutoff ramp width (default 4 x collar)");
    }
    for (auto* s : {gen, ext, est, stu}) s->add_option("--format", c.format, "grid dump format")->check(CLI::IsMember({"bin", "csv"}));
    for (auto* s : {gen, est}) s->add_option("--bc", c.bc, "normal_zero | tangential_zero | none");
    for (auto* s : {gen, ext, est}) s->add_option("--p", c.p, "norm exponent in [1, inf]");
    for (auto* s : {gen, est, ver, prb, stu}) s->add_option("--seed", c.seed, "random seed");
    for (auto* s : {est, stu}) {
        s->add_option("--samples", c.samples, "number of seeded fields");
        s->add_option("--iters", c.iters, "ascent iterations per start");
    }
    ext->add_option("--field", c.field, "input field (grid dump base path or sidecar)");
    est->add_option("--inequality", c.inequality, "friedrichs | gaffney");
    est->add_flag("--oracle", c.oracle, "also run the p = 2 spectral oracle");
    ver->add_option("--inject-fault", c.fault, "test hook: w3 shrinks one complement cube");
    prb->add_option("--pairs", c.pairs, "number of point pairs");
    dst->add_option("--points", c.points, "number of boundary centres");
    stu->add_option("--levels", c.levels, "Koch levels")->delimiter(',');
    stu->add_option("--ps", c.ps, "exponents")->delimiter(',');

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }
    c.command = app.get_subcommands().front()->get_name();
    thread_cap() = c.threads;
    try {
        if (!fs::is_directory(c.out_dir)) {
            std::error_code ec;
            fs::create_directories(c.out_dir, ec);
            if (ec) fail_config("cannot create output directory '" + c.out_dir + "'");
        }
        if (c.command == "study") return cmd_study(c);
        int dim = gallery_dimension(tag_of(c, 0));
        return dim == 2 ? dispatch<2>(c) : dispatch<3>(c);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return static_cast<int>(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
