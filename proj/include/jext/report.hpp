#pragma once

#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "extension.hpp"
#include "inequality.hpp"
#include "probe.hpp"

namespace jext {

using json = nlohmann::json;

inline constexpr const char* schema_version = "1";

/// Non-finite numbers become strings; JSON has no inf/nan.
inline json num(double x) {
    if (std::isfinite(x)) return x;
    if (std::isnan(x)) return "nan";
    return x > 0 ? "inf" : "-inf";
}

inline json envelope(const std::string& command, const json& config) {
    return json{{"schema", schema_version}, {"command", command}, {"config", config}};
}

inline void write_text(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) fail_config("cannot write '" + path + "'");
    f << text;
    if (!f) fail_config("write failed for '" + path + "'");
}

inline void write_json(const std::string& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

inline json read_json(const std::string& path) {
    std::ifstream f(path);
    if (!f) fail_config("cannot open '" + path + "'");
    try {
        return json::parse(f);
    } catch (const json::exception& e) {
        fail_config("malformed JSON in '" + path + "': " + e.what());
    }
}

inline std::string fmt(double x) {
    std::ostringstream s;
    s << std::setprecision(17) << x;
    return s.str();
}

// ---------------------------------------------------------------------------
// domain descriptors

template <int N>
json descriptor_json(const Domain<N>& dom) {
    json params = json::object();
    for (const auto& [k, v] : dom.descriptor().params) params[k] = v;
    return json{{"tag", dom.descriptor().tag},
                {"params", params},
                {"epsilon", dom.epsilon()},
                {"delta", dom.delta()},
                {"d", dom.boundary_dim()}};
}

/// Gallery domain named by a descriptor; epsilon/delta/d in the file override
/// the shipped constants.
template <int N>
Domain<N> domain_from_descriptor(const json& j) {
    if (!j.contains("tag") || !j["tag"].is_string()) fail_config("domain descriptor needs a string 'tag'");
    Params params;
    if (j.contains("params")) {
        if (!j["params"].is_object()) fail_config("domain descriptor 'params' must be an object");
        for (auto it = j["params"].begin(); it != j["params"].end(); ++it) {
            if (!it->is_number()) fail_config("domain descriptor params must be numbers");
            params[it.key()] = it->get<double>();
        }
    }
    Domain<N> base = gallery<N>(j["tag"].get<std::string>(), params);
    auto pick = [&](const char* key, double dflt) {
        if (!j.contains(key)) return dflt;
        if (!j[key].is_number()) fail_config(std::string("domain descriptor '") + key + "' must be a number");
        return j[key].get<double>();
    };
    return Domain<N>(base.section(), base.height(), base.bounding_box(), pick("epsilon", base.epsilon()),
                     pick("delta", base.delta()), pick("d", base.boundary_dim()), base.descriptor());
}

template <int N>
std::string boundary_csv(const std::vector<Vec<N>>& pts) {
    std::ostringstream s;
    s << (N == 2 ? "x,y\n" : "x,y,z\n");
    for (const auto& p : pts) {
        for (int i = 0; i < N; ++i) s << (i ? "," : "") << fmt(p[i]);
        s << "\n";
    }
    return s.str();
}

// ---------------------------------------------------------------------------
// grid fields: <base>.bin (values, then one mask byte per node) or <base>.csv,
// both with a <base>.json sidecar

template <int N>
json grid_sidecar(const GridField<N>& f, const std::string& format) {
    json origin = json::array(), dims = json::array();
    for (int i = 0; i < N; ++i) {
        origin.push_back(f.grid.origin[i]);
        dims.push_back(f.grid.dims[i]);
    }
    return json{{"schema", schema_version}, {"n", N},          {"h", f.grid.h},
                {"origin", origin},         {"dims", dims},   {"components", f.comps},
                {"format", format},         {"order", "axis 0 fastest; components innermost"}};
}

template <int N>
void write_grid(const GridField<N>& f, const std::string& base, const std::string& format = "bin") {
    if (format == "bin") {
        std::ofstream o(base + ".bin", std::ios::binary);
        if (!o) fail_config("cannot write '" + base + ".bin'");
        o.write(reinterpret_cast<const char*>(f.values.data()), static_cast<std::streamsize>(f.values.size() * sizeof(double)));
        o.write(reinterpret_cast<const char*>(f.mask.data()), static_cast<std::streamsize>(f.mask.size()));
        if (!o) fail_config("write failed for '" + base + ".bin'");
    } else if (format == "csv") {
        std::ostringstream s;
        const char* ax[3] = {"x", "y", "z"};
        for (int i = 0; i < N; ++i) s << ax[i] << ",";
        s << "mask";
        for (int c = 0; c < f.comps; ++c) s << ",c" << c;
        s << "\n";
        for (std::size_t l = 0; l < f.nodes(); ++l) {
            auto p = f.grid.point(l);
            for (int i = 0; i < N; ++i) s << fmt(p[i]) << ",";
            s << int(f.mask[l]);
            for (int c = 0; c < f.comps; ++c) s << "," << fmt(f.values[l * f.comps + c]);
            s << "\n";
        }
        write_text(base + ".csv", s.str());
    } else {
        fail_config("unknown grid format '" + format + "'");
    }
    write_json(base + ".json", grid_sidecar(f, format));
}

/// Accepts the base path, the sidecar, or the data file.
inline std::string grid_base(std::string path) {
    for (const char* ext : {".json", ".bin", ".csv"}) {
        std::size_t n = std::strlen(ext);
        if (path.size() > n && path.compare(path.size() - n, n, ext) == 0) return path.substr(0, path.size() - n);
    }
    return path;
}

template <int N>
GridField<N> read_grid(const std::string& path) {
    const std::string base = grid_base(path);
    json s = read_json(base + ".json");
    try {
        if (s.at("n").get<int>() != N) fail_config("grid dimension mismatch in '" + base + ".json'");
        GridSpec<N> g;
        g.h = s.at("h").get<double>();
        for (int i = 0; i < N; ++i) {
            g.origin[i] = s.at("origin").at(i).get<double>();
            g.dims[i] = s.at("dims").at(i).get<int64_t>();
            if (g.dims[i] < 2) fail_config("grid dims must be at least 2");
        }
        if (!(g.h > 0.0)) fail_config("grid spacing must be positive");
        const int comps = s.at("components").get<int>();
        if (comps < 1 || comps > 9) fail_config("grid components out of range");
        const std::string format = s.value("format", "bin");
        GridField<N> f(g, comps, std::vector<uint8_t>(g.count(), node_interior));
        if (format == "bin") {
            std::ifstream in(base + ".bin", std::ios::binary);
            if (!in) fail_config("cannot open '" + base + ".bin'");
            in.read(reinterpret_cast<char*>(f.values.data()), static_cast<std::streamsize>(f.values.size() * sizeof(double)));
            in.read(reinterpret_cast<char*>(f.mask.data()), static_cast<std::streamsize>(f.mask.size()));
            if (!in) fail_config("grid data in '" + base + ".bin' is shorter than its sidecar says");
        } else if (format == "csv") {
            std::ifstream in(base + ".csv");
            if (!in) fail_config("cannot open '" + base + ".csv'");
            std::string line;
            std::getline(in, line);
            for (std::size_t l = 0; l < g.count(); ++l) {
                if (!std::getline(in, line)) fail_config("grid data in '" + base + ".csv' is shorter than its sidecar says");
                std::stringstream ls(line);
                std::string cell;
                for (int i = 0; i < N; ++i) std::getline(ls, cell, ',');
                std::getline(ls, cell, ',');
                f.mask[l] = static_cast<uint8_t>(std::stoi(cell));
                for (int c = 0; c < comps; ++c) {
                    std::getline(ls, cell, ',');
                    f.values[l * comps + c] = std::stod(cell);
                }
            }
        } else {
            fail_config("unknown grid format '" + format + "'");
        }
        return f;
    } catch (const json::exception& e) {
        fail_config("malformed grid sidecar '" + base + ".json': " + e.what());
    } catch (const std::invalid_argument&) {
        fail_config("malformed number in '" + base + ".csv'");
    }
}

// ---------------------------------------------------------------------------
// decomposition

template <int N>
std::string whitney_csv(const WhitneyDecomposition<N>& w, const std::vector<uint32_t>& w3 = {}) {
    std::vector<uint8_t> in3(w.size(), 0);
    for (uint32_t id : w3) in3[id] = 1;
    std::ostringstream s;
    s << "level";
    for (int i = 0; i < N; ++i) s << ",k" << i + 1;
    s << ",edge,dist_to_boundary,in_W3\n";
    for (std::size_t i = 0; i < w.size(); ++i) {
        s << w.cubes[i].level;
        for (int a = 0; a < N; ++a) s << "," << w.cubes[i].index[a];
        s << "," << fmt(w.edge(i)) << "," << fmt(w.boundary_dist[i]) << "," << int(in3[i]) << "\n";
    }
    return s.str();
}

inline json whitney_check_json(const WhitneyCheck& c) {
    return json{{"cubes", c.cubes},
                {"(w1)", {{"violations", c.w1_violations}, {"min_ratio", c.w1_min}, {"max_ratio", c.w1_max}}},
                {"(w2)", {{"violations", c.w2_violations}}},
                {"(w3)", {{"violations", c.w3_violations + c.touch_violations}, {"min_ratio", c.w3_min}, {"max_ratio", c.w3_max}}},
                {"pass", c.ok()}};
}

template <int N>
json whitney_summary(const WhitneyDecomposition<N>& w, const WhitneyCheck& c) {
    json levels = json::object();
    for (const auto& q : w.cubes) levels[std::to_string(q.level)] = levels.value(std::to_string(q.level), 0) + 1;
    return json{{"side", side_name(w.side)},
                {"max_level", w.max_level},
                {"cubes", w.size()},
                {"counts_per_level", levels},
                {"truncation", {{"level", w.truncation.level}, {"cubes", w.truncation.cubes}, {"volume", w.truncation.volume}}},
                {"checks", whitney_check_json(c)}};
}

template <int N>
std::string reflection_csv(const ReflectionMap& r, const ChainSet& cs) {
    std::ostringstream s;
    s << "q_id,q_star_id,size_ratio,dist_ratio,chain_partner,m\n";
    for (std::size_t i = 0; i < r.size(); ++i)
        for (std::size_t t = 0; t < cs.partners[i].size(); ++t)
            s << r.w3[i] << "," << r.reflected[i] << "," << fmt(r.size_ratio[i]) << "," << fmt(r.dist_ratio[i]) << ","
              << r.w3[cs.partners[i][t]] << "," << cs.chains[i][t].size() << "\n";
    return s.str();
}

inline std::string partition_csv(const PartitionReport& r) {
    std::ostringstream s;
    s << "j,c_phi\n";
    for (std::size_t j = 0; j < r.c_phi_per_cube.size(); ++j) s << j << "," << fmt(r.c_phi_per_cube[j]) << "\n";
    return s.str();
}

template <int N>
std::string polynomial_csv(const ExtensionAssembly<N>& a) {
    std::ostringstream s;
    s << "cube_id";
    for (int i = 0; i < N; ++i) s << ",a" << i;
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j) s << ",B" << i << j;
    s << ",nodes,measure,mean_div,partial\n";
    for (std::size_t j = 0; j < a.polys.size(); ++j) {
        const auto& P = a.polys[j];
        s << a.geo->w3[j];
        for (int i = 0; i < N; ++i) s << "," << fmt(P.a[i]);
        for (int i = 0; i < N * N; ++i) s << "," << fmt(P.B[i]);
        s << "," << P.nodes << "," << fmt(P.measure) << "," << fmt(P.mean_div) << "," << int(P.partial) << "\n";
    }
    return s.str();
}

// ---------------------------------------------------------------------------
// extension and estimates

inline json extension_report_json(const ExtensionReport& r) {
    static const char* w3tags[4] = {"(stima1)", "(stima2)", "(stima3)", "(stima4)"};
    static const char* fartags[4] = {"(stima1comp)", "(stima2comp)", "(stima3comp)", "(stima4comp)"};
    json per = json::object();
    for (int i = 0; i < 4; ++i) {
        per[w3tags[i]] = {{"max_ratio", num(r.w3_max[i])}, {"argmax_cube", r.w3_argmax[i]}};
        per[fartags[i]] = {{"max_ratio", num(r.far_max[i])}, {"argmax_cube", r.far_argmax[i]}};
    }
    return json{{"p", num(r.p)},
                {"w3_cubes", r.w3_cubes},
                {"far_cubes", r.far_cubes},
                {"far_trivial", r.far_trivial},
                {"violations", r.violations},
                {"length_failures", r.length_failures},
                {"partial_polynomials", r.partial_polynomials},
                {"complement_quadrature", {{"points", r.quadrature_points}, {"fringe_order", r.fringe_order}, {"core_order", r.core_order}, {"resolved", r.quadrature_resolved}}},
                {"per_cube_extremes", per},
                {"(corol1)", {{"ratio", num(r.global.corol1_ratio)}, {"lhs", num(r.global.lhs1)}, {"rhs", num(r.global.rhs1)}}},
                {"(corol2)", {{"ratio", num(r.global.corol2_ratio)}, {"lhs", num(r.global.lhs2)}, {"rhs", num(r.global.rhs2)}}},
                {"zero_field", r.global.zero_field},
                {"global_violation", r.global.violation}};
}

inline json estimate_json(const ConstantEstimate& e) {
    json traces = json::array();
    for (const auto& t : e.traces) {
        json r = json::array();
        for (double x : t.ratios) r.push_back(num(x));
        traces.push_back({{"ratios", r}, {"iterations", t.ratios.size() - 1}, {"converged", t.converged}});
    }
    json samples = json::array();
    for (double x : e.sample_ratios) samples.push_back(num(x));
    return json{{"inequality", "(" + inequality_name(e.inequality) + ")"},
                {"bc", bc_name(e.bc)},
                {"p", num(e.p)},
                {"samples", e.samples},
                {"seed", e.seed},
                {"sample_max", num(e.sample_max)},
                {"max_ratio", num(e.max_ratio)},
                {"unbounded_direction_candidates", e.unbounded_candidates},
                {"per_sample_ratios", samples},
                {"optimizer_trace", traces}};
}

inline std::string study_csv(const std::vector<StudyRow>& rows) {
    std::ostringstream s;
    s << "koch_level,inequality,bc,p,h,samples,sample_max,max_ratio,finite\n";
    for (const auto& r : rows)
        s << r.level << ",gaffney," << bc_name(r.bc) << "," << fmt(r.p) << "," << fmt(r.h) << "," << r.samples << ","
          << fmt(r.sample_max) << "," << fmt(r.max_ratio) << "," << int(r.finite) << "\n";
    return s.str();
}

}  // namespace jext
