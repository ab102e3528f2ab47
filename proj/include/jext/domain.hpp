#pragma once

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "core.hpp"
#include "polygon.hpp"

namespace jext {

using Params = std::map<std::string, double>;

struct DomainDescriptor {
    std::string tag;
    Params params;
};

/// Bounded open set in R^N. N = 2 is a polygon; N = 3 is the prism
/// section x (0, height). The bounding box is a cube and doubles as the
/// root cell for dyadic decompositions.
template <int N>
class Domain {
    static_assert(N == 2 || N == 3, "only planar and spatial domains are supported");

public:
    Domain(Polygon section, double height, Box<N> bbox, double epsilon, double delta,
           double boundary_dim, DomainDescriptor descriptor)
        : section_(std::move(section)),
          height_(height),
          bbox_(bbox),
          epsilon_(epsilon),
          delta_(delta),
          boundary_dim_(boundary_dim),
          descriptor_(std::move(descriptor)) {
        if (!(epsilon_ > 0.0 && epsilon_ <= 1.0)) fail_config("epsilon must lie in (0, 1]");
        if (!(delta_ > 0.0)) fail_config("delta must be positive");
        if (!(boundary_dim_ > 0.0 && boundary_dim_ <= N)) fail_config("boundary dimension must lie in (0, n]");
        for (int i = 1; i < N; ++i)
            if (std::abs(bbox_.extent(i) - bbox_.extent(0)) > 1e-12 * bbox_.extent(0))
                fail_config("bounding box must be a cube");
        Box<2> sb = section_.bounds();
        for (int i = 0; i < 2; ++i)
            if (!(sb.lo[i] > bbox_.lo[i] && sb.hi[i] < bbox_.hi[i]))
                fail_config("bounding box must strictly contain the domain");
        if constexpr (N == 3) {
            if (!(bbox_.lo[2] < 0.0 && bbox_.hi[2] > height_))
                fail_config("bounding box must strictly contain the domain");
        }
    }

    static constexpr int dimension = N;

    const Box<N>& bounding_box() const { return bbox_; }
    double epsilon() const { return epsilon_; }
    double delta() const { return delta_; }
    double boundary_dim() const { return boundary_dim_; }
    const DomainDescriptor& descriptor() const { return descriptor_; }
    const Polygon& section() const { return section_; }
    double height() const { return height_; }

    void set_parameters(double epsilon, double delta, double boundary_dim) {
        *this = Domain(section_, height_, bbox_, epsilon, delta, boundary_dim, descriptor_);
    }

    bool contains(const Vec<N>& p) const {
        if constexpr (N == 2) {
            return section_.contains(p);
        } else {
            if (!(p[2] > 0.0 && p[2] < height_)) return false;
            return section_.contains({p[0], p[1]});
        }
    }

    /// Euclidean distance from p to the boundary.
    double boundary_distance(const Vec<N>& p) const {
        if constexpr (N == 2) {
            return section_.boundary_distance(p);
        } else {
            Point2 q{p[0], p[1]};
            double d2 = section_.boundary_distance(q);
            bool in2 = section_.crossing_parity(q);
            double dz_interval = std::max({0.0, -p[2], p[2] - height_});
            double dz_ends = std::min(std::abs(p[2]), std::abs(p[2] - height_));
            double d_closed = in2 ? 0.0 : d2;
            return std::min(std::hypot(d2, dz_interval), std::hypot(d_closed, dz_ends));
        }
    }

    /// Distance from a closed box to the boundary; 0 when they meet.
    double box_boundary_distance(const Box<N>& b) const {
        if constexpr (N == 2) {
            return section_.tree().box_distance(b);
        } else {
            Box<2> bxy{{b.lo[0], b.lo[1]}, {b.hi[0], b.hi[1]}};
            double dxy = section_.tree().box_distance(bxy);
            double d_closed = 0.0;
            if (dxy > 0.0 && !section_.crossing_parity(bxy.center())) d_closed = dxy;
            double z0 = b.lo[2], z1 = b.hi[2];
            double dz_interval = std::max({0.0, -z1, z0 - height_});
            auto point_to_interval = [&](double z) { return std::max({0.0, z0 - z, z - z1}); };
            double dz_ends = std::min(point_to_interval(0.0), point_to_interval(height_));
            return std::min(std::hypot(dxy, dz_interval), std::hypot(d_closed, dz_ends));
        }
    }

    /// d(x) = inf over the complement; x must lie in the domain.
    double distance_to_complement(const Vec<N>& x) const {
        if (!contains(x)) fail_config("distance_to_complement: point is not in the domain");
        return boundary_distance(x);
    }

    double diameter() const {
        const auto& v = section_.vertices();
        double d = 0.0;
        for (std::size_t i = 0; i < v.size(); ++i)
            for (std::size_t j = i + 1; j < v.size(); ++j) d = std::max(d, distance<2>(v[i], v[j]));
        if constexpr (N == 3) d = std::hypot(d, height_);
        return d;
    }

    /// Total boundary measure (length in 2D, area in 3D).
    double boundary_measure() const {
        if constexpr (N == 2) return section_.perimeter();
        else return section_.perimeter() * height_ + 2.0 * std::abs(section_.area());
    }

    /// Deterministic, measure-uniform boundary points.
    std::vector<Vec<N>> boundary_sample(std::size_t count) const {
        std::vector<Vec<N>> out;
        out.reserve(count);
        const auto& edges = section_.edges();
        std::vector<double> cum(edges.size() + 1, 0.0);
        for (std::size_t i = 0; i < edges.size(); ++i) cum[i + 1] = cum[i] + distance<2>(edges[i].a, edges[i].b);
        const double per = cum.back();
        auto along = [&](double s) {
            std::size_t i = std::upper_bound(cum.begin(), cum.end(), s) - cum.begin();
            i = std::clamp<std::size_t>(i, 1, edges.size()) - 1;
            double len = cum[i + 1] - cum[i];
            double t = len > 0.0 ? (s - cum[i]) / len : 0.0;
            return edges[i].a + t * (edges[i].b - edges[i].a);
        };
        if constexpr (N == 2) {
            for (std::size_t i = 0; i < count; ++i) out.push_back(along((i + 0.5) / count * per));
        } else {
            double lateral = per * height_;
            double caps = 2.0 * std::abs(section_.area());
            std::size_t n_lat = static_cast<std::size_t>(std::llround(count * lateral / (lateral + caps)));
            n_lat = std::min(n_lat, count);
            const double golden = 0.6180339887498949;
            for (std::size_t i = 0; i < n_lat; ++i) {
                Point2 q = along((i + 0.5) / n_lat * per);
                double z = std::fmod((i + 0.5) * golden, 1.0) * height_;
                out.push_back({q[0], q[1], z});
            }
            Box<2> sb = section_.bounds();
            std::size_t k = 0;
            while (out.size() < count) {
                ++k;
                Point2 q{sb.lo[0] + halton(k, 2) * sb.extent(0), sb.lo[1] + halton(k, 3) * sb.extent(1)};
                if (!section_.contains(q)) continue;
                out.push_back({q[0], q[1], (out.size() % 2 == 0) ? 0.0 : height_});
            }
        }
        return out;
    }

private:
    static double halton(std::size_t i, unsigned base) {
        double f = 1.0, r = 0.0;
        while (i > 0) {
            f /= base;
            r += f * static_cast<double>(i % base);
            i /= base;
        }
        return r;
    }

    Polygon section_;
    double height_ = 0.0;
    Box<N> bbox_;
    double epsilon_;
    double delta_;
    double boundary_dim_;
    DomainDescriptor descriptor_;
};

inline const std::vector<std::string>& gallery_tags() {
    static const std::vector<std::string> tags = {"unit_square", "l_shape", "koch_snowflake",
                                                  "koch_cylinder_3d", "unit_cube"};
    return tags;
}

/// Spatial dimension of a gallery entry; throws on an unknown tag.
inline int gallery_dimension(const std::string& tag) {
    if (tag == "unit_square" || tag == "l_shape" || tag == "koch_snowflake") return 2;
    if (tag == "koch_cylinder_3d" || tag == "unit_cube") return 3;
    fail_config("unknown gallery tag '" + tag + "'");
}

namespace detail {

inline int koch_level(const Params& params) {
    auto it = params.find("level");
    double level = it == params.end() ? 0.0 : it->second;
    if (level < 0.0 || level != std::floor(level)) fail_config("invalid params: koch level must be a non-negative integer");
    if (level > 8) fail_config("invalid params: koch level above 8 is not supported");
    return static_cast<int>(level);
}

inline Polygon unit_square_polygon() { return Polygon({{0, 0}, {1, 0}, {1, 1}, {0, 1}}); }

inline Polygon l_shape_polygon() {
    return Polygon({{0, 0}, {1, 0}, {1, 0.5}, {0.5, 0.5}, {0.5, 1}, {0, 1}});
}

template <int N>
Box<N> cube_box(double lo, double hi) {
    Box<N> b;
    for (int i = 0; i < N; ++i) {
        b.lo[i] = lo;
        b.hi[i] = hi;
    }
    return b;
}

// Square window around the snowflake: centred on the centroid, half-side 0.68.
template <int N>
Box<N> koch_box() {
    const double cx = 0.5, cy = std::sqrt(3.0) / 6.0, half = 0.68;
    Box<N> b;
    b.lo[0] = cx - half;
    b.hi[0] = cx + half;
    b.lo[1] = cy - half;
    b.hi[1] = cy + half;
    if constexpr (N == 3) {
        b.lo[2] = 0.5 - half;
        b.hi[2] = 0.5 + half;
    }
    return b;
}

}  // namespace detail

/// Gallery domain with its shipped conservative (epsilon, delta) constants.
template <int N>
Domain<N> gallery(const std::string& tag, const Params& params = {}) {
    int dim = gallery_dimension(tag);
    if (dim != N) fail_config("gallery tag '" + tag + "' has dimension " + std::to_string(dim));
    DomainDescriptor desc{tag, params};
    const double koch_d = std::log(4.0) / std::log(3.0);
    if constexpr (N == 2) {
        if (tag == "unit_square")
            return Domain<2>(detail::unit_square_polygon(), 0.0, detail::cube_box<2>(-0.1, 1.1), 0.4,
                             std::sqrt(2.0), 1.0, desc);
        if (tag == "l_shape")
            return Domain<2>(detail::l_shape_polygon(), 0.0, detail::cube_box<2>(-0.1, 1.1), 0.3,
                             std::sqrt(2.0), 1.0, desc);
        int level = detail::koch_level(params);
        desc.params["level"] = level;
        return Domain<2>(Polygon(KochEisenstein::build(level).cartesian()), 0.0, detail::koch_box<2>(), 0.2,
                         1.0 / 3.0, level == 0 ? 1.0 : koch_d, desc);
    } else {
        if (tag == "unit_cube")
            return Domain<3>(detail::unit_square_polygon(), 1.0, detail::cube_box<3>(-0.1, 1.1), 0.4,
                             std::sqrt(3.0), 2.0, desc);
        int level = detail::koch_level(params);
        desc.params["level"] = level;
        return Domain<3>(Polygon(KochEisenstein::build(level).cartesian()), 1.0, detail::koch_box<3>(), 0.2,
                         1.0 / 3.0, level == 0 ? 2.0 : 1.0 + koch_d, desc);
    }
}

}  // namespace jext
