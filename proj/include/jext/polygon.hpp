#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <utility>
#include <vector>

#include "core.hpp"

namespace jext {

using Point2 = Vec<2>;

struct Segment {
    Point2 a;
    Point2 b;
};

inline double point_segment_distance(const Point2& p, const Segment& s) {
    Point2 d = s.b - s.a;
    double len2 = dot<2>(d, d);
    double t = len2 > 0.0 ? std::clamp(dot<2>(p - s.a, d) / len2, 0.0, 1.0) : 0.0;
    Point2 q = s.a + t * d;
    return distance<2>(p, q);
}

inline double cross2(const Point2& a, const Point2& b) { return a[0] * b[1] - a[1] * b[0]; }

// Liang-Barsky clip; true when the closed segment meets the closed box.
inline bool segment_meets_box(const Segment& s, const Box<2>& box) {
    double t0 = 0.0, t1 = 1.0;
    Point2 d = s.b - s.a;
    for (int i = 0; i < 2; ++i) {
        if (d[i] == 0.0) {
            if (s.a[i] < box.lo[i] || s.a[i] > box.hi[i]) return false;
            continue;
        }
        double ta = (box.lo[i] - s.a[i]) / d[i];
        double tb = (box.hi[i] - s.a[i]) / d[i];
        if (ta > tb) std::swap(ta, tb);
        t0 = std::max(t0, ta);
        t1 = std::min(t1, tb);
        if (t0 > t1) return false;
    }
    return true;
}

inline double segment_box_distance(const Segment& s, const Box<2>& box) {
    if (segment_meets_box(s, box)) return 0.0;
    double d = std::min(box.distance_to(s.a), box.distance_to(s.b));
    const Point2 corners[4] = {{box.lo[0], box.lo[1]},
                               {box.hi[0], box.lo[1]},
                               {box.lo[0], box.hi[1]},
                               {box.hi[0], box.hi[1]}};
    for (const auto& c : corners) d = std::min(d, point_segment_distance(c, s));
    return d;
}

inline bool segments_intersect(const Segment& s, const Segment& t) {
    auto orient = [](const Point2& a, const Point2& b, const Point2& c) {
        double v = cross2(b - a, c - a);
        return (v > 0.0) - (v < 0.0);
    };
    auto on_segment = [](const Point2& a, const Point2& b, const Point2& c) {
        return std::min(a[0], b[0]) <= c[0] && c[0] <= std::max(a[0], b[0]) &&
               std::min(a[1], b[1]) <= c[1] && c[1] <= std::max(a[1], b[1]);
    };
    int o1 = orient(s.a, s.b, t.a), o2 = orient(s.a, s.b, t.b);
    int o3 = orient(t.a, t.b, s.a), o4 = orient(t.a, t.b, s.b);
    if (o1 != o2 && o3 != o4) return true;
    if (o1 == 0 && on_segment(s.a, s.b, t.a)) return true;
    if (o2 == 0 && on_segment(s.a, s.b, t.b)) return true;
    if (o3 == 0 && on_segment(t.a, t.b, s.a)) return true;
    if (o4 == 0 && on_segment(t.a, t.b, s.b)) return true;
    return false;
}

/// Bounding-volume hierarchy over a fixed segment soup.
class SegmentTree {
public:
    SegmentTree() = default;
    explicit SegmentTree(std::vector<Segment> segs) : segs_(std::move(segs)) {
        order_.resize(segs_.size());
        std::iota(order_.begin(), order_.end(), 0u);
        if (!segs_.empty()) {
            nodes_.push_back({});
            build_into(0, 0, static_cast<uint32_t>(segs_.size()));
        }
    }

    const std::vector<Segment>& segments() const { return segs_; }

    /// Distance from p to the nearest segment, or `cutoff` if all are farther.
    double nearest(const Point2& p, double cutoff = std::numeric_limits<double>::infinity()) const {
        double best = cutoff;
        if (nodes_.empty()) return best;
        visit(p, best);
        return best;
    }

    double box_distance(const Box<2>& q) const {
        double best = std::numeric_limits<double>::infinity();
        if (nodes_.empty()) return best;
        uint32_t stack[64];
        int top = 0;
        stack[top++] = 0;
        while (top > 0) {
            const Node& n = nodes_[stack[--top]];
            if (n.box.distance_to(q) >= best) continue;
            if (n.count > 0) {
                for (uint32_t i = n.first; i < n.first + n.count; ++i) {
                    best = std::min(best, segment_box_distance(segs_[order_[i]], q));
                    if (best == 0.0) return 0.0;
                }
            } else {
                stack[top++] = n.first;
                stack[top++] = n.first + 1;
            }
        }
        return best;
    }

    bool crosses(const Segment& s) const {
        if (nodes_.empty()) return false;
        Box<2> sb{{std::min(s.a[0], s.b[0]), std::min(s.a[1], s.b[1])},
                  {std::max(s.a[0], s.b[0]), std::max(s.a[1], s.b[1])}};
        uint32_t stack[64];
        int top = 0;
        stack[top++] = 0;
        while (top > 0) {
            const Node& n = nodes_[stack[--top]];
            if (n.box.distance_to(sb) > 0.0) continue;
            if (n.count > 0) {
                for (uint32_t i = n.first; i < n.first + n.count; ++i)
                    if (segments_intersect(s, segs_[order_[i]])) return true;
            } else {
                stack[top++] = n.first;
                stack[top++] = n.first + 1;
            }
        }
        return false;
    }

private:
    struct Node {
        Box<2> box;
        uint32_t first = 0;  // child index for inner nodes, order_ offset for leaves
        uint32_t count = 0;
    };

    static Box<2> seg_box(const Segment& s) {
        return {{std::min(s.a[0], s.b[0]), std::min(s.a[1], s.b[1])},
                {std::max(s.a[0], s.b[0]), std::max(s.a[1], s.b[1])}};
    }

    void build_into(uint32_t slot, uint32_t begin, uint32_t end) {
        Box<2> box = seg_box(segs_[order_[begin]]);
        for (uint32_t i = begin + 1; i < end; ++i) {
            Box<2> b = seg_box(segs_[order_[i]]);
            for (int k = 0; k < 2; ++k) {
                box.lo[k] = std::min(box.lo[k], b.lo[k]);
                box.hi[k] = std::max(box.hi[k], b.hi[k]);
            }
        }
        nodes_[slot].box = box;
        if (end - begin <= 4) {
            nodes_[slot].first = begin;
            nodes_[slot].count = end - begin;
            return;
        }
        int axis = box.extent(0) >= box.extent(1) ? 0 : 1;
        uint32_t mid = (begin + end) / 2;
        std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                         [&](uint32_t x, uint32_t y) {
                             return segs_[x].a[axis] + segs_[x].b[axis] <
                                    segs_[y].a[axis] + segs_[y].b[axis];
                         });
        // children are allocated consecutively so inner nodes only store the first
        uint32_t left = static_cast<uint32_t>(nodes_.size());
        nodes_.push_back({});
        nodes_.push_back({});
        build_into(left, begin, mid);
        build_into(left + 1, mid, end);
        nodes_[slot].first = left;
        nodes_[slot].count = 0;
    }

    void visit(const Point2& p, double& best) const {
        uint32_t stack[64];
        int top = 0;
        stack[top++] = 0;
        while (top > 0) {
            const Node& n = nodes_[stack[--top]];
            if (n.box.distance_to(p) >= best) continue;
            if (n.count > 0) {
                for (uint32_t i = n.first; i < n.first + n.count; ++i)
                    best = std::min(best, point_segment_distance(p, segs_[order_[i]]));
            } else {
                // nearer child last so it is popped first
                const Node& l = nodes_[n.first];
                const Node& r = nodes_[n.first + 1];
                if (l.box.distance_to(p) < r.box.distance_to(p)) {
                    stack[top++] = n.first + 1;
                    stack[top++] = n.first;
                } else {
                    stack[top++] = n.first;
                    stack[top++] = n.first + 1;
                }
            }
        }
    }

    std::vector<Segment> segs_;
    std::vector<uint32_t> order_;
    std::vector<Node> nodes_;
};

/// Simple closed polygon (counter-clockwise) with an even-odd membership test.
class Polygon {
public:
    Polygon() = default;
    explicit Polygon(std::vector<Point2> vertices) : verts_(std::move(vertices)) {
        std::vector<Segment> segs;
        segs.reserve(verts_.size());
        for (std::size_t i = 0; i < verts_.size(); ++i)
            segs.push_back({verts_[i], verts_[(i + 1) % verts_.size()]});
        tree_ = SegmentTree(std::move(segs));
    }

    const std::vector<Point2>& vertices() const { return verts_; }
    const std::vector<Segment>& edges() const { return tree_.segments(); }
    const SegmentTree& tree() const { return tree_; }

    /// Even-odd ray casting towards +x.
    bool crossing_parity(const Point2& p) const {
        bool inside = false;
        std::size_t n = verts_.size();
        for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
            const Point2& a = verts_[i];
            const Point2& b = verts_[j];
            if ((a[1] > p[1]) != (b[1] > p[1])) {
                double x = a[0] + (p[1] - a[1]) * (b[0] - a[0]) / (b[1] - a[1]);
                if (p[0] < x) inside = !inside;
            }
        }
        return inside;
    }

    /// Open-set membership: boundary points are excluded.
    bool contains(const Point2& p) const {
        if (!crossing_parity(p)) return false;
        return tree_.nearest(p, 1e-300) > 0.0;
    }

    double boundary_distance(const Point2& p) const { return tree_.nearest(p); }

    /// Sorted x-coordinates where the horizontal line y crosses the boundary.
    std::vector<double> row_crossings(double y) const {
        std::vector<double> xs;
        std::size_t n = verts_.size();
        for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
            const Point2& a = verts_[i];
            const Point2& b = verts_[j];
            if ((a[1] > y) != (b[1] > y))
                xs.push_back(a[0] + (y - a[1]) * (b[0] - a[0]) / (b[1] - a[1]));
        }
        std::sort(xs.begin(), xs.end());
        return xs;
    }

    double perimeter() const {
        double s = 0.0;
        for (const auto& e : edges()) s += distance<2>(e.a, e.b);
        return s;
    }

    double area() const {
        double s = 0.0;
        for (std::size_t i = 0; i < verts_.size(); ++i)
            s += cross2(verts_[i], verts_[(i + 1) % verts_.size()]);
        return 0.5 * s;
    }

    Box<2> bounds() const {
        Box<2> b{verts_[0], verts_[0]};
        for (const auto& v : verts_)
            for (int k = 0; k < 2; ++k) {
                b.lo[k] = std::min(b.lo[k], v[k]);
                b.hi[k] = std::max(b.hi[k], v[k]);
            }
        return b;
    }

private:
    std::vector<Point2> verts_;
    SegmentTree tree_;
};

/// Koch snowflake vertices in exact Eisenstein-integer coordinates.
///
/// A point (p, q) stands for (p + q*w) / 3^level with w = exp(i*pi/3); the
/// level-0 triangle is 0 -> 1 -> w (counter-clockwise, side 1).
struct KochEisenstein {
    int level = 0;
    std::vector<std::pair<int64_t, int64_t>> points;

    static KochEisenstein build(int level) {
        KochEisenstein k;
        k.level = 0;
        k.points = {{0, 0}, {1, 0}, {0, 1}};
        for (int l = 0; l < level; ++l) {
            std::vector<std::pair<int64_t, int64_t>> next;
            next.reserve(k.points.size() * 4);
            std::size_t n = k.points.size();
            for (std::size_t i = 0; i < n; ++i) {
                auto a = k.points[i];
                auto b = k.points[(i + 1) % n];
                a = {3 * a.first, 3 * a.second};
                b = {3 * b.first, 3 * b.second};
                std::pair<int64_t, int64_t> d{(b.first - a.first) / 3, (b.second - a.second) / 3};
                std::pair<int64_t, int64_t> p1{a.first + d.first, a.second + d.second};
                std::pair<int64_t, int64_t> p3{a.first + 2 * d.first, a.second + 2 * d.second};
                // rotation by -60 degrees: (p, q) -> (p + q, -p), pointing outward
                std::pair<int64_t, int64_t> peak{p1.first + d.first + d.second, p1.second - d.first};
                next.push_back(a);
                next.push_back(p1);
                next.push_back(peak);
                next.push_back(p3);
            }
            k.points = std::move(next);
            k.level = l + 1;
        }
        return k;
    }

    std::vector<Point2> cartesian() const {
        double scale = std::pow(3.0, level);
        const double s3 = std::sqrt(3.0) / 2.0;
        std::vector<Point2> out;
        out.reserve(points.size());
        for (auto [p, q] : points)
            out.push_back({(static_cast<double>(p) + 0.5 * static_cast<double>(q)) / scale,
                           s3 * static_cast<double>(q) / scale});
        return out;
    }
};

}  // namespace jext
