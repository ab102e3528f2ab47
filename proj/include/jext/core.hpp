#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace jext {

template <int N>
using Vec = std::array<double, N>;

template <std::size_t N>
inline std::array<double, N> operator+(const std::array<double, N>& a, const std::array<double, N>& b) {
    std::array<double, N> r;
    for (std::size_t i = 0; i < N; ++i) r[i] = a[i] + b[i];
    return r;
}

template <std::size_t N>
inline std::array<double, N> operator-(const std::array<double, N>& a, const std::array<double, N>& b) {
    std::array<double, N> r;
    for (std::size_t i = 0; i < N; ++i) r[i] = a[i] - b[i];
    return r;
}

template <std::size_t N>
inline std::array<double, N> operator*(double s, const std::array<double, N>& a) {
    std::array<double, N> r;
    for (std::size_t i = 0; i < N; ++i) r[i] = s * a[i];
    return r;
}

template <std::size_t N>
inline double dot(const std::array<double, N>& a, const std::array<double, N>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < N; ++i) s += a[i] * b[i];
    return s;
}

template <std::size_t N>
inline double norm(const std::array<double, N>& a) {
    return std::sqrt(dot(a, a));
}

template <std::size_t N>
inline double distance(const std::array<double, N>& a, const std::array<double, N>& b) {
    return norm(a - b);
}

/// Closed axis-aligned box.
template <int N>
struct Box {
    Vec<N> lo{};
    Vec<N> hi{};

    Vec<N> center() const {
        Vec<N> c;
        for (int i = 0; i < N; ++i) c[i] = 0.5 * (lo[i] + hi[i]);
        return c;
    }
    double extent(int axis) const { return hi[axis] - lo[axis]; }
    double diameter() const { return norm<N>(hi - lo); }
    double volume() const {
        double v = 1.0;
        for (int i = 0; i < N; ++i) v *= extent(i);
        return v;
    }
    bool contains(const Vec<N>& p) const {
        for (int i = 0; i < N; ++i)
            if (p[i] < lo[i] || p[i] > hi[i]) return false;
        return true;
    }
    bool contains_strictly(const Vec<N>& p) const {
        for (int i = 0; i < N; ++i)
            if (p[i] <= lo[i] || p[i] >= hi[i]) return false;
        return true;
    }
    double distance_to(const Vec<N>& p) const {
        double s = 0.0;
        for (int i = 0; i < N; ++i) {
            double g = std::max({lo[i] - p[i], 0.0, p[i] - hi[i]});
            s += g * g;
        }
        return std::sqrt(s);
    }
    double distance_to(const Box& o) const {
        double s = 0.0;
        for (int i = 0; i < N; ++i) {
            double g = std::max({lo[i] - o.hi[i], 0.0, o.lo[i] - hi[i]});
            s += g * g;
        }
        return std::sqrt(s);
    }
    Box expanded(double margin) const {
        Box b = *this;
        for (int i = 0; i < N; ++i) {
            b.lo[i] -= margin;
            b.hi[i] += margin;
        }
        return b;
    }
};

/// Error categories map one-to-one onto CLI exit codes.
enum class ErrorKind { config = 1, invariant = 2, numerical = 3 };

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail_config(const std::string& msg) { throw Error(ErrorKind::config, msg); }
[[noreturn]] inline void fail_invariant(const std::string& msg) { throw Error(ErrorKind::invariant, msg); }
[[noreturn]] inline void fail_numerical(const std::string& msg) { throw Error(ErrorKind::numerical, msg); }

/// C-infinity step: 0 for t <= 0, 1 for t >= 1, all derivatives vanish at both ends.
inline double smooth_step(double t) {
    if (t <= 0.0) return 0.0;
    if (t >= 1.0) return 1.0;
    double a = std::exp(-1.0 / t);
    double b = std::exp(-1.0 / (1.0 - t));
    return a / (a + b);
}

inline double smooth_step_derivative(double t) {
    if (t <= 0.0 || t >= 1.0) return 0.0;
    double s = 1.0 - t;
    double a = std::exp(-1.0 / t);
    double b = std::exp(-1.0 / s);
    double da = a / (t * t);
    double db = -b / (s * s);
    double den = a + b;
    return (da * b - a * db) / (den * den);
}

// Worker cap shared by the parallel loops; 0 means hardware concurrency.
inline unsigned& thread_cap() {
    static unsigned cap = 0;
    return cap;
}

inline unsigned worker_count() {
    unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    unsigned cap = thread_cap();
    return cap == 0 ? hw : std::min(cap, hw);
}

/// Runs body(begin, end) over contiguous chunks of [0, n).
template <class Body>
void parallel_for(std::size_t n, Body&& body, std::size_t min_chunk = 4096) {
    unsigned workers = worker_count();
    if (workers <= 1 || n < 2 * min_chunk) {
        body(std::size_t{0}, n);
        return;
    }
    std::size_t chunks = std::min<std::size_t>(workers, n / min_chunk);
    std::vector<std::thread> pool;
    pool.reserve(chunks);
    for (std::size_t c = 0; c < chunks; ++c) {
        std::size_t b = n * c / chunks;
        std::size_t e = n * (c + 1) / chunks;
        pool.emplace_back([&body, b, e] { body(b, e); });
    }
    for (auto& t : pool) t.join();
}

}  // namespace jext
