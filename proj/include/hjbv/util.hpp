#pragma once

#include <cmath>
#include <cstdlib>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace hjbv {

using Vec = std::vector<double>;

constexpr double kInf = std::numeric_limits<double>::infinity();

inline bool is_finite(double v) { return std::isfinite(v); }

inline double dot(const Vec& a, const Vec& b) {
    double s = 0;
    for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm2(const Vec& a) { return dot(a, a); }
inline double norm(const Vec& a) { return std::sqrt(norm2(a)); }

inline double dist(const Vec& a, const Vec& b) {
    double s = 0;
    for (size_t i = 0; i < a.size(); ++i) {
        double d = a[i] - b[i];
        s += d * d;
    }
    return std::sqrt(s);
}

inline Vec add(const Vec& a, const Vec& b) {
    Vec r(a.size());
    for (size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
    return r;
}

inline Vec sub(const Vec& a, const Vec& b) {
    Vec r(a.size());
    for (size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
    return r;
}

inline Vec scale(const Vec& a, double c) {
    Vec r(a.size());
    for (size_t i = 0; i < a.size(); ++i) r[i] = c * a[i];
    return r;
}

inline Vec axpy(const Vec& x, double h, const Vec& v) {  // x + h*v
    Vec r(x.size());
    for (size_t i = 0; i < x.size(); ++i) r[i] = x[i] + h * v[i];
    return r;
}

inline Vec normalized(const Vec& a) {
    double n = norm(a);
    if (n == 0) return a;
    return scale(a, 1.0 / n);
}

/// Axis-aligned box, the common bounding-volume currency of the toolkit.
struct Box {
    Vec lo, hi;

    int dim() const { return static_cast<int>(lo.size()); }

    bool contains(const Vec& x, double tol = 0) const {
        for (size_t i = 0; i < lo.size(); ++i)
            if (x[i] < lo[i] - tol || x[i] > hi[i] + tol) return false;
        return true;
    }

    Vec clamp(const Vec& x) const {
        Vec r = x;
        for (size_t i = 0; i < lo.size(); ++i)
            r[i] = std::min(std::max(r[i], lo[i]), hi[i]);
        return r;
    }

    Box inflated(double factor) const {
        Box b = *this;
        for (size_t i = 0; i < lo.size(); ++i) {
            double c = 0.5 * (lo[i] + hi[i]), half = 0.5 * (hi[i] - lo[i]);
            double h = half * (1.0 + factor) + 1e-12;
            b.lo[i] = c - h;
            b.hi[i] = c + h;
        }
        return b;
    }

    Box merged(const Box& o) const {
        Box b = *this;
        for (size_t i = 0; i < lo.size(); ++i) {
            b.lo[i] = std::min(b.lo[i], o.lo[i]);
            b.hi[i] = std::max(b.hi[i], o.hi[i]);
        }
        return b;
    }

    double diameter() const {
        double s = 0;
        for (size_t i = 0; i < lo.size(); ++i) s += (hi[i] - lo[i]) * (hi[i] - lo[i]);
        return std::sqrt(s);
    }
};

/// Worker count: HJBV_THREADS caps it, hardware concurrency is the default.
inline unsigned worker_count() {
    unsigned hw = std::thread::hardware_concurrency();
    if (hw == 0) hw = 1;
    if (const char* env = std::getenv("HJBV_THREADS")) {
        long v = std::strtol(env, nullptr, 10);
        if (v >= 1 && static_cast<unsigned>(v) < hw) hw = static_cast<unsigned>(v);
    }
    return hw;
}

/// Deterministic parallel loop: each index writes only its own data, so the
/// result does not depend on the worker count.
inline void parallel_for(size_t n, const std::function<void(size_t)>& body) {
    unsigned workers = worker_count();
    if (workers <= 1 || n < 64) {
        for (size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    size_t chunk = (n + workers - 1) / workers;
    for (unsigned w = 0; w < workers; ++w) {
        size_t b = w * chunk, e = std::min(n, b + chunk);
        if (b >= e) break;
        pool.emplace_back([&body, b, e] {
            for (size_t i = b; i < e; ++i) body(i);
        });
    }
    for (auto& t : pool) t.join();
}

inline std::vector<double> linspace(double a, double b, int n) {
    std::vector<double> r(n);
    for (int i = 0; i < n; ++i)
        r[i] = (n == 1) ? a : a + (b - a) * i / (n - 1);
    return r;
}

}  // namespace hjbv
