#pragma once

// Small value types, error hierarchy and shared utilities.

#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace ringdyn {

inline constexpr double pi = 3.14159265358979323846;

struct Vec2 {
    double x = 0.0;
    double z = 0.0;

    Vec2 operator+(Vec2 o) const { return {x + o.x, z + o.z}; }
    Vec2 operator-(Vec2 o) const { return {x - o.x, z - o.z}; }
    Vec2 operator*(double c) const { return {c * x, c * z}; }
    Vec2 operator-() const { return {-x, -z}; }
    double norm() const { return std::hypot(x, z); }
};

inline Vec2 operator*(double c, Vec2 v) { return v * c; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.z * b.z; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.z - a.z * b.x; }
// (a,b)^perp = (-b,a)
inline Vec2 perp(Vec2 v) { return {-v.z, v.x}; }

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    Vec3 operator+(Vec3 o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(Vec3 o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator*(double c) const { return {c * x, c * y, c * z}; }
    double norm() const { return std::sqrt(x * x + y * y + z * z); }
};

inline Vec3 operator*(double c, Vec3 v) { return v * c; }
inline double dot(Vec3 a, Vec3 b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

// Domain errors: the evaluation point or request is outside the operation's
// domain (on a source set, inside a forbidden region, bad arguments).
struct domain_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct source_collision_error : domain_error {
    using domain_error::domain_error;
};
struct singular_point_error : domain_error {
    using domain_error::domain_error;
};
struct repulsive_region_error : domain_error {
    using domain_error::domain_error;
};
struct unbounded_region_error : domain_error {
    using domain_error::domain_error;
};
struct precondition_error : domain_error {
    using domain_error::domain_error;
};

// Search / iteration failures: well-posed request, numerics did not converge.
struct search_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct bracket_failure : search_error {
    using search_error::search_error;
};
struct invalid_path_error : search_error {
    using search_error::search_error;
};
struct assembly_error : search_error {
    using search_error::search_error;
};
struct no_rational_error : search_error {
    using search_error::search_error;
};
struct resolution_error : search_error {
    using search_error::search_error;
};
struct timeout_error : search_error {
    using search_error::search_error;
};

// Floating-point formatting used by all writers: 17 significant digits
// round-trips IEEE doubles exactly and keeps output byte-stable.
inline std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// Thread cap for batch checks. 0 or unset RING_DYNAMICS_THREADS means 1.
inline unsigned thread_cap() {
    if (const char* env = std::getenv("RING_DYNAMICS_THREADS")) {
        long n = std::strtol(env, nullptr, 10);
        if (n > 0) return static_cast<unsigned>(n);
    }
    return 1;
}

// Chunked parallel map over [0,n). Falls back to a plain loop for cap 1.
inline void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
    unsigned cap = thread_cap();
    if (cap <= 1 || n < 2) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    unsigned nthreads = std::min<unsigned>(cap, static_cast<unsigned>(n));
    std::vector<std::thread> pool;
    pool.reserve(nthreads);
    for (unsigned t = 0; t < nthreads; ++t) {
        pool.emplace_back([&, t] {
            for (std::size_t i = t; i < n; i += nthreads) body(i);
        });
    }
    for (auto& th : pool) th.join();
}

// Brent root finder on a bracketing interval [a,b] with f(a)*f(b) <= 0.
template <class F>
double brent_root(F&& f, double a, double b, double fa, double fb,
                  double xtol = 1e-14, int max_iter = 200) {
    if (fa == 0.0) return a;
    if (fb == 0.0) return b;
    if (fa * fb > 0.0) throw bracket_failure("brent_root: interval does not bracket a root");
    double c = a, fc = fa, d = b - a, e = d;
    for (int it = 0; it < max_iter; ++it) {
        if (std::abs(fc) < std::abs(fb)) {
            a = b; b = c; c = a;
            fa = fb; fb = fc; fc = fa;
        }
        double tol = 2.0 * 2.22e-16 * std::abs(b) + 0.5 * xtol;
        double m = 0.5 * (c - b);
        if (std::abs(m) <= tol || fb == 0.0) return b;
        if (std::abs(e) < tol || std::abs(fa) <= std::abs(fb)) {
            d = m; e = m;
        } else {
            double s = fb / fa, p, q;
            if (a == c) {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                double qq = fa / fc, r = fb / fc;
                p = s * (2.0 * m * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if (p > 0.0) q = -q; else p = -p;
            if (2.0 * p < std::min(3.0 * m * q - std::abs(tol * q), std::abs(e * q))) {
                e = d; d = p / q;
            } else {
                d = m; e = m;
            }
        }
        a = b; fa = fb;
        b += (std::abs(d) > tol) ? d : (m > 0 ? tol : -tol);
        fb = f(b);
        if ((fb > 0) == (fc > 0)) { c = a; fc = fa; d = b - a; e = d; }
    }
    return b;
}

template <class F>
double brent_root(F&& f, double a, double b, double xtol = 1e-14, int max_iter = 200) {
    double fa = f(a), fb = f(b);
    return brent_root(f, a, b, fa, fb, xtol, max_iter);
}

// Adaptive Simpson quadrature, recursion by interval halving.
namespace detail {
template <class F>
double simpson_rec(F& f, double a, double b, double fa, double fm, double fb,
                   double whole, double tol, int depth) {
    double m = 0.5 * (a + b);
    double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    double flm = f(lm), frm = f(rm);
    double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    double sum = left + right;
    if (depth <= 0 || std::abs(sum - whole) <= 15.0 * tol)
        return sum + (sum - whole) / 15.0;
    return simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}
} // namespace detail

template <class F>
double adaptive_simpson(F&& f, double a, double b, double tol = 1e-14, int max_depth = 30) {
    double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return detail::simpson_rec(f, a, b, fa, fm, fb, whole, tol, max_depth);
}

// Winding number of a closed polyline about a point (sum of signed turns / 2pi).
inline double winding_number(const std::vector<Vec2>& poly, Vec2 about) {
    double total = 0.0;
    std::size_t n = poly.size();
    if (n < 3) return 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        Vec2 a = poly[i] - about, b = poly[i + 1] - about;
        total += std::atan2(cross(a, b), dot(a, b));
    }
    Vec2 a = poly[n - 1] - about, b = poly[0] - about;
    total += std::atan2(cross(a, b), dot(a, b));
    return total / (2.0 * pi);
}

} // namespace ringdyn
