#pragma once

// Gravitational potential and force of a homogeneous circle, evaluated in
// closed form with AGM elliptic integrals, plus the Euler two-center and
// infinite-wire comparison fields and a trapezoid quadrature oracle.
//
// Geometry is reduced to the meridional half-plane: a point at cylindrical
// radius a and height z from the circle plane sees
//
//   d_min^2 = (a-rho)^2 + z^2        nearest circle point
//   d_max^2 = (a+rho)^2 + z^2        farthest circle point
//   m       = 4 a rho / d_max^2      elliptic parameter
//
//   V      = -(2 M / pi) K(m) / d_max
//   dV/da  =  (M/2pi) [ (u(u+2rho) - z^2) J0 + I0 ] / (2a),  u = a - rho
//   dV/dz  =  (M/2pi) z J0
//
// with I0 = 4K/d_max (= integral of 1/s over the circle parameter) and
// J0 = 4E/(d_min^2 d_max) (= integral of 1/s^3). Everything is written in
// terms of u so that evaluations close to the circle lose no precision:
// callers that know u exactly use the *_offset entry points, and a - rho
// is exact anyway whenever a is within a factor of two of rho.
//
// Near the symmetry axis the dV/da bracket cancels; there a Legendre series
// in alpha = a / sqrt(rho^2 + z^2) takes over.

#include <cmath>
#include <vector>

#include "ringdyn/core.hpp"
#include "ringdyn/elliptic.hpp"
#include "ringdyn/systems.hpp"

namespace ringdyn {

struct RingEval {
    double potential;
    double dV_da; // derivative along cylindrical radius
    double dV_dz;
    double source_distance;
    bool near_source = false;
};

struct EvalOptions {
    // Hard collision band: evaluation inside raises instead of returning
    // huge values (integrators need a crisp failure). Scaled by rho.
    double eps_coll = 1e-8;
    // Warning band, also scaled by rho.
    double warn_band = 1e-5;
};

namespace detail {

// Series coefficients for V = -(M/R) (1 + e2 a^2 + e4 a^4 + e6 a^6), a = alpha,
// from integrating the Legendre generating function over the circle.
inline void ring_axis_series(double M, double rho, double a, double z,
                             double& dV_da_out) {
    double R2 = rho * rho + z * z;
    double R = std::sqrt(R2);
    double g2 = rho * rho / R2;
    double g4 = g2 * g2, g6 = g4 * g2;
    double e2 = (3.0 * g2 - 2.0) / 4.0;
    double e4 = (105.0 * g4 - 120.0 * g2 + 24.0) / 64.0;
    double e6 = (1155.0 * g6 - 1890.0 * g4 + 840.0 * g2 - 80.0) / 256.0;
    double al = a / R;
    double al2 = al * al;
    dV_da_out = -(M / R2) * al * (2.0 * e2 + al2 * (4.0 * e4 + al2 * 6.0 * e6));
}

inline constexpr double axis_series_switch = 2e-3; // in units of alpha

} // namespace detail

// Core evaluation with u = a - rho supplied exactly by the caller.
// a = u + rho must be >= 0.
inline RingEval ring_eval_offset(double rho, double M, double u, double z,
                                 const EvalOptions& opt = {}) {
    double dmin2 = u * u + z * z;
    double w = u + 2.0 * rho;
    double dmax2 = w * w + z * z;
    double dmin = std::sqrt(dmin2);
    double dmax = std::sqrt(dmax2);

    if (dmin < opt.eps_coll * rho)
        throw source_collision_error("ring_eval: point on or within the collision band of the circle");

    RingEval out;
    out.source_distance = dmin;
    out.near_source = dmin < opt.warn_band * rho;

    double m = (dmax2 - dmin2) / dmax2; // = 4 a rho / dmax^2
    double m1 = dmin2 / dmax2;
    auto [K, E] = elliptic_KE(m, m1);

    double pref = M / (2.0 * pi);
    double I0 = 4.0 * K / dmax;
    double J0 = 4.0 * E / (dmin2 * dmax);

    out.potential = -pref * I0;
    out.dV_dz = pref * z * J0;

    double a = u + rho;
    if (a < 0.0) throw domain_error("ring_eval_offset: negative cylindrical radius");
    double R = std::sqrt(rho * rho + z * z);
    if (a < detail::axis_series_switch * R) {
        detail::ring_axis_series(M, rho, a, z, out.dV_da);
    } else {
        out.dV_da = pref * ((u * w - z * z) * J0 + I0) / (2.0 * a);
    }
    return out;
}

inline RingEval ring_eval_cyl(double rho, double M, double a, double z,
                              const EvalOptions& opt = {}) {
    return ring_eval_offset(rho, M, a - rho, z, opt);
}

// --- 3D interface on RingSystem ---------------------------------------------

inline RingEval ring_eval_point(const RingSystem& sys, Vec3 p,
                                const EvalOptions& opt = {}) {
    Vec3 q = p - sys.center;
    double a = std::hypot(q.x, q.y);
    return ring_eval_cyl(sys.radius, sys.mass, a, q.z, opt);
}

inline double ring_potential(const RingSystem& sys, Vec3 p, const EvalOptions& opt = {}) {
    return ring_eval_point(sys, p, opt).potential;
}

inline Vec3 ring_force(const RingSystem& sys, Vec3 p, const EvalOptions& opt = {}) {
    Vec3 q = p - sys.center;
    double a = std::hypot(q.x, q.y);
    RingEval e = ring_eval_cyl(sys.radius, sys.mass, a, q.z, opt);
    double Fa = -e.dV_da;
    Vec3 f{0.0, 0.0, -e.dV_dz};
    if (a > 0.0) {
        f.x = Fa * q.x / a;
        f.y = Fa * q.y / a;
    }
    return f;
}

inline double ring_source_distance(const RingSystem& sys, Vec3 p) {
    Vec3 q = p - sys.center;
    double a = std::hypot(q.x, q.y);
    return std::hypot(a - sys.radius, q.z);
}

// --- Quadrature oracle -------------------------------------------------------

// Composite trapezoid over the circle parameter; the integrand is periodic
// and analytic off the circle, so the rule is spectrally accurate. Node
// count escalates automatically close to the circle.
inline std::size_t oracle_node_count(double rho, double dmin, std::size_t n) {
    if (n == 0) n = std::size_t(1) << 16;
    if (dmin < 0.02 * rho) n = std::max(n, std::size_t(1) << 20);
    return n;
}

inline double ring_potential_quadrature(const RingSystem& sys, Vec3 p, std::size_t n = 0) {
    Vec3 q = p - sys.center;
    double rho = sys.radius;
    n = oracle_node_count(rho, ring_source_distance(sys, p), n);
    double sum = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        double th = 2.0 * pi * double(k) / double(n);
        double dx = q.x - rho * std::cos(th);
        double dy = q.y - rho * std::sin(th);
        sum += 1.0 / std::sqrt(dx * dx + dy * dy + q.z * q.z);
    }
    return -(sys.mass / (2.0 * pi)) * (2.0 * pi / double(n)) * sum;
}

inline Vec3 ring_force_quadrature(const RingSystem& sys, Vec3 p, std::size_t n = 0) {
    Vec3 q = p - sys.center;
    double rho = sys.radius;
    n = oracle_node_count(rho, ring_source_distance(sys, p), n);
    Vec3 acc{0.0, 0.0, 0.0};
    for (std::size_t k = 0; k < n; ++k) {
        double th = 2.0 * pi * double(k) / double(n);
        double dx = q.x - rho * std::cos(th);
        double dy = q.y - rho * std::sin(th);
        double s2 = dx * dx + dy * dy + q.z * q.z;
        double s3 = s2 * std::sqrt(s2);
        acc.x += dx / s3;
        acc.y += dy / s3;
        acc.z += q.z / s3;
    }
    double c = -(sys.mass / (2.0 * pi)) * (2.0 * pi / double(n));
    return {c * acc.x, c * acc.y, c * acc.z};
}

// --- Scaling identities ------------------------------------------------------

struct ScaleCheckResult {
    double pot_abs;  // |V(cp, c rho, M) - (1/c) V(p, rho, M)|
    double grad_abs; // max component of the gradient identity defect
    double pot_rel;
    double grad_rel;
};

inline ScaleCheckResult scale_check(const RingSystem& sys, Vec3 p, double c,
                                    const EvalOptions& opt = {}) {
    if (!(c > 0.0)) throw domain_error("scale_check: c must be > 0");
    RingSystem scaled(c * sys.radius, sys.mass, c * sys.center);
    double Vs = ring_potential(scaled, c * p, opt);
    double V = ring_potential(sys, p, opt);
    Vec3 Gs = -1.0 * ring_force(scaled, c * p, opt);
    Vec3 G = -1.0 * ring_force(sys, p, opt);

    ScaleCheckResult r;
    r.pot_abs = std::abs(Vs - V / c);
    double gd = std::max({std::abs(Gs.x - G.x / (c * c)),
                          std::abs(Gs.y - G.y / (c * c)),
                          std::abs(Gs.z - G.z / (c * c))});
    r.grad_abs = gd;
    r.pot_rel = r.pot_abs / std::abs(V / c);
    double gscale = std::max({std::abs(G.x), std::abs(G.y), std::abs(G.z)}) / (c * c);
    r.grad_rel = gscale > 0.0 ? gd / gscale : gd;
    return r;
}

// --- Kepler perturbation residual (small-radius circle) -----------------------

struct PerturbationResidual {
    double numerator; // |V(p, eps) + M/|p||
    double ratio;     // numerator / eps^2
};

inline PerturbationResidual perturbation_residual(double M, Vec3 p, double eps,
                                                  const EvalOptions& opt = {}) {
    double kepler = M / p.norm();
    if (eps == 0.0) return {0.0, 0.0};
    double V = ring_potential(RingSystem(std::abs(eps), M), p, opt);
    double num = std::abs(V + kepler);
    return {num, num / (eps * eps)};
}

// --- Infinite wire comparison field ------------------------------------------

// The declared eps -> 0 limit of grad W for the circle through the origin:
// 64 lambda (x,z) / (x^2+z^2). Kept verbatim as the comparison field; the
// measured limit constant is produced independently by wire_limit_measure.
inline Vec2 wire_force(double lambda, Vec2 p) {
    double r2 = p.x * p.x + p.z * p.z;
    if (r2 == 0.0) throw singular_point_error("wire_force: origin is the singular point");
    return {64.0 * lambda * p.x / r2, 64.0 * lambda * p.z / r2};
}

// grad W(x, z; eps) for the circle of radius 1/eps centered at (1/eps, 0, 0),
// density lambda, evaluated without cancellation (u = -x exactly).
inline Vec2 translated_ring_gradient(double lambda, double eps, Vec2 p,
                                     const EvalOptions& opt = {}) {
    double rho = 1.0 / eps;
    double M = 2.0 * pi * rho * lambda;
    RingEval e = ring_eval_offset(rho, M, -p.x, p.z, opt);
    // a increases as x decreases on this side of the axis.
    return {-e.dV_da, e.dV_dz};
}

struct WireLimitMeasurement {
    double c_star;               // extrapolated constant in c* lambda p/|p|^2
    double err_estimate;         // last Neville correction magnitude
    std::vector<double> eps;     // sample radii parameter
    std::vector<double> c_of_eps;
};

// Richardson (Neville) extrapolation of c(eps) = <grad W(p; eps), p> / lambda
// to eps -> 0, polynomial model in eps.
inline WireLimitMeasurement wire_limit_measure(double lambda, Vec2 p,
                                               std::vector<double> eps_list = {1e-2, 1e-3, 1e-4, 1e-5}) {
    WireLimitMeasurement m;
    m.eps = eps_list;
    std::size_t n = eps_list.size();
    std::vector<double> tab(n);
    for (std::size_t i = 0; i < n; ++i) {
        Vec2 g = translated_ring_gradient(lambda, eps_list[i], p);
        // grad W ~ c lambda p / |p|^2, so <grad W, p> = c lambda.
        tab[i] = dot(g, p) / lambda;
        m.c_of_eps.push_back(tab[i]);
    }
    // Neville at eps = 0.
    double prev = tab[n - 1];
    for (std::size_t j = 1; j < n; ++j) {
        for (std::size_t i = 0; i + j < n; ++i) {
            double e0 = eps_list[i], e1 = eps_list[i + j];
            tab[i] = (e0 * tab[i + 1] - e1 * tab[i]) / (e0 - e1);
        }
    }
    m.c_star = tab[0];
    m.err_estimate = std::abs(tab[0] - prev);
    return m;
}

// --- Euler two-center field ---------------------------------------------------

inline double euler_source_distance(const EulerSystem& sys, Vec2 p) {
    double d1 = std::hypot(p.x - sys.separation, p.z);
    double d2 = std::hypot(p.x + sys.separation, p.z);
    return std::min(d1, d2);
}

inline double euler_potential(const EulerSystem& sys, Vec2 p, const EvalOptions& opt = {}) {
    double d1 = std::hypot(p.x - sys.separation, p.z);
    double d2 = std::hypot(p.x + sys.separation, p.z);
    if (std::min(d1, d2) < opt.eps_coll * sys.separation)
        throw source_collision_error("euler_potential: point at a fixed center");
    return -sys.mass / d1 - sys.mass / d2;
}

inline Vec2 euler_force(const EulerSystem& sys, Vec2 p, const EvalOptions& opt = {}) {
    double dx1 = p.x - sys.separation, dx2 = p.x + sys.separation;
    double d1 = std::hypot(dx1, p.z), d2 = std::hypot(dx2, p.z);
    if (std::min(d1, d2) < opt.eps_coll * sys.separation)
        throw source_collision_error("euler_force: point at a fixed center");
    double c1 = sys.mass / (d1 * d1 * d1);
    double c2 = sys.mass / (d2 * d2 * d2);
    return {-c1 * dx1 - c2 * dx2, -(c1 + c2) * p.z};
}

} // namespace ringdyn
