#pragma once

// Force fields in the forms the integrator consumes. A planar field models
// motion in a vertical plane (coordinates x, z) and provides force,
// potential and distance to the singular set. Reduced fields add the
// centrifugal term of the cylindrical reduction.

#include <cmath>

#include "ringdyn/core.hpp"
#include "ringdyn/potential.hpp"
#include "ringdyn/systems.hpp"

namespace ringdyn {

template <class F>
concept PlanarField = requires(const F f, Vec2 p) {
    { f.force(p) } -> std::convertible_to<Vec2>;
    { f.potential(p) } -> std::convertible_to<double>;
    { f.source_distance(p) } -> std::convertible_to<double>;
};

// Ring restricted to a vertical plane through its axis; the circle meets the
// plane at x = center_x +- radius. The center may sit anywhere on the x-axis
// (center.y must vanish for the plane to be invariant).
struct RingPlanarField {
    RingSystem sys;
    EvalOptions opt{};

    explicit RingPlanarField(RingSystem s, EvalOptions o = {}) : sys(s), opt(o) {
        if (sys.center.y != 0.0)
            throw domain_error("RingPlanarField: center must lie in the plane (center.y == 0)");
    }

    RingEval eval(Vec2 p) const {
        double X = p.x - sys.center.x;
        return ring_eval_cyl(sys.radius, sys.mass, std::abs(X), p.z - sys.center.z, opt);
    }
    Vec2 force(Vec2 p) const {
        double X = p.x - sys.center.x;
        RingEval e = eval(p);
        double s = X > 0 ? 1.0 : (X < 0 ? -1.0 : 0.0);
        return {-s * e.dV_da, -e.dV_dz};
    }
    double potential(Vec2 p) const { return eval(p).potential; }
    double source_distance(Vec2 p) const {
        double X = p.x - sys.center.x;
        return std::hypot(std::abs(X) - sys.radius, p.z - sys.center.z);
    }
};

// Near-circle frame: the circle of radius rho passes through the origin of
// this chart and x grows toward the circle's center, so the cylindrical
// radius is a = rho - x, exact for |x| << rho. States stay O(1) however
// large rho is.
struct TranslatedRingPlanarField {
    double rho;
    double mass;
    EvalOptions opt{};

    TranslatedRingPlanarField(double rho_, double mass_, EvalOptions o = {})
        : rho(rho_), mass(mass_), opt(o) {}

    static TranslatedRingPlanarField from_density(double rho_, double lambda, EvalOptions o = {}) {
        return {rho_, 2.0 * pi * rho_ * lambda, o};
    }

    RingEval eval(Vec2 p) const { return ring_eval_offset(rho, mass, -p.x, p.z, opt); }
    Vec2 force(Vec2 p) const {
        RingEval e = eval(p);
        // a = rho - x, so dW/dx = -dV/da.
        return {e.dV_da, -e.dV_dz};
    }
    double potential(Vec2 p) const { return eval(p).potential; }
    double source_distance(Vec2 p) const { return p.norm(); }
};

struct EulerPlanarField {
    EulerSystem sys;
    EvalOptions opt{};

    explicit EulerPlanarField(EulerSystem s, EvalOptions o = {}) : sys(s), opt(o) {}

    Vec2 force(Vec2 p) const { return euler_force(sys, p, opt); }
    double potential(Vec2 p) const { return euler_potential(sys, p, opt); }
    double source_distance(Vec2 p) const { return euler_source_distance(sys, p); }
};

// Point mass at the origin; the eps -> 0 member of the far-orbit family.
struct KeplerPlanarField {
    double mass = 1.0;

    Vec2 force(Vec2 p) const {
        double r2 = p.x * p.x + p.z * p.z;
        double r = std::sqrt(r2);
        if (r == 0.0) throw singular_point_error("KeplerPlanarField: origin");
        double c = -mass / (r2 * r);
        return {c * p.x, c * p.z};
    }
    double potential(Vec2 p) const { return -mass / p.norm(); }
    double source_distance(Vec2 p) const { return p.norm(); }
};

// Cylindrical reduction about the ring axis: coordinates (r, z), r > 0,
// effective potential Vbar = keff^2/(2 r^2) + V(r, 0, z).
struct ReducedRingField {
    RingSystem sys;
    double keff = 0.0;
    EvalOptions opt{};

    ReducedRingField(RingSystem s, double k, EvalOptions o = {}) : sys(s), keff(k), opt(o) {
        if (s.center.x != 0.0 || s.center.y != 0.0)
            throw domain_error("ReducedRingField: ring must be centered on the z-axis");
    }

    Vec2 force(Vec2 p) const {
        if (!(p.x > 0.0)) throw singular_point_error("ReducedRingField: r must stay positive");
        RingEval e = ring_eval_cyl(sys.radius, sys.mass, p.x, p.z - sys.center.z, opt);
        double centrifugal = keff == 0.0 ? 0.0 : keff * keff / (p.x * p.x * p.x);
        return {centrifugal - e.dV_da, -e.dV_dz};
    }
    double potential(Vec2 p) const {
        RingEval e = ring_eval_cyl(sys.radius, sys.mass, p.x, p.z - sys.center.z, opt);
        double cen = keff == 0.0 ? 0.0 : keff * keff / (2.0 * p.x * p.x);
        return cen + e.potential;
    }
    double source_distance(Vec2 p) const {
        return std::hypot(p.x - sys.radius, p.z - sys.center.z);
    }
};

// Reduced dynamics in the near-circle chart (a = rho - x as above), with the
// centrifugal term of angular momentum keff about the distant axis.
struct ReducedTranslatedRingField {
    double rho;
    double mass;
    double keff;
    EvalOptions opt{};

    ReducedTranslatedRingField(double rho_, double mass_, double k, EvalOptions o = {})
        : rho(rho_), mass(mass_), keff(k), opt(o) {}

    double radius_at(Vec2 p) const { return rho - p.x; }

    Vec2 force(Vec2 p) const {
        RingEval e = ring_eval_offset(rho, mass, -p.x, p.z, opt);
        double r = rho - p.x;
        if (!(r > 0.0)) throw singular_point_error("ReducedTranslatedRingField: r must stay positive");
        double centrifugal = keff == 0.0 ? 0.0 : -keff * keff / (r * r * r);
        return {centrifugal + e.dV_da, -e.dV_dz};
    }
    double potential(Vec2 p) const {
        RingEval e = ring_eval_offset(rho, mass, -p.x, p.z, opt);
        double r = rho - p.x;
        double cen = keff == 0.0 ? 0.0 : keff * keff / (2.0 * r * r);
        return cen + e.potential;
    }
    double source_distance(Vec2 p) const { return p.norm(); }
};

// Full 3D ring field.
struct Ring3DField {
    RingSystem sys;
    EvalOptions opt{};

    explicit Ring3DField(RingSystem s, EvalOptions o = {}) : sys(s), opt(o) {}

    Vec3 force(Vec3 p) const { return ring_force(sys, p, opt); }
    double potential(Vec3 p) const { return ring_potential(sys, p, opt); }
    double source_distance(Vec3 p) const { return ring_source_distance(sys, p); }
};

} // namespace ringdyn
