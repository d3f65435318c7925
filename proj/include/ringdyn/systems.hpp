#pragma once

// Source bodies. Units G = 1 throughout.

#include <cmath>
#include <string>

#include "ringdyn/core.hpp"

namespace ringdyn {

// Homogeneous circular wire of radius `radius` and total mass `mass`,
// lying in the plane z = center.z with axis parallel to z.
// Density is always derived: lambda = M / (2 pi rho).
struct RingSystem {
    double radius = 1.0;
    double mass = 1.0;
    Vec3 center{0.0, 0.0, 0.0};

    RingSystem() = default;
    RingSystem(double rho, double M, Vec3 c = {0.0, 0.0, 0.0})
        : radius(rho), mass(M), center(c) {
        if (!(radius > 0.0)) throw domain_error("RingSystem: radius must be > 0");
        if (!(mass > 0.0)) throw domain_error("RingSystem: mass must be > 0");
    }

    double density() const { return mass / (2.0 * pi * radius); }

    static RingSystem from_density(double rho, double lambda, Vec3 c = {0.0, 0.0, 0.0}) {
        return RingSystem(rho, 2.0 * pi * rho * lambda, c);
    }
};

// Shift the whole system by q; the translated potential satisfies
// W(s) = V(s - q).
inline RingSystem translate(const RingSystem& sys, Vec3 q) {
    return RingSystem(sys.radius, sys.mass, sys.center + q);
}

// Two fixed centers of equal mass `mass` at (+-separation, 0) in a plane.
struct EulerSystem {
    double mass = 1.0;
    double separation = 1.0;

    EulerSystem() = default;
    EulerSystem(double M, double rho) : mass(M), separation(rho) {
        if (!(mass > 0.0)) throw domain_error("EulerSystem: mass must be > 0");
        if (!(separation > 0.0)) throw domain_error("EulerSystem: separation must be > 0");
    }
};

} // namespace ringdyn
