#pragma once

// Complete elliptic integrals of the first and second kind by the
// arithmetic-geometric mean (Abramowitz & Stegun 17.6):
//
//   K(m) = pi / (2 * agm(1, sqrt(1-m)))
//   E(m) = K(m) * (1 - sum_{n>=0} 2^{n-1} c_n^2),  c_0 = sqrt(m),
//          c_{n+1} = (a_n - b_n)/2.
//
// Both parameters m and its complement m1 = 1-m are taken explicitly so the
// caller can supply each without cancellation (near the source m1 is tiny
// and must not be formed as 1-m).

#include <cmath>
#include <limits>

#include "ringdyn/core.hpp"

namespace ringdyn {

struct EllipticKE {
    double K;
    double E;
};

// Requires m in [0,1), m1 in (0,1], m + m1 == 1 up to rounding.
inline EllipticKE elliptic_KE(double m, double m1) {
    if (!(m >= 0.0 && m < 1.0) || !(m1 > 0.0 && m1 <= 1.0))
        throw domain_error("elliptic_KE: parameter outside [0,1)");
    double a = 1.0;
    double b = std::sqrt(m1);
    double c = std::sqrt(m);
    double sum = 0.5 * c * c; // 2^{-1} c_0^2
    double pow2 = 1.0;        // 2^{n-1} for n = 1 on first pass
    for (int n = 0; n < 64; ++n) {
        double an = 0.5 * (a + b);
        double cn = 0.5 * (a - b);
        b = std::sqrt(a * b);
        a = an;
        sum += pow2 * cn * cn;
        pow2 *= 2.0;
        if (cn < a * std::numeric_limits<double>::epsilon()) break;
    }
    double K = pi / (2.0 * a);
    return {K, K * (1.0 - sum)};
}

inline double elliptic_K(double m) { return elliptic_KE(m, 1.0 - m).K; }
inline double elliptic_E(double m) { return elliptic_KE(m, 1.0 - m).E; }

} // namespace ringdyn
