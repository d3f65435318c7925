#pragma once

// Executable forms of the interval-pointing results in the half plane, the
// scalar comparison lemmas, the Hill radius and the uniform return-time
// bound. All checks are pure over immutable inputs.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <mutex>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "ringdyn/core.hpp"
#include "ringdyn/fields.hpp"
#include "ringdyn/integrate.hpp"
#include "ringdyn/potential.hpp"

namespace ringdyn::verify {

// --- intervals on the x-axis --------------------------------------------------

struct Interval {
    enum class Kind { bounded, left_infinite, right_infinite };
    Kind kind = Kind::bounded;
    double a = 0.0; // left endpoint (bounded, right_infinite)
    double b = 0.0; // right endpoint (bounded, left_infinite)

    static Interval closed(double a, double b) {
        if (!(a <= b)) throw domain_error("Interval: need a <= b");
        return {Kind::bounded, a, b};
    }
    static Interval left_of(double b) { return {Kind::left_infinite, 0.0, b}; }
    static Interval right_of(double a) { return {Kind::right_infinite, a, 0.0}; }

    bool contains(double x) const {
        switch (kind) {
            case Kind::bounded: return a <= x && x <= b;
            case Kind::left_infinite: return x <= b;
            case Kind::right_infinite: return x >= a;
        }
        return false;
    }
    bool has_right_end() const { return kind != Kind::right_infinite; }
    bool has_left_end() const { return kind != Kind::left_infinite; }

    double distance(double x) const {
        if (contains(x)) return 0.0;
        double d = std::numeric_limits<double>::infinity();
        if (has_left_end()) d = std::min(d, std::abs(x - a));
        if (has_right_end()) d = std::min(d, std::abs(x - b));
        return d;
    }
};

// Does v point to I at x? True iff v = 0 or the ray from x along v meets I,
// I sitting on the x-axis and x in the closed upper half-plane.
inline bool points_to(Vec2 x, Vec2 v, const Interval& I) {
    if (x.z < 0.0) throw precondition_error("points_to: x must lie in the closed upper half-plane");
    if (v.x == 0.0 && v.z == 0.0) return true;
    if (x.z == 0.0) {
        if (I.contains(x.x)) return true; // the ray contains its base point
        if (v.z != 0.0) return false;     // leaves the axis immediately
        // Ray slides along the axis, covering [x.x, inf) or (-inf, x.x].
        if (v.x > 0.0) return !I.has_right_end() || I.b >= x.x;
        return !I.has_left_end() || I.a <= x.x;
    }
    if (v.z >= 0.0) return false; // stays at or above its height
    double t = -x.z / v.z;
    double xi = x.x + t * v.x;
    return I.contains(xi);
}

// --- pointing reports ----------------------------------------------------------

struct PointingSample {
    double t;
    Vec2 x;
    Vec2 v;
    bool points;
};

struct PointingReport {
    std::size_t checked = 0;
    std::size_t violations = 0;
    std::size_t skipped = 0; // grid nodes on the singular set
    std::optional<PointingSample> first_violation;

    // Trajectory data (empty for field checks): h = <v, (x-e)^perp> in the
    // frame translated to the interval's right end, and reflected for the
    // left end.
    std::vector<double> h_right;
    std::vector<double> h_left;
    double h_min_increment = 0.0; // min over k of h_{k+1}-h_k, scaled check
    bool h_monotone = true;

    bool landed = false;
    double landing_x = 0.0;
    bool landing_in_interval = true;

    bool pass = true;
};

// Evaluate the acceleration field on a grid in the open upper half-plane and
// test that it points to I everywhere. The pointed object for gravity is the
// acceleration -grad V: with the attractive sign it is the acceleration that
// aims at the source interval, and that is what the persistence argument
// applies to (the system is rddot = F(r)). Nodes on the singular set are
// skipped and counted.
struct GridSpec {
    double x0 = -5.0, x1 = 5.0;
    int nx = 50;
    double z0 = 0.05, z1 = 5.0;
    int nz = 50;
};

inline PointingReport check_field_pointing(const std::function<Vec2(Vec2)>& accel,
                                           const Interval& I, const GridSpec& grid = {}) {
    if (!(grid.z0 > 0.0)) throw precondition_error("check_field_pointing: grid must sit in the open upper half-plane");
    PointingReport rep;
    for (int i = 0; i < grid.nx; ++i) {
        for (int j = 0; j < grid.nz; ++j) {
            Vec2 p{grid.x0 + (grid.x1 - grid.x0) * (grid.nx == 1 ? 0.5 : double(i) / (grid.nx - 1)),
                   grid.z0 + (grid.z1 - grid.z0) * (grid.nz == 1 ? 0.5 : double(j) / (grid.nz - 1))};
            Vec2 F;
            try {
                F = accel(p);
            } catch (const domain_error&) {
                rep.skipped++;
                continue;
            }
            rep.checked++;
            bool ok = (F.x != 0.0 || F.z != 0.0) && points_to(p, F, I);
            if (!ok) {
                rep.violations++;
                if (!rep.first_violation) rep.first_violation = PointingSample{0.0, p, F, false};
            }
        }
    }
    rep.pass = rep.violations == 0;
    return rep;
}

// Verify pointing along a recorded upper-half trace, the monotone growth of
// h(t), and the landing position when the arc returns to the axis.
struct TrajectoryPointingOptions {
    bool require_initial_premise = false; // throw if the first sample fails
    double rel_tol = 1e-9;                // slack for h monotonicity
    double landing_band = 1e-8;           // |z| below which a sample "lands"
};

inline PointingReport check_trajectory_pointing(const PlanarTrace& trace, const Interval& I,
                                                const TrajectoryPointingOptions& opt = {}) {
    if (trace.size() == 0) throw precondition_error("check_trajectory_pointing: empty trace");
    PointingReport rep;
    double zmax = 0.0;
    for (std::size_t k = 0; k < trace.size(); ++k) {
        const auto& y = trace.y[k];
        if (y[1] < -1e-12) throw precondition_error("check_trajectory_pointing: trace leaves the closed upper half-plane");
        zmax = std::max(zmax, y[1]);
        Vec2 x{y[0], std::max(y[1], 0.0)};
        Vec2 v{y[2], y[3]};
        bool ok = points_to(x, v, I);
        rep.checked++;
        if (!ok) {
            rep.violations++;
            if (!rep.first_violation)
                rep.first_violation = PointingSample{trace.t[k], x, v, false};
        }
        if (I.has_right_end()) rep.h_right.push_back((x.x - I.b) * v.z - x.z * v.x);
        if (I.has_left_end()) rep.h_left.push_back((I.a - x.x) * v.z + x.z * v.x);
    }
    if (opt.require_initial_premise && rep.checked > 0) {
        Vec2 x0{trace.y[0][0], std::max(trace.y[0][1], 0.0)};
        Vec2 v0{trace.y[0][2], trace.y[0][3]};
        if (!points_to(x0, v0, I))
            throw precondition_error("check_trajectory_pointing: initial sample does not point to I");
    }

    auto monotone = [&](const std::vector<double>& h) {
        if (h.size() < 2) return 0.0;
        double hmax = 0.0;
        for (double v : h) hmax = std::max(hmax, std::abs(v));
        double worst = 0.0;
        for (std::size_t k = 1; k < h.size(); ++k) worst = std::min(worst, h[k] - h[k - 1]);
        rep.h_monotone = rep.h_monotone && worst >= -opt.rel_tol * std::max(hmax, 1e-30);
        return worst;
    };
    double w1 = monotone(rep.h_right);
    double w2 = monotone(rep.h_left);
    rep.h_min_increment = std::min(w1, w2);

    const auto& last = trace.y.back();
    if (std::abs(last[1]) <= opt.landing_band * std::max(1.0, zmax)) {
        rep.landed = true;
        rep.landing_x = last[0];
        rep.landing_in_interval = I.distance(last[0]) < 1e-8;
    }
    rep.pass = rep.violations == 0 && rep.h_monotone && (!rep.landed || rep.landing_in_interval);
    return rep;
}

// --- polyline self-intersection -------------------------------------------------

struct InjectivityReport {
    bool injective = true;
    std::size_t seg_i = 0, seg_j = 0; // first offending pair when not injective
    Vec2 where{};
};

namespace detail {

inline double orient(Vec2 a, Vec2 b, Vec2 c) { return cross(b - a, c - a); }

inline bool segments_intersect(Vec2 p1, Vec2 p2, Vec2 q1, Vec2 q2, Vec2& where) {
    double d1 = orient(q1, q2, p1), d2 = orient(q1, q2, p2);
    double d3 = orient(p1, p2, q1), d4 = orient(p1, p2, q2);
    if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0))) {
        double s = std::abs(d3) / (std::abs(d3) + std::abs(d4));
        where = {p1.x + (p2.x - p1.x) * s, p1.z + (p2.z - p1.z) * s};
        return true;
    }
    auto on_segment = [](Vec2 a, Vec2 b, Vec2 c) {
        return std::min(a.x, b.x) <= c.x && c.x <= std::max(a.x, b.x) &&
               std::min(a.z, b.z) <= c.z && c.z <= std::max(a.z, b.z);
    };
    if (d1 == 0 && on_segment(q1, q2, p1)) { where = p1; return true; }
    if (d2 == 0 && on_segment(q1, q2, p2)) { where = p2; return true; }
    if (d3 == 0 && on_segment(p1, p2, q1)) { where = q1; return true; }
    if (d4 == 0 && on_segment(p1, p2, q2)) { where = q2; return true; }
    return false;
}

} // namespace detail

// Sweep over x for self-intersections of an open polyline. Throws
// resolution_error when adjacent samples turn faster than max_turn.
inline InjectivityReport check_injective(const std::vector<Vec2>& poly, double max_turn = 0.05) {
    InjectivityReport rep;
    std::size_t n = poly.size();
    if (n < 3) return rep;

    for (std::size_t i = 2; i < n; ++i) {
        Vec2 u = poly[i - 1] - poly[i - 2];
        Vec2 v = poly[i] - poly[i - 1];
        if (u.norm() == 0.0 || v.norm() == 0.0) continue;
        double ang = std::abs(std::atan2(cross(u, v), dot(u, v)));
        if (ang > max_turn)
            throw resolution_error("check_injective: trace under-resolved, refine sampling");
    }

    struct Seg {
        double xmin, xmax;
        std::size_t i;
    };
    std::vector<Seg> segs;
    segs.reserve(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i)
        segs.push_back({std::min(poly[i].x, poly[i + 1].x), std::max(poly[i].x, poly[i + 1].x), i});
    std::sort(segs.begin(), segs.end(), [](const Seg& a, const Seg& b) { return a.xmin < b.xmin; });

    std::vector<const Seg*> active;
    for (const auto& s : segs) {
        active.erase(std::remove_if(active.begin(), active.end(),
                                    [&](const Seg* t) { return t->xmax < s.xmin; }),
                     active.end());
        for (const Seg* t : active) {
            if (t->i + 1 == s.i || s.i + 1 == t->i || t->i == s.i) continue;
            Vec2 where;
            if (detail::segments_intersect(poly[s.i], poly[s.i + 1], poly[t->i], poly[t->i + 1],
                                           where)) {
                rep.injective = false;
                rep.seg_i = std::min(s.i, t->i);
                rep.seg_j = std::max(s.i, t->i);
                rep.where = where;
                return rep;
            }
        }
        active.push_back(&s);
    }
    return rep;
}

inline std::vector<Vec2> trace_polyline(const PlanarTrace& tr) {
    std::vector<Vec2> poly;
    poly.reserve(tr.size());
    for (const auto& y : tr.y) poly.push_back({y[0], y[1]});
    return poly;
}

// --- Hill radius and the return-time constants ---------------------------------

struct HillData {
    double delta;    // energy level, < 0
    double R;        // radius of the Hill region
    double A;        // force-magnitude floor M/(rho+R)^3 (x2 for Euler)
    double Lambda;   // 2/min(1,A) + 1
    double T;        // 2 * Lambda: uniform return-time bound
};

// Root of V(x) = delta on a monotone increasing profile right of x_lo.
inline double hill_radius_profile(const std::function<double(double)>& V_axis, double x_lo,
                                  double delta) {
    if (!(delta < 0.0)) throw unbounded_region_error("hill_radius: requires delta < 0");
    double lo = x_lo;
    double hi = std::max(2.0 * x_lo + 1.0, x_lo + 1.0);
    while (V_axis(hi) <= delta) hi = 2.0 * hi + 1.0;
    return brent_root([&](double x) { return V_axis(x) - delta; }, lo, hi, 1e-13);
}

inline void fill_hill_constants(HillData& h) {
    h.Lambda = 2.0 / std::min(1.0, h.A) + 1.0;
    h.T = 2.0 * h.Lambda;
}

inline HillData hill_radius(const RingSystem& sys, double delta) {
    if (!(delta < 0.0)) throw unbounded_region_error("hill_radius: requires delta < 0");
    auto vx = [&](double x) { return ring_potential(sys, {x, 0, 0}); };
    double x_lo = sys.radius * (1.0 + 1e-7); // just outside the collision band
    if (vx(x_lo) > delta)
        throw domain_error("hill_radius: energy level reaches into the collision band");
    HillData h;
    h.delta = delta;
    h.R = hill_radius_profile(vx, x_lo, delta);
    h.A = sys.mass / std::pow(sys.radius + h.R, 3);
    fill_hill_constants(h);
    return h;
}

inline HillData hill_radius(const EulerSystem& sys, double delta) {
    if (!(delta < 0.0)) throw unbounded_region_error("hill_radius: requires delta < 0");
    auto vx = [&](double x) { return euler_potential(sys, {x, 0}); };
    double x_lo = sys.separation * (1.0 + 1e-7);
    if (vx(x_lo) > delta)
        throw domain_error("hill_radius: energy level reaches into the collision band");
    HillData h;
    h.delta = delta;
    h.R = hill_radius_profile(vx, x_lo, delta);
    h.A = 2.0 * sys.mass / std::pow(sys.separation + h.R, 3);
    fill_hill_constants(h);
    return h;
}

// Grid validation: every sublevel point lies inside the ball of radius R.
template <class Field>
bool hill_grid_valid(const Field& f, const HillData& h, int n = 80) {
    for (int i = 0; i <= n; ++i) {
        for (int j = 0; j <= n; ++j) {
            Vec2 p{-1.2 * h.R + 2.4 * h.R * i / n, 1e-6 + 1.2 * h.R * j / n};
            double V;
            try {
                V = f.potential(p);
            } catch (const domain_error&) {
                continue;
            }
            if (V <= h.delta && p.norm() > h.R * (1.0 + 1e-9)) return false;
        }
    }
    return true;
}

// --- uniform return-time check ---------------------------------------------------

struct ReturnSample {
    PlanarState launch;
    double t_return; // time of return to the axis (or collision)
    bool collided;
    bool returned;
};

struct ReturnTimeReport {
    HillData hill;
    std::vector<ReturnSample> samples;
    std::size_t violations = 0; // launches exceeding T
    double max_ratio = 0.0;     // max t_return / T
    double premise_min = 1e300; // min over samples of kernel / floor
    std::uint64_t seed = 0;
    bool pass = false;
};

// The z-equation kernel lambda * integral of 1/s^3, which must stay above
// M/(rho+R)^3 inside the Hill region.
inline double ring_z_kernel(const RingSystem& sys, Vec2 p) {
    double a = std::abs(p.x - sys.center.x);
    double u = a - sys.radius;
    double z = p.z - sys.center.z;
    double dmin2 = u * u + z * z;
    double w = u + 2.0 * sys.radius;
    double dmax2 = w * w + z * z;
    double m = (dmax2 - dmin2) / dmax2;
    auto ke = elliptic_KE(m, dmin2 / dmax2);
    return (sys.mass / (2.0 * pi)) * 4.0 * ke.E / (dmin2 * std::sqrt(dmax2));
}

template <class Field>
ReturnTimeReport check_return_time(const Field& field, const HillData& hill, double delta,
                                   int n_launches, std::uint64_t seed,
                                   const IntegratorConfig& cfg = {},
                                   const std::function<double(Vec2)>& kernel = {},
                                   double kernel_floor = 0.0) {
    ReturnTimeReport rep;
    rep.hill = hill;
    rep.seed = seed;
    rep.samples.resize(n_launches);

    // Pre-draw launches so the batch is deterministic under any thread cap.
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    std::vector<PlanarState> launches;
    while (launches.size() < static_cast<std::size_t>(n_launches)) {
        double x0 = -hill.R + 2.0 * hill.R * U(rng);
        double V;
        try {
            V = field.potential({x0, 0.0});
        } catch (const domain_error&) {
            continue;
        }
        if (V >= delta) continue;
        if (field.source_distance({x0, 0.0}) < 0.05) continue;
        double budget = 2.0 * (delta - V);
        double vz = std::sqrt(budget) * (0.05 + 0.9 * U(rng));
        double rem = budget - vz * vz;
        double vx = rem > 0.0 ? (2.0 * U(rng) - 1.0) * std::sqrt(rem) : 0.0;
        launches.push_back({x0, 0.0, vx, vz, 0.0});
    }

    std::mutex mtx;
    parallel_for(launches.size(), [&](std::size_t i) {
        PlanarState s0 = launches[i];
        IntegratorConfig c = cfg;
        c.max_time = 1.2 * hill.T + 10.0;
        ReturnSample smp;
        smp.launch = s0;
        smp.collided = false;
        smp.returned = false;
        smp.t_return = std::numeric_limits<double>::infinity();
        double local_premise = 1e300;
        try {
            auto tr = integrate_planar(field, s0,
                                       StopCondition::until_event(EventKind::z_cross_down)
                                           .within(1.05 * hill.T),
                                       c);
            if (tr.collided) {
                smp.collided = true;
                smp.t_return = tr.t.back();
            } else if (tr.stopped_by_event) {
                smp.returned = true;
                smp.t_return = tr.t.back();
            }
            if (kernel) {
                for (std::size_t k = 0; k < tr.size(); k += 5) {
                    double q = kernel({tr.y[k][0], tr.y[k][1]}) / kernel_floor;
                    local_premise = std::min(local_premise, q);
                }
            }
        } catch (const timeout_error&) {
            // leaves returned=false -> violation
        }
        std::lock_guard<std::mutex> lock(mtx);
        rep.samples[i] = smp;
        rep.premise_min = std::min(rep.premise_min, local_premise);
    });

    for (const auto& s : rep.samples) {
        if (!(s.returned || s.collided) || s.t_return > hill.T) {
            rep.violations++;
        } else {
            rep.max_ratio = std::max(rep.max_ratio, s.t_return / hill.T);
        }
    }
    rep.pass = rep.violations == 0;
    return rep;
}

// --- scalar comparison lemmas on the harmonic oracle ------------------------------

struct LemmaCheck {
    double A;
    double first_zero;     // integrated first zero of z from (z0, 0)
    double first_zero_cf;  // closed form (pi/2)/sqrt(A)
    double turning_time;   // integrated first zero of zdot from (0, zdot0)
    double Lambda;         // bound 2/min(1,A)+1
    double nonlinear_zero; // first zero of the stiffened comparison equation
    bool pass;
};

struct LemmaReport {
    std::vector<LemmaCheck> checks;
    bool pass = true;
};

inline LemmaReport scalar_ode_lemmas(const std::vector<double>& As = {0.01, 0.04, 0.1, 1.0, 10.0, 100.0}) {
    LemmaReport rep;
    for (double A : As) {
        if (!(A > 0)) throw domain_error("scalar_ode_lemmas: A must be positive");
        LemmaCheck c;
        c.A = A;
        c.Lambda = 2.0 / std::min(1.0, A) + 1.0;
        c.first_zero_cf = 0.5 * pi / std::sqrt(A);

        struct Lin {
            double A;
            Vec2 force(Vec2 p) const { return {0.0, -A * p.z}; }
            double potential(Vec2 p) const { return 0.5 * A * p.z * p.z; }
            double source_distance(Vec2) const { return 1.0; }
        } lin{A};

        IntegratorConfig cfg;
        cfg.monitor_energy = false;
        auto drop = integrate_planar(lin, {0.0, 1.0, 0.0, 0.0, 0.0},
                                     StopCondition::until_event(EventKind::z_cross_down)
                                         .within(2.0 * c.Lambda),
                                     cfg);
        c.first_zero = drop.stopped_by_event ? drop.t.back() : -1.0;

        auto rise = integrate_planar(lin, {0.0, 0.0, 0.0, 1.0, 0.0},
                                     StopCondition::until_event(EventKind::vz_zero)
                                         .within(2.0 * c.Lambda),
                                     cfg);
        c.turning_time = rise.stopped_by_event ? rise.t.back() : -1.0;

        struct Stiff {
            double A;
            Vec2 force(Vec2 p) const { return {0.0, -A * p.z - p.z * p.z * p.z}; }
            double potential(Vec2 p) const {
                return 0.5 * A * p.z * p.z + 0.25 * std::pow(p.z, 4);
            }
            double source_distance(Vec2) const { return 1.0; }
        } stiff{A};
        auto ndrop = integrate_planar(stiff, {0.0, 1.0, 0.0, 0.0, 0.0},
                                      StopCondition::until_event(EventKind::z_cross_down)
                                          .within(2.0 * c.Lambda),
                                      cfg);
        c.nonlinear_zero = ndrop.stopped_by_event ? ndrop.t.back() : -1.0;

        c.pass = c.first_zero > 0.0 && std::abs(c.first_zero - c.first_zero_cf) < 1e-8 &&
                 c.first_zero <= c.Lambda && c.turning_time > 0.0 &&
                 std::abs(c.turning_time - c.first_zero_cf) < 1e-8 && c.nonlinear_zero > 0.0 &&
                 c.nonlinear_zero <= c.first_zero + 1e-9;
        rep.pass = rep.pass && c.pass;
        rep.checks.push_back(c);
    }
    return rep;
}

// --- wire-limit measurement report -------------------------------------------------

struct WireLimitReport {
    double lambda;
    WireLimitMeasurement measurement;
    double declared_constant = 64.0;
    bool matches_declared = false;
    std::string verdict;
};

inline WireLimitReport wire_limit_report(double lambda = 1.0) {
    WireLimitReport rep;
    rep.lambda = lambda;
    rep.measurement = wire_limit_measure(lambda, {1.0, 0.0});
    double c = rep.measurement.c_star;
    rep.matches_declared = std::abs(c - rep.declared_constant) <= 1e-3 * rep.declared_constant;
    char buf[256];
    std::snprintf(buf, sizeof(buf),
                  "measured limit constant c* = %.4g (force -> c* lambda p/|p|^2); "
                  "declared constant 64: %s",
                  c, rep.matches_declared ? "AGREEMENT" : "DISCREPANCY");
    rep.verdict = buf;
    return rep;
}

} // namespace ringdyn::verify
