#pragma once

// Integration entry points for the planar, reduced and 3D systems, plus
// circular-orbit analysis and the exact similarity rescaling of solutions.

#include <cmath>
#include <functional>
#include <memory>
#include <optional>

#include "ringdyn/fields.hpp"
#include "ringdyn/ode.hpp"
#include "ringdyn/trace.hpp"

namespace ringdyn {

// Stop condition: fixed horizon and/or the n-th event of a kind.
struct StopCondition {
    double t_end = std::numeric_limits<double>::infinity();
    std::optional<EventKind> kind;
    std::size_t count = 1;
    std::function<bool(double, EventKind)> pred; // optional extra predicate

    static StopCondition until_time(double T) {
        StopCondition s;
        s.t_end = T;
        return s;
    }
    static StopCondition until_event(EventKind k, std::size_t n = 1) {
        StopCondition s;
        s.kind = k;
        s.count = n;
        return s;
    }
    StopCondition& within(double T) {
        t_end = T;
        return *this;
    }
};

namespace detail {

template <std::size_t N>
std::function<bool(const Event<N>&)> make_stop(const StopCondition& stop) {
    if (!stop.kind && !stop.pred) return nullptr;
    auto remaining = std::make_shared<std::size_t>(stop.count);
    auto kind = stop.kind;
    auto pred = stop.pred;
    return [remaining, kind, pred](const Event<N>& ev) {
        if (pred && pred(ev.t, ev.kind)) return true;
        if (kind && ev.kind == *kind) {
            if (--*remaining == 0) return true;
        }
        return false;
    };
}

} // namespace detail

// Standard planar events: x-axis crossings (z = 0) in both directions and
// vertical turning points. `extra_line` adds the z = h crossing monitor.
inline std::vector<EventSpec<4>> planar_events(std::optional<double> extra_line = {}) {
    std::vector<EventSpec<4>> ev;
    ev.push_back({EventKind::z_cross_up,
                  [](double, const std::array<double, 4>& y) { return y[1]; }, +1, false});
    ev.push_back({EventKind::z_cross_down,
                  [](double, const std::array<double, 4>& y) { return y[1]; }, -1, false});
    ev.push_back({EventKind::vz_zero,
                  [](double, const std::array<double, 4>& y) { return y[3]; }, 0, false});
    if (extra_line) {
        double h = *extra_line;
        ev.push_back({EventKind::line_en_cross,
                      [h](double, const std::array<double, 4>& y) { return y[1] - h; }, 0, false});
    }
    return ev;
}

template <PlanarField Field>
PlanarTrace integrate_planar(const Field& field, PlanarState s0, StopCondition stop,
                             const IntegratorConfig& cfg = {},
                             std::optional<double> line_height = {},
                             std::optional<double> hill_cap = {}) {
    auto rhs = [&field](double, const std::array<double, 4>& y, std::array<double, 4>& d) {
        Vec2 f = field.force({y[0], y[1]});
        d[0] = y[2];
        d[1] = y[3];
        d[2] = f.x;
        d[3] = f.z;
    };
    DriverOptions<4> opt;
    opt.t_end = stop.t_end;
    opt.events = planar_events(line_height);
    if (hill_cap) {
        double R2 = (*hill_cap) * (*hill_cap);
        opt.events.push_back({EventKind::hill_exit,
                              [R2](double, const std::array<double, 4>& y) {
                                  return R2 - (y[0] * y[0] + y[1] * y[1]);
                              },
                              -1, true});
    }
    opt.stop_on_event = detail::make_stop<4>(stop);
    opt.energy = [&field](const std::array<double, 4>& y) {
        return 0.5 * (y[2] * y[2] + y[3] * y[3]) + field.potential({y[0], y[1]});
    };
    opt.source_distance = [&field](const std::array<double, 4>& y) {
        return field.source_distance({y[0], y[1]});
    };
    IntegratorConfig c = cfg;
    if (std::isfinite(stop.t_end)) c.max_time = std::max(c.max_time, stop.t_end - s0.t + 1.0);
    return integrate_ode<4>(rhs, s0.arr(), s0.t, opt, c);
}

// Reduced cylindrical dynamics (r, z) with phi accumulated per sample by
// adaptive Simpson quadrature of keff / r^2 on the dense output; the (r, z)
// subsystem stays autonomous.
template <class Field>
ReducedTrace integrate_reduced(const Field& field, ReducedState s0, StopCondition stop,
                               const IntegratorConfig& cfg = {}) {
    auto rhs = [&field](double, const std::array<double, 4>& y, std::array<double, 4>& d) {
        Vec2 f = field.force({y[0], y[1]});
        d[0] = y[2];
        d[1] = y[3];
        d[2] = f.x;
        d[3] = f.z;
    };
    ReducedTrace out;
    out.keff = s0.keff;
    out.phi.push_back(s0.phi);

    DriverOptions<4> opt;
    opt.t_end = stop.t_end;
    opt.events = {{EventKind::z_cross_up,
                   [](double, const std::array<double, 4>& y) { return y[1]; }, +1, false},
                  {EventKind::z_cross_down,
                   [](double, const std::array<double, 4>& y) { return y[1]; }, -1, false},
                  {EventKind::vz_zero,
                   [](double, const std::array<double, 4>& y) { return y[3]; }, 0, false}};
    opt.stop_on_event = detail::make_stop<4>(stop);
    opt.energy = [&field](const std::array<double, 4>& y) {
        return 0.5 * (y[2] * y[2] + y[3] * y[3]) + field.potential({y[0], y[1]});
    };
    opt.source_distance = [&field](const std::array<double, 4>& y) {
        return field.source_distance({y[0], y[1]});
    };

    double keff = s0.keff;
    auto radius_of = [&field](const std::array<double, 4>& y) {
        if constexpr (requires(const Field f, Vec2 p) { f.radius_at(p); })
            return field.radius_at({y[0], y[1]});
        else
            return y[0];
    };
    opt.on_sample = [keff, radius_of, &out](double ta, double tb,
                                            const std::function<std::array<double, 4>(double)>& deval) {
        if (keff == 0.0) {
            out.phi.push_back(out.phi.back());
            return;
        }
        auto integrand = [&](double tt) {
            double r = radius_of(deval(tt));
            return keff / (r * r);
        };
        double dphi = adaptive_simpson(integrand, ta, tb, 1e-15 * std::max(1.0, std::abs(keff)));
        out.phi.push_back(out.phi.back() + dphi);
    };

    IntegratorConfig c = cfg;
    if (std::isfinite(stop.t_end)) c.max_time = std::max(c.max_time, stop.t_end - s0.t + 1.0);
    out.base = integrate_ode<4>(rhs, s0.arr(), s0.t, opt, c);
    // on_sample fires once per appended sample, so sizes agree by construction.
    out.phi.resize(out.base.t.size(), out.phi.back());
    return out;
}

template <class Field3>
Trace3D integrate_3d(const Field3& field, State3D s0, StopCondition stop,
                     const IntegratorConfig& cfg = {}) {
    auto rhs = [&field](double, const std::array<double, 6>& y, std::array<double, 6>& d) {
        Vec3 f = field.force({y[0], y[1], y[2]});
        d[0] = y[3];
        d[1] = y[4];
        d[2] = y[5];
        d[3] = f.x;
        d[4] = f.y;
        d[5] = f.z;
    };
    DriverOptions<6> opt;
    opt.t_end = stop.t_end;
    opt.events = {{EventKind::z_cross_up,
                   [](double, const std::array<double, 6>& y) { return y[2]; }, +1, false},
                  {EventKind::z_cross_down,
                   [](double, const std::array<double, 6>& y) { return y[2]; }, -1, false},
                  {EventKind::vz_zero,
                   [](double, const std::array<double, 6>& y) { return y[5]; }, 0, false}};
    opt.stop_on_event = detail::make_stop<6>(stop);
    opt.energy = [&field](const std::array<double, 6>& y) {
        double k = 0.5 * (y[3] * y[3] + y[4] * y[4] + y[5] * y[5]);
        return k + field.potential({y[0], y[1], y[2]});
    };
    opt.source_distance = [&field](const std::array<double, 6>& y) {
        return field.source_distance({y[0], y[1], y[2]});
    };
    IntegratorConfig c = cfg;
    if (std::isfinite(stop.t_end)) c.max_time = std::max(c.max_time, stop.t_end - s0.t + 1.0);
    return integrate_ode<6>(rhs, s0.arr(), s0.t, opt, c);
}

// Lift a reduced trace to 3D: (r cos phi, r sin phi, z); the angular
// momentum x vy - y vx equals keff identically by construction.
inline Trace3D lift_to_3d(const ReducedTrace& rt) {
    Trace3D out;
    out.initial_energy = rt.base.initial_energy;
    out.energy_drift = rt.base.energy_drift;
    out.collided = rt.base.collided;
    for (std::size_t i = 0; i < rt.base.size(); ++i) {
        const auto& a = rt.base.y[i];
        double r = a[0], z = a[1], vr = a[2], vz = a[3];
        double phi = rt.phi[i];
        double c = std::cos(phi), s = std::sin(phi);
        double phidot = rt.keff == 0.0 ? 0.0 : rt.keff / (r * r);
        out.t.push_back(rt.base.t[i]);
        out.y.push_back({r * c, r * s, z,
                         vr * c - r * phidot * s, vr * s + r * phidot * c, vz});
    }
    return out;
}

// --- circular orbits in the symmetry plane -----------------------------------

struct CircularOrbit {
    double radius;
    double speed;
    double period;
    bool stable;
    double radial_second_variation;   // d^2 Vbar / dr^2 at the equilibrium
    double vertical_second_variation; // d^2 Vbar / dz^2 at the equilibrium
};

namespace detail {

// dV/da at (r, 0) and its radial derivative by 5-point central differences.
inline void radial_derivatives(const RingSystem& sys, double r, double& dVda, double& d2Vda2) {
    auto f = [&](double a) { return ring_eval_cyl(sys.radius, sys.mass, a, 0.0).dV_da; };
    dVda = f(r);
    double h = 3e-4 * sys.radius;
    d2Vda2 = (-f(r + 2 * h) + 8 * f(r + h) - 8 * f(r - h) + f(r - 2 * h)) / (12.0 * h);
}

} // namespace detail

// Horizontal circular orbit of radius r (> ring radius; the in-plane force
// is repulsive inside). Stability is read off the second variation of the
// reduced effective potential at the equilibrium.
inline CircularOrbit circular_orbit(const RingSystem& sys, double r) {
    if (!(r > sys.radius))
        throw repulsive_region_error("circular_orbit: no circular orbits at or inside the ring radius");
    double dVda, d2Vda2;
    detail::radial_derivatives(sys, r, dVda, d2Vda2);
    if (!(dVda > 0.0)) throw domain_error("circular_orbit: field not attractive here");
    double v = std::sqrt(r * dVda);
    // keff^2 = r^3 dV/da; d^2Vbar/dr^2 = 3 keff^2 / r^4 + V_aa.
    double radial = 3.0 * dVda / r + d2Vda2;
    // d^2 V / dz^2 at z = 0 equals the z-integral kernel, recovered from
    // dV/dz ~ z * kernel via a small offset.
    double hz = 1e-5 * sys.radius;
    double vertical = ring_eval_cyl(sys.radius, sys.mass, r, hz).dV_dz / hz;
    return {r, v, 2.0 * pi * r / v, radial > 0.0 && vertical > 0.0, radial, vertical};
}

// The stability transition radius r0: circular orbits are stable iff r > r0.
inline double stability_radius(const RingSystem& sys) {
    auto g = [&](double r) {
        double dVda, d2Vda2;
        detail::radial_derivatives(sys, r, dVda, d2Vda2);
        return 3.0 * dVda / r + d2Vda2;
    };
    double lo = 1.001 * sys.radius, hi = 3.0 * sys.radius;
    double glo = g(lo);
    // march until the sign flips; the transition sits below ~2 rho
    double r = lo;
    double step = 0.05 * sys.radius;
    while (r < hi && g(r + step) * glo > 0.0) r += step;
    if (r >= hi) throw search_error("stability_radius: no sign change found");
    return brent_root(g, r, r + step, 1e-13 * sys.radius);
}

// --- exact similarity rescaling -----------------------------------------------

// s(t) = sigma * r(kappa t) maps solutions of the (rho, M) system to
// solutions of the (zeta, N) system, sigma = zeta/rho, kappa = sqrt(N rho^3 /
// (M zeta^3)).
struct RescaleMap {
    double sigma;
    double kappa;

    static RescaleMap between(double rho, double M, double zeta, double N) {
        if (!(rho > 0 && M > 0 && zeta > 0 && N > 0))
            throw domain_error("RescaleMap: parameters must be positive");
        return {zeta / rho, std::sqrt(N * rho * rho * rho / (M * zeta * zeta * zeta))};
    }
    double map_time(double t) const { return t / kappa; }
    double map_period(double T) const { return T / kappa; }
    PlanarState map_state(const PlanarState& s) const {
        return {sigma * s.x, sigma * s.z, sigma * kappa * s.vx, sigma * kappa * s.vz,
                s.t / kappa};
    }
    ReducedState map_state(const ReducedState& s) const {
        return {sigma * s.r, sigma * s.z, sigma * kappa * s.vr, sigma * kappa * s.vz,
                s.phi, sigma * sigma * kappa * s.keff, s.t / kappa};
    }
};

inline PlanarTrace rescale_orbit(const PlanarTrace& tr, const RescaleMap& m) {
    PlanarTrace out;
    out.initial_energy = m.sigma * m.sigma * m.kappa * m.kappa * tr.initial_energy;
    out.energy_drift = tr.energy_drift;
    out.collided = tr.collided;
    out.stopped_by_event = tr.stopped_by_event;
    for (std::size_t i = 0; i < tr.size(); ++i) {
        out.t.push_back(tr.t[i] / m.kappa);
        const auto& a = tr.y[i];
        out.y.push_back({m.sigma * a[0], m.sigma * a[1], m.sigma * m.kappa * a[2],
                         m.sigma * m.kappa * a[3]});
    }
    for (const auto& e : tr.events) {
        out.events.push_back({e.t / m.kappa, e.kind,
                              {m.sigma * e.state[0], m.sigma * e.state[1],
                               m.sigma * m.kappa * e.state[2], m.sigma * m.kappa * e.state[3]}});
    }
    return out;
}

} // namespace ringdyn
