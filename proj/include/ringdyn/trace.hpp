#pragma once

// Time-stamped solution traces with recorded events.

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "ringdyn/core.hpp"

namespace ringdyn {

enum class EventKind {
    z_cross_up,
    z_cross_down,
    vz_zero,
    x_axis_perp,
    line_en_cross,
    collision,
    hill_exit,
};

inline const char* to_string(EventKind k) {
    switch (k) {
        case EventKind::z_cross_up: return "z-cross-up";
        case EventKind::z_cross_down: return "z-cross-down";
        case EventKind::vz_zero: return "vz-zero";
        case EventKind::x_axis_perp: return "x-axis-perp";
        case EventKind::line_en_cross: return "line-En-cross";
        case EventKind::collision: return "collision";
        case EventKind::hill_exit: return "hill-exit";
    }
    return "?";
}

inline bool event_kind_from_string(const std::string& s, EventKind& out) {
    for (EventKind k : {EventKind::z_cross_up, EventKind::z_cross_down, EventKind::vz_zero,
                        EventKind::x_axis_perp, EventKind::line_en_cross, EventKind::collision,
                        EventKind::hill_exit}) {
        if (s == to_string(k)) { out = k; return true; }
    }
    return false;
}

template <std::size_t N>
struct Event {
    double t;
    EventKind kind;
    std::array<double, N> state;
};

template <std::size_t N>
struct Trace {
    std::vector<double> t;
    std::vector<std::array<double, N>> y;
    std::vector<Event<N>> events;

    double initial_energy = 0.0;
    double energy_drift = 0.0; // max |E(t)-E(0)| / |E(0)|
    bool collided = false;
    bool stopped_by_event = false;
    std::size_t steps_accepted = 0;
    std::size_t steps_rejected = 0;

    std::size_t size() const { return t.size(); }
    double t_begin() const { return t.front(); }
    double t_end() const { return t.back(); }
    const std::array<double, N>& back() const { return y.back(); }

    std::size_t count_events(EventKind k) const {
        std::size_t n = 0;
        for (const auto& e : events)
            if (e.kind == k) ++n;
        return n;
    }
};

// Planar vertical-plane state, array layout [x, z, vx, vz].
struct PlanarState {
    double x = 0.0, z = 0.0, vx = 0.0, vz = 0.0;
    double t = 0.0;

    std::array<double, 4> arr() const { return {x, z, vx, vz}; }
    static PlanarState from(const std::array<double, 4>& a, double t = 0.0) {
        return {a[0], a[1], a[2], a[3], t};
    }
    Vec2 pos() const { return {x, z}; }
    Vec2 vel() const { return {vx, vz}; }
};

// Reduced cylindrical state, array layout [r, z, vr, vz]; phi carried
// alongside, keff is the constant angular momentum K/eps.
struct ReducedState {
    double r = 1.0, z = 0.0, vr = 0.0, vz = 0.0;
    double phi = 0.0;
    double keff = 0.0;
    double t = 0.0;

    std::array<double, 4> arr() const { return {r, z, vr, vz}; }
};

// Full 3D state, array layout [x, y, z, vx, vy, vz].
struct State3D {
    Vec3 pos;
    Vec3 vel;
    double t = 0.0;

    std::array<double, 6> arr() const { return {pos.x, pos.y, pos.z, vel.x, vel.y, vel.z}; }
    static State3D from(const std::array<double, 6>& a, double t = 0.0) {
        return {{a[0], a[1], a[2]}, {a[3], a[4], a[5]}, t};
    }
};

using PlanarTrace = Trace<4>;
using Trace3D = Trace<6>;

struct ReducedTrace {
    Trace<4> base;          // [r, z, vr, vz]
    std::vector<double> phi; // accumulated angle per sample, unwrapped
    double keff = 0.0;

    ReducedState state_at(std::size_t i) const {
        const auto& a = base.y[i];
        return {a[0], a[1], a[2], a[3], phi[i], keff, base.t[i]};
    }
};

} // namespace ringdyn
