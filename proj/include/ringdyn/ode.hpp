#pragma once

// Adaptive embedded Runge-Kutta driver with dense output and event location.
//
// Two steppers sit behind one facade:
//   * dopri5 - Dormand-Prince 5(4) with the classic quartic interpolant,
//     the default workhorse;
//   * rkf78  - Fehlberg 7(8) (via boost::odeint), selectable for
//     verification-grade propagation; interior states are produced by
//     re-stepping from the step start, so interpolation is as accurate as
//     the step itself.
//
// Events are scalar functions g(t, y) monitored for sign changes on each
// accepted step; roots are localized on the dense output by Brent iteration
// to event_tol and recorded with their interpolated state.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <vector>

#include <boost/numeric/odeint/stepper/runge_kutta_fehlberg78.hpp>

#include "ringdyn/core.hpp"
#include "ringdyn/trace.hpp"

namespace ringdyn {

enum class StepperKind { dopri5, rkf78 };

struct IntegratorConfig {
    double rel_tol = 1e-11;
    double abs_tol = 1e-12;
    double max_step = std::numeric_limits<double>::infinity();
    double event_tol = 1e-12;
    double collision_radius = 1e-7;
    StepperKind stepper = StepperKind::dopri5;
    double max_time = 1e7;          // hard wall for open-ended stop conditions
    std::size_t max_steps = 50'000'000;
    bool monitor_energy = true;
    double refine_angle = 0.0;      // >0: cap velocity turning per sample [rad]
    double initial_step = 0.0;      // 0 = automatic

    void validate() const {
        if (!(rel_tol > 0 && abs_tol > 0 && max_step > 0 && event_tol > 0 &&
              collision_radius > 0 && max_time > 0))
            throw domain_error("IntegratorConfig: all fields must be positive");
    }
};

template <std::size_t N>
struct EventSpec {
    EventKind kind;
    std::function<double(double, const std::array<double, N>&)> g;
    int direction = 0;    // +1: g rising through 0, -1: falling, 0: both
    bool terminal = false;
};

template <std::size_t N>
struct DriverOptions {
    double t_end = std::numeric_limits<double>::infinity();
    std::vector<EventSpec<N>> events;
    // Return true to stop at this event (the trace is truncated there).
    std::function<bool(const Event<N>&)> stop_on_event;
    // Total specific energy, used for drift monitoring.
    std::function<double(const std::array<double, N>&)> energy;
    // Distance to the singular source set; triggers collision handling.
    std::function<double(const std::array<double, N>&)> source_distance;
    // Called for every appended sample interval with the dense interpolant.
    std::function<void(double, double, const std::function<std::array<double, N>(double)>&)>
        on_sample;
};

namespace detail {

template <std::size_t N>
inline double error_norm(const std::array<double, N>& y0, const std::array<double, N>& y1,
                         const std::array<double, N>& err, double atol, double rtol) {
    double s = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
        double sc = atol + rtol * std::max(std::abs(y0[i]), std::abs(y1[i]));
        double q = err[i] / sc;
        s += q * q;
    }
    return std::sqrt(s / double(N));
}

// Dormand-Prince 5(4), FSAL, with the quartic dense-output polynomial.
template <std::size_t N, class RHS>
class Dopri5 {
public:
    using Y = std::array<double, N>;
    static constexpr double err_exponent = 0.2; // 1/(4+1)

    explicit Dopri5(RHS& rhs) : rhs_(rhs) {}

    void prime(double t, const Y& y) { rhs_(t, y, k_[0]); }

    // One trial step from (t, y) of size h. Returns the error norm; fills
    // ynew and the dense coefficients. Call accept() to shift FSAL state.
    double try_step(double t, const Y& y, double h, Y& ynew, double atol, double rtol) {
        static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
        static constexpr double a21 = 1.0 / 5;
        static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
        static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
        static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                                a53 = 64448.0 / 6561, a54 = -212.0 / 729;
        static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                                a64 = 49.0 / 176, a65 = -5103.0 / 18656;
        static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                                b5 = -2187.0 / 6784, b6 = 11.0 / 84;
        static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                                e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

        Y tmp;
        for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + h * a21 * k_[0][i];
        rhs_(t + c2 * h, tmp, k_[1]);
        for (std::size_t i = 0; i < N; ++i)
            tmp[i] = y[i] + h * (a31 * k_[0][i] + a32 * k_[1][i]);
        rhs_(t + c3 * h, tmp, k_[2]);
        for (std::size_t i = 0; i < N; ++i)
            tmp[i] = y[i] + h * (a41 * k_[0][i] + a42 * k_[1][i] + a43 * k_[2][i]);
        rhs_(t + c4 * h, tmp, k_[3]);
        for (std::size_t i = 0; i < N; ++i)
            tmp[i] = y[i] + h * (a51 * k_[0][i] + a52 * k_[1][i] + a53 * k_[2][i] + a54 * k_[3][i]);
        rhs_(t + c5 * h, tmp, k_[4]);
        for (std::size_t i = 0; i < N; ++i)
            tmp[i] = y[i] + h * (a61 * k_[0][i] + a62 * k_[1][i] + a63 * k_[2][i] +
                                 a64 * k_[3][i] + a65 * k_[4][i]);
        rhs_(t + h, tmp, k_[5]);
        for (std::size_t i = 0; i < N; ++i)
            ynew[i] = y[i] + h * (b1 * k_[0][i] + b3 * k_[2][i] + b4 * k_[3][i] +
                                  b5 * k_[4][i] + b6 * k_[5][i]);
        rhs_(t + h, ynew, k_[6]);

        Y err;
        for (std::size_t i = 0; i < N; ++i)
            err[i] = h * (e1 * k_[0][i] + e3 * k_[2][i] + e4 * k_[3][i] + e5 * k_[4][i] +
                          e6 * k_[5][i] + e7 * k_[6][i]);

        // Dense output coefficients (Hairer, Norsett & Wanner).
        static constexpr double d1 = -12715105075.0 / 11282082432.0,
                                d3 = 87487479700.0 / 32700410799.0,
                                d4 = -10690763975.0 / 1880347072.0,
                                d5 = 701980252875.0 / 199316789632.0,
                                d6 = -1453857185.0 / 822651844.0,
                                d7 = 69997945.0 / 29380423.0;
        for (std::size_t i = 0; i < N; ++i) {
            double ydiff = ynew[i] - y[i];
            double bspl = h * k_[0][i] - ydiff;
            rcont_[0][i] = y[i];
            rcont_[1][i] = ydiff;
            rcont_[2][i] = bspl;
            rcont_[3][i] = ydiff - h * k_[6][i] - bspl;
            rcont_[4][i] = h * (d1 * k_[0][i] + d3 * k_[2][i] + d4 * k_[3][i] +
                                d5 * k_[4][i] + d6 * k_[5][i] + d7 * k_[6][i]);
        }
        h_ = h;
        t_ = t;
        return error_norm(y, ynew, err, atol, rtol);
    }

    void accept() { k_[0] = k_[6]; } // FSAL

    Y dense(double t) const {
        double th = (t - t_) / h_;
        double th1 = 1.0 - th;
        Y out;
        for (std::size_t i = 0; i < N; ++i)
            out[i] = rcont_[0][i] +
                     th * (rcont_[1][i] +
                           th1 * (rcont_[2][i] + th * (rcont_[3][i] + th1 * rcont_[4][i])));
        return out;
    }

private:
    RHS& rhs_;
    std::array<Y, 7> k_;
    std::array<Y, 5> rcont_;
    double t_ = 0.0, h_ = 0.0;
};

// Fehlberg 7(8) behind the same interface. Dense output by re-stepping.
template <std::size_t N, class RHS>
class Rkf78 {
public:
    using Y = std::array<double, N>;
    static constexpr double err_exponent = 0.125; // 1/8

    explicit Rkf78(RHS& rhs) : rhs_(rhs) {}

    void prime(double, const Y&) {}

    double try_step(double t, const Y& y, double h, Y& ynew, double atol, double rtol) {
        auto sys = [this](const Y& yy, Y& dydt, double tt) { rhs_(tt, yy, dydt); };
        Y err;
        Y yin = y;
        stepper_.do_step(sys, yin, t, ynew, h, err);
        t_ = t;
        h_ = h;
        y0_ = y;
        y1_ = ynew;
        return error_norm(y, ynew, err, atol, rtol);
    }

    void accept() {}

    Y dense(double t) const {
        double dt = t - t_;
        if (dt <= 0.0) return y0_;
        if (dt >= h_) return y1_;
        auto sys = [this](const Y& yy, Y& dydt, double tt) { rhs_(tt, yy, dydt); };
        Y out;
        Y yin = y0_;
        stepper_.do_step(sys, yin, t_, out, dt);
        return out;
    }

private:
    RHS& rhs_;
    mutable boost::numeric::odeint::runge_kutta_fehlberg78<Y> stepper_;
    double t_ = 0.0, h_ = 0.0;
    Y y0_{}, y1_{};
};

// Hairer's automatic initial step selection.
template <std::size_t N, class RHS>
double initial_step(RHS& rhs, double t0, const std::array<double, N>& y0, double atol,
                    double rtol, double order, double hmax) {
    using Y = std::array<double, N>;
    Y f0;
    rhs(t0, y0, f0);
    double d0 = 0, d1 = 0;
    for (std::size_t i = 0; i < N; ++i) {
        double sc = atol + rtol * std::abs(y0[i]);
        d0 += (y0[i] / sc) * (y0[i] / sc);
        d1 += (f0[i] / sc) * (f0[i] / sc);
    }
    d0 = std::sqrt(d0 / N);
    d1 = std::sqrt(d1 / N);
    double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    h0 = std::min(h0, hmax);
    Y y1, f1;
    for (std::size_t i = 0; i < N; ++i) y1[i] = y0[i] + h0 * f0[i];
    rhs(t0 + h0, y1, f1);
    double d2 = 0;
    for (std::size_t i = 0; i < N; ++i) {
        double sc = atol + rtol * std::abs(y0[i]);
        double q = (f1[i] - f0[i]) / sc;
        d2 += q * q;
    }
    d2 = std::sqrt(d2 / N) / h0;
    double dm = std::max(d1, d2);
    double h1 = (dm <= 1e-15) ? std::max(1e-6, h0 * 1e-3)
                              : std::pow(0.01 / dm, 1.0 / order);
    return std::min({100.0 * h0, h1, hmax});
}

} // namespace detail

// Generic adaptive integration with events. RHS signature:
//   void(double t, const std::array<double,N>& y, std::array<double,N>& dydt)
template <std::size_t N, class RHS>
Trace<N> integrate_ode(RHS&& rhs, std::array<double, N> y0, double t0,
                       const DriverOptions<N>& opt, const IntegratorConfig& cfg) {
    cfg.validate();
    using Y = std::array<double, N>;

    Trace<N> trace;
    trace.t.push_back(t0);
    trace.y.push_back(y0);

    double E0 = 0.0;
    if (cfg.monitor_energy && opt.energy) {
        E0 = opt.energy(y0);
        trace.initial_energy = E0;
    }

    // Assemble the live event list: user events plus the collision monitor.
    std::vector<EventSpec<N>> events = opt.events;
    if (opt.source_distance) {
        EventSpec<N> coll;
        coll.kind = EventKind::collision;
        coll.direction = -1;
        coll.terminal = true;
        coll.g = [&opt, &cfg](double, const Y& y) {
            return opt.source_distance(y) - cfg.collision_radius;
        };
        events.push_back(std::move(coll));
    }

    auto run = [&](auto stepper) {
        stepper.prime(t0, y0);
        double t = t0;
        Y y = y0;
        double order = 1.0 / decltype(stepper)::err_exponent;
        double h = cfg.initial_step > 0.0
                       ? cfg.initial_step
                       : detail::initial_step<N>(rhs, t0, y0, cfg.abs_tol, cfg.rel_tol, order,
                                                 cfg.max_step);
        h = std::min(h, cfg.max_step);
        bool rejected_last = false;
        std::vector<double> gprev(events.size()), gcurr(events.size());
        for (std::size_t e = 0; e < events.size(); ++e) gprev[e] = events[e].g(t0, y0);

        // Sample appender: honors per-sample hooks and optional refinement.
        auto append_sample = [&](double ts, const Y& ys,
                                 const std::function<Y(double)>& deval) {
            double tprev = trace.t.back();
            if (cfg.refine_angle > 0.0 && deval) {
                // Cap velocity turning between consecutive samples.
                const Y& ya = trace.y.back();
                double v0x = ya[N / 2], v0z = ya[N / 2 + 1];
                double v1x = ys[N / 2], v1z = ys[N / 2 + 1];
                double dotv = v0x * v1x + v0z * v1z;
                double crossv = v0x * v1z - v0z * v1x;
                double ang = std::abs(std::atan2(crossv, dotv));
                int parts = std::max(1, int(std::ceil(ang / cfg.refine_angle)));
                for (int i = 1; i < parts; ++i) {
                    double ti = tprev + (ts - tprev) * double(i) / parts;
                    Y yi = deval(ti);
                    if (opt.on_sample) opt.on_sample(trace.t.back(), ti, deval);
                    trace.t.push_back(ti);
                    trace.y.push_back(yi);
                }
            }
            if (opt.on_sample) opt.on_sample(trace.t.back(), ts, deval);
            trace.t.push_back(ts);
            trace.y.push_back(ys);
            if (cfg.monitor_energy && opt.energy && std::abs(E0) > 0.0) {
                double drift = std::abs(opt.energy(ys) - E0) / std::abs(E0);
                trace.energy_drift = std::max(trace.energy_drift, drift);
            }
        };

        while (true) {
            if (trace.steps_accepted + trace.steps_rejected >= cfg.max_steps)
                throw timeout_error("integrate_ode: step budget exhausted");
            if (t - t0 >= cfg.max_time)
                throw timeout_error("integrate_ode: max_time exceeded before stop condition");

            bool final_step = false;
            if (t + h >= opt.t_end) {
                h = opt.t_end - t;
                final_step = true;
                if (h <= 0.0) break;
            }

            Y ynew;
            double err;
            try {
                err = stepper.try_step(t, y, h, ynew, cfg.abs_tol, cfg.rel_tol);
            } catch (const domain_error&) {
                // A trial stage fell onto the singular set; a shorter step
                // keeps the stages near the true path, and a genuine
                // approach ends in the collision event or step underflow.
                err = 1e10;
            }
            if (!std::isfinite(err)) err = 1e10;

            if (err > 1.0) {
                trace.steps_rejected++;
                double fac = std::max(0.2, 0.9 * std::pow(err, -decltype(stepper)::err_exponent));
                double hnew = h * fac;
                if (hnew < 1e-14 * std::max(1.0, std::abs(t))) {
                    // Step-size underflow: near the source this is a collision.
                    if (opt.source_distance &&
                        opt.source_distance(y) < 100.0 * cfg.collision_radius) {
                        Event<N> ev{t, EventKind::collision, y};
                        trace.events.push_back(ev);
                        trace.collided = true;
                        trace.stopped_by_event = true;
                        return;
                    }
                    throw timeout_error("integrate_ode: step size underflow");
                }
                h = hnew;
                rejected_last = true;
                continue;
            }

            trace.steps_accepted++;
            std::function<Y(double)> deval = [&stepper](double tt) { return stepper.dense(tt); };

            // --- event scan over [t, t+h] -------------------------------------
            struct Hit {
                double t;
                std::size_t spec;
            };
            std::vector<Hit> hits;
            constexpr int nscan = 8;
            double tend_step = t + h;
            std::array<double, nscan> tscan;
            std::array<Y, nscan> yscan;
            if (!events.empty()) {
                for (int s = 1; s <= nscan; ++s) {
                    tscan[s - 1] = t + h * double(s) / nscan;
                    yscan[s - 1] = (s == nscan) ? ynew : stepper.dense(tscan[s - 1]);
                }
            }
            for (std::size_t e = 0; e < events.size(); ++e) {
                gcurr[e] = events[e].g(tend_step, ynew);
                double ga = gprev[e];
                double ta = t;
                for (int s = 1; s <= nscan; ++s) {
                    double tb = tscan[s - 1];
                    double gb = events[e].g(tb, yscan[s - 1]);
                    bool crossed = (ga < 0 && gb > 0 && events[e].direction >= 0) ||
                                   (ga > 0 && gb < 0 && events[e].direction <= 0);
                    if (crossed) {
                        auto gf = [&](double tt) { return events[e].g(tt, stepper.dense(tt)); };
                        double troot = brent_root(gf, ta, tb, ga, gb, cfg.event_tol * 1e-3);
                        hits.push_back({troot, e});
                    } else if (gb == 0.0 && s < nscan &&
                               (events[e].direction == 0 ||
                                (events[e].direction > 0) == (ga < 0))) {
                        hits.push_back({tb, e});
                    }
                    ga = gb;
                    ta = tb;
                }
                gprev[e] = gcurr[e];
            }
            std::sort(hits.begin(), hits.end(), [](const Hit& a, const Hit& b) { return a.t < b.t; });

            bool terminated = false;
            for (const Hit& hit : hits) {
                const auto& spec = events[hit.spec];
                Event<N> ev{hit.t, spec.kind, deval(hit.t)};
                trace.events.push_back(ev);

                // Perpendicular x-axis crossing: derived marker event.
                if ((spec.kind == EventKind::z_cross_up || spec.kind == EventKind::z_cross_down)) {
                    double speed = std::hypot(ev.state[N / 2], ev.state[N / 2 + 1]);
                    if (std::abs(ev.state[N / 2]) <= 1e-8 * std::max(1.0, speed))
                        trace.events.push_back({hit.t, EventKind::x_axis_perp, ev.state});
                }

                bool stop = spec.terminal;
                if (opt.stop_on_event && opt.stop_on_event(ev)) stop = true;
                if (spec.kind == EventKind::collision) {
                    trace.collided = true;
                    stop = true;
                }
                if (stop) {
                    append_sample(ev.t, ev.state, deval);
                    trace.stopped_by_event = true;
                    terminated = true;
                    break;
                }
            }
            if (terminated) return;

            append_sample(tend_step, ynew, deval);
            stepper.accept();
            t = tend_step;
            y = ynew;

            if (final_step) return;

            double fac = 0.9 * std::pow(std::max(err, 1e-10), -decltype(stepper)::err_exponent);
            fac = std::min(rejected_last ? 1.0 : 6.0, std::max(0.2, fac));
            h = std::min(h * fac, cfg.max_step);
            rejected_last = false;
        }
    };

    struct RhsRef {
        RHS& f;
        void operator()(double t, const std::array<double, N>& y, std::array<double, N>& d) const {
            f(t, y, d);
        }
    };
    RhsRef ref{rhs};
    if (cfg.stepper == StepperKind::dopri5)
        run(detail::Dopri5<N, RhsRef>(ref));
    else
        run(detail::Rkf78<N, RhsRef>(ref));
    return trace;
}

} // namespace ringdyn
