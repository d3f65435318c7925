#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "ringdyn/verify.hpp"

using namespace ringdyn;
using verify::Interval;

TEST_CASE("points_to: definition cases") {
    Interval I = Interval::left_of(0.0);
    CHECK(verify::points_to({1, 1}, {0, 0}, I));            // v = 0
    CHECK(verify::points_to({1, 1}, {-1, -1}, I));          // ray hits (0,0)
    CHECK_FALSE(verify::points_to({1, 1}, {1, -1}, I));     // ray hits (2,0)
    CHECK_FALSE(verify::points_to({1, 1}, {-1, 1}, I));     // points upward
    CHECK(verify::points_to({-0.5, 0}, {1, 1}, I));         // base point inside I
    CHECK(verify::points_to({2, 0}, {-1, 0}, I));           // slides left into I
    CHECK_FALSE(verify::points_to({2, 0}, {1, 0}, I));      // slides away
    CHECK_THROWS_AS(verify::points_to({0, -1}, {0, 0}, I), precondition_error);

    Interval B = Interval::closed(-1.0, 1.0);
    CHECK(verify::points_to({2, 1}, {-1.5, -1}, B)); // hits (0.5, 0)
    CHECK_FALSE(verify::points_to({2, 1}, {-0.5, -1}, B)); // hits (1.5, 0)
    CHECK(verify::points_to({0, 3}, {0, -1}, B));    // straight down into I
}

TEST_CASE("points_to matches the algebraic half-plane characterization") {
    // For I = (-inf, 0] and x strictly inside the upper half-plane:
    // points iff <v, x^perp> >= 0 and v_z < 0 (or v = 0).
    Interval I = Interval::left_of(0.0);
    std::mt19937_64 rng(321);
    std::uniform_real_distribution<double> U(-2.0, 2.0);
    for (int k = 0; k < 20000; ++k) {
        Vec2 x{U(rng), 0.01 + std::abs(U(rng))};
        Vec2 v{U(rng), U(rng)};
        bool algebraic = (x.x * v.z - x.z * v.x >= 0.0) && v.z < 0.0;
        bool geometric = verify::points_to(x, v, I);
        REQUIRE(geometric == algebraic);
    }
}

TEST_CASE("points_to is invariant under translation and reflection") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> U(-3.0, 3.0);
    for (int k = 0; k < 5000; ++k) {
        Vec2 x{U(rng), std::abs(U(rng))};
        Vec2 v{U(rng), U(rng)};
        double a = U(rng), b = a + std::abs(U(rng));
        Interval I = Interval::closed(a, b);
        bool base = verify::points_to(x, v, I);

        double s = U(rng);
        bool shifted = verify::points_to({x.x + s, x.z}, v, Interval::closed(a + s, b + s));
        REQUIRE(base == shifted);

        bool reflected = verify::points_to({-x.x, x.z}, {-v.x, v.z}, Interval::closed(-b, -a));
        REQUIRE(base == reflected);
    }
}

TEST_CASE("Ring acceleration points to the source diameter") {
    RingSystem sys(1.0, 1.0);
    RingPlanarField f{sys};
    auto accel = [&](Vec2 p) { return f.force(p); };

    auto rep = verify::check_field_pointing(accel, Interval::closed(-1.0, 1.0));
    CHECK(rep.pass);
    CHECK(rep.violations == 0);
    CHECK(rep.checked >= 2499u);

    // On-axis samples: the force is vertical and the ray hits 0.
    for (double z : {0.3, 1.0, 4.0}) {
        Vec2 F = f.force({0.0, z});
        CHECK(F.x == 0.0);
        CHECK(F.z < 0.0);
        CHECK(verify::points_to({0.0, z}, F, Interval::closed(-1.0, 1.0)));
    }

    // Negative control: a shrunk interval produces violations near the circle.
    auto bad = verify::check_field_pointing(accel, Interval::closed(-0.5, 0.5));
    CHECK_FALSE(bad.pass);
    CHECK(bad.violations > 0);
    REQUIRE(bad.first_violation.has_value());
}

TEST_CASE("Euler acceleration points to the segment between the centers") {
    EulerPlanarField f{EulerSystem(1.0, 1.0)};
    auto rep = verify::check_field_pointing([&](Vec2 p) { return f.force(p); },
                                            Interval::closed(-1.0, 1.0));
    CHECK(rep.pass);
}

TEST_CASE("Trajectory pointing persists and the landing falls in the interval") {
    RingSystem sys(1.0, 1.0);
    RingPlanarField f{sys};
    Interval I = Interval::closed(-1.0, 1.0);

    // Inner-crossing launch: base point inside I; by persistence the whole
    // arc points to I and must land inside I.
    PlanarState s0{0.8, 0.0, 0.0, 0.9, 0.0};
    IntegratorConfig cfg;
    auto tr = integrate_planar(f, s0, StopCondition::until_event(EventKind::z_cross_down), cfg);
    REQUIRE(tr.stopped_by_event);
    REQUIRE_FALSE(tr.collided);

    auto rep = verify::check_trajectory_pointing(tr, I);
    CHECK(rep.h_monotone);
    CHECK(rep.landed);
    CHECK(rep.landing_in_interval);
    CHECK(I.contains(rep.landing_x));

    // h(0) >= 0 whenever the initial velocity points to the left half-line.
    Interval L = Interval::left_of(1.0);
    PlanarState d0{2.0, 1.5, -0.4, -0.5, 0.0};
    REQUIRE(verify::points_to(d0.pos(), d0.vel(), L));
    auto tr2 = integrate_planar(f, d0, StopCondition::until_event(EventKind::z_cross_down), cfg);
    auto rep2 = verify::check_trajectory_pointing(tr2, L);
    REQUIRE(rep2.h_right.size() > 0);
    CHECK(rep2.h_right.front() >= 0.0);
    CHECK(rep2.violations == 0);
    CHECK(rep2.h_monotone);
    if (rep2.landed) CHECK(rep2.landing_x <= 1.0 + 1e-8);

    // Negative control: reverse time on the pointing arc; pointing fails.
    PlanarTrace rev;
    for (std::size_t i = tr2.size(); i-- > 0;) {
        rev.t.push_back(tr2.t.back() - tr2.t[i]);
        rev.y.push_back({tr2.y[i][0], tr2.y[i][1], -tr2.y[i][2], -tr2.y[i][3]});
    }
    auto rrep = verify::check_trajectory_pointing(rev, L);
    CHECK(rrep.violations > 0);
    CHECK_THROWS_AS(
        verify::check_trajectory_pointing(
            rev, L, verify::TrajectoryPointingOptions{.require_initial_premise = true}),
        precondition_error);
}

TEST_CASE("Landing dichotomy: pointing arcs never land right of their start") {
    RingSystem sys(1.0, 2.0 * pi);
    RingPlanarField f{sys};
    Interval I = Interval::closed(-1.0, 1.0);
    std::mt19937_64 rng(555);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    int accepted = 0;
    while (accepted < 20) {
        // Descending starts that point to I.
        Vec2 p{1.2 + 2.5 * U(rng), 0.5 + 2.0 * U(rng)};
        double Vp;
        try {
            Vp = f.potential(p);
        } catch (const domain_error&) {
            continue;
        }
        Vec2 dir{-(p.x + 0.5 * U(rng)) , -(p.z + 1.0)};
        double vmag = 0.3 + 0.5 * U(rng);
        Vec2 v = (vmag / dir.norm()) * dir;
        if (!verify::points_to(p, v, I)) continue;
        if (0.5 * dot(v, v) + Vp >= -0.05) continue;
        PlanarState s0{p.x, p.z, v.x, v.z, 0.0};
        PlanarTrace tr;
        try {
            tr = integrate_planar(f, s0, StopCondition::until_event(EventKind::z_cross_down));
        } catch (const timeout_error&) {
            continue;
        }
        if (tr.collided || !tr.stopped_by_event) continue;
        auto rep = verify::check_trajectory_pointing(tr, I);
        REQUIRE(rep.violations == 0);
        REQUIRE(rep.landed);
        REQUIRE(rep.landing_x <= s0.x + 1e-10);
        REQUIRE(rep.landing_x <= 1.0 + 1e-8);
        ++accepted;
    }
}

TEST_CASE("Injectivity check") {
    SECTION("straight vertical segment") {
        std::vector<Vec2> seg;
        for (int i = 0; i <= 100; ++i) seg.push_back({1.0, 0.01 * i});
        auto rep = verify::check_injective(seg);
        CHECK(rep.injective);
    }

    SECTION("hand-built self-crossing polyline") {
        // Nodal cubic (t^3 - t, t^2 + 0.1): crosses itself at (0, 1.1).
        std::vector<Vec2> poly;
        for (int i = 0; i <= 600; ++i) {
            double t = -1.2 + 2.4 * i / 600.0;
            poly.push_back({t * t * t - t, t * t + 0.1});
        }
        auto rep = verify::check_injective(poly, 0.2);
        CHECK_FALSE(rep.injective);
        CHECK(rep.seg_i < rep.seg_j);
        CHECK(std::abs(rep.where.x) < 0.05);
        CHECK(std::abs(rep.where.z - 1.1) < 0.05);
    }

    SECTION("under-resolved input raises resolution_error") {
        std::vector<Vec2> coarse{{0, 0}, {1, 1}, {0.2, 1.3}, {-1, 0.2}};
        CHECK_THROWS_AS(verify::check_injective(coarse), resolution_error);
    }
}

TEST_CASE("Hill radius: closed forms, ring root, and validation") {
    SECTION("Kepler profile gives R = M/(-delta) exactly") {
        for (double M : {1.0, 3.0}) {
            for (double delta : {-0.5, -1.0, -2.0}) {
                double R = verify::hill_radius_profile(
                    [M](double x) { return -M / x; }, 1e-6, delta);
                CHECK(R == Catch::Approx(M / (-delta)).epsilon(1e-11));
            }
        }
    }

    SECTION("ring: root matches the axis profile to 1e-10") {
        RingSystem sys(1.0, 2.0 * pi);
        auto h = verify::hill_radius(sys, -1.0);
        CHECK(std::abs(ring_potential(sys, {h.R, 0, 0}) + 1.0) < 1e-10);
        CHECK(verify::hill_grid_valid(RingPlanarField{sys}, h));
        CHECK(h.T == Catch::Approx(2.0 * (1.0 + 2.0 / std::min(1.0, h.A))));
    }

    SECTION("Euler Hill bound R <= 2/(-delta) + 1 for unit mass") {
        EulerSystem sys(1.0, 1.0);
        for (double delta : {-0.5, -1.0, -2.0}) {
            auto h = verify::hill_radius(sys, delta);
            CHECK(h.R <= 2.0 / (-delta) + 1.0 + 1e-12);
        }
    }

    SECTION("T is monotone in delta") {
        RingSystem sys(1.0, 2.0 * pi);
        double prev = 0.0;
        for (double delta : {-2.0, -1.0, -0.5, -0.25}) {
            auto h = verify::hill_radius(sys, delta);
            CHECK(h.T >= prev);
            prev = h.T;
        }
    }

    CHECK_THROWS_AS(verify::hill_radius(RingSystem(1.0, 1.0), 0.0), unbounded_region_error);
}

TEST_CASE("Return-time bound holds on random sub-delta launches") {
    RingSystem sys(1.0, 2.0 * pi);
    RingPlanarField f{sys};
    double delta = -0.5;
    auto hill = verify::hill_radius(sys, delta);
    double floor = sys.mass / std::pow(sys.radius + hill.R, 3);
    auto rep = verify::check_return_time(
        f, hill, delta, 40, 20240817ull, {},
        [&](Vec2 p) { return verify::ring_z_kernel(sys, p); }, floor);
    CHECK(rep.pass);
    CHECK(rep.violations == 0);
    CHECK(rep.max_ratio < 1.0);
    CHECK(rep.premise_min >= 1.0);

    // A feeble vertical toss returns quickly.
    PlanarState tiny{2.0, 0.0, 0.0, 1e-4, 0.0};
    auto tr = integrate_planar(f, tiny, StopCondition::until_event(EventKind::z_cross_down));
    REQUIRE(tr.stopped_by_event);
    CHECK(tr.t.back() < 0.1 * hill.T);
}

TEST_CASE("Scalar comparison lemmas on the harmonic oracle") {
    auto rep = verify::scalar_ode_lemmas();
    CHECK(rep.pass);
    for (const auto& c : rep.checks) {
        CHECK(c.first_zero == Catch::Approx(0.5 * pi / std::sqrt(c.A)).margin(1e-8));
        CHECK(c.first_zero <= c.Lambda);
        CHECK(c.nonlinear_zero <= c.first_zero + 1e-9);
    }
    // Spot values: A=1 -> pi/2 <= 3; A=0.04 -> 7.853981... <= 51.
    auto one = verify::scalar_ode_lemmas({1.0}).checks[0];
    CHECK(one.first_zero == Catch::Approx(pi / 2).margin(1e-8));
    CHECK(one.Lambda == Catch::Approx(3.0));
    auto small = verify::scalar_ode_lemmas({0.04}).checks[0];
    CHECK(small.first_zero == Catch::Approx(0.5 * pi / 0.2).margin(1e-8));
    CHECK(small.Lambda == Catch::Approx(51.0));
}

TEST_CASE("Wire-limit report states its verdict explicitly") {
    auto rep = verify::wire_limit_report(1.0);
    CHECK(rep.measurement.c_star > 0.0);
    CHECK_FALSE(rep.verdict.empty());
    CHECK((rep.verdict.find("AGREEMENT") != std::string::npos ||
           rep.verdict.find("DISCREPANCY") != std::string::npos));
}
