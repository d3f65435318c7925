#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "ringdyn/elliptic.hpp"
#include "ringdyn/potential.hpp"

using namespace ringdyn;

namespace {

// Test-local quadrature of the defining integrals, independent of the AGM path.
double K_quad(double m, int n = 200000) {
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
        double th = (i + 0.5) * (pi / 2.0) / n;
        double s = std::sin(th);
        sum += 1.0 / std::sqrt(1.0 - m * s * s);
    }
    return sum * (pi / 2.0) / n;
}

double E_quad(double m, int n = 200000) {
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
        double th = (i + 0.5) * (pi / 2.0) / n;
        double s = std::sin(th);
        sum += std::sqrt(1.0 - m * s * s);
    }
    return sum * (pi / 2.0) / n;
}

// Signed-radius ring potential by plain trapezoid, test-local.
double V_signed_eps(double M, Vec3 p, double eps, int n = 20000) {
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
        double th = 2.0 * pi * i / n;
        double dx = p.x - eps * std::cos(th);
        double dy = p.y - eps * std::sin(th);
        sum += 1.0 / std::sqrt(dx * dx + dy * dy + p.z * p.z);
    }
    return -(M / n) * sum;
}

} // namespace

TEST_CASE("AGM elliptic integrals agree with defining integrals") {
    CHECK(elliptic_K(0.0) == Catch::Approx(pi / 2.0).epsilon(1e-15));
    CHECK(elliptic_E(0.0) == Catch::Approx(pi / 2.0).epsilon(1e-15));
    for (double m : {0.1, 0.5, 0.9, 0.99}) {
        auto [K, E] = elliptic_KE(m, 1.0 - m);
        CHECK(K == Catch::Approx(K_quad(m)).epsilon(1e-9));
        CHECK(E == Catch::Approx(E_quad(m)).epsilon(1e-9));
    }
}

TEST_CASE("Legendre relation holds to machine precision") {
    for (double m : {0.2, 0.5, 0.77}) {
        auto [K, E] = elliptic_KE(m, 1.0 - m);
        auto [Kc, Ec] = elliptic_KE(1.0 - m, m);
        double legendre = E * Kc + Ec * K - K * Kc;
        CHECK(legendre == Catch::Approx(pi / 2.0).epsilon(1e-14));
    }
}

TEST_CASE("On-axis ring potential has the closed form -M/sqrt(rho^2+z^2)") {
    RingSystem sys(1.0, 1.0);
    CHECK(ring_potential(sys, {0, 0, 1}) == Catch::Approx(-1.0 / std::sqrt(2.0)).epsilon(1e-14));
    CHECK(ring_potential(sys, {0, 0, 0}) == Catch::Approx(-1.0).epsilon(1e-14));
    RingSystem sys2(0.7, 3.2);
    for (double z = -4.0; z <= 4.0; z += 0.37) {
        double expect = -sys2.mass / std::sqrt(sys2.radius * sys2.radius + z * z);
        CHECK(ring_potential(sys2, {0, 0, z}) == Catch::Approx(expect).epsilon(1e-13));
    }
}

TEST_CASE("AGM potential matches the trapezoid oracle") {
    RingSystem sys(1.0, 2.0 * pi);
    double v = ring_potential(sys, {2, 0, 0});
    double q = ring_potential_quadrature(sys, {2, 0, 0}, std::size_t(1) << 20);
    CHECK(std::abs(v - q) / std::abs(q) < 1e-10);

    // 20x20 grid in the meridional plane excluding the collision band.
    int checked = 0;
    for (int i = 0; i < 20; ++i) {
        for (int j = 0; j < 20; ++j) {
            double a = 0.05 + 3.0 * i / 19.0;
            double z = 0.05 + 3.0 * j / 19.0;
            if (std::hypot(a - 1.0, z) < 0.04) continue;
            double vv = ring_potential(sys, {a, 0, z});
            double qq = ring_potential_quadrature(sys, {a, 0, z});
            REQUIRE(std::abs(vv - qq) / std::abs(qq) < 1e-10);
            ++checked;
        }
    }
    CHECK(checked > 390);
}

TEST_CASE("Ring force: symmetry point, axis value, oracle comparison") {
    RingSystem sys(1.0, 1.0);
    Vec3 f0 = ring_force(sys, {0, 0, 0});
    CHECK(f0.x == 0.0);
    CHECK(f0.y == 0.0);
    CHECK(f0.z == 0.0);

    Vec3 f1 = ring_force(sys, {0, 0, 1});
    CHECK(f1.z == Catch::Approx(-1.0 / (2.0 * std::sqrt(2.0))).epsilon(1e-14));

    RingSystem sys2(1.0, 2.0 * pi);
    Vec3 f = ring_force(sys2, {1.5, 0, 0.5});
    Vec3 q = ring_force_quadrature(sys2, {1.5, 0, 0.5});
    CHECK(std::abs(f.x - q.x) / std::abs(q.x) < 1e-10);
    CHECK(std::abs(f.z - q.z) / std::abs(q.z) < 1e-10);

    // z-component has sign opposite to z.
    for (double z : {-2.0, -0.3, 0.4, 1.7}) {
        CHECK(ring_force(sys2, {1.3, 0.2, z}).z * z < 0.0);
    }
}

TEST_CASE("Force is the negative gradient of the potential (4th-order FD)") {
    RingSystem sys(1.0, 2.0 * pi);
    auto check_at = [&](Vec3 p) {
        double h = 1e-3;
        auto d4 = [&](Vec3 dir) {
            auto at = [&](double s) { return ring_potential(sys, p + s * dir); };
            return (-at(2 * h) + 8 * at(h) - 8 * at(-h) + at(-2 * h)) / (12 * h);
        };
        Vec3 f = ring_force(sys, p);
        double gx = d4({1, 0, 0});
        double gy = d4({0, 1, 0});
        double gz = d4({0, 0, 1});
        double scale = std::max({std::abs(gx), std::abs(gy), std::abs(gz)});
        CHECK(std::abs(f.x + gx) / scale < 1e-7);
        CHECK(std::abs(f.y + gy) / scale < 1e-7);
        CHECK(std::abs(f.z + gz) / scale < 1e-7);
    };
    check_at({1.7, 0.3, 0.6});
    check_at({0.4, 0.1, -0.8});
    check_at({2.5, -1.1, 0.05});
    check_at({0.02, 0.01, 1.4}); // near-axis series branch
}

TEST_CASE("Near-axis series joins the elliptic branch smoothly") {
    RingSystem sys(1.3, 4.0);
    // Compare dV/da on both sides of the switch against central differences
    // of the (elliptic-only) potential.
    for (double a : {5e-4, 1e-3, 2.5e-3, 4e-3, 8e-3}) {
        for (double z : {0.4, 1.1}) {
            RingEval e = ring_eval_cyl(sys.radius, sys.mass, a, z);
            double h = 2e-4;
            double vp = ring_eval_cyl(sys.radius, sys.mass, a + h, z).potential;
            double vm = ring_eval_cyl(sys.radius, sys.mass, a - h, z).potential;
            double vp2 = ring_eval_cyl(sys.radius, sys.mass, a + 2 * h, z).potential;
            double vm2 = ring_eval_cyl(sys.radius, sys.mass, a - 2 * h, z).potential;
            double fd = (-vp2 + 8 * vp - 8 * vm + vm2) / (12 * h);
            CHECK(e.dV_da == Catch::Approx(fd).margin(1e-11));
        }
    }
}

TEST_CASE("Scaling identities") {
    RingSystem sys(1.0, 1.0);

    SECTION("identity scaling gives exactly zero residual") {
        auto r = scale_check(sys, {3, 0, 1}, 1.0);
        CHECK(r.pot_abs == 0.0);
        CHECK(r.grad_abs == 0.0);
    }

    SECTION("c = 2 at a fixed point") {
        auto r = scale_check(sys, {3, 0, 1}, 2.0);
        CHECK(r.pot_rel < 1e-12);
        CHECK(r.grad_rel < 1e-12);
    }

    SECTION("randomized fuzz, spatial and mass scalings") {
        std::mt19937_64 rng(20240817);
        std::uniform_real_distribution<double> U(-1.0, 1.0);
        int done = 0;
        while (done < 1000) {
            Vec3 p{4.0 * U(rng), 4.0 * U(rng), 4.0 * U(rng)};
            double c = std::exp(1.5 * U(rng));
            if (ring_source_distance(sys, p) < 0.02) continue;
            auto r = scale_check(sys, p, c);
            REQUIRE(r.pot_rel < 1e-12);
            REQUIRE(r.grad_rel < 1e-12);

            // Mass linearity: V(r, rho, cM) = c V(r, rho, M), same for the force.
            RingSystem heavier(sys.radius, c * sys.mass);
            double v1 = ring_potential(heavier, p);
            double v0 = ring_potential(sys, p);
            REQUIRE(std::abs(v1 - c * v0) <= 1e-13 * std::abs(v1));
            ++done;
        }
    }
}

TEST_CASE("Translation shifts the potential") {
    RingSystem sys(1.0, 1.0);

    RingSystem same = translate(sys, {0, 0, 0});
    CHECK(same.center.x == sys.center.x);
    CHECK(ring_potential(same, {2, 0, 1}) == ring_potential(sys, {2, 0, 1}));

    Vec3 q{17.0, -3.0, 2.5};
    RingSystem moved = translate(sys, q);
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> U(-3.0, 3.0);
    int done = 0;
    while (done < 100) {
        Vec3 p{U(rng), U(rng), U(rng)};
        if (ring_source_distance(sys, p) < 0.05) continue;
        double a = ring_potential(moved, p + q);
        double b = ring_potential(sys, p);
        REQUIRE(std::abs(a - b) <= 1e-14 * std::abs(b));
        ++done;
    }

    // The near-circle configuration: radius 1/eps centered at (1/eps, 0, 0).
    double eps = 1e-3;
    RingSystem big(1.0 / eps, 1.0);
    RingSystem through_origin = translate(big, {1.0 / eps, 0, 0});
    CHECK(ring_source_distance(through_origin, {0, 0, 0}) == 0.0);
}

TEST_CASE("Reflection and rotation symmetry") {
    RingSystem sys(1.0, 3.0);
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> U(-2.5, 2.5);
    int done = 0;
    while (done < 200) {
        Vec3 p{U(rng), U(rng), U(rng)};
        if (ring_source_distance(sys, p) < 0.05) continue;
        double v = ring_potential(sys, p);
        CHECK(ring_potential(sys, {p.x, p.y, -p.z}) == Catch::Approx(v).epsilon(1e-15));
        double phi = U(rng);
        Vec3 rot{p.x * std::cos(phi) - p.y * std::sin(phi),
                 p.x * std::sin(phi) + p.y * std::cos(phi), p.z};
        CHECK(ring_potential(sys, rot) == Catch::Approx(v).epsilon(5e-15));
        ++done;
    }
}

TEST_CASE("Collision band raises, warning band flags") {
    RingSystem sys(1.0, 1.0);
    CHECK_THROWS_AS(ring_potential(sys, {1, 0, 0}), source_collision_error);
    CHECK_THROWS_AS(ring_potential(sys, {1.0 + 1e-10, 0, 0}), source_collision_error);
    RingEval e = ring_eval_point(sys, {1.0 + 1e-6, 0, 0});
    CHECK(e.near_source);
    CHECK(e.potential < 0.0);
    RingEval far = ring_eval_point(sys, {2.0, 0, 0});
    CHECK_FALSE(far.near_source);
}

TEST_CASE("Kepler perturbation residual") {
    double M = 1.0;
    Vec3 p{2, 0, 0};

    auto r0 = perturbation_residual(M, p, 0.0);
    CHECK(r0.numerator == 0.0);

    // The ratio |V + M/|p|| / eps^2 approaches a finite limit |f(p,0)|.
    double prev = 0.0;
    std::vector<double> ratios;
    for (double eps : {1e-1, 1e-2, 1e-3}) {
        auto r = perturbation_residual(M, p, eps);
        ratios.push_back(r.ratio);
        prev = r.ratio;
    }
    CHECK(prev > 0.0);
    CHECK(std::abs(ratios[2] - ratios[1]) < 0.05 * ratios[1]);
    CHECK(std::abs(ratios[2] - ratios[1]) < std::abs(ratios[1] - ratios[0]));

    // Evenness in eps, via a test-local signed-radius quadrature.
    for (Vec3 q : {Vec3{2, 0, 0}, Vec3{1.1, 0.4, 0.3}, Vec3{0.5, 0, 1.0}}) {
        // Equal up to summation rounding of the 2e4-term quadrature.
        double vp = V_signed_eps(M, q, 0.05);
        double vm = V_signed_eps(M, q, -0.05);
        CHECK(vp == Catch::Approx(vm).epsilon(1e-13));
    }
}

TEST_CASE("Wire comparison field") {
    CHECK(wire_force(1.0, {1, 0}).x == Catch::Approx(64.0));
    CHECK(wire_force(1.0, {1, 0}).z == 0.0);
    CHECK(wire_force(1.0, {0, 2}).x == 0.0);
    CHECK(wire_force(1.0, {0, 2}).z == Catch::Approx(32.0));
    CHECK_THROWS_AS(wire_force(1.0, {0, 0}), singular_point_error);
}

TEST_CASE("Wire-limit constant measured by Richardson extrapolation") {
    auto m = wire_limit_measure(1.0, {1, 0});
    // Gauss's law for an infinite straight wire of density lambda gives a
    // field magnitude 2 lambda / d; the extrapolated constant must land there.
    CHECK(std::abs(m.c_star - 2.0) < 1e-3);
    CHECK(m.err_estimate < 1e-4 * std::abs(m.c_star));

    auto m2 = wire_limit_measure(0.7, {0.3, 0.4});
    CHECK(std::abs(m2.c_star - 2.0) < 1e-3);
}

TEST_CASE("Euler two-center field") {
    EulerSystem sys(1.0, 1.0);
    CHECK(euler_potential(sys, {0, 0}) == Catch::Approx(-2.0));
    CHECK(euler_potential(sys, {0, 1}) == Catch::Approx(-2.0 / std::sqrt(2.0)));
    Vec2 f0 = euler_force(sys, {0, 0});
    CHECK(f0.x == Catch::Approx(0.0).margin(1e-16));
    CHECK(f0.z == 0.0);
    CHECK_THROWS_AS(euler_potential(sys, {1, 0}), source_collision_error);

    // Gradient consistency.
    Vec2 p{0.7, 0.9};
    double h = 1e-5;
    double gx = (euler_potential(sys, {p.x + h, p.z}) - euler_potential(sys, {p.x - h, p.z})) / (2 * h);
    double gz = (euler_potential(sys, {p.x, p.z + h}) - euler_potential(sys, {p.x, p.z - h})) / (2 * h);
    Vec2 f = euler_force(sys, p);
    CHECK(f.x == Catch::Approx(-gx).epsilon(1e-8));
    CHECK(f.z == Catch::Approx(-gz).epsilon(1e-8));
}
