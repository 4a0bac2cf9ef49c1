#include <cmath>

#include <doctest.h>

#include "strataflow/error.hpp"
#include "strataflow/laminar.hpp"

using namespace strataflow;

namespace {
ProfileBundle constant(double g = 1.0) {
    return ProfileBundle({g, 1.0, -1.0}, Profile1D::poly({1.0}), Profile1D::poly({0.0}));
}
}  // namespace

TEST_CASE("grid runs from the bed to the surface") {
    auto p = p_grid(-2.0, 5);
    REQUIRE(p.size() == 5);
    CHECK(p.front() == -2.0);
    CHECK(p.back() == 0.0);
    CHECK(p[2] == doctest::Approx(-1.0));
}

TEST_CASE("constant density closed form") {
    auto b = constant();
    for (double lam : {0.5, 2.0, 9.0}) {
        auto fl = solve_laminar(b, lam);
        double s = std::sqrt(lam);
        CHECK(fl.d == doctest::Approx(1.0 / s).epsilon(1e-12));
        CHECK(fl.Q == doctest::Approx(lam + 2.0 / s).epsilon(1e-12));
        for (int k = 0; k < fl.Np(); k += 17) {
            CHECK(fl.H[k] == doctest::Approx((fl.p[k] + 1.0) / s).epsilon(1e-11));
            CHECK(fl.Hp[k] == doctest::Approx(1.0 / s).epsilon(1e-12));
        }
        CHECK(fl.H.front() == 0.0);
    }
}

TEST_CASE("constant vorticity closed form") {
    // beta = w: lambda + G = lambda + 2 w p, H_p = (lambda + 2 w p)^{-1/2}
    const double w = 0.3, lam = 2.0;
    ProfileBundle b({1.0, 1.0, -1.0}, Profile1D::poly({1.0}), Profile1D::poly({w}));
    auto fl = solve_laminar(b, lam);
    // d = int_{-1}^{0} (lam + 2 w p)^{-1/2} dp
    double d = (std::sqrt(lam) - std::sqrt(lam - 2 * w)) / w;
    CHECK(fl.d == doctest::Approx(d).epsilon(1e-11));
    for (int k = 0; k < fl.Np(); k += 31) CHECK(fl.Hp[k] == doctest::Approx(1.0 / std::sqrt(lam + 2 * w * fl.p[k])));
}

TEST_CASE("lambda below the floor is rejected unless allowed") {
    auto b = constant();
    CHECK_THROWS_AS(solve_laminar(b, 0.5 * b.lambda_min()), Error);
    LaminarOptions o;
    o.allow_below_floor = true;
    CHECK_NOTHROW(solve_laminar(b, 0.5 * b.lambda_min(), o));
}

TEST_CASE("Gdot is zero for constant density and Qdot matches the closed form") {
    auto b = constant(3.0);
    const double lam = 1.7;
    auto dg = g_dot(b, lam);
    for (double v : dg.Gdot) CHECK(std::fabs(v) < 1e-14);
    // Q = lam + 2 g / sqrt(lam)
    CHECK(dg.Qdot == doctest::Approx(1.0 - 3.0 * std::pow(lam, -1.5)).epsilon(1e-9));
    CHECK(dg.Qddot == doctest::Approx(4.5 * std::pow(lam, -2.5)).epsilon(1e-5));
    for (int k = 0; k < int(dg.Ydot.size()); k += 40) {
        double p = -1.0 + k / double(dg.Ydot.size() - 1);
        CHECK(dg.Ydot[k] == doctest::Approx(-p / (2.0 * std::pow(lam, 1.5))).epsilon(1e-10));
    }
}

TEST_CASE("shooting agrees with the grid solve") {
    ProfileBundle b({1.0, 1.0, -1.0}, Profile1D::poly({1.0, -0.2}), Profile1D::poly({0.1}), FloorMode::Relaxed);
    const double lam = 1.3;
    auto fl = solve_laminar(b, lam);
    auto dg = g_dot(b, fl);
    auto sh = shoot_laminar(b, lam);
    CHECK(sh.d == doctest::Approx(fl.d).epsilon(1e-11));
    CHECK(sh.Q == doctest::Approx(fl.Q).epsilon(1e-11));
    CHECK(sh.Qdot == doctest::Approx(dg.Qdot).epsilon(1e-5));
    // Qdot by differences of Q
    double h = 1e-5;
    double fd = (shoot_laminar(b, lam + h).Q - shoot_laminar(b, lam - h).Q) / (2 * h);
    CHECK(sh.Qdot == doctest::Approx(fd).epsilon(1e-7));
    double fd2 = (shoot_laminar(b, lam + 1e-3).Qdot - shoot_laminar(b, lam - 1e-3).Qdot) / 2e-3;
    CHECK(sh.Qddot == doctest::Approx(fd2).epsilon(1e-5));
}

TEST_CASE("stratified Gdot stays in [-1/2, 0]") {
    ProfileBundle b({1.0, 1.0, -1.0}, Profile1D::poly({1.0, -0.5}), Profile1D::poly({0.0}));
    for (double lam : {b.lambda_min(), 2.0 * b.lambda_min(), 10.0 * b.lambda_min()}) {
        auto dg = g_dot(b, lam);
        for (double v : dg.Gdot) {
            CHECK(v <= 1e-12);
            CHECK(v >= -0.5 - 1e-12);
        }
    }
}

TEST_CASE("lambda0 of the constant density family is 1 for g = 1") {
    // Q = lam + 2 / sqrt(lam) has its minimum at lam = 1
    auto r = find_lambda0(constant());
    CHECK(r.lambda0 == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(r.Q0 == doctest::Approx(3.0).epsilon(1e-12));
    CHECK_FALSE(r.boundary_minimum);
}

TEST_CASE("lambda0 at the left end is flagged") {
    // Q = lam + 2 g / sqrt(lam) with g small has its minimum below the floor
    auto b = constant(0.01);
    auto r = find_lambda0(b);
    CHECK(r.boundary_minimum);
    CHECK(r.lambda0 == doctest::Approx(b.lambda_min()));
}
