#include <cmath>

#include <doctest.h>

#include "strataflow/reconstruct.hpp"

using namespace strataflow;

namespace {

ProfileBundle constant() {
    return ProfileBundle({1.0, 1.0, -1.0}, Profile1D::poly({1.0}), Profile1D::poly({0.0}));
}

ProfileBundle stratified() {
    return ProfileBundle({1.0, 1.0, -1.0}, Profile1D::poly({1.0, -0.2}), Profile1D::poly({0.1}), FloorMode::Relaxed);
}

HeightField laminar_on(const ProfileBundle& b, const Grid& g, double lam) {
    LaminarOptions o;
    o.Np = g.Np;
    o.allow_below_floor = true;
    return laminar_field(g, solve_laminar(b, lam, o));
}

}  // namespace

TEST_CASE("physical field of a laminar flow") {
    auto b = constant();
    Grid g = Grid::make(16, 33, -1.0);
    HeightField f = laminar_on(b, g, 2.0);
    PhysicalField pf = to_physical(b, f);
    CHECK(pf.Nx == 2 * (g.Nq - 1));
    double s = std::sqrt(2.0);
    for (int k = 0; k < pf.Nx; k += 5) {
        CHECK(pf.eta[k] == doctest::Approx(0.0));
        for (int j = 0; j < pf.Np; j += 8) {
            int n = pf.idx(k, j);
            CHECK(pf.y[n] == doctest::Approx(f.at(0, j) - 1.0 / s));
            CHECK(pf.u[n] == doctest::Approx(1.0 - s).epsilon(1e-12));
            CHECK(std::fabs(pf.v[n]) < 1e-13);
            CHECK(pf.rho[n] == 1.0);
            // Hydrostatic relative pressure
            CHECK(pf.P[n] == doctest::Approx(-pf.y[n]).epsilon(1e-10));
        }
    }
}

TEST_CASE("laminar flows verify to round-off with constant density") {
    auto b = constant();
    Grid g = Grid::make(32, 32, -1.0);
    VerificationReport r = euler_residual(to_physical(b, laminar_on(b, g, 2.0)));
    CHECK(r.max_entry() <= 1e-9);
}

TEST_CASE("stratified laminar residual is a discretization error") {
    auto b = stratified();
    double e[2];
    int k = 0;
    for (int n : {32, 64}) {
        Grid g = Grid::make(16, n, -1.0);
        e[k++] = euler_residual(to_physical(b, laminar_on(b, g, 2.0))).max_entry();
    }
    CHECK(e[1] < 1e-4);
    CHECK(e[0] / e[1] > 3.0);
}

TEST_CASE("stream function matches -p") {
    auto b = stratified();
    Grid g = Grid::make(16, 64, -1.0);
    HeightField f = laminar_on(b, g, 2.0);
    StreamCheck s = stream_consistency(b, f);
    CHECK(s.deviation < 1e-6);
    CHECK(s.bed_error < 1e-6);
    CHECK(s.bed_depth == doctest::Approx(-mean_top(f)).epsilon(1e-6));
}

TEST_CASE("Cartesian resampling marks air with NaN") {
    auto b = constant();
    Grid g = Grid::make(17, 17, -1.0);
    HeightField f = laminar_on(b, g, 2.0);
    for (int i = 0; i < g.Nq; ++i)
        for (int j = 0; j < g.Np; ++j) f.at(i, j) += 0.02 * std::cos(g.q(i)) * (g.p(j) + 1.0);
    PhysicalField pf = to_physical(b, f);
    CartesianField c = resample_cartesian(pf, 21);
    CHECK(c.Ny == 21);
    CHECK(c.y.front() == doctest::Approx(-mean_top(f)));
    int air = 0, water = 0;
    for (int k = 0; k < c.Nx; ++k)
        for (int m = 0; m < c.Ny; ++m) {
            double u = c.u[k * c.Ny + m];
            if (c.y[m] > pf.eta[k] + 1e-12) {
                CHECK(std::isnan(u));
                ++air;
            } else if (c.y[m] < pf.eta[k] - 1e-12) {
                CHECK(std::isfinite(u));
                ++water;
            }
        }
    CHECK(air > 0);
    CHECK(water > 0);
}
