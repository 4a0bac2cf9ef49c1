#include <cmath>
#include <random>

#include <doctest.h>

#include "strataflow/error.hpp"
#include "strataflow/heightpde.hpp"

using namespace strataflow;

namespace {

ProfileBundle stratified() {
    return ProfileBundle({1.0, 1.0, -1.0}, Profile1D::poly({1.0, -0.2}), Profile1D::poly({0.1}), FloorMode::Relaxed);
}

HeightField laminar_on(const ProfileBundle& b, const Grid& g, double lam) {
    LaminarOptions o;
    o.Np = g.Np;
    o.allow_below_floor = true;
    return laminar_field(g, solve_laminar(b, lam, o));
}

HeightField wavy(const ProfileBundle& b, const Grid& g, double lam, double amp) {
    HeightField f = laminar_on(b, g, lam);
    for (int i = 0; i < g.Nq; ++i)
        for (int j = 0; j < g.Np; ++j) f.at(i, j) += amp * std::cos(g.q(i)) * std::sin(1.3 * (g.p(j) - g.p0));
    return f;
}

}  // namespace

TEST_CASE("grid geometry and unknown numbering") {
    Grid g = Grid::make(17, 16, -2.0);
    CHECK(g.q(16) == doctest::Approx(M_PI));
    CHECK(g.p(0) == -2.0);
    CHECK(g.p(15) == 0.0);
    CHECK(g.unknowns() == 17 * 15);
    CHECK(g.unknown(0, 1) == 0);
    CHECK(g.unknown(1, 1) == 15);
    CHECK(g.unknown(16, 15) == 17 * 15 - 1);
    CHECK(g.reflect(-1) == 1);
    CHECK(g.reflect(17) == 15);
    CHECK_THROWS_AS(Grid::make(8, 16, -1.0), Error);
    double s = 0;
    for (double w : mean_top_weights(g)) s += w;
    CHECK(s == doctest::Approx(1.0));
}

TEST_CASE("unknown vector round trip leaves the bed row at zero") {
    Grid g = Grid::make(16, 16, -1.0);
    HeightField f(g);
    std::vector<double> x(g.unknowns());
    for (std::size_t k = 0; k < x.size(); ++k) x[k] = 1.0 + double(k);
    f.set_unknowns(x);
    CHECK(f.unknown_vector() == x);
    for (int i = 0; i < g.Nq; ++i) CHECK(f.at(i, 0) == 0.0);
    CHECK(f.at(2, 3) == x[g.unknown(2, 3)]);
}

TEST_CASE("laminar flows solve the discrete equation up to second order") {
    auto b = stratified();
    double r1 = 0, r2 = 0;
    for (int n : {32, 64}) {
        Grid g = Grid::make(16, n, -1.0);
        double res = residual(b, laminar_on(b, g, 1.2)).norm_inf();
        (n == 32 ? r1 : r2) = res;
    }
    CHECK(r1 / r2 == doctest::Approx(4.0).epsilon(0.15));
    // Constant density: the linear profile is exact.
    ProfileBundle c({1.0, 1.0, -1.0}, Profile1D::poly({1.0}), Profile1D::poly({0.0}));
    Grid g = Grid::make(16, 16, -1.0);
    CHECK(residual(c, laminar_on(c, g, 1.2)).norm_inf() < 1e-13);
}

TEST_CASE("Jacobian matches central differences") {
    auto b = stratified();
    Grid g = Grid::make(16, 16, -1.0);
    HeightField f = wavy(b, g, 1.1, 0.05);
    f.Q += 0.01;
    JacobianSystem J = jacobian(b, f);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> U(-1, 1);
    std::vector<double> dh(g.unknowns());
    for (double& v : dh) v = U(rng);
    const double dq = 0.7, eps = 1e-6;
    HeightField fp = f, fm = f;
    for (int i = 0; i < g.Nq; ++i)
        for (int j = 1; j < g.Np; ++j) {
            fp.at(i, j) += eps * dh[g.unknown(i, j)];
            fm.at(i, j) -= eps * dh[g.unknown(i, j)];
        }
    fp.Q += eps * dq;
    fm.Q -= eps * dq;
    auto Rp = residual(b, fp).R, Rm = residual(b, fm).R;
    auto Jv = J.multiply(dh, dq);
    for (std::size_t k = 0; k < Jv.size(); ++k) CHECK(Jv[k] == doctest::Approx((Rp[k] - Rm[k]) / (2 * eps)).epsilon(1e-6));
}

TEST_CASE("rank-one part couples the interior to the mean depth") {
    auto b = stratified();
    Grid g = Grid::make(16, 16, -1.0);
    HeightField f = wavy(b, g, 1.1, 0.02);
    JacobianSystem J = jacobian(b, f);
    // Frozen residual has the same local part with d replaced by sigma.
    double d = mean_top(f);
    auto R = residual(b, f).R, Rf = frozen_residual(b, f, d).R;
    for (std::size_t k = 0; k < R.size(); ++k) CHECK(R[k] == doctest::Approx(Rf[k]).epsilon(1e-13));
    // dR1/dsigma = g rho_p h_p^3, the u factor.
    auto Rs = frozen_residual(b, f, d + 1e-6).R;
    for (int i = 0; i < g.Nq; ++i)
        for (int j = 1; j < g.Np - 1; ++j) {
            int k = g.unknown(i, j);
            CHECK((Rs[k] - Rf[k]) / 1e-6 == doctest::Approx(J.u[k]).epsilon(1e-5));
        }
    for (int i = 0; i < g.Nq; ++i) CHECK(J.u[g.unknown(i, g.Np - 1)] == 0.0);
    for (int i = 0; i < g.Nq; ++i) CHECK(J.dQ[g.unknown(i, g.Np - 1)] < 0.0);
}

TEST_CASE("local part stays inside the band") {
    Grid g = Grid::make(16, 20, -1.0);
    JacobianSystem J = jacobian(stratified(), wavy(stratified(), g, 1.1, 0.02));
    CHECK(J.local.kl() <= g.Np);
    CHECK(row_major_bandwidth(g) >= g.Nq);
}

TEST_CASE("Newton recovers a laminar flow from a perturbed start") {
    auto b = stratified();
    Grid g = Grid::make(16, 16, -1.0);
    HeightField target = laminar_on(b, g, 2.0);
    // The discrete solution with this Q
    NewtonResult exact = newton_solve(b, target);
    HeightField start = exact.field;
    for (int i = 0; i < g.Nq; ++i)
        for (int j = 1; j < g.Np; ++j) start.at(i, j) += 1e-3 * std::cos(g.q(i)) * (g.p(j) + 1.0);
    NewtonResult r = newton_solve(b, start);
    CHECK(r.residual <= 1e-10 * r.scale);
    CHECK(r.iterations <= 8);
    double diff = 0;
    for (std::size_t k = 0; k < r.field.h.size(); ++k) diff = std::max(diff, std::fabs(r.field.h[k] - exact.field.h[k]));
    CHECK(diff < 1e-10);
}

TEST_CASE("bordered Newton treats Q as an unknown") {
    ProfileBundle c({1.0, 1.0, -1.0}, Profile1D::poly({1.0}), Profile1D::poly({0.0}));
    Grid g = Grid::make(16, 16, -1.0);
    HeightField f = laminar_on(c, g, 2.0);
    // Fixing Q alone through the constraint selects the laminar flow with that Q.
    const double lam = 2.2, Q = lam + 2.0 / std::sqrt(lam);
    NewtonOptions o;
    o.constraint = LinearConstraint{std::vector<double>(g.unknowns(), 0.0), 1.0, Q};
    NewtonResult r = newton_solve(c, f, o);
    CHECK(r.field.Q == doctest::Approx(Q).epsilon(1e-13));
    CHECK(mean_top(r.field) == doctest::Approx(1.0 / std::sqrt(lam)).epsilon(1e-11));
    CHECK(r.residual <= 1e-10 * r.scale);
}

TEST_CASE("nonpositive h_p is a stagnation guard") {
    Grid g = Grid::make(16, 16, -1.0);
    HeightField f(g);
    try {
        residual(stratified(), f);
        FAIL("expected StagnationGuard");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::StagnationGuard);
    }
}

TEST_CASE("spline transfer between grids is fourth-order accurate") {
    auto exact = [](double q, double p) { return (p + 1.0) * (1.0 + 0.1 * std::cos(q)) + 0.05 * std::sin(2 * p) * std::cos(2 * q); };
    double errs[2];
    int k = 0;
    for (int n : {17, 33}) {
        Grid src = Grid::make(n, n, -1.0), dst = Grid::make(2 * n, 2 * n, -1.0);
        HeightField f(src);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) f.at(i, j) = exact(src.q(i), src.p(j));
        f.Q = 3.0;
        HeightField t = resample_field(f, dst);
        CHECK(t.Q == 3.0);
        double e = 0;
        for (int i = 0; i < dst.Nq; ++i)
            for (int j = 1; j < dst.Np; ++j) e = std::max(e, std::fabs(t.at(i, j) - exact(dst.q(i), dst.p(j))));
        errs[k++] = e;
    }
    CHECK(errs[1] < 1e-5);
    CHECK(errs[0] / errs[1] > 10.0);
    CHECK_THROWS_AS(resample_field(HeightField(Grid::make(16, 16, -1.0)), Grid::make(8, 8, -2.0)), Error);
}

TEST_CASE("crest elevation constraint measures h(0, 0) - d") {
    Grid g = Grid::make(17, 16, -1.0);
    HeightField f = wavy(stratified(), g, 1.1, 0.05);
    auto c = crest_elevation_constraint(g, 0.0);
    CHECK(c.eval(f) == doctest::Approx(f.at(0, g.Np - 1) - mean_top(f)).epsilon(1e-14));
}
