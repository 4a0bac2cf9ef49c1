#include <cmath>

#include <doctest.h>

#include "strataflow/continuation.hpp"
#include "strataflow/error.hpp"

using namespace strataflow;

namespace {

ProfileBundle constant() {
    return ProfileBundle({1.0, 1.0, -1.0}, Profile1D::poly({1.0}), Profile1D::poly({0.0}));
}

// Laminar profile plus a crest-at-zero mode.
HeightField crest_wave(const Grid& g, double amp) {
    HeightField f(g);
    for (int i = 0; i < g.Nq; ++i)
        for (int j = 0; j < g.Np; ++j) {
            double s = g.p(j) - g.p0;
            f.at(i, j) = 1.1 * s + amp * std::cos(g.q(i)) * std::sinh(s);
        }
    f.Q = 3.0;
    return f;
}

const BifurcationPoint& constant_bp() {
    static const BifurcationPoint bp = [] {
        SturmOptions so;
        so.Np = 32;
        return find_lambda_star(constant(), so);
    }();
    return bp;
}

}  // namespace

TEST_CASE("nodal pattern of a crest wave") {
    Grid g = Grid::make(17, 16, -1.0);
    NodalFlags n = nodal_check(crest_wave(g, 0.05));
    CHECK(n.interior_hq);
    CHECK(n.top_hq);
    CHECK(n.bottom_hqp);
    CHECK(n.left_hqq);
    CHECK(n.right_hqq);
    CHECK(n.all());
    // A trough at q = 0 violates it; its half-period shift restores it.
    HeightField t = crest_wave(g, -0.05);
    CHECK_FALSE(nodal_check(t).all());
    CHECK(nodal_check(half_period_shift(t)).all());
    // A laminar field has no crest.
    CHECK_FALSE(nodal_check(crest_wave(g, 0.0)).all());
}

TEST_CASE("half-period shift is an involution") {
    Grid g = Grid::make(17, 16, -1.0);
    HeightField f = crest_wave(g, 0.1);
    f.at(3, 2) += 0.01;
    HeightField s = half_period_shift(half_period_shift(f));
    CHECK(s.h == f.h);
    CHECK(half_period_shift(f).at(0, 15) == f.at(16, 15));
}

TEST_CASE("diagnostics of a wave") {
    Grid g = Grid::make(33, 16, -1.0);
    HeightField f = crest_wave(g, 0.02);
    Diagnostics d = diagnostics(constant(), f);
    double sh = std::sinh(1.0);
    CHECK(d.amplitude == doctest::Approx(2 * 0.02 * sh).epsilon(1e-12));
    CHECK(d.d == doctest::Approx(1.1).epsilon(1e-12));
    CHECK(std::fabs(d.mean_eta) < 1e-14);
    CHECK(d.lambda_est == doctest::Approx(3.0 - 2.0 * 1.1));
    CHECK(d.nodal_ok);
}

TEST_CASE("product inner product and its gradient agree") {
    Grid g = Grid::make(17, 16, -1.0);
    HeightField a = crest_wave(g, 0.3), c = crest_wave(g, -0.2);
    c.at(4, 3) += 0.05;
    c.Q = -1.5;
    for (int order : {0, 1, 2}) {
        auto grad = product_gradient(a, order);
        auto x = c.unknown_vector();
        double dot = a.Q * c.Q;
        for (std::size_t k = 0; k < x.size(); ++k) dot += grad[k] * x[k];
        CHECK(dot == doctest::Approx(product_dot(a, c, order)).epsilon(1e-12));
        CHECK(product_dot(a, c, order) == doctest::Approx(product_dot(c, a, order)).epsilon(1e-14));
        CHECK(product_distance(a, a, order) == 0.0);
    }
    CHECK(product_dot(a, a, 2) > product_dot(a, a, 1));
    CHECK(product_dot(a, a, 1) > product_dot(a, a, 0));
}

TEST_CASE("monitors stay silent near the bifurcation point") {
    auto b = constant();
    const auto& bp = constant_bp();
    Monitors m = Monitors::defaults(b, bp);
    CHECK(m.hp_blowup < m.delta);
    Grid g = Grid::make(16, 32, -1.0);
    HeightField f = laminar_field(g, bp.laminar);
    for (int i = 0; i < g.Nq; ++i)
        for (int j = 0; j < g.Np; ++j) f.at(i, j) += 1e-3 * std::cos(g.q(i)) * (g.p(j) - g.p0);
    MonitorStatus st = alternative_monitor(diagnostics(b, f), f.Q, m);
    CHECK_FALSE(st.stop);
    CHECK(st.triggered.empty());
    f.Q = 10 * m.q_max;
    st = alternative_monitor(diagnostics(b, f), f.Q, m);
    CHECK(st.stop);
    CHECK(st.reason == StopReason::UnboundedQ);
}

TEST_CASE("initial tangent points along the kernel with a crest at zero") {
    auto b = constant();
    const auto& bp = constant_bp();
    Grid g = Grid::make(16, 32, -1.0);
    BranchPoint p = initial_tangent(b, bp, g, 1e-2);
    CHECK(p.diag.nodal_ok);
    CHECK(p.field.at(0, g.Np - 1) > p.field.at(g.Nq - 1, g.Np - 1));
    CHECK(p.newton_residual <= 1e-10 * p.newton_scale);
    CHECK(p.diag.amplitude > 0.0);
}

TEST_CASE("short branch advances in amplitude and keeps the nodal pattern") {
    auto b = constant();
    const auto& bp = constant_bp();
    Grid g = Grid::make(16, 32, -1.0);
    ContinuationOptions o;
    o.steps = 4;
    Branch br(b, bp, g, o);
    br.run();
    REQUIRE(br.points().size() == 5);
    CHECK(br.stop_reason() == StopReason::StepBudget);
    for (std::size_t k = 1; k < br.points().size(); ++k) {
        const auto& p = br.points()[k];
        CHECK(p.diag.nodal_ok);
        CHECK(p.newton_residual <= 1e-10 * p.newton_scale);
        CHECK(p.diag.amplitude > br.points()[k - 1].diag.amplitude);
        CHECK(std::fabs(p.diag.mean_eta) < 1e-12);
    }
}

TEST_CASE("negative direction gives the half-shifted branch") {
    auto b = constant();
    const auto& bp = constant_bp();
    Grid g = Grid::make(16, 32, -1.0);
    ContinuationOptions o;
    o.steps = 2;
    o.direction = -1;
    Branch br(b, bp, g, o);
    br.run();
    REQUIRE(br.points().size() == 3);
    for (const auto& p : br.points()) CHECK(p.diag.nodal_ok);
}

TEST_CASE("stop reason names") {
    CHECK(std::string(stop_reason_name(StopReason::StepBudget)) == "step_budget");
    CHECK(std::string(stop_reason_name(StopReason::LaminarReturn)) == "laminar_return");
}
