#include "strataflow/laminar.hpp"

#include <array>
#include <cmath>
#include <sstream>

#include <boost/math/tools/toms748_solve.hpp>
#include <boost/numeric/odeint.hpp>

#include "strataflow/error.hpp"

namespace strataflow {

namespace odeint = boost::numeric::odeint;

std::vector<double> p_grid(double p0, int Np) {
    if (Np < 2) fail(ErrorCode::InvalidArgument, "grid needs at least two nodes");
    std::vector<double> p(Np);
    for (int j = 0; j < Np; ++j) p[j] = p0 * double(Np - 1 - j) / double(Np - 1);
    return p;
}

namespace {

void check_lambda(const ProfileBundle& b, double lambda, bool allow_below_floor) {
    if (!std::isfinite(lambda) || !(lambda > -2.0 * b.B_min())) {
        std::ostringstream os;
        os << "lambda = " << lambda << " must exceed -2 Bmin = " << -2.0 * b.B_min();
        fail(ErrorCode::InvalidArgument, os.str());
    }
    if (!allow_below_floor && lambda < b.lambda_min() * (1.0 - 1e-14)) {
        std::ostringstream os;
        os << "lambda = " << lambda << " is below the admissible floor " << b.lambda_min();
        fail(ErrorCode::InvalidArgument, os.str());
    }
}

using State2 = std::array<double, 2>;

}  // namespace

LaminarFlow solve_laminar(const ProfileBundle& b, double lambda, const LaminarOptions& opt) {
    check_lambda(b, lambda, opt.allow_below_floor);
    const double p0 = b.p0(), g = b.g();
    const int N = opt.Np;
    if (N < 3) fail(ErrorCode::InvalidArgument, "Np must be at least 3");

    // x = (p, F) as functions of s, integrated downward from the surface.
    auto rhs = [&](const State2& x, State2& dx, double s) {
        double w = std::sqrt(std::max(lambda + 2.0 * x[1], 0.0));
        dx[0] = w;
        dx[1] = (b.beta(-x[0]) - g * s * b.rho_p(x[0])) * w;
    };

    LaminarFlow f;
    f.lambda = lambda;
    f.p = p_grid(p0, N);
    f.Y.assign(N, 0.0);
    f.F.assign(N, 0.0);

    auto stepper = odeint::make_controlled(opt.atol, opt.rtol, odeint::runge_kutta_fehlberg78<State2>());
    odeint::runge_kutta_fehlberg78<State2> raw;

    State2 x{0.0, 0.0};
    double s = 0.0;
    double dt = -0.05 * std::fabs(p0) / std::sqrt(lambda);
    long steps = 0;
    for (int j = N - 2; j >= 0; --j) {
        const double target = f.p[j];
        for (;;) {
            if (++steps > 10000000L) fail(ErrorCode::NoBedReached, "step limit exceeded");
            State2 xt = x;
            double st = s, dtt = dt;
            if (stepper.try_step(rhs, xt, st, dtt) == odeint::fail) {
                dt = dtt;
                if (std::fabs(dt) < 1e-300) fail(ErrorCode::NoBedReached, "step size underflow");
                continue;
            }
            if (!(lambda + 2.0 * xt[1] > 0.0) || !(xt[0] <= x[0]))
                fail(ErrorCode::NonMonotone, "dp/ds <= 0 detected");
            if (xt[0] > target) {
                x = xt;
                s = st;
                dt = dtt;
                if (std::fabs(s) > opt.s_budget) fail(ErrorCode::NoBedReached, "s-budget exceeded");
                continue;
            }
            // Land exactly on p = target with a single step of adjusted size.
            double h = (target - x[0]) / std::sqrt(lambda + 2.0 * x[1]);
            State2 xl = x;
            for (int it = 0; it < 50; ++it) {
                xl = x;
                raw.do_step(rhs, xl, s, h);
                double miss = xl[0] - target;
                if (std::fabs(miss) <= 1e-16 * std::fabs(p0)) break;
                double slope = std::sqrt(std::max(lambda + 2.0 * xl[1], 1e-300));
                h -= miss / slope;
            }
            x = xl;
            x[0] = target;
            s += h;
            f.Y[j] = s;
            f.F[j] = x[1];
            break;
        }
    }
    f.d = -f.Y[0];
    f.endpoint_residual = 0.0;
    f.H.resize(N);
    f.G.resize(N);
    f.Hp.resize(N);
    for (int j = 0; j < N; ++j) {
        f.H[j] = f.Y[j] + f.d;
        f.G[j] = 2.0 * f.F[j];
        double w = lambda + f.G[j];
        if (!(w > 0.0)) fail(ErrorCode::NonMonotone, "lambda + G not positive");
        f.Hp[j] = 1.0 / std::sqrt(w);
    }
    f.H[0] = 0.0;
    f.Q = lambda + 2.0 * g * b.rho0() * f.d;
    return f;
}

LaminarDiagnostics g_dot(const ProfileBundle& b, const LaminarFlow& flow, const LaminarOptions& opt) {
    const int N = flow.Np();
    const double g = b.g();
    const double hp = std::fabs(b.p0()) / double(N - 1);
    LaminarDiagnostics dg;
    dg.lambda = flow.lambda;
    std::vector<double> u(N), yd(N), w(N), rp(N);
    for (int j = 0; j < N; ++j) {
        w[j] = std::pow(flow.lambda + flow.G[j], -1.5);
        rp[j] = b.rho_p(flow.p[j]);
    }
    // Ydot(p) = 1/2 int_p^0 w u,  u(p) = 1 + 2 g int_p^0 Ydot rho_p, trapezoid from the top.
    u[N - 1] = 1.0;
    yd[N - 1] = 0.0;
    for (int j = N - 2; j >= 0; --j) {
        double A = yd[j + 1] + 0.25 * hp * w[j + 1] * u[j + 1];
        double C = u[j + 1] + g * hp * yd[j + 1] * rp[j + 1];
        double denom = 1.0 - 0.25 * g * hp * hp * rp[j] * w[j];
        u[j] = (C + g * hp * rp[j] * A) / denom;
        yd[j] = A + 0.25 * hp * w[j] * u[j];
    }
    dg.Gdot.resize(N);
    for (int j = 0; j < N; ++j) dg.Gdot[j] = u[j] - 1.0;
    dg.Ydot = yd;
    dg.Qdot = 1.0 - 2.0 * g * b.rho0() * yd[0];

    // Qddot from centered differences of Qdot in lambda.
    auto qdot_at = [&](double lam) {
        LaminarOptions o = opt;
        o.Np = N;
        o.allow_below_floor = true;
        LaminarFlow fl = solve_laminar(b, lam, o);
        std::vector<double> uu(N), yy(N), ww(N);
        for (int j = 0; j < N; ++j) ww[j] = std::pow(lam + fl.G[j], -1.5);
        uu[N - 1] = 1.0;
        yy[N - 1] = 0.0;
        for (int j = N - 2; j >= 0; --j) {
            double A = yy[j + 1] + 0.25 * hp * ww[j + 1] * uu[j + 1];
            double C = uu[j + 1] + g * hp * yy[j + 1] * rp[j + 1];
            double denom = 1.0 - 0.25 * g * hp * hp * rp[j] * ww[j];
            uu[j] = (C + g * hp * rp[j] * A) / denom;
            yy[j] = A + 0.25 * hp * ww[j] * uu[j];
        }
        return 1.0 - 2.0 * g * b.rho0() * yy[0];
    };
    double h = 1e-4 * std::max(1.0, flow.lambda);
    if (flow.lambda - h > -2.0 * b.B_min() + 0.5 * (flow.lambda + 2.0 * b.B_min()))
        dg.Qddot = (qdot_at(flow.lambda + h) - qdot_at(flow.lambda - h)) / (2.0 * h);
    else
        dg.Qddot = (qdot_at(flow.lambda + h) - dg.Qdot) / h;
    return dg;
}

LaminarDiagnostics g_dot(const ProfileBundle& b, double lambda, const LaminarOptions& opt) {
    return g_dot(b, solve_laminar(b, lambda, opt), opt);
}

LaminarShot shoot_laminar(const ProfileBundle& b, double lambda, double rtol) {
    if (!(lambda > -2.0 * b.B_min())) fail(ErrorCode::InvalidArgument, "lambda must exceed -2 Bmin");
    using State6 = std::array<double, 6>;
    const double g = b.g();
    // (Y, F, Ydot, Fdot, Yddot, Fddot) as functions of p.
    auto rhs = [&](const State6& x, State6& dx, double p) {
        double w = std::max(lambda + 2.0 * x[1], 1e-300);
        double r12 = 1.0 / std::sqrt(w), r32 = r12 / w, r52 = r32 / w;
        double rp = b.rho_p(p);
        double u = 1.0 + 2.0 * x[3];
        dx[0] = r12;
        dx[1] = b.beta(-p) - g * x[0] * rp;
        dx[2] = -0.5 * r32 * u;
        dx[3] = -g * x[2] * rp;
        dx[4] = 0.75 * r52 * u * u - r32 * x[5];
        dx[5] = -g * x[4] * rp;
    };
    State6 x{};
    auto stepper = odeint::make_controlled(rtol * 1e-2, rtol, odeint::runge_kutta_fehlberg78<State6>());
    odeint::integrate_adaptive(stepper, rhs, x, 0.0, b.p0(), 0.05 * b.p0());
    LaminarShot r;
    r.d = -x[0];
    r.Q = lambda + 2.0 * g * b.rho0() * r.d;
    r.Qdot = 1.0 - 2.0 * g * b.rho0() * x[2];
    r.Qddot = -2.0 * g * b.rho0() * x[4];
    return r;
}

Lambda0Result find_lambda0(const ProfileBundle& b, double lambda_max, const LaminarOptions&) {
    double lo = b.lambda_min();
    double hi = lambda_max > 0.0 ? lambda_max : b.lambda_sweep_max();
    if (!(hi > lo)) fail(ErrorCode::InvalidArgument, "empty lambda range");
    auto Q = [&](double l) { return shoot_laminar(b, l).Q; };
    auto Qdot = [&](double l) { return shoot_laminar(b, l).Qdot; };
    if (Qdot(lo) >= 0.0) return {lo, Q(lo), true};
    if (Qdot(hi) < 0.0) {
        std::ostringstream os;
        os << "Q still decreasing at lambda_max = " << hi;
        fail(ErrorCode::NoMinimumInRange, os.str());
    }
    // Golden-section search on the convex Q.
    const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo, c = hi;
    double x1 = c - invphi * (c - a), x2 = a + invphi * (c - a);
    double f1 = Q(x1), f2 = Q(x2);
    while (c - a > 1e-7 * std::max(1.0, std::fabs(c))) {
        if (f1 < f2) {
            c = x2;
            x2 = x1;
            f2 = f1;
            x1 = c - invphi * (c - a);
            f1 = Q(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + invphi * (c - a);
            f2 = Q(x2);
        }
    }
    // Golden section resolves the flat minimum only to ~sqrt(eps); polish on Qdot.
    double ga = std::max(lo, a - (c - a)), gc = std::min(hi, c + (c - a));
    double fa = Qdot(ga), fc = Qdot(gc);
    double lam0 = 0.5 * (a + c);
    if (fa < 0.0 && fc > 0.0) {
        std::uintmax_t iters = 100;
        auto tol = [](double u, double v) { return std::fabs(u - v) <= 1e-14 * std::fabs(u); };
        auto r = boost::math::tools::toms748_solve(Qdot, ga, gc, fa, fc, tol, iters);
        lam0 = 0.5 * (r.first + r.second);
    }
    return {lam0, Q(lam0), false};
}

}  // namespace strataflow
