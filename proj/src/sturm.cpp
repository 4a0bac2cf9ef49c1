#include "strataflow/sturm.hpp"

#include <cmath>
#include <sstream>

#include <lapacke.h>
#include <boost/math/constants/constants.hpp>
#include <boost/math/tools/toms748_solve.hpp>
#include <boost/numeric/odeint.hpp>

#include "strataflow/error.hpp"
#include "strataflow/parallel.hpp"

namespace strataflow {

namespace {

constexpr double kPi = boost::math::constants::pi<double>();

// Linear finite elements with a lumped (trapezoid) weight; j = 0 is the bed node.
struct Pencil {
    std::vector<double> elem;  // stiffness coefficient of element (j, j+1)
    std::vector<double> mass;  // trapezoid weight times (a + g rho_p)
    double robin = 0.0;
};

Pencil build_pencil(const ProfileBundle& b, const LaminarFlow& flow) {
    const int N = flow.Np();
    const double hp = std::fabs(b.p0()) / double(N - 1);
    Pencil P;
    P.elem.resize(N - 1);
    P.mass.resize(N);
    std::vector<double> a(N);
    for (int j = 0; j < N; ++j) a[j] = 1.0 / flow.Hp[j];
    for (int j = 0; j + 1 < N; ++j) P.elem[j] = (a[j] * a[j] * a[j] + a[j + 1] * a[j + 1] * a[j + 1]) / (2.0 * hp);
    for (int j = 0; j < N; ++j) {
        double w = (j == 0 || j == N - 1) ? 0.5 * hp : hp;
        P.mass[j] = w * (a[j] + b.g() * b.rho_p(flow.p[j]));
    }
    P.robin = b.g() * b.rho0();
    return P;
}

}  // namespace

double rayleigh(const ProfileBundle& b, const LaminarFlow& flow, const std::vector<double>& phi) {
    const int N = flow.Np();
    if (int(phi.size()) != N) fail(ErrorCode::InvalidArgument, "test function size differs from the grid");
    Pencil P = build_pencil(b, flow);
    double num = -P.robin * phi[N - 1] * phi[N - 1];
    for (int j = 0; j + 1 < N; ++j) {
        double dphi = phi[j + 1] - phi[j];
        num += P.elem[j] * dphi * dphi;
    }
    double den = 0.0;
    for (int j = 0; j < N; ++j) den += P.mass[j] * phi[j] * phi[j];
    if (!(den > 0.0)) fail(ErrorCode::DegenerateDenominator, "Rayleigh denominator is not positive");
    return num / den;
}

double rayleigh(const ProfileBundle& b, double lambda, const std::vector<double>& phi) {
    LaminarOptions o;
    o.Np = int(phi.size());
    o.allow_below_floor = true;
    return rayleigh(b, solve_laminar(b, lambda, o), phi);
}

EigenResult principal_eigen(const ProfileBundle& b, const LaminarFlow& flow) {
    const int N = flow.Np();
    const int n = N - 1;  // unknowns j = 1..N-1
    Pencil P = build_pencil(b, flow);
    for (int j = 1; j < N; ++j) {
        if (!(P.mass[j] > 0.0)) {
            std::ostringstream os;
            os << "weight a + g rho_p not positive at p = " << flow.p[j] << " (lambda = " << flow.lambda << ")";
            fail(ErrorCode::DegenerateDenominator, os.str());
        }
    }
    std::vector<double> d(n), e(std::max(n - 1, 1)), sq(n);
    for (int k = 0; k < n; ++k) sq[k] = std::sqrt(P.mass[k + 1]);
    for (int k = 0; k < n; ++k) {
        int j = k + 1;
        double kd = P.elem[j - 1] + (j + 1 < N ? P.elem[j] : 0.0);
        if (j == N - 1) kd -= P.robin;
        d[k] = kd / P.mass[j];
        if (k + 1 < n) e[k] = -P.elem[j] / (sq[k] * sq[k + 1]);
    }
    // Smallest eigenvalue of the symmetric tridiagonal by Sturm bisection, vector by inverse iteration.
    lapack_int m = 0, nsplit = 0;
    std::vector<double> w(n);
    std::vector<lapack_int> iblock(n), isplit(n);
    double abstol = 2.0 * LAPACKE_dlamch('S');
    lapack_int info = LAPACKE_dstebz('I', 'E', n, 0.0, 0.0, 1, 1, abstol, d.data(), e.data(), &m, &nsplit,
                                     w.data(), iblock.data(), isplit.data());
    if (info != 0 || m < 1) fail(ErrorCode::Internal, "tridiagonal bisection failed");
    std::vector<double> z(n);
    std::vector<lapack_int> ifail(1);
    info = LAPACKE_dstein(LAPACK_COL_MAJOR, n, d.data(), e.data(), 1, w.data(), iblock.data(), isplit.data(),
                          z.data(), n, ifail.data());
    if (info != 0) fail(ErrorCode::Internal, "inverse iteration failed");

    EigenResult r;
    r.lambda = flow.lambda;
    r.mu = w[0];
    r.p = flow.p;
    r.M.assign(N, 0.0);
    double amax = 0.0;
    int imax = N - 1;
    for (int k = 0; k < n; ++k) {
        r.M[k + 1] = z[k] / sq[k];
        if (std::fabs(r.M[k + 1]) > amax) {
            amax = std::fabs(r.M[k + 1]);
            imax = k + 1;
        }
    }
    double scale = (r.M[N - 1] < 0.0 ? -1.0 : 1.0) / amax;
    if (r.M[N - 1] == 0.0) scale = (r.M[imax] < 0.0 ? -1.0 : 1.0) / amax;
    for (double& v : r.M) v *= scale;
    return r;
}

EigenResult principal_eigen(const ProfileBundle& b, double lambda, int Np) {
    LaminarOptions o;
    o.Np = Np;
    o.allow_below_floor = true;
    return principal_eigen(b, solve_laminar(b, lambda, o));
}

void mu_sweep(const ProfileBundle& b, double lo, double hi, int points, int Np, int threads,
              std::vector<double>& lambdas, std::vector<double>& mus) {
    if (points < 2) fail(ErrorCode::InvalidArgument, "sweep needs at least two points");
    lambdas.resize(points);
    mus.resize(points);
    for (int i = 0; i < points; ++i) lambdas[i] = lo * std::pow(hi / lo, double(i) / double(points - 1));
    lambdas.back() = hi;
    parallel_for(points, threads, [&](int i) {
        LaminarOptions o;
        o.Np = Np;
        mus[i] = principal_eigen(b, solve_laminar(b, lambdas[i], o)).mu;
    });
}

LBCheck check_lb_condition(const ProfileBundle& b, const SturmOptions& opt) {
    LBCheck r;
    double lo = b.lambda_min();
    double hi = opt.lambda_hi > 0.0 ? opt.lambda_hi : b.lambda_sweep_max();
    mu_sweep(b, lo, hi, opt.sweep_points, opt.Np, opt.threads, r.lambdas, r.mus);
    r.inf_estimate = r.mus[0];
    r.lambda_at_inf = r.lambdas[0];
    for (std::size_t i = 1; i < r.mus.size(); ++i)
        if (r.mus[i] < r.inf_estimate) {
            r.inf_estimate = r.mus[i];
            r.lambda_at_inf = r.lambdas[i];
        }
    r.holds = r.inf_estimate < -1.0;
    return r;
}

BifurcationPoint find_lambda_star(const ProfileBundle& b, const SturmOptions& opt) {
    BifurcationPoint bp;
    double lo = b.lambda_min();
    double hi = opt.lambda_hi > 0.0 ? opt.lambda_hi : b.lambda_sweep_max();
    mu_sweep(b, lo, hi, opt.sweep_points, opt.Np, opt.threads, bp.sweep_lambda, bp.sweep_mu);
    for (int ext = 0; ext < 2 && bp.sweep_mu.back() < -1.0; ++ext) {
        std::vector<double> l2, m2;
        mu_sweep(b, hi, 4.0 * hi, opt.sweep_points, opt.Np, opt.threads, l2, m2);
        bp.sweep_lambda.insert(bp.sweep_lambda.end(), l2.begin() + 1, l2.end());
        bp.sweep_mu.insert(bp.sweep_mu.end(), m2.begin() + 1, m2.end());
        hi *= 4.0;
    }
    const auto& L = bp.sweep_lambda;
    const auto& U = bp.sweep_mu;
    int k = -1;
    for (std::size_t i = 0; i + 1 < U.size(); ++i) {
        if ((U[i] + 1.0 < 0.0) != (U[i + 1] + 1.0 < 0.0)) {
            ++bp.sign_changes;
            if (k < 0 && U[i] < -1.0) k = int(i);
        }
    }
    if (k < 0) {
        std::ostringstream os;
        double inf = *std::min_element(U.begin(), U.end());
        os << "mu(lambda) + 1 has no sign change on [" << lo << ", " << hi << "], inf mu = " << inf;
        fail(ErrorCode::LBViolated, os.str());
    }
    LaminarOptions lo_opt;
    lo_opt.Np = opt.Np;
    auto f = [&](double lam) { return principal_eigen(b, solve_laminar(b, lam, lo_opt)).mu + 1.0; };
    double a = L[k], c = L[k + 1];
    double fa = U[k] + 1.0, fc = U[k + 1] + 1.0;
    std::uintmax_t iters = 200;
    auto tol = [](double u, double v) { return std::fabs(u - v) <= 4e-16 * std::fabs(u); };
    auto root = boost::math::tools::toms748_solve(f, a, c, fa, fc, tol, iters);
    double ls = std::fabs(f(root.first)) <= std::fabs(f(root.second)) ? root.first : root.second;

    bp.lambda_star = ls;
    bp.laminar = solve_laminar(b, ls, lo_opt);
    bp.eigen = principal_eigen(b, bp.laminar);
    bp.Q_star = bp.laminar.Q;
    bp.diag = g_dot(b, bp.laminar, lo_opt);
    double lmax = b.lambda_sweep_max();
    for (int ext = 0;; ++ext) {
        try {
            auto r0 = find_lambda0(b, lmax);
            bp.lambda0 = r0.lambda0;
            bp.lambda0_boundary = r0.boundary_minimum;
            break;
        } catch (const Error& e) {
            if (e.code() != ErrorCode::NoMinimumInRange || ext >= 4) throw;
            lmax *= 4.0;
        }
    }
    bp.below_lambda0 = bp.lambda_star < bp.lambda0;
    bp.xi = transversality_xi(b, bp);
    return bp;
}

namespace {

using State12 = std::array<double, 12>;

// Laminar state, lambda-variations, ground state (M, W = a^3 M') and the
// Xi integrands, all as functions of p integrated from the surface down.
State12 shoot_eigen(const ProfileBundle& b, double lambda) {
    const double g = b.g();
    auto rhs = [&](const State12& x, State12& dx, double p) {
        double a = std::sqrt(std::max(lambda + 2.0 * x[1], 1e-300));
        double a3 = a * a * a;
        double rp = b.rho_p(p), be = b.beta(-p);
        double u = 1.0 + 2.0 * x[3];
        double M = x[4], Mp = x[5] / a3;
        dx[0] = 1.0 / a;
        dx[1] = be - g * x[0] * rp;
        dx[2] = -0.5 * u / a3;
        dx[3] = -g * x[2] * rp;
        dx[4] = Mp;
        dx[5] = (a + g * rp) * M;
        dx[6] = u / a * M * M;
        dx[7] = u / a * be * M * Mp;
        dx[8] = x[2] * a * rp * M * Mp;
        dx[9] = x[0] * u / a * rp * M * Mp;
        dx[10] = u / (a * a) * rp * M * M;
        dx[11] = a * u * Mp * Mp;
    };
    State12 x{};
    x[4] = 1.0;
    x[5] = g * b.rho0();
    namespace odeint = boost::numeric::odeint;
    auto stepper = odeint::make_controlled(1e-15, 1e-13, odeint::runge_kutta_fehlberg78<State12>());
    odeint::integrate_adaptive(stepper, rhs, x, 0.0, b.p0(), 0.02 * b.p0());
    return x;
}

double trapz(const std::vector<double>& f, double h) {
    double s = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) s += (i == 0 || i + 1 == f.size() ? 0.5 : 1.0) * f[i];
    return s * h;
}

}  // namespace

Transversality transversality_xi(const ProfileBundle& b, const BifurcationPoint& bp) {
    Transversality t;
    const double g = b.g(), rho0 = b.rho0();

    // Continuum lambda* by secant on M(p0; lambda) = 0, started from the grid value.
    double l1 = bp.lambda_star, l2 = bp.lambda_star * (1.0 + 1e-4);
    double f1 = shoot_eigen(b, l1)[4], f2 = shoot_eigen(b, l2)[4];
    for (int it = 0; it < 60 && f2 != f1; ++it) {
        double l3 = l2 - f2 * (l2 - l1) / (f2 - f1);
        l1 = l2;
        f1 = f2;
        l2 = l3;
        f2 = shoot_eigen(b, l2)[4];
        if (std::fabs(l2 - l1) <= 1e-15 * std::fabs(l2)) break;
    }
    const double lam = l2;
    t.lambda_continuum = lam;
    State12 x = shoot_eigen(b, lam);
    // Accumulators hold int_0^{p0}; flip to int_{p0}^0.
    double I1 = -x[6], I2 = -x[7], I3 = -x[8], I4 = -x[9], I5 = -x[10], Iid = -x[11];
    double M0 = 1.0, Mp0 = g * rho0 / std::pow(lam, 1.5);
    t.terms[0] = kPi * I1;
    t.terms[1] = -3.0 * kPi * I2;
    t.terms[2] = -3.0 * g * kPi * I3;
    t.terms[3] = 3.0 * g * kPi * I4;
    t.terms[4] = 1.5 * g * kPi * I5;
    t.terms[5] = -2.0 * g * rho0 / lam * kPi * M0 * M0;
    t.terms[6] = -0.5 * kPi * std::sqrt(lam) * M0 * Mp0;
    t.xi = 0.0;
    for (double v : t.terms) t.xi += v;
    t.identity = -0.5 * t.terms[0] - 1.5 * kPi * Iid + 0.5 * t.terms[5];

    // Grid version on the discrete eigenpair.
    const LaminarFlow& fl = bp.laminar;
    const int N = fl.Np();
    const double hp = std::fabs(b.p0()) / double(N - 1);
    const auto& M = bp.eigen.M;
    std::vector<double> Mp(N);
    for (int j = 1; j + 1 < N; ++j) Mp[j] = (M[j + 1] - M[j - 1]) / (2.0 * hp);
    Mp[0] = (-3.0 * M[0] + 4.0 * M[1] - M[2]) / (2.0 * hp);
    Mp[N - 1] = (3.0 * M[N - 1] - 4.0 * M[N - 2] + M[N - 3]) / (2.0 * hp);
    std::vector<double> f[6];
    for (auto& v : f) v.resize(N);
    for (int j = 0; j < N; ++j) {
        double a = 1.0 / fl.Hp[j], u = 1.0 + bp.diag.Gdot[j], rp = b.rho_p(fl.p[j]), be = b.beta(-fl.p[j]);
        f[0][j] = u / a * M[j] * M[j];
        f[1][j] = u / a * be * M[j] * Mp[j];
        f[2][j] = bp.diag.Ydot[j] * a * rp * M[j] * Mp[j];
        f[3][j] = fl.Y[j] * u / a * rp * M[j] * Mp[j];
        f[4][j] = u / (a * a) * rp * M[j] * M[j];
        f[5][j] = a * u * Mp[j] * Mp[j];
    }
    double lg = bp.lambda_star, Mt = M[N - 1];
    double x1 = kPi * trapz(f[0], hp);
    double x6 = -2.0 * g * rho0 / lg * kPi * Mt * Mt;
    t.xi_grid = x1 - 3.0 * kPi * trapz(f[1], hp) - 3.0 * g * kPi * trapz(f[2], hp) +
                3.0 * g * kPi * trapz(f[3], hp) + 1.5 * g * kPi * trapz(f[4], hp) + x6 -
                0.5 * kPi * std::sqrt(lg) * Mt * Mp[N - 1];
    t.identity_grid = -0.5 * x1 - 1.5 * kPi * trapz(f[5], hp) + 0.5 * x6;
    return t;
}

}  // namespace strataflow
