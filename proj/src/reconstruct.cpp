#include "strataflow/reconstruct.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/interpolators/cardinal_cubic_b_spline.hpp>
#include <boost/numeric/odeint.hpp>

#include "strataflow/error.hpp"
#include "strataflow/parallel.hpp"

namespace strataflow {

namespace odeint = boost::numeric::odeint;

double VerificationReport::max_entry() const {
    return std::max({incompressibility, mass_transport, momentum_x, momentum_y, kinematic, surface_pressure, bed_v,
                     flux, bernoulli, yih});
}

namespace {

// Fourth-order first derivative along a uniform line of n >= 5 samples; off-centered
// stencils at the two nodes next to each end.
template <class F>
double d1(F&& f, int j, int n, double h) {
    if (j == 0) return (-25.0 * f(0) + 48.0 * f(1) - 36.0 * f(2) + 16.0 * f(3) - 3.0 * f(4)) / (12.0 * h);
    if (j == 1) return (-3.0 * f(0) - 10.0 * f(1) + 18.0 * f(2) - 6.0 * f(3) + f(4)) / (12.0 * h);
    if (j == n - 1)
        return (25.0 * f(n - 1) - 48.0 * f(n - 2) + 36.0 * f(n - 3) - 16.0 * f(n - 4) + 3.0 * f(n - 5)) / (12.0 * h);
    if (j == n - 2)
        return (3.0 * f(n - 1) + 10.0 * f(n - 2) - 18.0 * f(n - 3) + 6.0 * f(n - 4) - f(n - 5)) / (12.0 * h);
    return (f(j - 2) - 8.0 * f(j - 1) + 8.0 * f(j + 1) - f(j + 2)) / (12.0 * h);
}

// Fourth-order centered first derivative on a periodic line.
template <class F>
double d1_periodic(F&& f, int k, int n, double h) {
    auto at = [&](int m) { return f(((m % n) + n) % n); };
    return (at(k - 2) - 8.0 * at(k - 1) + 8.0 * at(k + 1) - at(k + 2)) / (12.0 * h);
}

double column_hp(const HeightField& f, int i, int j) {
    return d1([&](int m) { return f.at(i, m); }, j, f.grid.Np, f.grid.hp());
}

double column_hq(const HeightField& f, int i, int j) {
    const Grid& g = f.grid;
    auto at = [&](int m) { return f.at(g.reflect(m), j); };
    return (at(i - 2) - 8.0 * at(i - 1) + 8.0 * at(i + 1) - at(i + 2)) / (12.0 * g.hq());
}

}  // namespace

PhysicalField to_physical(const ProfileBundle& b, const HeightField& f) {
    const Grid& gr = f.grid;
    if (!(min_hp(f) > 0.0)) fail(ErrorCode::StagnationGuard, "min h_p must be positive");
    PhysicalField pf;
    pf.Nx = 2 * (gr.Nq - 1);
    pf.Np = gr.Np;
    pf.hq = gr.hq();
    pf.hp = gr.hp();
    pf.p0 = gr.p0;
    pf.g = b.g();
    pf.c = b.c();
    pf.Q = f.Q;
    pf.d = mean_top(f);
    pf.E_surface = 0.5 * f.Q - b.g() * b.rho0() * pf.d;
    const int Nx = pf.Nx, N = pf.Np;
    const std::size_t n = std::size_t(Nx) * N;
    for (auto* v : {&pf.y, &pf.u, &pf.v, &pf.rho, &pf.P, &pf.psi, &pf.h_q, &pf.h_p, &pf.rho_p, &pf.beta})
        v->assign(n, 0.0);
    pf.x.resize(Nx);
    pf.eta.resize(Nx);
    std::vector<double> rho(N), rhop(N), beta(N), B(N);
    for (int j = 0; j < N; ++j) {
        double p = gr.p(j);
        rho[j] = b.rho(p);
        rhop[j] = b.rho_p(p);
        beta[j] = b.beta(-p);
        B[j] = b.B(p);
    }
    parallel_for(Nx, 0, [&](int k) {
        const int i = std::abs(k - (gr.Nq - 1));
        const double sgn = k < gr.Nq - 1 ? -1.0 : 1.0;
        pf.x[k] = -std::numbers::pi + k * pf.hq;
        pf.eta[k] = f.at(i, N - 1) - pf.d;
        for (int j = 0; j < N; ++j) {
            const int id = pf.idx(k, j);
            const double hp = column_hp(f, i, j);
            const double hq = sgn * column_hq(f, i, j);
            const double sr = std::sqrt(rho[j]);
            pf.h_p[id] = hp;
            pf.h_q[id] = hq;
            pf.y[id] = f.at(i, j) - pf.d;
            pf.u[id] = pf.c - 1.0 / (sr * hp);
            pf.v[id] = -hq / (sr * hp);
            pf.rho[id] = rho[j];
            pf.rho_p[id] = rhop[j];
            pf.beta[id] = beta[j];
            pf.psi[id] = -gr.p(j);
            pf.P[id] = pf.E_surface + B[j] - (1.0 + hq * hq) / (2.0 * hp * hp) - pf.g * rho[j] * pf.y[id];
        }
    });
    return pf;
}

namespace {

struct Diff {
    const PhysicalField& pf;

    double dq(const std::vector<double>& a, int k, int j) const {
        return d1_periodic([&](int m) { return a[pf.idx(m, j)]; }, k, pf.Nx, pf.hq);
    }
    double dp(const std::vector<double>& a, int k, int j) const {
        return d1([&](int m) { return a[pf.idx(k, m)]; }, j, pf.Np, pf.hp);
    }
    // Chain rule on the streamline-fitted mesh.
    double dx(const std::vector<double>& a, int k, int j) const {
        int id = pf.idx(k, j);
        return dq(a, k, j) - pf.h_q[id] / pf.h_p[id] * dp(a, k, j);
    }
    double dy(const std::vector<double>& a, int k, int j) const { return dp(a, k, j) / pf.h_p[pf.idx(k, j)]; }
};

}  // namespace

VerificationReport euler_residual(const PhysicalField& pf) {
    VerificationReport r;
    r.hq = pf.hq;
    r.hp = pf.hp;
    const int Nx = pf.Nx, N = pf.Np;
    Diff D{pf};
    std::vector<double> px(pf.u.size()), py(pf.u.size());
    for (int k = 0; k < Nx; ++k)
        for (int j = 0; j < N; ++j) {
            px[pf.idx(k, j)] = D.dx(pf.psi, k, j);
            py[pf.idx(k, j)] = D.dy(pf.psi, k, j);
        }
    std::vector<VerificationReport> col(Nx);
    parallel_for(Nx, 0, [&](int k) {
        VerificationReport& c = col[k];
        for (int j = 1; j < N - 1; ++j) {
            const int id = pf.idx(k, j);
            const double rho = pf.rho[id], w = pf.u[id] - pf.c, v = pf.v[id];
            const double ux = D.dx(pf.u, k, j), uy = D.dy(pf.u, k, j);
            const double vx = D.dx(pf.v, k, j), vy = D.dy(pf.v, k, j);
            const double Px = D.dx(pf.P, k, j), Py = D.dy(pf.P, k, j);
            const double rx = D.dx(pf.rho, k, j), ry = D.dy(pf.rho, k, j);
            c.incompressibility = std::max(c.incompressibility, std::fabs(ux + vy));
            c.mass_transport = std::max(c.mass_transport, std::fabs(w * rx + v * ry));
            c.momentum_x = std::max(c.momentum_x, std::fabs(rho * (w * ux + v * uy) + Px));
            c.momentum_y = std::max(c.momentum_y, std::fabs(rho * (w * vx + v * vy) + Py + pf.g * rho));
            const double lap = D.dx(px, k, j) + D.dy(py, k, j);
            c.yih = std::max(c.yih, std::fabs(lap + pf.beta[id] - pf.g * pf.y[id] * pf.rho_p[id]));
        }
        const int top = pf.idx(k, N - 1), bed = pf.idx(k, 0);
        const double eta_x = d1_periodic([&](int m) { return pf.eta[m]; }, k, Nx, pf.hq);
        c.kinematic = std::fabs(pf.v[top] - (pf.u[top] - pf.c) * eta_x);
        c.surface_pressure = std::fabs(pf.P[top]);
        c.bed_v = std::fabs(pf.v[bed]);
        const double wt = pf.u[top] - pf.c;
        c.bernoulli = std::fabs(pf.rho[top] * (wt * wt + pf.v[top] * pf.v[top]) +
                                2.0 * pf.g * pf.rho[top] * (pf.eta[k] + pf.d) - pf.Q);
        double flux = 0.0;
        for (int j = 0; j + 1 < N; ++j) {
            const int a = pf.idx(k, j), bb = pf.idx(k, j + 1);
            const double fa = std::sqrt(pf.rho[a]) * (pf.u[a] - pf.c), fb = std::sqrt(pf.rho[bb]) * (pf.u[bb] - pf.c);
            flux += 0.5 * (fa + fb) * (pf.y[bb] - pf.y[a]);
        }
        c.flux = std::fabs(flux - pf.p0);
    });
    for (const auto& c : col) {
        r.incompressibility = std::max(r.incompressibility, c.incompressibility);
        r.mass_transport = std::max(r.mass_transport, c.mass_transport);
        r.momentum_x = std::max(r.momentum_x, c.momentum_x);
        r.momentum_y = std::max(r.momentum_y, c.momentum_y);
        r.kinematic = std::max(r.kinematic, c.kinematic);
        r.surface_pressure = std::max(r.surface_pressure, c.surface_pressure);
        r.bed_v = std::max(r.bed_v, c.bed_v);
        r.flux = std::max(r.flux, c.flux);
        r.bernoulli = std::max(r.bernoulli, c.bernoulli);
        r.yih = std::max(r.yih, c.yih);
    }
    return r;
}

StreamCheck stream_consistency(const ProfileBundle&, const HeightField& f, int column) {
    const Grid& gr = f.grid;
    if (column < 0 || column >= gr.Nq) fail(ErrorCode::InvalidArgument, "column out of range");
    const int N = gr.Np;
    const double d = mean_top(f);
    std::vector<double> F(N);
    for (int j = 0; j < N; ++j) F[j] = 1.0 / column_hp(f, column, j);
    boost::math::interpolators::cardinal_cubic_b_spline<double> spline(F.begin(), F.end(), gr.p0, gr.hp());
    auto Fp = [&](double p) { return spline(std::clamp(p, gr.p0, 0.0)); };
    // t = eta - y grows downward; d psi / dt = F(-psi).
    using State = std::array<double, 1>;
    auto rhs = [&](const State& s, State& ds, double) { ds[0] = Fp(-s[0]); };
    const double ytop = f.at(column, N - 1) - d;
    std::vector<double> times(N);
    for (int j = 0; j < N; ++j) times[j] = ytop - (f.at(column, N - 1 - j) - d);
    std::vector<double> psi(N);
    State s{0.0};
    int m = 0;
    auto stepper = odeint::make_dense_output(1e-13, 1e-13, odeint::runge_kutta_dopri5<State>());
    odeint::integrate_times(stepper, rhs, s, times.begin(), times.end(), 1e-3 * gr.hp(),
                            [&](const State& st, double) { psi[m++] = st[0]; });
    StreamCheck out;
    for (int j = 0; j < N; ++j) out.deviation = std::max(out.deviation, std::fabs(psi[N - 1 - j] + gr.p(j)));
    // One Newton step from the last node to the level psi = -p0.
    const double yb = f.at(column, 0) - d;
    const double psib = psi[N - 1];
    out.bed_depth = yb - (-gr.p0 - psib) / Fp(-psib);
    out.bed_error = std::fabs(out.bed_depth + d);
    return out;
}

CartesianField resample_cartesian(const PhysicalField& pf, int Ny) {
    if (Ny < 2) fail(ErrorCode::InvalidArgument, "Ny must be at least 2");
    CartesianField cf;
    cf.Nx = pf.Nx;
    cf.Ny = Ny;
    cf.x = pf.x;
    const double top = *std::max_element(pf.eta.begin(), pf.eta.end());
    cf.y.resize(Ny);
    for (int m = 0; m < Ny; ++m) cf.y[m] = -pf.d + (top + pf.d) * m / double(Ny - 1);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (auto* v : {&cf.u, &cf.v, &cf.rho, &cf.P}) v->assign(std::size_t(cf.Nx) * Ny, nan);
    for (int k = 0; k < cf.Nx; ++k) {
        int j = 0;
        for (int m = 0; m < Ny; ++m) {
            const double y = cf.y[m];
            if (y > pf.y[pf.idx(k, pf.Np - 1)] + 1e-14 * std::max(1.0, pf.d)) continue;
            while (j + 2 < pf.Np && pf.y[pf.idx(k, j + 1)] < y) ++j;
            const int a = pf.idx(k, j), b = pf.idx(k, j + 1);
            const double t = std::clamp((y - pf.y[a]) / (pf.y[b] - pf.y[a]), 0.0, 1.0);
            const std::size_t o = std::size_t(k) * Ny + m;
            cf.u[o] = pf.u[a] + t * (pf.u[b] - pf.u[a]);
            cf.v[o] = pf.v[a] + t * (pf.v[b] - pf.v[a]);
            cf.rho[o] = pf.rho[a] + t * (pf.rho[b] - pf.rho[a]);
            cf.P[o] = pf.P[a] + t * (pf.P[b] - pf.P[a]);
        }
    }
    return cf;
}

RefinementCheck refinement_check(const ProfileBundle& b, const HeightField& f, double lambda_ref,
                                 const NewtonOptions& opt) {
    const Grid& gc = f.grid;
    Grid gf = Grid::make(2 * gc.Nq, 2 * gc.Np, gc.p0);
    LaminarOptions lo;
    lo.allow_below_floor = true;
    lo.Np = gc.Np;
    LaminarFlow lc = solve_laminar(b, lambda_ref, lo);
    lo.Np = gf.Np;
    LaminarFlow lf = solve_laminar(b, lambda_ref, lo);
    HeightField Lc = laminar_field(gc, lc);
    Lc.Q = lc.Q;
    HeightField Lcf = resample_field(Lc, gf);
    HeightField Lf = laminar_field(gf, lf);

    HeightField guess = resample_field(f, gf);
    for (std::size_t k = 0; k < guess.h.size(); ++k) guess.h[k] += Lf.h[k] - Lcf.h[k];
    guess.Q += lf.Q - lc.Q;

    NewtonOptions o = opt;
    o.constraint = crest_elevation_constraint(gf, f.at(0, gc.Np - 1) - mean_top(f));
    NewtonResult r = newton_solve(b, guess, o);

    RefinementCheck rc;
    rc.coarse = euler_residual(to_physical(b, f)).max_entry();
    rc.fine = euler_residual(to_physical(b, r.field)).max_entry();
    rc.ratio = rc.coarse / rc.fine;
    rc.iterations = r.iterations;
    rc.fine_field = std::move(r.field);
    return rc;
}

}  // namespace strataflow
