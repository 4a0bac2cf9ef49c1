#include "strataflow/heightpde.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <boost/math/constants/constants.hpp>
#include <boost/math/interpolators/cardinal_cubic_b_spline.hpp>

#include "strataflow/error.hpp"

namespace strataflow {

namespace {
constexpr double kPi = boost::math::constants::pi<double>();
}

Grid Grid::make(int Nq, int Np, double p0) {
    if (Nq < 16 || Np < 16) fail(ErrorCode::InvalidArgument, "grid needs Nq >= 16 and Np >= 16");
    if (!(p0 < 0.0)) fail(ErrorCode::InvalidArgument, "p0 must be negative");
    Grid g;
    g.Nq = Nq;
    g.Np = Np;
    g.p0 = p0;
    return g;
}

double Grid::hq() const { return kPi / double(Nq - 1); }
double Grid::hp() const { return std::fabs(p0) / double(Np - 1); }

std::vector<double> HeightField::unknown_vector() const {
    std::vector<double> x(grid.unknowns());
    for (int i = 0; i < grid.Nq; ++i)
        for (int j = 1; j < grid.Np; ++j) x[grid.unknown(i, j)] = at(i, j);
    return x;
}

void HeightField::set_unknowns(const std::vector<double>& x) {
    for (int i = 0; i < grid.Nq; ++i)
        for (int j = 1; j < grid.Np; ++j) at(i, j) = x[grid.unknown(i, j)];
}

HeightField laminar_field(const Grid& grid, const LaminarFlow& flow) {
    if (flow.Np() != grid.Np) fail(ErrorCode::InvalidArgument, "laminar grid differs from the height grid");
    HeightField f(grid);
    for (int i = 0; i < grid.Nq; ++i)
        for (int j = 0; j < grid.Np; ++j) f.at(i, j) = flow.H[j];
    f.Q = flow.Q;
    return f;
}

std::vector<double> mean_top_weights(const Grid& grid) {
    std::vector<double> w(grid.Nq, 1.0 / double(grid.Nq - 1));
    w.front() *= 0.5;
    w.back() *= 0.5;
    return w;
}

double mean_top(const HeightField& f) {
    auto w = mean_top_weights(f.grid);
    double s = 0.0;
    for (int i = 0; i < f.grid.Nq; ++i) s += w[i] * f.at(i, f.grid.Np - 1);
    return s;
}

double hp_at(const HeightField& f, int i, int j) {
    const int N = f.grid.Np;
    const double dp = f.grid.hp();
    if (j == 0) return (-3.0 * f.at(i, 0) + 4.0 * f.at(i, 1) - f.at(i, 2)) / (2.0 * dp);
    if (j == N - 1) return (3.0 * f.at(i, N - 1) - 4.0 * f.at(i, N - 2) + f.at(i, N - 3)) / (2.0 * dp);
    return (f.at(i, j + 1) - f.at(i, j - 1)) / (2.0 * dp);
}

double hq_at(const HeightField& f, int i, int j) {
    const Grid& g = f.grid;
    return (f.at(g.reflect(i + 1), j) - f.at(g.reflect(i - 1), j)) / (2.0 * g.hq());
}

double min_hp(const HeightField& f) {
    double m = std::numeric_limits<double>::infinity();
    for (int i = 0; i < f.grid.Nq; ++i)
        for (int j = 0; j < f.grid.Np; ++j) m = std::min(m, hp_at(f, i, j));
    return m;
}

double max_hp(const HeightField& f) {
    double m = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < f.grid.Nq; ++i)
        for (int j = 0; j < f.grid.Np; ++j) m = std::max(m, hp_at(f, i, j));
    return m;
}

double Residual::norm_inf() const {
    double m = 0.0;
    for (double v : R) m = std::max(m, std::fabs(v));
    return m;
}

namespace {

// Evaluates the discrete operator at every unknown; optionally assembles its Jacobian.
void assemble(const ProfileBundle& b, const HeightField& f, const ResidualOptions& opt, Residual* res,
              JacobianSystem* jac) {
    const Grid& gr = f.grid;
    const int Nq = gr.Nq, N = gr.Np;
    const double dq = gr.hq(), dp = gr.hp();
    const double g = b.g(), rho0 = b.rho0();
    const double dmean = opt.sigma ? *opt.sigma : mean_top(f);
    const int n = gr.unknowns();
    if (res) res->R.assign(n, 0.0);
    if (jac) {
        jac->local = BandMatrix(n, N, N);
        jac->u.assign(n, 0.0);
        jac->w.assign(n, 0.0);
        jac->dQ.assign(n, 0.0);
        auto wt = mean_top_weights(gr);
        if (!opt.sigma)
            for (int i = 0; i < Nq; ++i) jac->w[gr.unknown(i, N - 1)] = wt[i];
    }
    auto H = [&](int i, int j) { return f.at(gr.reflect(i), j); };

    for (int i = 0; i < Nq; ++i) {
        const int ip = i + 1, im = i - 1;
        for (int j = 1; j < N; ++j) {
            const int row = gr.unknown(i, j);
            auto add = [&](int ii, int jj, double c) {
                if (jj == 0 || c == 0.0) return;
                jac->local.add(row, gr.unknown(gr.reflect(ii), jj), c);
            };
            const double hc = H(i, j);
            const double hq = (H(ip, j) - H(im, j)) / (2.0 * dq);
            if (j < N - 1) {
                const double p = gr.p(j);
                const double hqq = (H(ip, j) - 2.0 * hc + H(im, j)) / (dq * dq);
                const double hp = (H(i, j + 1) - H(i, j - 1)) / (2.0 * dp);
                const double hpp = (H(i, j + 1) - 2.0 * hc + H(i, j - 1)) / (dp * dp);
                const double hqp =
                    (H(ip, j + 1) - H(ip, j - 1) - H(im, j + 1) + H(im, j - 1)) / (4.0 * dq * dp);
                const double rp = b.rho_p(p), be = b.beta(-p);
                const double hp2 = hp * hp, hp3 = hp2 * hp;
                if (res) {
                    double G1 = (1.0 + hq * hq) * hpp + hqq * hp2 - 2.0 * hq * hp * hqp -
                                g * (hc - dmean) * hp3 * rp + hp3 * be;
                    if (opt.forcing) G1 -= (*opt.forcing)[row];
                    res->R[row] = G1;
                }
                if (jac) {
                    const double Aq = 2.0 * hq * hpp - 2.0 * hp * hqp;
                    const double Aqq = hp2;
                    const double Ap = 2.0 * hqq * hp - 2.0 * hq * hqp - 3.0 * g * (hc - dmean) * hp2 * rp +
                                      3.0 * hp2 * be;
                    const double App = 1.0 + hq * hq;
                    const double Aqp = -2.0 * hq * hp;
                    const double Ah = -g * hp3 * rp;
                    const double cq = 1.0 / (2.0 * dq), cqq = 1.0 / (dq * dq);
                    const double cp = 1.0 / (2.0 * dp), cpp = 1.0 / (dp * dp);
                    const double cqp = 1.0 / (4.0 * dq * dp);
                    add(ip, j, Aq * cq + Aqq * cqq);
                    add(im, j, -Aq * cq + Aqq * cqq);
                    add(i, j, -2.0 * Aqq * cqq - 2.0 * App * cpp + Ah);
                    add(i, j + 1, Ap * cp + App * cpp);
                    add(i, j - 1, -Ap * cp + App * cpp);
                    add(ip, j + 1, Aqp * cqp);
                    add(ip, j - 1, -Aqp * cqp);
                    add(im, j + 1, -Aqp * cqp);
                    add(im, j - 1, Aqp * cqp);
                    if (!opt.sigma) jac->u[row] = g * hp3 * rp;
                }
            } else {
                const double hp = (3.0 * hc - 4.0 * H(i, N - 2) + H(i, N - 3)) / (2.0 * dp);
                const double gap = 2.0 * g * rho0 * hc - f.Q;
                if (res) {
                    double G2 = 1.0 + hq * hq + hp * hp * gap;
                    if (opt.forcing) G2 -= (*opt.forcing)[row];
                    res->R[row] = G2;
                }
                if (jac) {
                    const double Bq = 2.0 * hq;
                    const double Bp = 2.0 * hp * gap;
                    const double Bh = 2.0 * g * rho0 * hp * hp;
                    const double cq = 1.0 / (2.0 * dq), cp = 1.0 / (2.0 * dp);
                    add(ip, j, Bq * cq);
                    add(im, j, -Bq * cq);
                    add(i, N - 1, 3.0 * Bp * cp + Bh);
                    add(i, N - 2, -4.0 * Bp * cp);
                    add(i, N - 3, Bp * cp);
                    jac->dQ[row] = -hp * hp;
                }
            }
        }
    }
}

void guard_hp(const HeightField& f) {
    double m = min_hp(f);
    if (!(m > 0.0)) {
        std::ostringstream os;
        os << "min h_p = " << m << " is not positive";
        fail(ErrorCode::StagnationGuard, os.str());
    }
}

}  // namespace

Residual residual(const ProfileBundle& b, const HeightField& f, const ResidualOptions& opt) {
    guard_hp(f);
    Residual r;
    assemble(b, f, opt, &r, nullptr);
    return r;
}

Residual frozen_residual(const ProfileBundle& b, const HeightField& f, double sigma) {
    ResidualOptions o;
    o.sigma = sigma;
    return residual(b, f, o);
}

JacobianSystem jacobian(const ProfileBundle& b, const HeightField& f, const ResidualOptions& opt) {
    guard_hp(f);
    JacobianSystem J;
    assemble(b, f, opt, nullptr, &J);
    return J;
}

std::vector<double> JacobianSystem::multiply(const std::vector<double>& dh, double dq) const {
    std::vector<double> y = local.multiply(dh);
    double wd = 0.0;
    for (std::size_t i = 0; i < dh.size(); ++i) wd += w[i] * dh[i];
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += u[i] * wd + dQ[i] * dq;
    return y;
}

int row_major_bandwidth(const Grid& grid) {
    // Stencil offsets (di, dj) used by the local part; row-major index = j * Nq + i.
    int bw = 0;
    auto idx = [&](int i, int j) { return j * grid.Nq + i; };
    for (int i = 0; i < grid.Nq; ++i) {
        for (int j = 1; j < grid.Np; ++j) {
            std::vector<std::pair<int, int>> nb;
            if (j < grid.Np - 1) {
                for (int di = -1; di <= 1; ++di)
                    for (int dj = -1; dj <= 1; ++dj) nb.push_back({di, dj});
            } else {
                nb = {{0, 0}, {1, 0}, {-1, 0}, {0, -1}, {0, -2}};
            }
            for (auto [di, dj] : nb) {
                int jj = j + dj;
                if (jj <= 0) continue;
                bw = std::max(bw, std::abs(idx(grid.reflect(i + di), jj) - idx(i, j)));
            }
        }
    }
    return bw;
}

double LinearConstraint::eval(const HeightField& f) const {
    double s = aQ * f.Q;
    for (int i = 0; i < f.grid.Nq; ++i)
        for (int j = 1; j < f.grid.Np; ++j) s += a[f.grid.unknown(i, j)] * f.at(i, j);
    return s;
}

double field_scale(const HeightField& f) {
    double m = std::max(1.0, std::fabs(f.Q));
    for (double v : f.h) m = std::max(m, std::fabs(v));
    return m;
}

NewtonResult newton_solve(const ProfileBundle& b, const HeightField& h0, const NewtonOptions& opt) {
    guard_hp(h0);
    HeightField f = h0;
    const bool bordered = opt.constraint.has_value();
    ResidualOptions ro;
    ro.forcing = opt.forcing;
    double last_step = std::numeric_limits<double>::infinity();
    for (int it = 1; it <= opt.max_iter; ++it) {
        Residual R = residual(b, f, ro);
        double cres = bordered ? opt.constraint->eval(f) - opt.constraint->rhs : 0.0;
        double rn = std::max(R.norm_inf(), std::fabs(cres));
        double scale = field_scale(f);
        if (rn <= opt.rtol * scale && (it == 1 || last_step <= opt.steptol * scale)) {
            return {f, it, rn, it == 1 ? 0.0 : last_step, scale};
        }
        JacobianSystem J = jacobian(b, f, ro);
        J.local.factor();
        RankOneSolver A(J.local, J.u, J.w);
        std::vector<double> rhs(R.R.size());
        for (std::size_t k = 0; k < rhs.size(); ++k) rhs[k] = -R.R[k];
        std::vector<double> dx;
        double dQ = 0.0;
        if (!bordered) {
            dx = A.solve(rhs);
        } else {
            auto solveA = [&](const std::vector<double>& v) { return A.solve(v); };
            auto mulA = [&](const std::vector<double>& v) { return A.multiply(v); };
            auto sol = solve_bordered(solveA, mulA, {J.dQ}, {opt.constraint->a}, {{opt.constraint->aQ}}, rhs,
                                      {-cres});
            dx = std::move(sol.x);
            dQ = sol.y[0];
        }
        double dn = std::fabs(dQ);
        for (double v : dx) dn = std::max(dn, std::fabs(v));
        if (!std::isfinite(dn)) fail(ErrorCode::SingularJacobian, "non-finite Newton step");

        std::vector<double> x0 = f.unknown_vector();
        double alpha = 1.0;
        HeightField trial = f;
        for (;;) {
            std::vector<double> x = x0;
            for (std::size_t k = 0; k < x.size(); ++k) x[k] += alpha * dx[k];
            trial.set_unknowns(x);
            trial.Q = f.Q + alpha * dQ;
            if (min_hp(trial) > 0.0) break;
            alpha *= 0.5;
            if (alpha < 1e-6) fail(ErrorCode::StagnationGuard, "damping cannot keep h_p positive");
        }
        last_step = alpha * dn;
        f = std::move(trial);
    }
    std::ostringstream os;
    os << "no convergence in " << opt.max_iter << " iterations";
    fail(ErrorCode::NoConvergence, os.str());
}

HeightField resample_field(const HeightField& f, const Grid& target) {
    using boost::math::interpolators::cardinal_cubic_b_spline;
    const Grid& src = f.grid;
    if (target.p0 != src.p0) fail(ErrorCode::InvalidArgument, "resample requires the same p0");
    // Rows in q with zero slope at the symmetry lines, then columns in p.
    std::vector<double> tmp(std::size_t(target.Nq) * src.Np);
    std::vector<double> row(src.Nq);
    for (int j = 0; j < src.Np; ++j) {
        for (int i = 0; i < src.Nq; ++i) row[i] = f.at(i, j);
        cardinal_cubic_b_spline<double> sp(row.begin(), row.end(), 0.0, src.hq(), 0.0, 0.0);
        for (int i = 0; i < target.Nq; ++i) tmp[std::size_t(i) * src.Np + j] = sp(target.q(i));
    }
    HeightField out(target);
    out.Q = f.Q;
    std::vector<double> col(src.Np);
    for (int i = 0; i < target.Nq; ++i) {
        for (int j = 0; j < src.Np; ++j) col[j] = tmp[std::size_t(i) * src.Np + j];
        const int n = src.Np;
        const double hp = src.hp();
        // Fourth-order one-sided end slopes keep the transfer consistent near the boundaries.
        const double s0 = (-25.0 * col[0] + 48.0 * col[1] - 36.0 * col[2] + 16.0 * col[3] - 3.0 * col[4]) / (12.0 * hp);
        const double s1 = (25.0 * col[n - 1] - 48.0 * col[n - 2] + 36.0 * col[n - 3] - 16.0 * col[n - 4] + 3.0 * col[n - 5]) /
                          (12.0 * hp);
        cardinal_cubic_b_spline<double> sp(col.begin(), col.end(), src.p0, hp, s0, s1);
        out.at(i, 0) = 0.0;
        for (int j = 1; j < target.Np; ++j) out.at(i, j) = sp(std::min(0.0, src.p0 + j * target.hp()));
    }
    return out;
}

LinearConstraint crest_elevation_constraint(const Grid& grid, double eta0) {
    LinearConstraint c;
    c.a.assign(grid.unknowns(), 0.0);
    auto w = mean_top_weights(grid);
    for (int i = 0; i < grid.Nq; ++i) c.a[grid.unknown(i, grid.Np - 1)] -= w[i];
    c.a[grid.unknown(0, grid.Np - 1)] += 1.0;
    c.rhs = eta0;
    return c;
}

}  // namespace strataflow
