#include "strataflow/continuation.hpp"

#include <cmath>
#include <limits>

#include "strataflow/error.hpp"

namespace strataflow {

bool NodalFlags::all() const {
    return interior_hq && top_hq && bottom_hqp && left_hqq && right_hqq && corner_bottom_left &&
           corner_bottom_right && corner_top_left && corner_top_right;
}

NodalFlags nodal_check(const HeightField& f, double tol) {
    const Grid& g = f.grid;
    const int Nq = g.Nq, N = g.Np;
    const double dq = g.hq(), dp = g.hp();
    const double inf = std::numeric_limits<double>::infinity();
    NodalFlags r;
    double mi = -inf, mt = -inf, mb = -inf;
    for (int i = 1; i < Nq - 1; ++i) {
        for (int j = 1; j < N - 1; ++j) mi = std::max(mi, hq_at(f, i, j));
        mt = std::max(mt, hq_at(f, i, N - 1));
        double hqp = (hp_at(f, i + 1, 0) - hp_at(f, i - 1, 0)) / (2.0 * dq);
        mb = std::max(mb, hqp);
    }
    // h_qq on the symmetry lines by even reflection.
    auto hqq = [&](int i, int j) {
        int nb = i == 0 ? 1 : Nq - 2;
        return 2.0 * (f.at(nb, j) - f.at(i, j)) / (dq * dq);
    };
    double ml = -inf, mr = inf;
    for (int j = 1; j < N - 1; ++j) {
        ml = std::max(ml, hqq(0, j));
        mr = std::min(mr, hqq(Nq - 1, j));
    }
    auto hqqp_bottom = [&](int i) { return (-3.0 * hqq(i, 0) + 4.0 * hqq(i, 1) - hqq(i, 2)) / (2.0 * dp); };
    r.m_interior_hq = mi;
    r.m_top_hq = mt;
    r.m_bottom_hqp = mb;
    r.m_left_hqq = ml;
    r.m_right_hqq = mr;
    r.m_corner_bottom_left = hqqp_bottom(0);
    r.m_corner_bottom_right = hqqp_bottom(Nq - 1);
    r.m_corner_top_left = hqq(0, N - 1);
    r.m_corner_top_right = hqq(Nq - 1, N - 1);
    r.interior_hq = mi < -tol;
    r.top_hq = mt < -tol;
    r.bottom_hqp = mb < 0.0;
    r.left_hqq = ml < 0.0;
    r.right_hqq = mr > 0.0;
    r.corner_bottom_left = r.m_corner_bottom_left < 0.0;
    r.corner_bottom_right = r.m_corner_bottom_right > 0.0;
    r.corner_top_left = r.m_corner_top_left < 0.0;
    r.corner_top_right = r.m_corner_top_right > 0.0;
    return r;
}

HeightField half_period_shift(const HeightField& f) {
    HeightField s(f.grid);
    s.Q = f.Q;
    const int Nq = f.grid.Nq;
    for (int i = 0; i < Nq; ++i)
        for (int j = 0; j < f.grid.Np; ++j) s.at(i, j) = f.at(Nq - 1 - i, j);
    return s;
}

Diagnostics diagnostics(const ProfileBundle& b, const HeightField& f, bool crest_at_pi) {
    const Grid& g = f.grid;
    const int Nq = g.Nq, N = g.Np;
    Diagnostics d;
    d.d = mean_top(f);
    double emax = -std::numeric_limits<double>::infinity(), emin = -emax;
    d.surface_gap = std::numeric_limits<double>::infinity();
    for (int i = 0; i < Nq; ++i) {
        double eta = f.at(i, N - 1) - d.d;
        emax = std::max(emax, eta);
        emin = std::min(emin, eta);
        d.surface_gap = std::min(d.surface_gap, f.Q - 2.0 * b.g() * b.rho0() * f.at(i, N - 1));
    }
    d.amplitude = emax - emin;
    d.max_hp = -std::numeric_limits<double>::infinity();
    d.min_hp = std::numeric_limits<double>::infinity();
    d.min_c_minus_u = std::numeric_limits<double>::infinity();
    for (int i = 0; i < Nq; ++i) {
        for (int j = 0; j < N; ++j) {
            double hp = hp_at(f, i, j);
            d.max_hp = std::max(d.max_hp, hp);
            d.min_hp = std::min(d.min_hp, hp);
            d.min_c_minus_u = std::min(d.min_c_minus_u, 1.0 / (std::sqrt(b.rho(g.p(j))) * hp));
            d.hq_inf = std::max(d.hq_inf, std::fabs(hq_at(f, i, j)));
        }
    }
    d.q_bound = 1.0 / (d.min_hp * d.min_hp) + 2.0 * b.g() * b.rho0() * std::fabs(g.p0) * d.max_hp;
    d.lambda_est = f.Q - 2.0 * b.g() * b.rho0() * d.d;
    auto wt = mean_top_weights(g);
    double m = 0.0;
    for (int i = 0; i < Nq; ++i) m += wt[i] * (f.at(i, N - 1) - d.d);
    d.mean_eta = m;
    const HeightField& oriented = crest_at_pi ? half_period_shift(f) : f;
    d.eta_crest_slope = -std::numeric_limits<double>::infinity();
    for (int i = 1; i < Nq - 1; ++i) d.eta_crest_slope = std::max(d.eta_crest_slope, hq_at(oriented, i, N - 1));
    d.nodal = nodal_check(oriented);
    d.nodal_ok = d.nodal.all();
    return d;
}

const char* stop_reason_name(StopReason r) {
    switch (r) {
        case StopReason::None: return "none";
        case StopReason::UnboundedQ: return "unbounded_Q";
        case StopReason::Stagnation: return "stagnation";
        case StopReason::LeftwardBlowup: return "leftward_blowup";
        case StopReason::BoundaryOfODelta: return "boundary_of_O_delta";
        case StopReason::LaminarReturn: return "laminar_return";
        case StopReason::StepBudget: return "step_budget";
        case StopReason::StepFailure: return "step_failure";
    }
    return "unknown";
}

Monitors Monitors::defaults(const ProfileBundle&, const BifurcationPoint& bp) {
    Monitors m;
    double hmin = std::numeric_limits<double>::infinity(), hmax = 0.0;
    for (double v : bp.laminar.Hp) {
        hmin = std::min(hmin, v);
        hmax = std::max(hmax, v);
    }
    m.delta = 1e-3 * hmin;
    m.hp_blowup = 0.1 * m.delta;
    m.hp_max = 1e3 * hmax;
    m.q_max = 1e3 * std::max(1.0, std::fabs(bp.Q_star));
    m.laminar_tol = 1e-8;
    m.lambda_star = bp.lambda_star;
    m.lambda_tol = 1e-3 * std::max(1.0, bp.lambda_star);
    return m;
}

MonitorStatus alternative_monitor(const Diagnostics& d, double Q, const Monitors& m) {
    MonitorStatus s;
    if (std::fabs(Q) >= m.q_max) s.triggered.push_back(StopReason::UnboundedQ);
    if (d.max_hp >= m.hp_max) s.triggered.push_back(StopReason::Stagnation);
    if (d.min_hp <= m.hp_blowup) s.triggered.push_back(StopReason::LeftwardBlowup);
    if ((d.min_hp > m.hp_blowup && d.min_hp <= m.delta) || d.surface_gap <= m.delta)
        s.triggered.push_back(StopReason::BoundaryOfODelta);
    if (d.hq_inf <= m.laminar_tol && std::fabs(d.lambda_est - m.lambda_star) > m.lambda_tol)
        s.triggered.push_back(StopReason::LaminarReturn);
    if (!s.triggered.empty()) {
        s.stop = true;
        s.reason = s.triggered.front();
    }
    return s;
}

namespace {

std::vector<double> full_period_weights(const Grid& g) {
    std::vector<double> w(std::size_t(g.Nq) * g.Np);
    for (int i = 0; i < g.Nq; ++i) {
        double wq = g.hq() * ((i == 0 || i == g.Nq - 1) ? 1.0 : 2.0);
        for (int j = 0; j < g.Np; ++j) {
            double wp = g.hp() * ((j == 0 || j == g.Np - 1) ? 0.5 : 1.0);
            w[std::size_t(i) * g.Np + j] = wq * wp;
        }
    }
    return w;
}

HeightField difference(const HeightField& a, const HeightField& b) {
    HeightField d(a.grid);
    for (std::size_t k = 0; k < d.h.size(); ++k) d.h[k] = a.h[k] - b.h[k];
    d.Q = a.Q - b.Q;
    return d;
}

}  // namespace

double l2_dot(const HeightField& a, const HeightField& b) {
    auto w = full_period_weights(a.grid);
    double s = 0.0;
    for (std::size_t k = 0; k < w.size(); ++k) s += w[k] * a.h[k] * b.h[k];
    return s;
}

namespace {

// Linear difference operator as sparse rows: node (i, j) -> list of (node, coefficient).
using SparseRows = std::vector<std::vector<std::pair<int, double>>>;

std::vector<SparseRows> product_ops(const Grid& g, int order) {
    const int Nq = g.Nq, N = g.Np;
    const double dq = g.hq(), dp = g.hp();
    auto node = [&](int i, int j) { return g.reflect(i) * N + j; };
    const int n = Nq * N;
    SparseRows I(n), Dq(n), Dp(n);
    for (int i = 0; i < Nq; ++i)
        for (int j = 0; j < N; ++j) {
            const int r = i * N + j;
            I[r] = {{r, 1.0}};
            Dq[r] = {{node(i + 1, j), 0.5 / dq}, {node(i - 1, j), -0.5 / dq}};
            if (j == 0)
                Dp[r] = {{node(i, 0), -1.5 / dp}, {node(i, 1), 2.0 / dp}, {node(i, 2), -0.5 / dp}};
            else if (j == N - 1)
                Dp[r] = {{node(i, N - 1), 1.5 / dp}, {node(i, N - 2), -2.0 / dp}, {node(i, N - 3), 0.5 / dp}};
            else
                Dp[r] = {{node(i, j + 1), 0.5 / dp}, {node(i, j - 1), -0.5 / dp}};
        }
    if (order < 1) return {I};
    std::vector<SparseRows> ops{I, Dq, Dp};
    if (order < 2) return ops;
    SparseRows Dqq(n), Dpp(n), Dqp(n);
    const double cq = 1.0 / (dq * dq), cp = 1.0 / (dp * dp);
    for (int i = 0; i < Nq; ++i)
        for (int j = 0; j < N; ++j) {
            const int r = i * N + j;
            Dqq[r] = {{node(i + 1, j), cq}, {node(i, j), -2.0 * cq}, {node(i - 1, j), cq}};
            if (j == 0)
                Dpp[r] = {{node(i, 0), 2.0 * cp}, {node(i, 1), -5.0 * cp}, {node(i, 2), 4.0 * cp}, {node(i, 3), -cp}};
            else if (j == N - 1)
                Dpp[r] = {{node(i, N - 1), 2.0 * cp},
                          {node(i, N - 2), -5.0 * cp},
                          {node(i, N - 3), 4.0 * cp},
                          {node(i, N - 4), -cp}};
            else
                Dpp[r] = {{node(i, j + 1), cp}, {node(i, j), -2.0 * cp}, {node(i, j - 1), cp}};
            // Mixed derivative as Dq applied to Dp.
            for (auto [m, a] : Dq[r])
                for (auto [k, b] : Dp[m]) Dqp[r].push_back({k, a * b});
        }
    ops.push_back(std::move(Dqq));
    ops.push_back(std::move(Dqp));
    ops.push_back(std::move(Dpp));
    return ops;
}

std::vector<double> apply(const SparseRows& op, const std::vector<double>& x) {
    std::vector<double> y(op.size(), 0.0);
    for (std::size_t r = 0; r < op.size(); ++r)
        for (auto [k, c] : op[r]) y[r] += c * x[k];
    return y;
}

}  // namespace

double product_dot(const HeightField& a, const HeightField& b, int order) {
    auto w = full_period_weights(a.grid);
    double s = a.Q * b.Q;
    for (const auto& op : product_ops(a.grid, order)) {
        auto da = apply(op, a.h), db = apply(op, b.h);
        for (std::size_t k = 0; k < w.size(); ++k) s += w[k] * da[k] * db[k];
    }
    return s;
}

double product_distance(const HeightField& a, const HeightField& b, int order) {
    HeightField d = difference(a, b);
    return std::sqrt(std::max(0.0, product_dot(d, d, order)));
}

std::vector<double> product_gradient(const HeightField& t, int order) {
    const Grid& g = t.grid;
    auto w = full_period_weights(g);
    std::vector<double> full(t.h.size(), 0.0);
    for (const auto& op : product_ops(g, order)) {
        auto dt = apply(op, t.h);
        for (std::size_t r = 0; r < op.size(); ++r)
            for (auto [k, c] : op[r]) full[k] += c * w[r] * dt[r];
    }
    std::vector<double> out(g.unknowns());
    for (int i = 0; i < g.Nq; ++i)
        for (int j = 1; j < g.Np; ++j) out[g.unknown(i, j)] = full[std::size_t(i) * g.Np + j];
    return out;
}

HeightField kernel_field(const Grid& grid, const EigenResult& eig) {
    if (int(eig.M.size()) != grid.Np) fail(ErrorCode::InvalidArgument, "eigenfunction grid differs from the height grid");
    HeightField phi(grid);
    for (int i = 0; i < grid.Nq; ++i)
        for (int j = 0; j < grid.Np; ++j) phi.at(i, j) = eig.M[j] * std::cos(grid.q(i));
    phi.Q = 0.0;
    return phi;
}

namespace {

struct Start {
    HeightField H;
    HeightField phi;
};

Start start_fields(const ProfileBundle& b, const BifurcationPoint& bp, const Grid& grid) {
    Start s;
    if (bp.laminar.Np() == grid.Np && int(bp.eigen.M.size()) == grid.Np) {
        s.H = laminar_field(grid, bp.laminar);
        s.phi = kernel_field(grid, bp.eigen);
    } else {
        LaminarOptions o;
        o.Np = grid.Np;
        o.allow_below_floor = true;
        LaminarFlow fl = solve_laminar(b, bp.lambda_star, o);
        s.H = laminar_field(grid, fl);
        s.phi = kernel_field(grid, principal_eigen(b, fl));
    }
    return s;
}

}  // namespace

BranchPoint initial_tangent(const ProfileBundle& b, const BifurcationPoint& bp, const Grid& grid, double s0,
                            const NewtonOptions& newton) {
    Start st = start_fields(b, bp, grid);
    auto w = full_period_weights(grid);
    double nphi = l2_dot(st.phi, st.phi);
    LinearConstraint c;
    c.a.assign(grid.unknowns(), 0.0);
    for (int i = 0; i < grid.Nq; ++i)
        for (int j = 1; j < grid.Np; ++j)
            c.a[grid.unknown(i, j)] = w[std::size_t(i) * grid.Np + j] * st.phi.at(i, j) / nphi;
    c.aQ = 0.0;
    c.rhs = s0;
    for (int i = 0; i < grid.Nq; ++i)
        for (int j = 1; j < grid.Np; ++j) c.rhs += c.a[grid.unknown(i, j)] * st.H.at(i, j);
    HeightField h0 = st.H;
    for (std::size_t k = 0; k < h0.h.size(); ++k) h0.h[k] += s0 * st.phi.h[k];
    h0.Q = st.H.Q;
    NewtonOptions o = newton;
    o.constraint = c;
    NewtonResult r = newton_solve(b, h0, o);
    BranchPoint pt;
    pt.field = std::move(r.field);
    pt.newton_iterations = r.iterations;
    pt.newton_residual = r.residual;
    pt.newton_scale = r.scale;
    pt.diag = diagnostics(b, pt.field, s0 < 0.0);
    return pt;
}

Branch::Branch(const ProfileBundle& b, const BifurcationPoint& bp, const Grid& grid, ContinuationOptions opt)
    : b_(b), bp_(bp), grid_(grid), opt_(std::move(opt)) {
    Start st = start_fields(b, bp, grid);
    laminar_.field = st.H;
    laminar_.diag = diagnostics(b, st.H);
    const double d = bp.laminar.d;
    if (opt_.ds <= 0.0) opt_.ds = 0.02 * d;
    if (opt_.ds_max <= 0.0) opt_.ds_max = opt_.ds;
    if (opt_.ds_min <= 0.0) opt_.ds_min = opt_.ds / 64.0;
    if (opt_.s0 <= 0.0) opt_.s0 = 1e-2 * d;
    if (!opt_.monitors_set) opt_.monitors = Monitors::defaults(b, bp);
    ds_ = opt_.ds;
}

BranchPoint Branch::make_point(const NewtonResult& r, double s, double ds) const {
    BranchPoint pt;
    pt.field = r.field;
    pt.s = s;
    pt.ds = ds;
    pt.newton_iterations = r.iterations;
    pt.newton_residual = r.residual;
    pt.newton_scale = r.scale;
    pt.diag = diagnostics(b_, pt.field, opt_.direction < 0);
    return pt;
}

const BranchPoint& Branch::start() {
    BranchPoint pt = initial_tangent(b_, bp_, grid_, opt_.direction < 0 ? -opt_.s0 : opt_.s0, opt_.newton);
    pt.s = product_distance(pt.field, laminar_.field);
    points_.clear();
    points_.push_back(std::move(pt));
    return points_.back();
}

const BranchPoint& Branch::step() {
    if (points_.empty()) start();
    const BranchPoint& cur = points_.back();
    const BranchPoint& prev = points_.size() >= 2 ? points_[points_.size() - 2] : laminar_;
    HeightField t = difference(cur.field, prev.field);
    double nt = std::sqrt(product_dot(t, t));
    if (!(nt > 0.0)) fail(ErrorCode::StepFailure, "degenerate secant");
    for (double& v : t.h) v /= nt;
    t.Q /= nt;
    std::vector<double> grad = product_gradient(t);
    double base = t.Q * cur.field.Q;
    for (int i = 0; i < grid_.Nq; ++i)
        for (int j = 1; j < grid_.Np; ++j) base += grad[grid_.unknown(i, j)] * cur.field.at(i, j);

    for (;;) {
        HeightField pred = cur.field;
        for (std::size_t k = 0; k < pred.h.size(); ++k) pred.h[k] += ds_ * t.h[k];
        pred.Q += ds_ * t.Q;
        LinearConstraint c;
        c.a = grad;
        c.aQ = t.Q;
        c.rhs = base + ds_;
        NewtonOptions o = opt_.newton;
        o.constraint = c;
        try {
            if (!(min_hp(pred) > 0.0)) fail(ErrorCode::StagnationGuard, "predictor leaves h_p > 0");
            NewtonResult r = newton_solve(b_, pred, o);
            double used = ds_;
            BranchPoint pt = make_point(r, cur.s + used, used);
            if (r.iterations <= 4) {
                if (++easy_ >= 2) {
                    ds_ = std::min(ds_ * 1.3, opt_.ds_max);
                    easy_ = 0;
                }
            } else {
                easy_ = 0;
            }
            points_.push_back(std::move(pt));
            return points_.back();
        } catch (const Error& e) {
            if (e.code() != ErrorCode::NoConvergence && e.code() != ErrorCode::StagnationGuard &&
                e.code() != ErrorCode::SingularJacobian)
                throw;
            ds_ *= 0.5;
            easy_ = 0;
            if (ds_ < opt_.ds_min) fail(ErrorCode::StepFailure, std::string("ds below ds_min after: ") + e.what());
        }
    }
}

void Branch::run() {
    stop_ = StopReason::None;
    if (opt_.steps <= 0) return;
    start();
    auto check = [&]() {
        MonitorStatus st = alternative_monitor(points_.back().diag, points_.back().field.Q, opt_.monitors);
        if (st.stop) {
            stop_ = st.reason;
            points_.back().stop = st.reason;
        }
        return st.stop;
    };
    if (check()) return;
    for (int k = 0; k < opt_.steps; ++k) {
        try {
            step();
        } catch (const Error& e) {
            if (e.code() != ErrorCode::StepFailure) throw;
            stop_ = StopReason::StepFailure;
            points_.back().stop = StopReason::StepFailure;
            return;
        }
        if (check()) return;
    }
    stop_ = StopReason::StepBudget;
    points_.back().stop = StopReason::StepBudget;
}

}  // namespace strataflow
