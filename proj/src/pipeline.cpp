#include "strataflow/pipeline.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <boost/math/tools/roots.hpp>
#include <json.hpp>

#include "strataflow/error.hpp"
#include "strataflow/parallel.hpp"

namespace strataflow {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

// Integral reals are written as JSON integers, non-finite values as null.
json jnum(double x) {
    if (!std::isfinite(x)) return nullptr;
    if (x == std::trunc(x) && std::fabs(x) < 9007199254740992.0) return json(static_cast<long long>(x));
    return json(x);
}

std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

void write_text(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(path.parent_path(), ec);
        if (ec) fail(ErrorCode::IoError, "cannot create " + path.parent_path().string());
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorCode::IoError, "cannot write " + path.string());
    out << text;
    if (!out) fail(ErrorCode::IoError, "write failed for " + path.string());
}

std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::IoError, "cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

template <class Fn>
auto stage(const char* name, Fn&& fn) -> decltype(fn()) {
    try {
        return fn();
    } catch (const Error& e) {
        throw Error(e.code(), std::string(name) + " stage: " + e.what());
    }
}

void apply_threads(const RunConfig& cfg) { set_default_threads(effective_threads(cfg)); }

NewtonOptions newton_options(const RunConfig& cfg) {
    NewtonOptions o;
    o.max_iter = cfg.newton_max_iter;
    o.rtol = cfg.newton_rtol;
    o.steptol = cfg.newton_steptol;
    return o;
}

SturmOptions sturm_options(const RunConfig& cfg) {
    SturmOptions so;
    so.Np = cfg.sturm_np;
    so.sweep_points = cfg.sweep_points;
    so.lambda_hi = cfg.lambda_hi;
    so.threads = effective_threads(cfg);
    return so;
}

LaminarOptions laminar_options(const RunConfig& cfg) {
    LaminarOptions lo;
    lo.Np = cfg.sturm_np;
    lo.rtol = cfg.laminar_rtol;
    lo.allow_below_floor = cfg.force;
    return lo;
}

json report_json(const VerificationReport& r) {
    json j;
    j["incompressibility"] = jnum(r.incompressibility);
    j["mass_transport"] = jnum(r.mass_transport);
    j["momentum_x"] = jnum(r.momentum_x);
    j["momentum_y"] = jnum(r.momentum_y);
    j["kinematic"] = jnum(r.kinematic);
    j["surface_pressure"] = jnum(r.surface_pressure);
    j["bed_v"] = jnum(r.bed_v);
    j["flux"] = jnum(r.flux);
    j["bernoulli"] = jnum(r.bernoulli);
    j["yih"] = jnum(r.yih);
    j["hq"] = jnum(r.hq);
    j["hp"] = jnum(r.hp);
    j["max_entry"] = jnum(r.max_entry());
    return j;
}

struct Bifurcation {
    BifurcationPoint bp;
    json summary;
};

Bifurcation bifurcate_stage(const RunConfig& cfg, const ProfileBundle& b) {
    SturmOptions so = sturm_options(cfg);
    LBCheck lb = check_lb_condition(b, so);
    if (!lb.holds && !cfg.force) {
        std::ostringstream os;
        os << "inf mu = " << lb.inf_estimate << " at lambda = " << lb.lambda_at_inf
           << " is not below -1; rerun with --force to proceed";
        fail(ErrorCode::LBViolated, os.str());
    }
    Bifurcation r;
    r.bp = find_lambda_star(b, so);
    const BifurcationPoint& bp = r.bp;
    fs::path out(cfg.output);

    std::string mu = "lambda,mu\n";
    for (std::size_t k = 0; k < bp.sweep_lambda.size(); ++k)
        mu += fmt(bp.sweep_lambda[k]) + "," + fmt(bp.sweep_mu[k]) + "\n";
    write_text(out / "mu_curve.csv", mu);
    std::string eig = "p,M\n";
    for (std::size_t j = 0; j < bp.eigen.p.size(); ++j) eig += fmt(bp.eigen.p[j]) + "," + fmt(bp.eigen.M[j]) + "\n";
    write_text(out / "eigenfunction.csv", eig);

    json& j = r.summary;
    j["lambda_star"] = jnum(bp.lambda_star);
    j["Q_star"] = jnum(bp.Q_star);
    j["d_star"] = jnum(bp.laminar.d);
    j["mu_star"] = jnum(bp.eigen.mu);
    j["lambda0"] = jnum(bp.lambda0);
    j["lambda0_boundary"] = bp.lambda0_boundary;
    j["below_lambda0"] = bp.below_lambda0;
    j["sign_changes"] = bp.sign_changes;
    j["lb_holds"] = lb.holds;
    j["xi"] = jnum(bp.xi.xi);
    j["xi_identity"] = jnum(bp.xi.identity);
    j["xi_grid"] = jnum(bp.xi.xi_grid);
    j["mu_curve_csv"] = "mu_curve.csv";
    j["eigenfunction_csv"] = "eigenfunction.csv";
    if (b.constant_density()) j["dispersion_oracle"] = jnum(dispersion_root(b.g(), b.rho0(), b.p0()));
    write_text(out / "bifurcation.json", dump(j));
    return r;
}

json point_row_json(const BranchPoint& pt) {
    json j;
    j["s"] = jnum(pt.s);
    j["Q"] = jnum(pt.field.Q);
    j["amplitude"] = jnum(pt.diag.amplitude);
    j["d"] = jnum(pt.diag.d);
    j["max_hp"] = jnum(pt.diag.max_hp);
    j["min_hp"] = jnum(pt.diag.min_hp);
    j["nodal_ok"] = pt.diag.nodal_ok;
    j["newton_iterations"] = pt.newton_iterations;
    j["newton_residual"] = jnum(pt.newton_residual);
    j["newton_scale"] = jnum(pt.newton_scale);
    return j;
}

struct ContinueResult {
    json summary;
    std::vector<std::string> snapshots;
    StopReason stop = StopReason::None;
};

ContinueResult continue_stage(const RunConfig& cfg, const ProfileBundle& b, const BifurcationPoint& bp) {
    ContinuationOptions co;
    co.steps = cfg.steps;
    co.ds = cfg.ds;
    co.ds_min = cfg.ds_min;
    co.ds_max = cfg.ds_max;
    co.s0 = cfg.s0;
    co.direction = cfg.direction;
    co.newton = newton_options(cfg);
    if (cfg.delta > 0.0) {
        co.monitors = Monitors::defaults(b, bp);
        co.monitors.delta = cfg.delta;
        co.monitors.hp_blowup = cfg.delta / 10.0;
        co.monitors_set = true;
    }
    Grid grid = Grid::make(cfg.Nq, cfg.Np, cfg.p0);
    Branch br(b, bp, grid, co);
    br.run();

    fs::path out(cfg.output);
    ContinueResult r;
    r.stop = br.stop_reason();
    const auto& pts = br.points();
    std::string log = "s,Q,amplitude,d,max_hp,min_hp,nodal_ok,stop_reason\n";
    for (const auto& pt : pts) {
        log += fmt(pt.s) + "," + fmt(pt.field.Q) + "," + fmt(pt.diag.amplitude) + "," + fmt(pt.diag.d) + "," +
               fmt(pt.diag.max_hp) + "," + fmt(pt.diag.min_hp) + "," + (pt.diag.nodal_ok ? "1" : "0") + "," +
               stop_reason_name(pt.stop) + "\n";
    }
    write_text(out / "branch_log.csv", log);

    auto snap = [&](int k, const HeightField& f) {
        char name[32];
        std::snprintf(name, sizeof name, "point_%04d.csv", k);
        write_snapshot((out / "snapshots" / name).string(), f, cfg, bp.lambda_star);
        r.snapshots.push_back(std::string("snapshots/") + name);
    };
    if (!pts.empty()) {
        snap(0, br.laminar().field);
        for (std::size_t k = 0; k < pts.size(); ++k) {
            int n = int(k) + 1;
            if (n % cfg.snapshot_every == 0 || k + 1 == pts.size()) snap(n, pts[k].field);
        }
    }

    const ContinuationOptions& o = br.options();
    json& j = r.summary;
    j["lambda_star"] = jnum(bp.lambda_star);
    j["Q_star"] = jnum(bp.Q_star);
    if (b.constant_density()) j["dispersion_oracle"] = jnum(dispersion_root(b.g(), b.rho0(), b.p0()));
    j["Nq"] = cfg.Nq;
    j["Np"] = cfg.Np;
    j["steps_requested"] = cfg.steps;
    j["points"] = pts.size();
    j["stop_reason"] = stop_reason_name(r.stop);
    j["ds"] = jnum(o.ds);
    j["ds_min"] = jnum(o.ds_min);
    j["ds_max"] = jnum(o.ds_max);
    j["s0"] = jnum(o.s0);
    j["direction"] = o.direction > 0 ? "+" : "-";
    json m;
    m["delta"] = jnum(o.monitors.delta);
    m["q_max"] = jnum(o.monitors.q_max);
    m["hp_max"] = jnum(o.monitors.hp_max);
    m["hp_blowup"] = jnum(o.monitors.hp_blowup);
    m["laminar_tol"] = jnum(o.monitors.laminar_tol);
    m["lambda_tol"] = jnum(o.monitors.lambda_tol);
    j["monitors"] = m;
    j["final"] = pts.empty() ? json(nullptr) : point_row_json(pts.back());
    j["branch_log_csv"] = "branch_log.csv";
    j["snapshots"] = r.snapshots;
    write_text(out / "summary.json", dump(j));
    return r;
}

void fail_on_step_failure(const ContinueResult& r) {
    if (r.stop == StopReason::StepFailure)
        fail(ErrorCode::StepFailure, "continuation stopped: step size fell below ds_min");
}

json verify_json(const Snapshot& s, bool refine) {
    ProfileBundle b = make_bundle(s.config);
    PhysicalField pf = to_physical(b, s.field);
    json j;
    j["Nq"] = s.field.grid.Nq;
    j["Np"] = s.field.grid.Np;
    j["Q"] = jnum(s.field.Q);
    j["d"] = jnum(pf.d);
    j["report"] = report_json(euler_residual(pf));
    StreamCheck sc = stream_consistency(b, s.field);
    j["stream"] = {{"deviation", jnum(sc.deviation)}, {"bed_depth", jnum(sc.bed_depth)}, {"bed_error", jnum(sc.bed_error)}};
    if (refine) {
        RefinementCheck rc = refinement_check(b, s.field, s.lambda_ref, newton_options(s.config));
        j["refinement"] = {{"coarse", jnum(rc.coarse)},
                           {"fine", jnum(rc.fine)},
                           {"ratio", jnum(rc.ratio)},
                           {"Nq_fine", rc.fine_field.grid.Nq},
                           {"Np_fine", rc.fine_field.grid.Np}};
    }
    return j;
}

fs::path sidecar_path(const std::string& csv_path) {
    fs::path p(csv_path);
    return p.replace_extension(".json");
}

}  // namespace

int effective_threads(const RunConfig& cfg) {
    if (const char* env = std::getenv("STRATAFLOW_THREADS"); env && *env) {
        char* end = nullptr;
        long n = std::strtol(env, &end, 10);
        if (*end != '\0' || n < 0 || n > 4096) fail(ErrorCode::InvalidArgument, "STRATAFLOW_THREADS must be a nonnegative integer");
        return int(n);
    }
    return cfg.threads;
}

double dispersion_root(double g, double rho0, double p0) {
    const double a = std::fabs(p0);
    auto f = [&](double lam) { return lam - g * rho0 * std::tanh(a / std::sqrt(lam)); };
    double lo = 1e-300, hi = g * rho0;
    auto tol = boost::math::tools::eps_tolerance<double>(52);
    auto r = boost::math::tools::bisect(f, lo, hi, tol);
    return 0.5 * (r.first + r.second);
}

std::string run_check(const RunConfig& cfg) {
    return stage("check", [&] {
        apply_threads(cfg);
        ProfileBundle b = make_bundle(cfg);
        auto sc = b.check_size_condition();
        LBCheck lb = check_lb_condition(b, sturm_options(cfg));
        json j;
        j["epsilon0"] = jnum(b.epsilon0());
        j["constant_density"] = b.constant_density();
        j["B_min"] = jnum(b.B_min());
        j["rho_prime_inf"] = jnum(b.rho_prime_inf());
        j["lambda_min"] = jnum(b.lambda_min());
        j["size_condition"] = {{"holds", sc.holds}, {"margin", jnum(sc.margin)}, {"lhs", jnum(sc.lhs)}, {"rhs", jnum(sc.rhs)}};
        j["lb"] = {{"holds", lb.holds},
                   {"inf_mu", jnum(lb.inf_estimate)},
                   {"lambda_at_inf", jnum(lb.lambda_at_inf)},
                   {"sweep_points", lb.lambdas.size()}};
        std::string text = dump(j);
        write_text(fs::path(cfg.output) / "check.json", text);
        return text;
    });
}

std::string run_laminar(const RunConfig& cfg, const LaminarRequest& req) {
    return stage("laminar", [&] {
        apply_threads(cfg);
        ProfileBundle b = make_bundle(cfg);
        LaminarOptions lo = laminar_options(cfg);
        fs::path out(cfg.output);
        json j;
        if (req.lambda) {
            LaminarFlow fl = solve_laminar(b, *req.lambda, lo);
            LaminarDiagnostics dg = g_dot(b, fl, lo);
            std::string csv = "p,H,H_p,F,G,Gdot\n";
            for (int k = 0; k < fl.Np(); ++k)
                csv += fmt(fl.p[k]) + "," + fmt(fl.H[k]) + "," + fmt(fl.Hp[k]) + "," + fmt(fl.F[k]) + "," +
                       fmt(fl.G[k]) + "," + fmt(dg.Gdot[k]) + "\n";
            write_text(out / "laminar.csv", csv);
            j["lambda"] = jnum(fl.lambda);
            j["d"] = jnum(fl.d);
            j["Q"] = jnum(fl.Q);
            j["Qdot"] = jnum(dg.Qdot);
            std::string text = dump(j);
            write_text(out / "laminar.json", text);
            return text;
        }
        const int n = req.sweep_n;
        if (n < 2 || !(req.sweep_hi > req.sweep_lo)) fail(ErrorCode::InvalidArgument, "sweep needs a < b and n >= 2");
        std::vector<LaminarShot> shots(n);
        std::vector<double> lams(n);
        for (int k = 0; k < n; ++k) lams[k] = req.sweep_lo + (req.sweep_hi - req.sweep_lo) * k / double(n - 1);
        if (!cfg.force && req.sweep_lo < b.lambda_min() * (1.0 - 1e-14))
            fail(ErrorCode::InvalidArgument, "sweep starts below the admissible lambda range");
        parallel_for(n, effective_threads(cfg), [&](int k) { shots[k] = shoot_laminar(b, lams[k], cfg.laminar_rtol); });
        std::string csv = "lambda,d,Q,Qdot,Qddot\n";
        for (int k = 0; k < n; ++k)
            csv += fmt(lams[k]) + "," + fmt(shots[k].d) + "," + fmt(shots[k].Q) + "," + fmt(shots[k].Qdot) + "," +
                   fmt(shots[k].Qddot) + "\n";
        write_text(out / "laminar_sweep.csv", csv);
        j["lambda_lo"] = jnum(req.sweep_lo);
        j["lambda_hi"] = jnum(req.sweep_hi);
        j["points"] = n;
        j["sweep_csv"] = "laminar_sweep.csv";
        std::string text = dump(j);
        write_text(out / "laminar_sweep.json", text);
        return text;
    });
}

std::string run_bifurcate(const RunConfig& cfg) {
    return stage("bifurcate", [&] {
        apply_threads(cfg);
        ProfileBundle b = make_bundle(cfg);
        return dump(bifurcate_stage(cfg, b).summary);
    });
}

std::string run_continue(const RunConfig& cfg) {
    apply_threads(cfg);
    ProfileBundle b = stage("config", [&] { return make_bundle(cfg); });
    Bifurcation bf = stage("bifurcate", [&] { return bifurcate_stage(cfg, b); });
    ContinueResult r = stage("continue", [&] { return continue_stage(cfg, b, bf.bp); });
    stage("continue", [&] { fail_on_step_failure(r); });
    return dump(r.summary);
}

std::string run_pipeline(const RunConfig& cfg) {
    apply_threads(cfg);
    ProfileBundle b = stage("config", [&] { return make_bundle(cfg); });
    LaminarRequest sweep;
    sweep.sweep_lo = b.lambda_min();
    sweep.sweep_hi = cfg.lambda_hi > 0.0 ? cfg.lambda_hi : b.lambda_sweep_max();
    sweep.sweep_n = cfg.sweep_points;
    run_laminar(cfg, sweep);
    Bifurcation bf = stage("bifurcate", [&] { return bifurcate_stage(cfg, b); });
    ContinueResult r = stage("continue", [&] { return continue_stage(cfg, b, bf.bp); });
    stage("verify", [&] {
        fs::path out(cfg.output);
        json v = json::array();
        for (const auto& rel : r.snapshots) {
            Snapshot s = read_snapshot((out / rel).string());
            json j = verify_json(s, false);
            fs::path rp = out / rel;
            rp.replace_extension(".verify.json");
            write_text(rp, dump(j));
            v.push_back({{"snapshot", rel}, {"max_entry", j["report"]["max_entry"]}});
        }
        r.summary["verification"] = v;
        write_text(out / "summary.json", dump(r.summary));
    });
    stage("continue", [&] { fail_on_step_failure(r); });
    return dump(r.summary);
}

void write_snapshot(const std::string& csv_path, const HeightField& f, const RunConfig& cfg, double lambda_ref) {
    const Grid& g = f.grid;
    std::string csv = "q,p,h\n";
    csv.reserve(std::size_t(g.Nq) * g.Np * 60);
    for (int i = 0; i < g.Nq; ++i)
        for (int j = 0; j < g.Np; ++j) csv += fmt(g.q(i)) + "," + fmt(g.p(j)) + "," + fmt(f.at(i, j)) + "\n";
    write_text(csv_path, csv);
    json j;
    j["Q"] = jnum(f.Q);
    j["d"] = jnum(mean_top(f));
    j["Nq"] = g.Nq;
    j["Np"] = g.Np;
    j["p0"] = jnum(g.p0);
    j["lambda_ref"] = jnum(lambda_ref);
    j["config"] = serialize_config(with_absolute_paths(cfg));
    write_text(sidecar_path(csv_path), dump(j));
}

Snapshot read_snapshot(const std::string& csv_path) {
    json side;
    try {
        side = json::parse(read_text(sidecar_path(csv_path)));
    } catch (const json::exception& e) {
        fail(ErrorCode::ParseError, sidecar_path(csv_path).string() + ": " + e.what());
    }
    Snapshot s;
    int Nq = 0, Np = 0;
    double p0 = 0;
    try {
        Nq = side.at("Nq").get<int>();
        Np = side.at("Np").get<int>();
        p0 = side.at("p0").get<double>();
        s.field.Q = side.at("Q").get<double>();
        s.d = side.at("d").get<double>();
        s.lambda_ref = side.value("lambda_ref", 0.0);
        s.config = parse_config(side.at("config").get<std::string>());
    } catch (const json::exception& e) {
        fail(ErrorCode::ParseError, sidecar_path(csv_path).string() + ": " + e.what());
    }
    if (Nq < 2 || Np < 2 || !(p0 < 0)) fail(ErrorCode::ParseError, "sidecar grid is invalid");
    Grid g = Grid::make(Nq, Np, p0);
    HeightField f(g);
    f.Q = s.field.Q;

    std::istringstream in(read_text(csv_path));
    std::string line;
    int ln = 1;
    if (!std::getline(in, line) || (line != "q,p,h" && line != "q,p,h\r"))
        fail(ErrorCode::ParseError, csv_path + ": line 1: expected header q,p,h");
    const double tol = 1e-12;
    for (int i = 0; i < Nq; ++i)
        for (int j = 0; j < Np; ++j) {
            ++ln;
            if (!std::getline(in, line))
                fail(ErrorCode::ParseError, csv_path + ": line " + std::to_string(ln) + ": missing row");
            double q = 0, p = 0, h = 0;
            char tail = 0;
            if (std::sscanf(line.c_str(), "%lf,%lf,%lf%c", &q, &p, &h, &tail) < 3 || (tail && tail != '\r'))
                fail(ErrorCode::ParseError, csv_path + ": line " + std::to_string(ln) + ": expected q,p,h");
            if (std::fabs(q - g.q(i)) > tol * 4 || std::fabs(p - g.p(j)) > tol * std::fabs(p0))
                fail(ErrorCode::ParseError, csv_path + ": line " + std::to_string(ln) + ": node off the grid");
            f.at(i, j) = h;
        }
    while (std::getline(in, line)) {
        ++ln;
        if (line.find_first_not_of(" \t\r") != std::string::npos)
            fail(ErrorCode::ParseError, csv_path + ": line " + std::to_string(ln) + ": trailing data");
    }
    for (int i = 0; i < Nq; ++i)
        if (f.at(i, 0) != 0.0)
            fail(ErrorCode::InvalidField, csv_path + ": bed row must satisfy h = 0 (q index " + std::to_string(i) + ")");
    s.field = std::move(f);
    return s;
}

std::string run_verify(const std::string& snapshot_path, const std::string& report_path, bool refine) {
    return stage("verify", [&] {
        Snapshot s = read_snapshot(snapshot_path);
        apply_threads(s.config);
        std::string text = dump(verify_json(s, refine));
        if (!report_path.empty()) write_text(report_path, text);
        return text;
    });
}

std::string run_export(const std::string& snapshot_path, const std::string& out_stem, int cartesian_ny) {
    return stage("export", [&] {
        Snapshot s = read_snapshot(snapshot_path);
        apply_threads(s.config);
        ProfileBundle b = make_bundle(s.config);
        PhysicalField pf = to_physical(b, s.field);

        std::string field = "x,y,u,v,rho,P\n";
        for (int k = 0; k < pf.Nx; ++k)
            for (int j = 0; j < pf.Np; ++j) {
                int n = pf.idx(k, j);
                field += fmt(pf.x[k]) + "," + fmt(pf.y[n]) + "," + fmt(pf.u[n]) + "," + fmt(pf.v[n]) + "," +
                         fmt(pf.rho[n]) + "," + fmt(pf.P[n]) + "\n";
            }
        write_text(out_stem + "_field.csv", field);

        std::string surf = "x,eta\n";
        for (int k = 0; k < pf.Nx; ++k) surf += fmt(pf.x[k]) + "," + fmt(pf.eta[k]) + "\n";
        write_text(out_stem + "_surface.csv", surf);

        const int n = pf.Nx * pf.Np;
        std::ostringstream vtk;
        vtk << "# vtk DataFile Version 3.0\nstrataflow field\nASCII\nDATASET STRUCTURED_GRID\n";
        vtk << "DIMENSIONS " << pf.Nx << " " << pf.Np << " 1\nPOINTS " << n << " double\n";
        for (int j = 0; j < pf.Np; ++j)
            for (int k = 0; k < pf.Nx; ++k) vtk << fmt(pf.x[k]) << " " << fmt(pf.y[pf.idx(k, j)]) << " 0\n";
        vtk << "POINT_DATA " << n << "\n";
        auto scalars = [&](const char* name, const std::vector<double>& a) {
            vtk << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
            for (int j = 0; j < pf.Np; ++j)
                for (int k = 0; k < pf.Nx; ++k) vtk << fmt(a[pf.idx(k, j)]) << "\n";
        };
        scalars("u", pf.u);
        scalars("v", pf.v);
        scalars("rho", pf.rho);
        scalars("P", pf.P);
        scalars("psi", pf.psi);
        write_text(out_stem + ".vtk", vtk.str());

        json j;
        j["report"] = report_json(euler_residual(pf));
        j["field_csv"] = fs::path(out_stem + "_field.csv").filename().string();
        j["surface_csv"] = fs::path(out_stem + "_surface.csv").filename().string();
        j["vtk"] = fs::path(out_stem + ".vtk").filename().string();
        if (cartesian_ny > 0) {
            CartesianField cf = resample_cartesian(pf, cartesian_ny);
            std::string cart = "x,y,u,v,rho,P\n";
            for (int k = 0; k < cf.Nx; ++k)
                for (int m = 0; m < cf.Ny; ++m) {
                    int q = k * cf.Ny + m;
                    cart += fmt(cf.x[k]) + "," + fmt(cf.y[m]) + "," + fmt(cf.u[q]) + "," + fmt(cf.v[q]) + "," +
                            fmt(cf.rho[q]) + "," + fmt(cf.P[q]) + "\n";
                }
            write_text(out_stem + "_cartesian.csv", cart);
            j["cartesian_csv"] = fs::path(out_stem + "_cartesian.csv").filename().string();
        }
        std::string text = dump(j);
        write_text(out_stem + "_report.json", text);
        return text;
    });
}

}  // namespace strataflow
