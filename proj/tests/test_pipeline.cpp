#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <doctest.h>
#include <json.hpp>

#include "strataflow/error.hpp"
#include "strataflow/pipeline.hpp"

using namespace strataflow;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path temp_dir(const std::string& name) {
    fs::path d = fs::temp_directory_path() / ("strataflow_pipeline_" + name);
    fs::remove_all(d);
    return d;
}

RunConfig small(const fs::path& out, const std::string& extra = "") {
    RunConfig c = parse_config("Nq = 16\nNp = 24\nsturm_np = 64\nsweep_points = 16\nsteps = 3\nsnapshot_every = 2\n" + extra);
    c.output = out.string();
    return c;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

int count_lines(const fs::path& p) {
    std::ifstream in(p);
    std::string l;
    int n = 0;
    while (std::getline(in, l)) ++n;
    return n;
}

ErrorCode code_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    return ErrorCode::Ok;
}

}  // namespace

TEST_CASE("check reports the bundle conditions") {
    fs::path d = temp_dir("check");
    json j = json::parse(run_check(small(d)));
    CHECK(j["epsilon0"].is_number_integer());
    CHECK(j["epsilon0"] == 0);
    CHECK(j["constant_density"] == true);
    CHECK(j["lb"]["holds"] == true);
    CHECK(j["size_condition"]["holds"] == true);
    CHECK(fs::exists(d / "check.json"));
    // The margin is reproducible to the byte.
    std::string first = slurp(d / "check.json");
    run_check(small(d));
    CHECK(slurp(d / "check.json") == first);

    json s = json::parse(run_check(small(temp_dir("check_strat"), "rho = poly(1, -0.2)\nfloor = relaxed\n")));
    CHECK(s["constant_density"] == false);
    CHECK(s["epsilon0"].get<double>() > 0.0);
}

TEST_CASE("laminar stage at one lambda and on a sweep") {
    fs::path d = temp_dir("laminar");
    LaminarRequest one;
    one.lambda = 4.0;
    json j = json::parse(run_laminar(small(d), one));
    CHECK(j["d"].get<double>() == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(j["Q"].get<double>() == doctest::Approx(5.0).epsilon(1e-12));
    CHECK(count_lines(d / "laminar.csv") == 65);

    LaminarRequest sw;
    sw.sweep_lo = 0.5;
    sw.sweep_hi = 2.0;
    sw.sweep_n = 7;
    run_laminar(small(d), sw);
    CHECK(count_lines(d / "laminar_sweep.csv") == 8);
    sw.sweep_lo = -1.0;
    CHECK(code_of([&] { run_laminar(small(d), sw); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("bifurcate matches the dispersion relation for constant density") {
    fs::path d = temp_dir("bifurcate");
    json j = json::parse(run_bifurcate(small(d, "sturm_np = 256\n")));
    double oracle = dispersion_root(1.0, 1.0, -1.0);
    CHECK(j["lambda_star"].get<double>() == doctest::Approx(oracle).epsilon(1e-4));
    CHECK(j["dispersion_oracle"].get<double>() == doctest::Approx(oracle).epsilon(1e-14));
    CHECK(j["sign_changes"] == 1);
    CHECK(j["xi"].get<double>() < 0.0);
    CHECK(fs::exists(d / "eigenfunction.csv"));
    CHECK(fs::exists(d / "mu_curve.csv"));
}

TEST_CASE("L-B violation needs force") {
    fs::path d = temp_dir("lb");
    CHECK(code_of([&] { run_bifurcate(small(d, "g = 0.001\n")); }) == ErrorCode::LBViolated);
}

TEST_CASE("zero steps still produce the bifurcation artifacts") {
    fs::path d = temp_dir("steps0");
    json j = json::parse(run_continue(small(d, "steps = 0\n")));
    CHECK(j["points"] == 0);
    CHECK(count_lines(d / "branch_log.csv") == 1);
    CHECK(fs::exists(d / "bifurcation.json"));
}

TEST_CASE("pipeline artifacts, verification and determinism") {
    fs::path d1 = temp_dir("run1"), d2 = temp_dir("run2");
    json j = json::parse(run_pipeline(small(d1, "threads = 1\n")));
    run_pipeline(small(d2, "threads = 4\n"));
    CHECK(j["points"] == 4);
    CHECK(j["stop_reason"] == "step_budget");
    for (const char* f : {"laminar_sweep.csv", "bifurcation.json", "branch_log.csv", "summary.json",
                          "snapshots/point_0000.csv", "snapshots/point_0002.csv", "snapshots/point_0004.csv",
                          "snapshots/point_0002.verify.json"})
        CHECK(fs::exists(d1 / f));
    CHECK_FALSE(fs::exists(d1 / "snapshots/point_0001.csv"));
    CHECK_FALSE(fs::exists(d1 / "snapshots/point_0003.csv"));
    CHECK(count_lines(d1 / "branch_log.csv") == 5);
    for (const char* f : {"branch_log.csv", "snapshots/point_0004.csv", "mu_curve.csv", "eigenfunction.csv"})
        CHECK(slurp(d1 / f) == slurp(d2 / f));
    for (const auto& v : j["verification"]) CHECK(v["max_entry"].get<double>() < 1e-2);

    // The laminar snapshot verifies to round-off.
    json lam = json::parse(run_verify((d1 / "snapshots/point_0000.csv").string(), ""));
    CHECK(lam["report"]["max_entry"].get<double>() <= 1e-9);
    CHECK(fs::exists(d1 / "snapshots/point_0000.verify.json"));

    Snapshot s = read_snapshot((d1 / "snapshots/point_0004.csv").string());
    CHECK(s.field.grid.Nq == 16);
    CHECK(s.field.grid.Np == 24);
    CHECK(s.config.Nq == 16);

    // Export writes every format and the Cartesian grid on request.
    fs::path stem = d1 / "exp" / "wave";
    json e = json::parse(run_export((d1 / "snapshots/point_0004.csv").string(), stem.string(), 12));
    for (const char* suf : {"_field.csv", "_surface.csv", ".vtk", "_report.json", "_cartesian.csv"})
        CHECK(fs::exists(stem.string() + suf));
    CHECK(count_lines(stem.string() + "_surface.csv") == 31);
    CHECK(e.contains("report"));
}

TEST_CASE("corrupted snapshots are rejected") {
    fs::path d = temp_dir("corrupt");
    run_continue(small(d, "steps = 1\n"));
    fs::path csv = d / "snapshots/point_0002.csv";
    REQUIRE(fs::exists(csv));
    std::string text = slurp(csv);
    // Second line is node (0, p0); give it a nonzero height.
    auto a = text.find('\n') + 1, b = text.find('\n', a);
    std::string row = text.substr(a, b - a);
    row = row.substr(0, row.rfind(',') + 1) + "0.001";
    std::ofstream(csv, std::ios::binary) << text.substr(0, a) + row + text.substr(b);
    CHECK(code_of([&] { run_verify(csv.string(), ""); }) == ErrorCode::InvalidField);
    CHECK(code_of([&] { run_verify((d / "snapshots/missing.csv").string(), ""); }) == ErrorCode::IoError);
}

TEST_CASE("thread count from the environment") {
    RunConfig c;
    c.threads = 3;
    unsetenv("STRATAFLOW_THREADS");
    CHECK(effective_threads(c) == 3);
    setenv("STRATAFLOW_THREADS", "2", 1);
    CHECK(effective_threads(c) == 2);
    setenv("STRATAFLOW_THREADS", "x", 1);
    CHECK(code_of([&] { effective_threads(c); }) == ErrorCode::InvalidArgument);
    unsetenv("STRATAFLOW_THREADS");
}
