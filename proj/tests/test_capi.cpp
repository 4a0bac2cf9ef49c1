#include <cmath>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>

#include <doctest.h>

#include "strataflow.h"

namespace fs = std::filesystem;

namespace {

const char* kSmall = "Nq = 16\nNp = 24\nsturm_np = 64\nsweep_points = 16\nsteps = 2\nsnapshot_every = 1\n";

fs::path temp_dir(const std::string& name) {
    fs::path d = fs::temp_directory_path() / ("strataflow_capi_" + name);
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

std::string take(char* s) {
    std::string r = s ? s : "";
    sf_string_free(s);
    return r;
}

int cli(const std::string& args, const fs::path& log) {
    std::string cmd = std::string("\"") + STRATAFLOW_CLI + "\" " + args + " >\"" + log.string() + "\" 2>&1";
    int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    return std::string(std::istreambuf_iterator<char>(in), {});
}

}  // namespace

TEST_CASE("status names and last error") {
    CHECK(std::string(sf_status_name(SF_OK)) == std::string("Ok"));
    CHECK(std::strlen(sf_version()) > 0);
    sf_config* c = nullptr;
    CHECK(sf_config_parse("rho = poly(1, 2\n", nullptr, &c) == SF_ERR_PARSE);
    CHECK(c == nullptr);
    CHECK(std::string(sf_last_error()).find("line 1") != std::string::npos);
    CHECK(sf_config_parse("g = 2\n", nullptr, &c) == SF_OK);
    CHECK(std::string(sf_last_error()).empty());
    sf_config_free(c);
    CHECK(sf_config_parse(nullptr, nullptr, &c) == SF_ERR_INVALID_ARGUMENT);
}

TEST_CASE("config handle round trip and overrides") {
    sf_config* c = nullptr;
    REQUIRE(sf_config_parse(kSmall, nullptr, &c) == SF_OK);
    CHECK(sf_config_set(c, "steps", "7") == SF_OK);
    CHECK(sf_config_set(c, "output", "somewhere") == SF_OK);
    CHECK(std::string(sf_config_output(c)) == "somewhere");
    char* text = nullptr;
    REQUIRE(sf_config_serialize(c, &text) == SF_OK);
    std::string s = take(text);
    CHECK(s.find("steps = 7") != std::string::npos);
    CHECK(sf_config_set(c, "steps", "-1") == SF_ERR_INVALID_ARGUMENT);
    CHECK(sf_config_set(c, "nonsense", "1") == SF_ERR_PARSE);
    // A failed override leaves the config unchanged.
    REQUIRE(sf_config_serialize(c, &text) == SF_OK);
    CHECK(take(text) == s);
    sf_config_free(c);
}

TEST_CASE("bundle queries") {
    sf_config* c = nullptr;
    REQUIRE(sf_config_parse("g = 1\n", nullptr, &c) == SF_OK);
    sf_bundle* b = nullptr;
    REQUIRE(sf_bundle_create(c, &b) == SF_OK);
    double eps = -1, lmin = -1, d = 0, Q = 0, ls = 0, Qs = 0, margin = 0;
    int holds = 0;
    CHECK(sf_bundle_epsilon0(b, &eps) == SF_OK);
    CHECK(eps == 0.0);
    CHECK(sf_bundle_lambda_min(b, &lmin) == SF_OK);
    CHECK(lmin > 0.0);
    CHECK(sf_bundle_size_condition(b, &holds, &margin) == SF_OK);
    CHECK(holds == 1);
    CHECK(sf_laminar(b, 4.0, &d, &Q) == SF_OK);
    CHECK(d == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(Q == doctest::Approx(5.0).epsilon(1e-12));
    CHECK(sf_lambda_star(b, 256, &ls, &Qs) == SF_OK);
    CHECK(ls == doctest::Approx(0.805536).epsilon(1e-4));
    CHECK(sf_laminar(b, -1.0, &d, &Q) != SF_OK);
    CHECK(sf_laminar(nullptr, 1.0, &d, &Q) == SF_ERR_INVALID_ARGUMENT);
    sf_bundle_free(b);
    sf_config_free(c);
}

TEST_CASE("stages through the C interface") {
    fs::path d = temp_dir("stages");
    sf_config* c = nullptr;
    REQUIRE(sf_config_parse(kSmall, nullptr, &c) == SF_OK);
    REQUIRE(sf_config_set(c, "output", d.string().c_str()) == SF_OK);
    char* out = nullptr;
    CHECK(sf_run_check(c, &out) == SF_OK);
    CHECK(take(out).find("\"epsilon0\": 0") != std::string::npos);
    CHECK(sf_run_laminar(c, 2.0, &out) == SF_OK);
    take(out);
    CHECK(sf_run_laminar_sweep(c, 0.5, 2.0, 5, &out) == SF_OK);
    take(out);
    CHECK(sf_run_pipeline(c, &out) == SF_OK);
    CHECK(take(out).find("step_budget") != std::string::npos);
    std::string snap = (d / "snapshots" / "point_0002.csv").string();
    CHECK(sf_run_verify(snap.c_str(), nullptr, 0, &out) == SF_OK);
    CHECK(take(out).find("max_entry") != std::string::npos);
    CHECK(sf_run_export(snap.c_str(), (d / "wave").string().c_str(), 0, &out) == SF_OK);
    take(out);
    CHECK(fs::exists(d / "wave.vtk"));
    CHECK(sf_run_verify((d / "nope.csv").string().c_str(), nullptr, 0, &out) == SF_ERR_IO);
    CHECK(out == nullptr);
    CHECK(std::string(sf_last_error()).find("verify") != std::string::npos);
    sf_config_free(c);
}

TEST_CASE("command line exit codes") {
    fs::path d = temp_dir("cli");
    {
        std::ofstream(d / "ok.cfg") << kSmall << "output = " << (d / "out").string() << "\n";
        std::ofstream(d / "bad.cfg") << "g = 1\nrho = poly(1, 2\n";
        std::ofstream(d / "weak.cfg") << kSmall << "g = 0.001\noutput = " << (d / "weak").string() << "\n";
    }
    fs::path log = d / "log.txt";
    CHECK(cli("check --config " + (d / "ok.cfg").string(), log) == 0);
    CHECK(slurp(log).find("\"lb\"") != std::string::npos);
    CHECK(cli("run --config " + (d / "ok.cfg").string(), log) == 0);
    CHECK(fs::exists(d / "out" / "summary.json"));
    CHECK(cli("verify " + (d / "out" / "snapshots" / "point_0001.csv").string(), log) == 0);
    CHECK(fs::exists(d / "out" / "snapshots" / "point_0001.verify.json"));
    CHECK(cli("laminar --config " + (d / "ok.cfg").string() + " --lambda 2", log) == 0);
    CHECK(cli("laminar --config " + (d / "ok.cfg").string() + " --sweep 0.5:2:5", log) == 0);
    CHECK(cli("continue --config " + (d / "ok.cfg").string() + " --steps 1 --direction -", log) == 0);
    CHECK(cli("export " + (d / "out" / "snapshots" / "point_0001.csv").string() + " --cartesian 10", log) == 0);

    CHECK(cli("check --config " + (d / "bad.cfg").string(), log) == 2);
    CHECK(slurp(log).find("line 2, column 11") != std::string::npos);
    CHECK(cli("check --config " + (d / "missing.cfg").string(), log) == 2);
    CHECK(cli("bifurcate --config " + (d / "weak.cfg").string(), log) == 2);
    CHECK(slurp(log).find("--force") != std::string::npos);
    // Forcing skips the gate, but without a sign change there is no bifurcation point.
    CHECK(cli("bifurcate --config " + (d / "weak.cfg").string() + " --force", log) == 2);
    CHECK(slurp(log).find("no sign change") != std::string::npos);
    CHECK(cli("frobnicate", log) == 2);

    // Nonzero bed row
    fs::path snap = d / "out" / "snapshots" / "point_0001.csv";
    std::string text = slurp(snap);
    auto a = text.find('\n') + 1, b = text.find('\n', a);
    std::string row = text.substr(a, b - a);
    std::ofstream(snap) << text.substr(0, a) + row.substr(0, row.rfind(',') + 1) + "0.5" + text.substr(b);
    CHECK(cli("verify " + snap.string(), log) == 3);
    CHECK(slurp(log).find("InvalidField") != std::string::npos);
}
