#include <cstdio>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "strataflow.h"

namespace {

int exit_code(sf_status s) {
    switch (s) {
        case SF_OK: return 0;
        case SF_ERR_PARSE:
        case SF_ERR_INVALID_ARGUMENT:
        case SF_ERR_INVALID_PROFILE:
        case SF_ERR_IO:
        case SF_ERR_LB_VIOLATED:
            return 2;
        default: return 3;
    }
}

int report(sf_status s, char* json) {
    if (s == SF_OK && json) {
        std::fputs(json, stdout);
    } else {
        std::fprintf(stderr, "strataflow: %s\n", sf_last_error());
    }
    sf_string_free(json);
    return exit_code(s);
}

struct ConfigArgs {
    std::string path;
    bool force = false;
    std::optional<std::string> output;
    std::optional<int> steps;
    std::optional<double> ds;
    std::optional<std::string> direction;
};

void add_config_args(CLI::App* cmd, ConfigArgs& a, bool continuation) {
    cmd->add_option("--config", a.path, "Run configuration file")->required();
    cmd->add_flag("--force", a.force, "Proceed when (L-B) fails or lambda is below the floor");
    cmd->add_option("--output", a.output, "Output directory (overrides the config)");
    if (continuation) {
        cmd->add_option("--steps", a.steps, "Continuation steps")->check(CLI::NonNegativeNumber);
        cmd->add_option("--ds", a.ds, "Arclength step")->check(CLI::PositiveNumber);
        cmd->add_option("--direction", a.direction, "Branch direction")->check(CLI::IsMember({"+", "-"}));
    }
}

// Loads the config and applies command-line overrides.
sf_status load(const ConfigArgs& a, sf_config** cfg) {
    sf_status s = sf_config_load(a.path.c_str(), cfg);
    auto set = [&](const char* key, const std::string& value) {
        if (s == SF_OK) s = sf_config_set(*cfg, key, value.c_str());
    };
    if (a.force) set("force", "true");
    if (a.output) set("output", *a.output);
    if (a.steps) set("steps", std::to_string(*a.steps));
    if (a.ds) {
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.17g", *a.ds);
        set("ds", buf);
    }
    if (a.direction) set("direction", *a.direction);
    return s;
}

template <class Fn>
int with_config(const ConfigArgs& a, Fn&& fn) {
    sf_config* cfg = nullptr;
    sf_status s = load(a, &cfg);
    if (s != SF_OK) {
        std::fprintf(stderr, "strataflow: %s\n", sf_last_error());
        sf_config_free(cfg);
        return exit_code(s);
    }
    char* json = nullptr;
    s = fn(cfg, &json);
    sf_config_free(cfg);
    return report(s, json);
}

bool parse_sweep(const std::string& text, double& lo, double& hi, int& n) {
    char tail = 0;
    return std::sscanf(text.c_str(), "%lf:%lf:%d%c", &lo, &hi, &n, &tail) == 3;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Steady periodic stratified water waves by the height equation"};
    app.require_subcommand(1);
    app.set_version_flag("--version", sf_version());

    ConfigArgs check_args, lam_args, bif_args, cont_args, run_args;
    auto* check = app.add_subcommand("check", "Report epsilon0, the size condition and the (L-B) sweep");
    add_config_args(check, check_args, false);

    auto* lam = app.add_subcommand("laminar", "Laminar flow at one lambda or on a sweep");
    add_config_args(lam, lam_args, false);
    std::optional<double> lambda;
    std::string sweep;
    auto* lam_opt = lam->add_option("--lambda", lambda, "Single lambda");
    auto* sweep_opt = lam->add_option("--sweep", sweep, "Sweep a:b:n");
    lam_opt->excludes(sweep_opt);

    auto* bif = app.add_subcommand("bifurcate", "Locate lambda* and the kernel");
    add_config_args(bif, bif_args, false);

    auto* cont = app.add_subcommand("continue", "Bifurcate and continue the branch");
    add_config_args(cont, cont_args, true);

    auto* run = app.add_subcommand("run", "Laminar sweep, bifurcate, continue and verify");
    add_config_args(run, run_args, true);

    auto* ver = app.add_subcommand("verify", "Check a snapshot against the Euler system");
    std::string ver_snapshot, ver_report;
    bool ver_refine = false;
    ver->add_option("snapshot", ver_snapshot, "Snapshot CSV")->required();
    ver->add_option("--report", ver_report, "Report JSON path (default: <snapshot>.verify.json)");
    ver->add_flag("--refine", ver_refine, "Also re-solve on the doubled grid");

    auto* exp = app.add_subcommand("export", "Write physical fields of a snapshot");
    std::string exp_snapshot, exp_stem;
    int exp_ny = 0;
    exp->add_option("snapshot", exp_snapshot, "Snapshot CSV")->required();
    exp->add_option("--out", exp_stem, "Output path stem (default: snapshot without extension)");
    exp->add_option("--cartesian", exp_ny, "Also resample onto this many y levels")->check(CLI::NonNegativeNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    if (*check) return with_config(check_args, [](sf_config* c, char** j) { return sf_run_check(c, j); });
    if (*lam) {
        return with_config(lam_args, [&](sf_config* c, char** j) {
            if (lambda) return sf_run_laminar(c, *lambda, j);
            if (sweep.empty()) {
                std::fprintf(stderr, "strataflow: laminar needs --lambda or --sweep\n");
                return SF_ERR_INVALID_ARGUMENT;
            }
            double lo = 0, hi = 0;
            int n = 0;
            if (!parse_sweep(sweep, lo, hi, n)) {
                std::fprintf(stderr, "strataflow: --sweep expects a:b:n\n");
                return SF_ERR_INVALID_ARGUMENT;
            }
            return sf_run_laminar_sweep(c, lo, hi, n, j);
        });
    }
    if (*bif) return with_config(bif_args, [](sf_config* c, char** j) { return sf_run_bifurcate(c, j); });
    if (*cont) return with_config(cont_args, [](sf_config* c, char** j) { return sf_run_continue(c, j); });
    if (*run) return with_config(run_args, [](sf_config* c, char** j) { return sf_run_pipeline(c, j); });
    if (*ver) {
        if (ver_report.empty()) {
            ver_report = ver_snapshot;
            auto dot = ver_report.rfind('.');
            if (dot != std::string::npos && ver_report.find('/', dot) == std::string::npos) ver_report.erase(dot);
            ver_report += ".verify.json";
        }
        char* json = nullptr;
        sf_status s = sf_run_verify(ver_snapshot.c_str(), ver_report.c_str(), ver_refine ? 1 : 0, &json);
        return report(s, json);
    }
    if (*exp) {
        if (exp_stem.empty()) {
            exp_stem = exp_snapshot;
            auto dot = exp_stem.rfind('.');
            if (dot != std::string::npos && exp_stem.find('/', dot) == std::string::npos) exp_stem.erase(dot);
        }
        char* json = nullptr;
        sf_status s = sf_run_export(exp_snapshot.c_str(), exp_stem.c_str(), exp_ny, &json);
        return report(s, json);
    }
    return 2;
}
