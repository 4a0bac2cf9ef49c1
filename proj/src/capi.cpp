#include "strataflow.h"

#include <cstdlib>
#include <cstring>
#include <new>
#include <string>

#include "strataflow/config.hpp"
#include "strataflow/error.hpp"
#include "strataflow/pipeline.hpp"
#include "strataflow/sturm.hpp"

struct sf_config {
    strataflow::RunConfig cfg;
};

struct sf_bundle {
    strataflow::ProfileBundle bundle;
};

namespace {

thread_local std::string last_error;

static_assert(int(strataflow::ErrorCode::Internal) == SF_ERR_INTERNAL, "status codes mirror ErrorCode");

template <class Fn>
sf_status guard(Fn&& fn) {
    try {
        fn();
        last_error.clear();
        return SF_OK;
    } catch (const strataflow::Error& e) {
        last_error = e.what();
        return sf_status(int(e.code()));
    } catch (const std::bad_alloc&) {
        last_error = "out of memory";
        return SF_ERR_INTERNAL;
    } catch (const std::exception& e) {
        last_error = std::string("Internal: ") + e.what();
        return SF_ERR_INTERNAL;
    } catch (...) {
        last_error = "Internal: unknown exception";
        return SF_ERR_INTERNAL;
    }
}

char* dup(const std::string& s) {
    char* p = static_cast<char*>(std::malloc(s.size() + 1));
    if (!p) throw std::bad_alloc();
    std::memcpy(p, s.c_str(), s.size() + 1);
    return p;
}

void need(const void* p, const char* what) {
    if (!p) strataflow::fail(strataflow::ErrorCode::InvalidArgument, std::string(what) + " is null");
}

template <class Fn>
sf_status json_call(char** out, Fn&& fn) {
    return guard([&] {
        need(out, "output pointer");
        *out = nullptr;
        std::string text = fn();
        *out = dup(text);
    });
}

}  // namespace

extern "C" {

const char* sf_version(void) { return "1.0.0"; }

const char* sf_status_name(sf_status status) {
    if (status < SF_OK || status > SF_ERR_INTERNAL) return "Unknown";
    return strataflow::error_name(strataflow::ErrorCode(int(status)));
}

const char* sf_last_error(void) { return last_error.c_str(); }

void sf_string_free(char* s) { std::free(s); }

sf_status sf_config_load(const char* path, sf_config** out) {
    return guard([&] {
        need(path, "path");
        need(out, "output pointer");
        *out = nullptr;
        *out = new sf_config{strataflow::load_config(path)};
    });
}

sf_status sf_config_parse(const char* text, const char* base_dir, sf_config** out) {
    return guard([&] {
        need(text, "text");
        need(out, "output pointer");
        *out = nullptr;
        *out = new sf_config{strataflow::parse_config(text, base_dir ? base_dir : "")};
    });
}

void sf_config_free(sf_config* cfg) { delete cfg; }

sf_status sf_config_serialize(const sf_config* cfg, char** out) {
    return json_call(out, [&] {
        need(cfg, "config");
        return strataflow::serialize_config(cfg->cfg);
    });
}

sf_status sf_config_set(sf_config* cfg, const char* key, const char* value) {
    return guard([&] {
        need(cfg, "config");
        need(key, "key");
        need(value, "value");
        if (std::strpbrk(key, "\n#=") || std::strpbrk(value, "\n#"))
            strataflow::fail(strataflow::ErrorCode::InvalidArgument, "key or value contains a reserved character");
        std::string text = strataflow::serialize_config(cfg->cfg) + key + " = " + value + "\n";
        cfg->cfg = strataflow::parse_config(text, cfg->cfg.base_dir);
    });
}

const char* sf_config_output(const sf_config* cfg) { return cfg ? cfg->cfg.output.c_str() : ""; }

sf_status sf_bundle_create(const sf_config* cfg, sf_bundle** out) {
    return guard([&] {
        need(cfg, "config");
        need(out, "output pointer");
        *out = nullptr;
        *out = new sf_bundle{strataflow::make_bundle(cfg->cfg)};
    });
}

void sf_bundle_free(sf_bundle* b) { delete b; }

sf_status sf_bundle_epsilon0(const sf_bundle* b, double* out) {
    return guard([&] {
        need(b, "bundle");
        need(out, "output pointer");
        *out = b->bundle.epsilon0();
    });
}

sf_status sf_bundle_lambda_min(const sf_bundle* b, double* out) {
    return guard([&] {
        need(b, "bundle");
        need(out, "output pointer");
        *out = b->bundle.lambda_min();
    });
}

sf_status sf_bundle_size_condition(const sf_bundle* b, int* holds, double* margin) {
    return guard([&] {
        need(b, "bundle");
        auto sc = b->bundle.check_size_condition();
        if (holds) *holds = sc.holds ? 1 : 0;
        if (margin) *margin = sc.margin;
    });
}

sf_status sf_laminar(const sf_bundle* b, double lambda, double* d, double* Q) {
    return guard([&] {
        need(b, "bundle");
        auto fl = strataflow::solve_laminar(b->bundle, lambda);
        if (d) *d = fl.d;
        if (Q) *Q = fl.Q;
    });
}

sf_status sf_lambda_star(const sf_bundle* b, int Np, double* lambda_star, double* Q_star) {
    return guard([&] {
        need(b, "bundle");
        strataflow::SturmOptions so;
        if (Np > 0) so.Np = Np;
        auto bp = strataflow::find_lambda_star(b->bundle, so);
        if (lambda_star) *lambda_star = bp.lambda_star;
        if (Q_star) *Q_star = bp.Q_star;
    });
}

sf_status sf_run_check(const sf_config* cfg, char** json_out) {
    return json_call(json_out, [&] {
        need(cfg, "config");
        return strataflow::run_check(cfg->cfg);
    });
}

sf_status sf_run_laminar(const sf_config* cfg, double lambda, char** json_out) {
    return json_call(json_out, [&] {
        need(cfg, "config");
        strataflow::LaminarRequest req;
        req.lambda = lambda;
        return strataflow::run_laminar(cfg->cfg, req);
    });
}

sf_status sf_run_laminar_sweep(const sf_config* cfg, double lo, double hi, int n, char** json_out) {
    return json_call(json_out, [&] {
        need(cfg, "config");
        strataflow::LaminarRequest req;
        req.sweep_lo = lo;
        req.sweep_hi = hi;
        req.sweep_n = n;
        return strataflow::run_laminar(cfg->cfg, req);
    });
}

sf_status sf_run_bifurcate(const sf_config* cfg, char** json_out) {
    return json_call(json_out, [&] {
        need(cfg, "config");
        return strataflow::run_bifurcate(cfg->cfg);
    });
}

sf_status sf_run_continue(const sf_config* cfg, char** json_out) {
    return json_call(json_out, [&] {
        need(cfg, "config");
        return strataflow::run_continue(cfg->cfg);
    });
}

sf_status sf_run_pipeline(const sf_config* cfg, char** json_out) {
    return json_call(json_out, [&] {
        need(cfg, "config");
        return strataflow::run_pipeline(cfg->cfg);
    });
}

sf_status sf_run_verify(const char* snapshot_csv, const char* report_path, int refine, char** json_out) {
    return json_call(json_out, [&] {
        need(snapshot_csv, "snapshot path");
        return strataflow::run_verify(snapshot_csv, report_path ? report_path : "", refine != 0);
    });
}

sf_status sf_run_export(const char* snapshot_csv, const char* out_stem, int cartesian_ny, char** json_out) {
    return json_call(json_out, [&] {
        need(snapshot_csv, "snapshot path");
        need(out_stem, "output stem");
        return strataflow::run_export(snapshot_csv, out_stem, cartesian_ny);
    });
}

}  // extern "C"
