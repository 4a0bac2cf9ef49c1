#pragma once

#include <optional>
#include <string>

#include "strataflow/config.hpp"
#include "strataflow/continuation.hpp"
#include "strataflow/reconstruct.hpp"

namespace strataflow {

// Each stage writes its artifacts under cfg.output and returns its JSON summary as text.
// Stage failures carry the stage name in the message.

// Threads from cfg.threads, overridden by STRATAFLOW_THREADS when set.
int effective_threads(const RunConfig& cfg);

std::string run_check(const RunConfig& cfg);

struct LaminarRequest {
    std::optional<double> lambda;
    double sweep_lo = 0, sweep_hi = 0;  // used when lambda is unset
    int sweep_n = 0;
};
std::string run_laminar(const RunConfig& cfg, const LaminarRequest& req);

// Requires (L-B) unless cfg.force; writes bifurcation.json, eigenfunction.csv, mu_curve.csv.
std::string run_bifurcate(const RunConfig& cfg);

// Bifurcate, then continue; writes branch_log.csv, snapshots/ and summary.json.
// Throws StepFailure after writing artifacts when the branch ends on a solver failure.
std::string run_continue(const RunConfig& cfg);

// Laminar sweep, bifurcate, continue, verify.
std::string run_pipeline(const RunConfig& cfg);

// Snapshot I/O: `<stem>.csv` with header q,p,h plus the sidecar `<stem>.json`.
struct Snapshot {
    HeightField field;
    double d = 0;
    double lambda_ref = 0;
    RunConfig config;
};
void write_snapshot(const std::string& csv_path, const HeightField& f, const RunConfig& cfg, double lambda_ref);
Snapshot read_snapshot(const std::string& csv_path);

// Reconstructs and checks the Euler system; InvalidField if the bed row is not zero.
// refine: also re-solve on the doubled grid and report the residual ratio.
std::string run_verify(const std::string& snapshot_path, const std::string& report_path, bool refine = false);

// Writes <out_stem>_field.csv, _surface.csv, .vtk, _report.json and, if cartesian_ny > 0, _cartesian.csv.
std::string run_export(const std::string& snapshot_path, const std::string& out_stem, int cartesian_ny = 0);

// Root of lambda = g rho0 tanh(|p0| / sqrt(lambda)) by bisection.
double dispersion_root(double g, double rho0, double p0);

}  // namespace strataflow
