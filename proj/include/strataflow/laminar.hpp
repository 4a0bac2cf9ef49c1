#pragma once

#include <vector>

#include "strataflow/profiles.hpp"

namespace strataflow {

struct LaminarOptions {
    int Np = 256;                 // nodes on [p0, 0]
    bool allow_below_floor = false;
    double rtol = 1e-13;
    double atol = 1e-15;
    double s_budget = 1e6;        // |s| limit before NoBedReached
};

struct LaminarFlow {
    double lambda = 0.0;
    std::vector<double> p, Y, H, Hp, F, G;
    double d = 0.0;
    double Q = 0.0;
    double endpoint_residual = 0.0;
    int Np() const { return int(p.size()); }
};

struct LaminarDiagnostics {
    double lambda = 0.0;
    std::vector<double> Gdot, Ydot;
    double Qdot = 0.0;
    double Qddot = 0.0;
};

// Uniform grid p_j = p0 (1 - j/(Np-1)), j = 0..Np-1.
std::vector<double> p_grid(double p0, int Np);

LaminarFlow solve_laminar(const ProfileBundle& b, double lambda, const LaminarOptions& opt = {});

// Volterra solve for 1 + Gdot on the flow's grid; Qddot by centered differences of Qdot.
LaminarDiagnostics g_dot(const ProfileBundle& b, const LaminarFlow& flow,
                         const LaminarOptions& opt = {});
LaminarDiagnostics g_dot(const ProfileBundle& b, double lambda, const LaminarOptions& opt = {});

// Shooting integration of the laminar system in p with its first and second
// lambda-variations; accurate d, Q, Qdot and Qddot independent of any grid.
struct LaminarShot {
    double d, Q, Qdot, Qddot;
};
LaminarShot shoot_laminar(const ProfileBundle& b, double lambda, double rtol = 1e-13);

struct Lambda0Result {
    double lambda0;
    double Q0;
    bool boundary_minimum;
};
Lambda0Result find_lambda0(const ProfileBundle& b, double lambda_max = 0.0,
                           const LaminarOptions& opt = {});

}  // namespace strataflow
