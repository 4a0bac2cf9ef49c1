#pragma once

#include <array>
#include <vector>

#include "strataflow/laminar.hpp"

namespace strataflow {

struct SturmOptions {
    int Np = 256;
    int sweep_points = 64;
    double lambda_hi = 0.0;  // 0: bundle default 50 (1 - 2 Bmin + eps0)
    int threads = 0;         // 0: process default
};

struct EigenResult {
    double lambda = 0.0;
    double mu = 0.0;
    std::vector<double> p, M;  // M(p0) = 0, max|M| = 1, M(0) > 0
};

struct Transversality {
    double xi = 0.0;                      // seven-term sum, continuum shooting
    std::array<double, 7> terms{};
    double identity = 0.0;                // -Xi1/2 - 3/2 pi int a(1+Gdot)M'^2 + Xi6/2
    double lambda_continuum = 0.0;        // root of the shooting problem
    double xi_grid = 0.0;                 // same sum by trapezoid on the p-grid
    double identity_grid = 0.0;
};

struct LBCheck {
    bool holds = false;
    double inf_estimate = 0.0;
    double lambda_at_inf = 0.0;
    std::vector<double> lambdas, mus;
};

struct BifurcationPoint {
    double lambda_star = 0.0;
    EigenResult eigen;
    double Q_star = 0.0;
    LaminarFlow laminar;
    LaminarDiagnostics diag;
    double lambda0 = 0.0;
    bool lambda0_boundary = false;
    bool below_lambda0 = false;
    int sign_changes = 0;
    Transversality xi;
    std::vector<double> sweep_lambda, sweep_mu;
};

double rayleigh(const ProfileBundle& b, const LaminarFlow& flow, const std::vector<double>& phi);
double rayleigh(const ProfileBundle& b, double lambda, const std::vector<double>& phi);

EigenResult principal_eigen(const ProfileBundle& b, const LaminarFlow& flow);
EigenResult principal_eigen(const ProfileBundle& b, double lambda, int Np = 256);

// mu on a log-spaced sweep of [lo, hi].
void mu_sweep(const ProfileBundle& b, double lo, double hi, int points, int Np, int threads,
              std::vector<double>& lambdas, std::vector<double>& mus);

LBCheck check_lb_condition(const ProfileBundle& b, const SturmOptions& opt = {});

BifurcationPoint find_lambda_star(const ProfileBundle& b, const SturmOptions& opt = {});

Transversality transversality_xi(const ProfileBundle& b, const BifurcationPoint& bp);

}  // namespace strataflow
