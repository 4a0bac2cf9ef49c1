#pragma once

#include <vector>

#include "strataflow/heightpde.hpp"

namespace strataflow {

// Physical variables on the image of the (q, p) grid over one full period.
// Column k sits at x_k = -pi + k hq, k = 0..Nx-1 (periodic); row j follows p_j.
struct PhysicalField {
    int Nx = 0, Np = 0;
    double hq = 0, hp = 0, p0 = 0;
    double g = 0, c = 0, Q = 0, d = 0, E_surface = 0;
    std::vector<double> x;                           // Nx
    std::vector<double> eta;                         // Nx
    std::vector<double> y, u, v, rho, P, psi;        // k * Np + j
    std::vector<double> h_q, h_p;                    // height derivatives used for the map
    std::vector<double> rho_p, beta;                 // rho'(p_j), beta(-p_j) per node

    int idx(int k, int j) const { return k * Np + j; }
};

struct VerificationReport {
    double incompressibility = 0;
    double mass_transport = 0;
    double momentum_x = 0;
    double momentum_y = 0;
    double kinematic = 0;
    double surface_pressure = 0;
    double bed_v = 0;
    double flux = 0;
    double bernoulli = 0;
    double yih = 0;
    double hq = 0, hp = 0;

    double max_entry() const;
};

PhysicalField to_physical(const ProfileBundle& b, const HeightField& f);
VerificationReport euler_residual(const PhysicalField& pf);

struct StreamCheck {
    double deviation = 0;  // max |psi - (-p_j)| at the node heights
    double bed_depth = 0;  // y0 where psi reaches -p0
    double bed_error = 0;  // |y0 + d|
};

StreamCheck stream_consistency(const ProfileBundle& b, const HeightField& f, int column = 0);

// Cartesian resampling for export: Ny levels from -d to max eta; points above the
// surface carry NaN.
struct CartesianField {
    int Nx = 0, Ny = 0;
    std::vector<double> x, y;            // Nx, Ny
    std::vector<double> u, v, rho, P;    // k * Ny + m
};

CartesianField resample_cartesian(const PhysicalField& pf, int Ny);

}  // namespace strataflow

namespace strataflow {

// Re-solves a field on the grid with twice the nodes in each direction at the same crest elevation and
// compares the Euler residuals. The predictor is the spline transfer of f, corrected by
// the laminar discretization difference at lambda_ref between the two grids.
struct RefinementCheck {
    double coarse = 0;
    double fine = 0;
    double ratio = 0;
    int iterations = 0;
    HeightField fine_field;
};

RefinementCheck refinement_check(const ProfileBundle& b, const HeightField& f, double lambda_ref,
                                 const NewtonOptions& opt = {});

}  // namespace strataflow
