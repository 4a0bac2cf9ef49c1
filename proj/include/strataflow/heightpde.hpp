#pragma once

#include <optional>
#include <vector>

#include "strataflow/banded.hpp"
#include "strataflow/laminar.hpp"

namespace strataflow {

// Half-period grid: q_i = i hq on [0, pi], p_j = p0 + j hp on [p0, 0].
struct Grid {
    int Nq = 64;
    int Np = 64;
    double p0 = -1.0;

    static Grid make(int Nq, int Np, double p0);
    double hq() const;
    double hp() const;
    double q(int i) const { return i * hq(); }
    double p(int j) const { return p0 * double(Np - 1 - j) / double(Np - 1); }
    // Unknowns exclude the bed row j = 0; q-major ordering.
    int unknowns() const { return Nq * (Np - 1); }
    int unknown(int i, int j) const { return i * (Np - 1) + (j - 1); }
    // Even reflection about q = 0 and q = pi.
    int reflect(int i) const { return i < 0 ? -i : (i >= Nq ? 2 * (Nq - 1) - i : i); }
};

struct HeightField {
    Grid grid;
    std::vector<double> h;  // h[i * Np + j]
    double Q = 0.0;

    HeightField() = default;
    HeightField(const Grid& g) : grid(g), h(std::size_t(g.Nq) * g.Np, 0.0) {}
    double& at(int i, int j) { return h[std::size_t(i) * grid.Np + j]; }
    double at(int i, int j) const { return h[std::size_t(i) * grid.Np + j]; }

    std::vector<double> unknown_vector() const;
    void set_unknowns(const std::vector<double>& x);
};

HeightField laminar_field(const Grid& grid, const LaminarFlow& flow);

// Trapezoid weights of the full-period mean of the top row, on the half period.
std::vector<double> mean_top_weights(const Grid& grid);
double mean_top(const HeightField& f);

// Derivative fields by the residual's difference stencils.
double hp_at(const HeightField& f, int i, int j);
double hq_at(const HeightField& f, int i, int j);
double min_hp(const HeightField& f);
double max_hp(const HeightField& f);

// Residual aligned with the unknowns: rows j = 1..Np-2 hold G1, rows j = Np-1 hold G2.
struct Residual {
    std::vector<double> R;
    double norm_inf() const;
};

struct ResidualOptions {
    std::optional<double> sigma;               // frozen mean depth
    const std::vector<double>* forcing = nullptr;  // subtracted, aligned with R
};

Residual residual(const ProfileBundle& b, const HeightField& f, const ResidualOptions& opt = {});
Residual frozen_residual(const ProfileBundle& b, const HeightField& f, double sigma);

struct JacobianSystem {
    BandMatrix local;            // frozen linearization plus top rows
    std::vector<double> u;       // rank-one left factor: g rho_p h_p^3 on interior rows
    std::vector<double> w;       // mean_top weights on top columns
    std::vector<double> dQ;      // dR/dQ: -h_p^2 on top rows

    std::vector<double> multiply(const std::vector<double>& dh, double dq) const;
};

JacobianSystem jacobian(const ProfileBundle& b, const HeightField& f, const ResidualOptions& opt = {});

// Bandwidth of the local part when nodes are ordered by p-level (row-major over q).
int row_major_bandwidth(const Grid& grid);

// Linear constraint <a, h> + aQ Q = rhs over the unknowns.
struct LinearConstraint {
    std::vector<double> a;
    double aQ = 0.0;
    double rhs = 0.0;
    double eval(const HeightField& f) const;
};

struct NewtonOptions {
    int max_iter = 30;
    double rtol = 1e-10;
    double steptol = 1e-12;
    std::optional<LinearConstraint> constraint;  // set: Q is an unknown
    const std::vector<double>* forcing = nullptr;
};

struct NewtonResult {
    HeightField field;
    int iterations = 0;
    double residual = 0.0;
    double step = 0.0;
    double scale = 1.0;
};

NewtonResult newton_solve(const ProfileBundle& b, const HeightField& h0, const NewtonOptions& opt = {});

double field_scale(const HeightField& f);

// Tensor cubic-spline transfer of h onto another grid (same p0); Q is copied.
HeightField resample_field(const HeightField& f, const Grid& target);

// Constraint fixing the crest elevation h(0, 0) - d(h) = eta0.
LinearConstraint crest_elevation_constraint(const Grid& grid, double eta0);

}  // namespace strataflow
