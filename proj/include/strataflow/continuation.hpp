#pragma once

#include <string>
#include <vector>

#include "strataflow/heightpde.hpp"
#include "strataflow/sturm.hpp"

namespace strataflow {

struct NodalFlags {
    // Crest at q = 0 on the half-domain (0, pi) x (p0, 0).
    bool interior_hq = false;      // h_q < 0 in the interior
    bool top_hq = false;           // h_q < 0 on the top
    bool bottom_hqp = false;       // h_qp < 0 on the bottom
    bool left_hqq = false;         // h_qq < 0 on q = 0
    bool right_hqq = false;        // h_qq > 0 on q = pi
    bool corner_bottom_left = false;   // h_qqp(0, p0) < 0
    bool corner_bottom_right = false;  // h_qqp(pi, p0) > 0
    bool corner_top_left = false;      // h_qq(0, 0) < 0
    bool corner_top_right = false;     // h_qq(pi, 0) > 0
    // Worst values: the maximum for "< 0" conditions, the minimum for "> 0".
    double m_interior_hq = 0, m_top_hq = 0, m_bottom_hqp = 0, m_left_hqq = 0, m_right_hqq = 0;
    double m_corner_bottom_left = 0, m_corner_bottom_right = 0, m_corner_top_left = 0, m_corner_top_right = 0;

    bool all() const;
};

NodalFlags nodal_check(const HeightField& f, double tol = 1e-12);

// Field reflected about q = pi/2, i.e. shifted by half a period.
HeightField half_period_shift(const HeightField& f);

struct Diagnostics {
    double amplitude = 0;      // max eta - min eta
    double max_hp = 0, min_hp = 0;
    double min_c_minus_u = 0;  // min 1/(sqrt(rho) h_p)
    double d = 0;
    double hq_inf = 0;
    double surface_gap = 0;    // min over the top of Q - 2 g rho h
    double q_bound = 0;        // 1/min_hp^2 + 2 g rho(0) |p0| max_hp
    double lambda_est = 0;     // Q - 2 g rho(0) d
    double mean_eta = 0;
    double eta_crest_slope = 0;  // max over (0, pi) of the discrete eta'
    NodalFlags nodal;
    bool nodal_ok = false;
};

Diagnostics diagnostics(const ProfileBundle& b, const HeightField& f, bool crest_at_pi = false);

enum class StopReason {
    None,
    UnboundedQ,
    Stagnation,
    LeftwardBlowup,
    BoundaryOfODelta,
    LaminarReturn,
    StepBudget,
    StepFailure
};
const char* stop_reason_name(StopReason r);

struct Monitors {
    double delta = 1e-3;
    double q_max = 1e6;
    double hp_max = 1e3;
    double hp_blowup = 1e-4;    // below delta / 2
    double laminar_tol = 1e-8;
    double lambda_star = 0.0;
    double lambda_tol = 1e-3;

    static Monitors defaults(const ProfileBundle& b, const BifurcationPoint& bp);
};

struct MonitorStatus {
    bool stop = false;
    StopReason reason = StopReason::None;
    std::vector<StopReason> triggered;  // every alternative whose threshold is crossed
};

MonitorStatus alternative_monitor(const Diagnostics& d, double Q, const Monitors& m);

struct BranchPoint {
    double s = 0.0;
    HeightField field;
    Diagnostics diag;
    int newton_iterations = 0;
    double newton_residual = 0.0;
    double newton_scale = 1.0;
    double ds = 0.0;
    StopReason stop = StopReason::None;
};

// Sobolev-type inner product on (h, Q): full-period trapezoid sum over all difference
// quotients of h up to the given order, plus Q Q'.
constexpr int kProductOrder = 2;
double product_dot(const HeightField& a, const HeightField& b, int order = kProductOrder);
double product_distance(const HeightField& a, const HeightField& b, int order = kProductOrder);
// Coefficients c with <t, delta> = c . delta_unknowns + t.Q delta.Q.
std::vector<double> product_gradient(const HeightField& t, int order = kProductOrder);

// Discrete L2 pairing with full-period trapezoid weights.
double l2_dot(const HeightField& a, const HeightField& b);

HeightField kernel_field(const Grid& grid, const EigenResult& eig);

BranchPoint initial_tangent(const ProfileBundle& b, const BifurcationPoint& bp, const Grid& grid, double s0,
                            const NewtonOptions& newton = {});

struct ContinuationOptions {
    int steps = 25;
    double ds = 0.0;      // 0: 0.02 d
    double ds_min = 0.0;  // 0: ds / 64
    double ds_max = 0.0;  // 0: ds
    double s0 = 0.0;      // 0: 1e-2 d
    int direction = 1;
    Monitors monitors;
    bool monitors_set = false;
    NewtonOptions newton;
};

class Branch {
public:
    Branch(const ProfileBundle& b, const BifurcationPoint& bp, const Grid& grid, ContinuationOptions opt);

    const std::vector<BranchPoint>& points() const { return points_; }
    const BranchPoint& laminar() const { return laminar_; }
    const ContinuationOptions& options() const { return opt_; }
    double ds() const { return ds_; }
    StopReason stop_reason() const { return stop_; }

    // Corrects the first point off the laminar curve.
    const BranchPoint& start();
    // One pseudo-arclength step; throws StepFailure when ds falls below ds_min.
    const BranchPoint& step();
    // start() plus up to steps(); stops on a monitor or the budget.
    void run();

private:
    const ProfileBundle& b_;
    const BifurcationPoint& bp_;
    Grid grid_;
    ContinuationOptions opt_;
    BranchPoint laminar_;
    std::vector<BranchPoint> points_;
    double ds_ = 0.0;
    int easy_ = 0;
    StopReason stop_ = StopReason::None;

    BranchPoint make_point(const NewtonResult& r, double s, double ds) const;
};

}  // namespace strataflow
