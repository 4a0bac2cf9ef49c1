#pragma once

#include <memory>
#include <string>
#include <vector>

#include <cmath>

// Boost 1.74's pchip calls isnan unqualified.
namespace boost::math::interpolators {
using std::isnan;
}
#include <boost/math/interpolators/pchip.hpp>

namespace strataflow {

struct FlowParams {
    double g = 1.0;
    double c = 1.0;
    double p0 = -1.0;
    static constexpr double wavelength = 6.283185307179586476925286766559;
};

// A scalar function of one variable: a polynomial or a monotone cubic table.
// Outside the table range the function is extended by its end values.
class Profile1D {
public:
    enum class Kind { Poly, Table };

    static Profile1D poly(std::vector<double> coeffs);
    static Profile1D table(std::vector<double> x, std::vector<double> y);

    Kind kind() const { return kind_; }
    const std::vector<double>& coeffs() const { return coeffs_; }
    const std::vector<double>& xs() const { return xs_; }
    const std::vector<double>& ys() const { return ys_; }

    double value(double x) const;
    double deriv(double x) const;
    // Exact integral over [a, b] of the representation.
    double integral(double a, double b) const;
    bool covers(double a, double b, double tol = 1e-12) const;

private:
    Kind kind_ = Kind::Poly;
    std::vector<double> coeffs_;
    std::vector<double> xs_, ys_;
    std::vector<double> cumulative_;
    std::shared_ptr<boost::math::interpolators::pchip<std::vector<double>>> spline_;
    double antiderivative(double x) const;
};

// How the lower end of the admissible lambda range is chosen.
enum class FloorMode {
    Strict,   // -2 Bmin + eps0 (eps_floor in the constant-density case)
    Relaxed   // -2 Bmin + max(eps_floor, (2 g |rho'|)^2)
};

class ProfileBundle {
public:
    static constexpr int kSamples = 2048;

    ProfileBundle(FlowParams params, Profile1D rho, Profile1D beta,
                  FloorMode floor = FloorMode::Strict);

    const FlowParams& params() const { return params_; }
    const Profile1D& rho_profile() const { return rho_; }
    const Profile1D& beta_profile() const { return beta_; }
    double g() const { return params_.g; }
    double c() const { return params_.c; }
    double p0() const { return params_.p0; }
    FloorMode floor_mode() const { return floor_; }

    // rho(p) and rho_p(p), p clamped to [p0, 0].
    double rho(double p) const;
    double rho_p(double p) const;
    double rho0() const { return rho_value0_; }
    // beta(s), s clamped to [0, |p0|].
    double beta(double s) const;
    // B(p) = int_0^p beta(-s) ds; linear extension outside [p0, 0].
    double B(double p) const;

    double B_min() const { return B_min_; }
    double rho_prime_inf() const { return rho_prime_inf_; }
    double epsilon0() const { return eps0_; }
    bool constant_density() const { return rho_prime_inf_ == 0.0; }

    // Floor used when eps0 degenerates to zero.
    double epsilon_floor() const { return 0.05 * (1.0 - 2.0 * B_min_); }
    // Lower end of the admissible lambda range for the active floor mode.
    double lambda_min() const;
    // Upper end of the default lambda sweep.
    double lambda_sweep_max() const { return 50.0 * (1.0 - 2.0 * B_min_ + eps0_); }

    struct SizeCondition {
        bool holds;
        double margin;
        double lhs;
        double rhs;
    };
    SizeCondition check_size_condition() const;

private:
    FlowParams params_;
    Profile1D rho_, beta_;
    FloorMode floor_;
    double rho_value0_ = 1.0;
    double B_min_ = 0.0;
    double rho_prime_inf_ = 0.0;
    double eps0_ = 0.0;
};

double compute_epsilon0(double g, double p0, double rho0, double rho_prime_inf);

}  // namespace strataflow
