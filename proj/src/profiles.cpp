#include "strataflow/profiles.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "strataflow/error.hpp"

namespace strataflow {

namespace {

double poly_eval(const std::vector<double>& c, double x) {
    double r = 0.0;
    for (auto it = c.rbegin(); it != c.rend(); ++it) r = r * x + *it;
    return r;
}

double poly_deriv(const std::vector<double>& c, double x) {
    double r = 0.0;
    for (std::size_t k = c.size(); k-- > 1;) r = r * x + double(k) * c[k];
    return r;
}

double poly_antideriv(const std::vector<double>& c, double x) {
    double r = 0.0;
    for (std::size_t k = c.size(); k-- > 0;) r = r * x + c[k] / double(k + 1);
    return r * x;
}

}  // namespace

Profile1D Profile1D::poly(std::vector<double> coeffs) {
    if (coeffs.empty()) fail(ErrorCode::InvalidProfile, "polynomial needs at least one coefficient");
    for (double c : coeffs)
        if (!std::isfinite(c)) fail(ErrorCode::InvalidProfile, "non-finite polynomial coefficient");
    Profile1D p;
    p.kind_ = Kind::Poly;
    p.coeffs_ = std::move(coeffs);
    return p;
}

Profile1D Profile1D::table(std::vector<double> x, std::vector<double> y) {
    if (x.size() != y.size()) fail(ErrorCode::InvalidProfile, "table columns differ in length");
    if (x.size() < 4) fail(ErrorCode::InvalidProfile, "table needs at least 4 rows");
    std::vector<std::size_t> order(x.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return x[a] < x[b]; });
    Profile1D p;
    p.kind_ = Kind::Table;
    for (auto i : order) {
        if (!std::isfinite(x[i]) || !std::isfinite(y[i]))
            fail(ErrorCode::InvalidProfile, "non-finite table entry");
        p.xs_.push_back(x[i]);
        p.ys_.push_back(y[i]);
    }
    for (std::size_t i = 1; i < p.xs_.size(); ++i)
        if (!(p.xs_[i] > p.xs_[i - 1])) fail(ErrorCode::InvalidProfile, "table abscissae must be distinct");
    auto xc = p.xs_;
    auto yc = p.ys_;
    p.spline_ = std::make_shared<boost::math::interpolators::pchip<std::vector<double>>>(
        std::move(xc), std::move(yc));
    // Cumulative integral at the knots; two-point Gauss is exact on each cubic piece.
    p.cumulative_.assign(p.xs_.size(), 0.0);
    const double r = 0.5 / std::sqrt(3.0);
    for (std::size_t i = 1; i < p.xs_.size(); ++i) {
        double a = p.xs_[i - 1], b = p.xs_[i], m = 0.5 * (a + b), h = b - a;
        double piece = 0.5 * h * ((*p.spline_)(m - r * h) + (*p.spline_)(m + r * h));
        p.cumulative_[i] = p.cumulative_[i - 1] + piece;
    }
    return p;
}

double Profile1D::value(double x) const {
    if (kind_ == Kind::Poly) return poly_eval(coeffs_, x);
    if (x <= xs_.front()) return ys_.front();
    if (x >= xs_.back()) return ys_.back();
    return (*spline_)(x);
}

double Profile1D::deriv(double x) const {
    if (kind_ == Kind::Poly) return poly_deriv(coeffs_, x);
    if (x < xs_.front() || x > xs_.back()) return 0.0;
    return spline_->prime(x);
}

double Profile1D::antiderivative(double x) const {
    if (kind_ == Kind::Poly) return poly_antideriv(coeffs_, x);
    if (x <= xs_.front()) return (x - xs_.front()) * ys_.front();
    if (x >= xs_.back()) return cumulative_.back() + (x - xs_.back()) * ys_.back();
    auto it = std::upper_bound(xs_.begin(), xs_.end(), x);
    std::size_t i = std::size_t(it - xs_.begin()) - 1;
    double a = xs_[i], h = x - a;
    if (h <= 0.0) return cumulative_[i];
    const double r = 0.5 / std::sqrt(3.0);
    double m = a + 0.5 * h;
    return cumulative_[i] + 0.5 * h * ((*spline_)(m - r * h) + (*spline_)(m + r * h));
}

double Profile1D::integral(double a, double b) const { return antiderivative(b) - antiderivative(a); }

bool Profile1D::covers(double a, double b, double tol) const {
    if (kind_ == Kind::Poly) return true;
    return xs_.front() <= a + tol && xs_.back() >= b - tol;
}

double compute_epsilon0(double g, double p0, double rho0, double rho_prime_inf) {
    if (rho_prime_inf == 0.0) return 0.0;
    double ap0 = std::fabs(p0);
    double t1 = std::pow(2.0 * g * rho_prime_inf * p0 * p0 * std::exp(ap0), 2.0 / 3.0);
    double t2 = std::pow(2.0 * g * rho_prime_inf, 2);
    double t3 = std::pow(4.0 * rho_prime_inf, 2);
    double t4 = std::pow(8.0 * g * ap0 * rho0, 2.0 / 3.0);
    return std::max({t1, t2, t3, t4});
}

ProfileBundle::ProfileBundle(FlowParams params, Profile1D rho, Profile1D beta, FloorMode floor)
    : params_(params), rho_(std::move(rho)), beta_(std::move(beta)), floor_(floor) {
    const double p0 = params_.p0;
    if (!(p0 < 0.0) || !std::isfinite(p0)) fail(ErrorCode::InvalidArgument, "p0 must be negative");
    if (!(params_.g > 0.0) || !std::isfinite(params_.g)) fail(ErrorCode::InvalidArgument, "g must be positive");
    if (!(params_.c > 0.0) || !std::isfinite(params_.c)) fail(ErrorCode::InvalidArgument, "c must be positive");
    if (!rho_.covers(p0, 0.0)) fail(ErrorCode::InvalidProfile, "density table does not cover [p0, 0]");
    if (!beta_.covers(0.0, -p0)) fail(ErrorCode::InvalidProfile, "Bernoulli table does not cover [0, |p0|]");

    // Admissibility on a 10x oversampled grid.
    const int dense = 10 * kSamples;
    for (int k = 0; k <= dense; ++k) {
        double p = p0 * (1.0 - double(k) / dense);
        double r = rho_.value(p), rp = rho_.deriv(p);
        if (!(r > 0.0)) {
            std::ostringstream os;
            os << "density not positive at p = " << p;
            fail(ErrorCode::InvalidProfile, os.str());
        }
        if (rp > 1e-14 * std::max(1.0, std::fabs(r))) {
            std::ostringstream os;
            os << "density increasing at p = " << p;
            fail(ErrorCode::InvalidProfile, os.str());
        }
    }

    rho_value0_ = rho_.value(0.0);
    double bmin = 0.0, rpinf = 0.0;
    for (int k = 0; k <= kSamples; ++k) {
        double p = p0 * (1.0 - double(k) / kSamples);
        bmin = std::min(bmin, B(p));
        rpinf = std::max(rpinf, std::fabs(rho_.deriv(p)));
    }
    B_min_ = bmin;
    rho_prime_inf_ = rpinf;
    eps0_ = compute_epsilon0(params_.g, p0, rho_value0_, rho_prime_inf_);
}

double ProfileBundle::rho(double p) const { return rho_.value(std::clamp(p, params_.p0, 0.0)); }

double ProfileBundle::rho_p(double p) const {
    if (p < params_.p0 || p > 0.0) return 0.0;
    return std::min(0.0, rho_.deriv(p));
}

double ProfileBundle::beta(double s) const { return beta_.value(std::clamp(s, 0.0, -params_.p0)); }

double ProfileBundle::B(double p) const {
    const double p0 = params_.p0;
    if (p > 0.0) return p * beta(0.0);
    if (p < p0) return B(p0) + (p - p0) * beta(-p0);
    // int_0^p beta(-s) ds = -int_0^{-p} beta(t) dt
    return -beta_.integral(0.0, -p);
}

double ProfileBundle::lambda_min() const {
    double eps = eps0_ > 0.0 ? eps0_ : epsilon_floor();
    if (floor_ == FloorMode::Relaxed)
        eps = std::max(epsilon_floor(), std::pow(2.0 * params_.g * rho_prime_inf_, 2));
    return -2.0 * B_min_ + eps;
}

ProfileBundle::SizeCondition ProfileBundle::check_size_condition() const {
    const double p0 = params_.p0, g = params_.g;
    const double lower = eps0_ > 0.0 ? eps0_ : epsilon_floor();
    auto integrand = [&](double p) {
        double lam = 2.0 * B(p) - 2.0 * B_min_ + lower + eps0_;
        lam = std::max(lam, 0.0);
        double dp = p - p0;
        return std::pow(lam, 1.5) + dp * dp * (std::sqrt(lam) + g * rho_p(p));
    };
    double err = 0.0;
    double rhs = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(integrand, p0, 0.0, 15,
                                                                               1e-13, &err);
    double lhs = g * rho_value0_ * p0 * p0;
    return {lhs - rhs > 0.0, lhs - rhs, lhs, rhs};
}

const char* error_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::Ok: return "Ok";
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::InvalidProfile: return "InvalidProfile";
        case ErrorCode::NoBedReached: return "NoBedReached";
        case ErrorCode::NonMonotone: return "NonMonotone";
        case ErrorCode::NoMinimumInRange: return "NoMinimumInRange";
        case ErrorCode::DegenerateDenominator: return "DegenerateDenominator";
        case ErrorCode::LBViolated: return "LBViolated";
        case ErrorCode::StagnationGuard: return "StagnationGuard";
        case ErrorCode::NoConvergence: return "NoConvergence";
        case ErrorCode::SingularJacobian: return "SingularJacobian";
        case ErrorCode::StepFailure: return "StepFailure";
        case ErrorCode::MonitorStop: return "MonitorStop";
        case ErrorCode::InvalidField: return "InvalidField";
        case ErrorCode::ParseError: return "ParseError";
        case ErrorCode::IoError: return "IoError";
        case ErrorCode::Internal: return "Internal";
    }
    return "Unknown";
}

}  // namespace strataflow
