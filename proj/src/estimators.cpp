#include "barankin/estimators.hpp"

#include <cmath>

#include "barankin/errors.hpp"

namespace barankin {

namespace {

// e^{-kappa} (e^{l} - 1) without overflow.
double scaled_ratio_excess(double log_ratio, double kappa) {
    const SignedLog s = signed_log_expm1(log_ratio);
    if (s.sign == 0) return 0.0;
    return s.sign * std::exp(s.log_abs - kappa);
}

}  // namespace

Vector CmlEstimate::theta() const {
    Vector t(4);
    t << std::cos(nu_angle), std::sin(nu_angle), phi_hat, alpha_hat;
    return t;
}

CmlEstimator::CmlEstimator(const DoaScenario& s, int angle_grid_size, double refine_tol)
    : s_(s), grid_(angle_grid_size), tol_(refine_tol) {
    s_.validate();
    if (grid_ < 1) throw InvalidInput("angle grid size must be >= 1");
    if (!(tol_ > 0.0)) throw InvalidInput("refinement tolerance must be positive");
    table_.resize(grid_, s_.q_sensors);
    for (int k = 0; k < grid_; ++k)
        table_.row(k) = steering_vector(s_, -M_PI + 2.0 * M_PI * k / grid_).conjugate().transpose();
    for (double p : s_.phase_set) {
        cos_p_.push_back(std::cos(p));
        sin_p_.push_back(std::sin(p));
    }
}

double CmlEstimator::objective(const CVector& x, double angle, double phase) const {
    const Complex z = steering_vector(s_, angle).dot(x);  // a^H x
    return (z * std::polar(1.0, -phase)).real();
}

CmlEstimator::Coarse CmlEstimator::coarse(const CVector& x) const {
    if (x.size() != s_.q_sensors) throw InvalidInput("observation has wrong length");
    const CVector z = table_ * x;
    Coarse best{0.0, 0, -std::numeric_limits<double>::infinity()};
    int best_k = 0;
    // Strict improvement keeps the smallest angle, then the earliest phase.
    for (int k = 0; k < grid_; ++k)
        for (std::size_t p = 0; p < cos_p_.size(); ++p) {
            const double v = z(k).real() * cos_p_[p] + z(k).imag() * sin_p_[p];
            if (v > best.objective) {
                best.objective = v;
                best.phase_index = p;
                best_k = k;
            }
        }
    best.angle = -M_PI + 2.0 * M_PI * best_k / grid_;
    return best;
}

CmlEstimate CmlEstimator::estimate(const CVector& x) const {
    const Coarse c = coarse(x);
    const double phase = s_.phase_set[c.phase_index];
    auto f = [&](double a) { return objective(x, a, phase); };
    const double cell = 2.0 * M_PI / grid_;
    // Golden-section search for the maximum on one cell either side.
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double lo = c.angle - cell, hi = c.angle + cell;
    double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
    double f1 = f(x1), f2 = f(x2);
    while (hi - lo > tol_) {
        if (f1 < f2) {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = f(x1);
        }
    }
    double angle = 0.5 * (lo + hi);
    double obj = f(angle);
    if (!(obj >= c.objective)) {
        angle = c.angle;
        obj = c.objective;
    }
    CmlEstimate e;
    e.nu_angle = wrap_angle(angle);
    e.phi_hat = phase;
    e.objective = obj;
    e.alpha_hat = obj / s_.q_sensors;
    return e;
}

CmlEstimate cml_estimate(const DoaScenario& s, const CVector& x, int angle_grid_size) {
    return CmlEstimator(s, angle_grid_size).estimate(x);
}

CbtbEfficientEstimator::CbtbEfficientEstimator(const TestPointSet& points, const Matrix& w,
                                               const MomentMatrixB& b)
    : theta_(points.reference), red_(reduce_cbtb(points, w, b)) {}

Vector CbtbEfficientEstimator::estimate(const Vector& log_ratios) const {
    const Eigen::Index p = red_.gain.cols();
    if (log_ratios.size() != p + 1) throw InvalidInput("likelihood-ratio vector has wrong length");
    Vector out = theta_;
    for (Eigen::Index m = 0; m < p; ++m)
        out += red_.gain.col(m) * scaled_ratio_excess(log_ratios(m + 1), red_.kappa(m));
    return out;
}

Matrix CbtbEfficientEstimator::ratio_coefficients() const {
    const Eigen::Index p = red_.gain.cols();
    Matrix c = Matrix::Zero(theta_.size(), p + 1);
    for (Eigen::Index m = 0; m < p; ++m) {
        const Vector g = red_.gain.col(m) * std::exp(-red_.kappa(m));
        c.col(m + 1) = g;
        c.col(0) -= g;
    }
    return c;
}

LuEfficientEstimator::LuEfficientEstimator(const TestPointSet& points, const Matrix& w,
                                           const ConstraintSpec& spec, const MomentMatrixB& b)
    : red_(reduce_lu(points, w, spec, b)), w_sqrt_(psd_sqrt(w)) {
    constant_ = red_.u[0] * red_.lambda0;
    for (std::size_t m = 0; m < red_.lambda.size(); ++m)
        constant_ += red_.u[m + 1] * red_.lambda[m] * std::exp(-red_.kappa(static_cast<Eigen::Index>(m)));
}

Vector LuEfficientEstimator::weighted_error(const Vector& log_ratios) const {
    const std::size_t p = red_.lambda.size();
    if (static_cast<std::size_t>(log_ratios.size()) != p + 1)
        throw InvalidInput("likelihood-ratio vector has wrong length");
    Vector e = constant_;
    for (std::size_t m = 0; m < p; ++m) {
        const auto mi = static_cast<Eigen::Index>(m);
        e += red_.u[m + 1] * red_.lambda[m] * scaled_ratio_excess(log_ratios(mi + 1), red_.kappa(mi));
    }
    return w_sqrt_ * e;
}

Matrix LuEfficientEstimator::ratio_coefficients() const {
    const std::size_t p = red_.lambda.size();
    Matrix c = Matrix::Zero(w_sqrt_.rows(), static_cast<Eigen::Index>(p + 1));
    c.col(0) = red_.u[0] * red_.lambda0;
    for (std::size_t m = 0; m < p; ++m)
        c.col(static_cast<Eigen::Index>(m + 1)) =
            red_.u[m + 1] * red_.lambda[m] * std::exp(-red_.kappa(static_cast<Eigen::Index>(m)));
    return c;
}

Vector cbtb_efficient_estimate(const TestPointSet& points, const Matrix& w,
                               const MomentMatrixB& b, const Vector& log_ratios) {
    return CbtbEfficientEstimator(points, w, b).estimate(log_ratios);
}

Vector lu_cbtb_efficient_estimate(const TestPointSet& points, const Matrix& w,
                                  const ConstraintSpec& spec, const MomentMatrixB& b,
                                  const Vector& log_ratios) {
    return LuEfficientEstimator(points, w, spec, b).weighted_error(log_ratios);
}

}  // namespace barankin
