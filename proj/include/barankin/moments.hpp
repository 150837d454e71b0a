#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "barankin/linalg.hpp"

namespace barankin {

using Complex = std::complex<double>;
using CVector = Eigen::VectorXcd;

// Log-entries above this are flagged saturated.
inline constexpr double kSaturationLog = 700.0;

struct TestPointSet {
    Vector reference;           // theta_0 = theta
    std::vector<Vector> points;  // theta_1 .. theta_P

    int size() const { return static_cast<int>(points.size()); }
    // Index 0 is the reference, 1..P the test points.
    const Vector& at(int i) const { return i == 0 ? reference : points[static_cast<size_t>(i - 1)]; }
};

struct GaussianMeanModel {
    std::function<CVector(const Vector&)> mean_map;
    double noise_variance = 1.0;
    int obs_dim = 0;
    // Real noise with variance sigma^2 per coordinate instead of circular
    // complex noise with variance sigma^2 per entry.
    bool real_valued = false;
    // Coordinates along which the mean is not differentiable.
    std::vector<int> nondifferentiable;
    // Optional analytic Jacobian (obs_dim x M).
    std::function<Eigen::MatrixXcd(const Vector&)> jacobian;

    void validate() const;
    // Factor c in log B_mn = c * Re{delta_m^H delta_n}.
    double log_b_factor() const { return (real_valued ? 1.0 : 2.0) / noise_variance; }
};

// Sign and log-magnitude of expm1(l).
struct SignedLog {
    double log_abs;  // -inf when the value is zero
    int sign;        // -1, 0, +1
};
SignedLog signed_log_expm1(double l);

class MomentMatrixB {
public:
    MomentMatrixB() = default;
    MomentMatrixB(Matrix log_b, TestPointSet points);

    int size() const { return static_cast<int>(log_b_.rows()); }
    const Matrix& log_entries() const { return log_b_; }
    const TestPointSet& points() const { return points_; }
    double log_entry(int i, int j) const { return log_b_(i, j); }
    double value(int i, int j) const;     // may overflow to +inf
    double excess(int i, int j) const;    // B_ij - 1 via expm1
    SignedLog log_excess(int i, int j) const { return signed_log_expm1(log_b_(i, j)); }
    bool saturated(int i, int j) const { return log_b_(i, j) > kSaturationLog; }
    bool any_saturated() const;
    Matrix values() const;

private:
    Matrix log_b_;
    TestPointSet points_;
};

MomentMatrixB b_matrix_gaussian(const GaussianMeanModel& model, const TestPointSet& points);

struct MonteCarloB {
    Matrix mean;
    Matrix standard_error;
    std::size_t trials = 0;
};

MonteCarloB b_matrix_monte_carlo(const GaussianMeanModel& model, const TestPointSet& points,
                                 std::size_t trials, std::uint64_t seed);

Matrix fisher_information_gaussian(const GaussianMeanModel& model, const Vector& theta,
                                   double step = 1e-6);

// x = mu(theta) + n with the model's noise law.
CVector sample_observation(const GaussianMeanModel& model, const CVector& mean,
                           std::mt19937_64& rng);

// log f(x; theta_m) - log f(x; theta) for every index m of the set (entry 0 is 0).
Vector log_likelihood_ratios(const GaussianMeanModel& model, const std::vector<CVector>& means,
                             const CVector& x);

std::vector<CVector> point_means(const GaussianMeanModel& model, const TestPointSet& points);

// log E_theta[ prod_i L_{idx_i} ] = sum_{i<j} log B(idx_i, idx_j). Exact for
// Gaussian mean models; indices may repeat.
double log_ratio_product_moment(const Matrix& log_b, const std::vector<int>& idx);

}  // namespace barankin
