#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "barankin/doa.hpp"

namespace barankin {

// Returns the estimate theta_hat, or nothing when the estimator fails.
using Estimator = std::function<std::optional<Vector>(const CVector&)>;

struct TrialStatistics {
    std::size_t trials = 0;  // successful trials
    std::size_t failed = 0;
    std::uint64_t seed = 0;
    double wmse = 0.0, wmse_se = 0.0;
    Vector bias, bias_se;      // first two components (nu)
    Vector c_bias, c_bias_se;  // U^T(theta) W E[theta_hat - theta]
    Vector mean_error, mean_error_se;  // all components of theta_hat - theta
    double bias_norm = 0.0, bias_norm_se = 0.0;
    double c_bias_norm = 0.0, c_bias_norm_se = 0.0;
    // Sum of |nu_hat - nu|^2 over trials, kept for the identity check.
    double sum_nu_sq_error = 0.0;
    double sum_wse = 0.0;
};

// Standard error of ||v|| by first-order propagation; at v = 0 falls back to
// the root-sum-square of the component errors.
double norm_standard_error(const Vector& v, const Vector& se);

// Circular complex Gaussian noise, variance sigma^2 per entry.
CVector draw_noise(int q, double sigma2, std::mt19937_64& rng);

TrialStatistics run_trials(const DoaScenario& s, const Estimator& est, std::size_t trials,
                           std::uint64_t seed, const Matrix& w = doa_weight());

Estimator make_cml_estimator(const DoaScenario& s, int angle_grid_size = 4096,
                             double refine_tol = 1e-8);

struct BoundSettings {
    DoaGrid grid = standard_grid();
    bool include_cbtb = true;
    std::optional<DoaGrid> low_complexity;
};

struct SweepRecord {
    double x = 0.0;  // SNR in dB or angle
    DoaScenario scenario;
    TrialStatistics stats;
    double lu_cbtb = 0.0;
    std::optional<double> cbtb;
    std::optional<double> low_complexity_lu_cbtb;
};

struct EstimatorSettings {
    int angle_grid_size = 4096;
    double refine_tol = 1e-8;
};

// Each sweep point uses the stream seed derived from (seed, point index).
std::vector<SweepRecord> snr_sweep(const DoaScenario& base, const std::vector<double>& snr_db,
                                   const EstimatorSettings& est, std::size_t trials,
                                   std::uint64_t seed, const BoundSettings& bounds);
std::vector<SweepRecord> angle_sweep(const DoaScenario& base, const std::vector<double>& angles,
                                     const EstimatorSettings& est, std::size_t trials,
                                     std::uint64_t seed, const BoundSettings& bounds);

}  // namespace barankin
