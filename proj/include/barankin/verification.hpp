#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "barankin/experiment.hpp"

namespace barankin {

struct CheckResult {
    std::string name;
    bool passed = false;
    std::string detail;
    double seconds = 0.0;
};

struct VerifyOptions {
    std::uint64_t seed = 1;
    double mc_scale = 1.0;
    double gb_perturbation = 0.0;
    std::vector<std::string> checks;  // empty runs all
};

struct VerifyReport {
    std::vector<CheckResult> checks;
    bool passed() const;
    // One line per check; excludes timings so reruns compare equal.
    std::string text() const;
};

// Check names in execution order.
const std::vector<std::string>& check_names();

CheckResult run_check(const std::string& name, const VerifyOptions& opt);
VerifyReport run_verification(const VerifyOptions& opt);
VerifyReport cmd_verify(const ExperimentConfig& c);

// Exact moments of affine functions of likelihood ratios under a Gaussian
// mean model, from E_theta[prod_i L_i] = exp(sum_{i<j} log B_ij).
// Mean and covariance of coeff * L when x is drawn at test point k.
Vector ratio_affine_mean(const Matrix& coeff, const Matrix& log_b, int k);
Matrix ratio_affine_cov(const Matrix& coeff, const Matrix& log_b, int k);
// Mean and variance of L^T G L when x is drawn at the reference point.
std::pair<double, double> ratio_quadratic_moments(const Matrix& g, const Matrix& log_b);

}  // namespace barankin
