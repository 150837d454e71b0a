#pragma once

#include <vector>

#include "barankin/bounds.hpp"
#include "barankin/doa.hpp"

namespace barankin {

struct CmlEstimate {
    double nu_angle = 0.0;  // in [-pi, pi)
    double phi_hat = 0.0;   // member of the phase set
    double alpha_hat = 0.0;
    double objective = 0.0;  // Re{a^H(nu) x e^{-j phi}} at the estimate

    Vector theta() const;
};

// Grid search over angle and phase followed by golden-section refinement of
// the angle with the phase held at the coarse winner.
class CmlEstimator {
public:
    explicit CmlEstimator(const DoaScenario& s, int angle_grid_size = 4096,
                          double refine_tol = 1e-8);

    CmlEstimate estimate(const CVector& x) const;
    double objective(const CVector& x, double angle, double phase) const;
    // Best coarse grid point (angle, phase index, objective).
    struct Coarse {
        double angle;
        std::size_t phase_index;
        double objective;
    };
    Coarse coarse(const CVector& x) const;
    int grid_size() const { return grid_; }

private:
    DoaScenario s_;
    int grid_;
    double tol_;
    Eigen::MatrixXcd table_;  // conj steering, grid x Q
    std::vector<double> cos_p_, sin_p_;
};

CmlEstimate cml_estimate(const DoaScenario& s, const CVector& x, int angle_grid_size = 4096);

// theta_hat = theta + T B^+ (L_0, ..., L_P)^T, evaluated through the reduced
// kernel. Defined separately for each fixed theta.
class CbtbEfficientEstimator {
public:
    CbtbEfficientEstimator(const TestPointSet& points, const Matrix& w, const MomentMatrixB& b);
    // log_ratios(m) = log f(x; theta_m) - log f(x; theta), m = 0..P.
    Vector estimate(const Vector& log_ratios) const;
    double bound() const { return red_.value; }
    // Affine form theta_hat = theta + sum_m coeff.col(m) * L_m, m = 0..P.
    Matrix ratio_coefficients() const;

private:
    Vector theta_;
    ReducedCbtb red_;
};

// Weighted error W^{1/2}(theta_hat - theta) of the estimator attaining the
// LU-CBTB for the given test points.
class LuEfficientEstimator {
public:
    LuEfficientEstimator(const TestPointSet& points, const Matrix& w, const ConstraintSpec& spec,
                         const MomentMatrixB& b);
    Vector weighted_error(const Vector& log_ratios) const;
    double bound() const { return red_.value; }
    // Unweighted form: sum_m coeff.col(m) * L_m with W^{1/2} applied afterwards.
    Matrix ratio_coefficients() const;
    const Matrix& w_sqrt() const { return w_sqrt_; }

private:
    ReducedLu red_;
    Matrix w_sqrt_;
    Vector constant_;  // U_0 lambda_0 + sum_m U_m lambda_m
};

Vector cbtb_efficient_estimate(const TestPointSet& points, const Matrix& w,
                               const MomentMatrixB& b, const Vector& log_ratios);
Vector lu_cbtb_efficient_estimate(const TestPointSet& points, const Matrix& w,
                                  const ConstraintSpec& spec, const MomentMatrixB& b,
                                  const Vector& log_ratios);

}  // namespace barankin
