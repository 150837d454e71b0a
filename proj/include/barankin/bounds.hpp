#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "barankin/constraints.hpp"
#include "barankin/moments.hpp"

namespace barankin {

// One candidate evaluation.
struct PointBound {
    double value = 0.0;
    bool valid = true;
    bool saturated = false;   // some required B entry exceeds the log budget
    double condition = 1.0;   // condition number of the scaled kernel
};

// Literal assembly of T = [0, theta_1 - theta, ..., theta_P - theta].
Matrix t_matrix(const TestPointSet& points);
// Block (m, n) = U(theta_m)^T W U(theta_n) B_mn, m, n = 0..P.
Matrix assemble_d(const TestPointSet& points, const Matrix& w, const ConstraintSpec& spec,
                  const MomentMatrixB& b);
// Block m = U(theta_m)^T W (theta_m - theta); block 0 is zero.
Vector assemble_t(const TestPointSet& points, const Matrix& w, const ConstraintSpec& spec);

// Tr(T B^+ T^T W) and t^T D^+ t computed literally. Accurate only when B is
// well conditioned and unsaturated; kept as a cross-check.
double cbtb_direct(const TestPointSet& points, const Matrix& w, const MomentMatrixB& b);
double lu_cbtb_direct(const TestPointSet& points, const Matrix& w, const ConstraintSpec& spec,
                      const MomentMatrixB& b);

// Production evaluation. The reference block is eliminated exactly (Schur
// complement) and the remaining kernel is built from B - 1 in the log domain
// with per-point rescaling, so saturated entries still yield a finite value.
PointBound cbtb_for_points(const TestPointSet& points, const Matrix& w, const MomentMatrixB& b);
PointBound lu_cbtb_for_points(const TestPointSet& points, const Matrix& w,
                              const ConstraintSpec& spec, const MomentMatrixB& b,
                              double feasibility_tol = kFeasibilityTol);

// Reduced kernels shared with the efficient estimators.
struct ReducedCbtb {
    Matrix gain;     // M x P; theta_hat - theta = sum_m gain.col(m) * e^{-kappa_m} (L_m - 1)
    Vector kappa;    // per-point log scale
    double value = 0.0;
    bool saturated = false;
    double condition = 1.0;
};
ReducedCbtb reduce_cbtb(const TestPointSet& points, const Matrix& w, const MomentMatrixB& b);

struct ReducedLu {
    int r = 0;                   // M - K
    std::vector<Matrix> u;       // U(theta_m), m = 0..P
    Vector lambda0;              // block 0 of D^+ t
    std::vector<Vector> lambda;  // scaled blocks: actual block m = e^{-kappa_m} lambda[m-1]
    Vector kappa;
    double value = 0.0;
    bool saturated = false;
    double condition = 1.0;
};
ReducedLu reduce_lu(const TestPointSet& points, const Matrix& w, const ConstraintSpec& spec,
                    const MomentMatrixB& b);

struct CandidateRecord {
    std::vector<double> params;
    double value = 0.0;
    bool valid = false;
    bool saturated = false;
};

struct BoundResult {
    double value = 0.0;
    std::size_t argmax = 0;
    std::vector<double> argmax_params;
    std::optional<TestPointSet> argmax_points;
    std::vector<CandidateRecord> candidate_log;
    int valid_count = 0;
    int saturated_count = 0;
};

// Maximum over valid candidates; ties go to the lexicographically smallest
// parameter vector. Throws AllCandidatesInvalid when nothing is valid.
BoundResult supremum_bound(const std::vector<std::vector<double>>& params,
                           const std::function<PointBound(std::size_t)>& evaluate);
// Candidate sets are labelled by their index.
BoundResult supremum_bound(const std::vector<TestPointSet>& candidates,
                           const std::function<PointBound(const TestPointSet&)>& evaluate);

double ccrb(const Vector& theta, const ConstraintSpec& spec, const Matrix& w, const Matrix& fim);
// C_{U,W}: stacked (V_m U)^T times the weighted projector times [V_1 U ... V_r U].
Matrix c_uw(const Vector& theta, const ConstraintSpec& spec, const Matrix& w);
double lu_ccrb(const Vector& theta, const ConstraintSpec& spec, const Matrix& w, const Matrix& fim);

// Test points theta + tau u_m, m = 1..M-K; feasibility relaxed to O(tau^2).
double lu_cbtb_small_tau(const Vector& theta, const ConstraintSpec& spec, const Matrix& w,
                         const GaussianMeanModel& model, double tau);

// Validates W: square M x M, symmetric, PSD.
void validate_weight(const Matrix& w, int m);

}  // namespace barankin
