#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "barankin/linalg.hpp"

namespace barankin {

inline constexpr double kFeasibilityTol = 1e-9;
inline constexpr double kDerivativeStep = 1e-6;

// Equality-constrained parameter set {theta : f(theta) = 0} with a pinned
// orthonormal complement U(theta) of the constraint Jacobian.
struct ConstraintSpec {
    std::string name;
    int dim_theta = 0;        // M
    int dim_constraints = 0;  // K
    std::function<Vector(const Vector&)> f;
    std::function<Matrix(const Vector&)> jacobian;    // K x M
    std::function<Matrix(const Vector&)> complement;  // M x (M-K)
    // V_m(i, j) = d u_m[i] / d theta_j. Empty means numeric differentiation.
    std::function<std::vector<Matrix>(const Vector&)> column_derivatives;

    int dim_free() const { return dim_theta - dim_constraints; }
    bool is_feasible(const Vector& theta, double tol = kFeasibilityTol) const;
    // Analytic V_m when available, numeric otherwise.
    std::vector<Matrix> derivatives(const Vector& theta) const;
};

struct FeasiblePoint {
    Vector theta;
};

// Throws InvalidInput if theta violates the constraint beyond tol.
FeasiblePoint make_feasible(const ConstraintSpec& spec, const Vector& theta,
                            double tol = kFeasibilityTol);

ConstraintSpec make_linear_constraint(const Matrix& a);
ConstraintSpec make_planar_circle_constraint(double radius);
ConstraintSpec make_doa_cm_constraint();

// Looks up a built-in by name: "doa-cm", "circle2d" (unit radius).
ConstraintSpec constraint_by_name(const std::string& name);

struct DerivativeResult {
    std::vector<Matrix> v;
    // Set when the step is small enough that rounding may dominate.
    std::optional<std::string> warning;
};

DerivativeResult numeric_column_derivatives(const ConstraintSpec& spec, const Vector& theta,
                                            double step = kDerivativeStep);

}  // namespace barankin
