#pragma once

#include <Eigen/Dense>

namespace barankin {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Singular values below rel_tol * sigma_max are dropped. rel_tol <= 0 selects
// max(rows, cols) * eps.
Matrix pseudo_inverse(const Matrix& a, double rel_tol = 0.0);

Matrix kronecker(const Matrix& a, const Matrix& b);

// Column stacking.
Vector vec(const Matrix& a);

// S_n with vec(A^T) = S_n vec(A) for n x n A.
Matrix vec_permutation(int n);

// tol <= 0 selects 1e-10 * ||a||.
bool is_psd(const Matrix& a, double tol = 0.0);

bool all_finite(const Matrix& a);

// Symmetric PSD square root via eigen-decomposition; tiny negative
// eigenvalues are clipped to zero.
Matrix psd_sqrt(const Matrix& a);

}  // namespace barankin
