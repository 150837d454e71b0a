#include "barankin/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "barankin/errors.hpp"

namespace barankin {

bool all_finite(const Matrix& a) { return a.allFinite(); }

Matrix pseudo_inverse(const Matrix& a, double rel_tol) {
    if (!a.allFinite()) throw InvalidInput("pseudo_inverse: non-finite input");
    if (a.size() == 0) return Matrix::Zero(a.cols(), a.rows());
    if (rel_tol <= 0.0)
        rel_tol = static_cast<double>(std::max(a.rows(), a.cols())) *
                  std::numeric_limits<double>::epsilon();
    Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Vector& s = svd.singularValues();
    const double cutoff = rel_tol * (s.size() > 0 ? s(0) : 0.0);
    Vector inv = Vector::Zero(s.size());
    for (Eigen::Index i = 0; i < s.size(); ++i)
        if (s(i) > cutoff && s(i) > 0.0) inv(i) = 1.0 / s(i);
    return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

Matrix kronecker(const Matrix& a, const Matrix& b) {
    if (!a.allFinite() || !b.allFinite()) throw InvalidInput("kronecker: non-finite input");
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

Vector vec(const Matrix& a) {
    // Eigen storage is column-major, so a straight copy stacks columns.
    return Eigen::Map<const Vector>(a.data(), a.size());
}

Matrix vec_permutation(int n) {
    if (n < 1) throw InvalidInput("vec_permutation: n must be >= 1");
    const int nn = n * n;
    Matrix s = Matrix::Zero(nn, nn);
    // vec(A)[i + n j] = A(i, j); vec(A^T)[j + n i] = A(i, j).
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) s(j + n * i, i + n * j) = 1.0;
    return s;
}

bool is_psd(const Matrix& a, double tol) {
    if (a.rows() != a.cols()) throw InvalidInput("is_psd: matrix is not square");
    if (!a.allFinite()) throw InvalidInput("is_psd: non-finite input");
    if (a.size() == 0) return true;
    const double norm = a.norm();
    const double sym_tol = 1e-10 * std::max(norm, 1e-300);
    if ((a - a.transpose()).cwiseAbs().maxCoeff() > sym_tol)
        throw InvalidInput("is_psd: matrix is not symmetric");
    if (tol <= 0.0) tol = 1e-10 * norm;
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (a + a.transpose()), Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff() >= -tol;
}

Matrix psd_sqrt(const Matrix& a) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (a + a.transpose()));
    Vector ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace barankin
