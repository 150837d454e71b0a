#include "barankin/constraints.hpp"

#include <cmath>
#include <limits>

#include "barankin/errors.hpp"

namespace barankin {

bool ConstraintSpec::is_feasible(const Vector& theta, double tol) const {
    if (theta.size() != dim_theta) return false;
    const Vector v = f(theta);
    return v.allFinite() && (v.size() == 0 || v.cwiseAbs().maxCoeff() <= tol);
}

std::vector<Matrix> ConstraintSpec::derivatives(const Vector& theta) const {
    if (column_derivatives) return column_derivatives(theta);
    return numeric_column_derivatives(*this, theta).v;
}

FeasiblePoint make_feasible(const ConstraintSpec& spec, const Vector& theta, double tol) {
    if (!spec.is_feasible(theta, tol))
        throw InvalidInput("point violates constraint '" + spec.name + "'");
    return FeasiblePoint{theta};
}

ConstraintSpec make_linear_constraint(const Matrix& a) {
    const int k = static_cast<int>(a.rows());
    const int m = static_cast<int>(a.cols());
    if (k <= 0 || k >= m) throw InvalidConstraint("linear constraint needs 0 < K < M");
    if (!a.allFinite()) throw InvalidConstraint("linear constraint has non-finite entries");
    // Null space from the full SVD: the trailing right singular vectors.
    Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeFullV);
    const double smax = svd.singularValues()(0);
    const double smin = svd.singularValues()(k - 1);
    if (!(smax > 0.0) || smin <= static_cast<double>(m) * std::numeric_limits<double>::epsilon() * smax)
        throw InvalidConstraint("linear constraint matrix is rank deficient");
    Matrix u = svd.matrixV().rightCols(m - k);
    // Pin the sign: largest-magnitude entry of each column positive.
    for (int c = 0; c < u.cols(); ++c) {
        Eigen::Index idx;
        u.col(c).cwiseAbs().maxCoeff(&idx);
        if (u(idx, c) < 0) u.col(c) *= -1.0;
    }

    ConstraintSpec s;
    s.name = "linear";
    s.dim_theta = m;
    s.dim_constraints = k;
    s.f = [a](const Vector& th) -> Vector { return a * th; };
    s.jacobian = [a](const Vector&) -> Matrix { return a; };
    s.complement = [u](const Vector&) -> Matrix { return u; };
    s.column_derivatives = [m, k](const Vector&) {
        return std::vector<Matrix>(static_cast<size_t>(m - k), Matrix::Zero(m, m));
    };
    return s;
}

ConstraintSpec make_planar_circle_constraint(double radius) {
    if (!(radius > 0.0) || !std::isfinite(radius))
        throw InvalidConstraint("circle radius must be positive");
    const double r = radius;
    ConstraintSpec s;
    s.name = "circle2d";
    s.dim_theta = 2;
    s.dim_constraints = 1;
    s.f = [r](const Vector& th) -> Vector {
        Vector v(1);
        v(0) = th(0) * th(0) + th(1) * th(1) - r * r;
        return v;
    };
    s.jacobian = [](const Vector& th) -> Matrix {
        Matrix j(1, 2);
        j << 2 * th(0), 2 * th(1);
        return j;
    };
    s.complement = [r](const Vector& th) -> Matrix {
        Matrix u(2, 1);
        u << th(1) / r, -th(0) / r;
        return u;
    };
    s.column_derivatives = [r](const Vector&) {
        Matrix v(2, 2);
        v << 0, 1.0 / r, -1.0 / r, 0;
        return std::vector<Matrix>{v};
    };
    return s;
}

ConstraintSpec make_doa_cm_constraint() {
    ConstraintSpec s;
    s.name = "doa-cm";
    s.dim_theta = 4;
    s.dim_constraints = 1;
    s.f = [](const Vector& th) -> Vector {
        Vector v(1);
        v(0) = th(0) * th(0) + th(1) * th(1) - 1.0;
        return v;
    };
    // The derivative along the discrete phase coordinate is taken as zero.
    s.jacobian = [](const Vector& th) -> Matrix {
        Matrix j(1, 4);
        j << 2 * th(0), 2 * th(1), 0, 0;
        return j;
    };
    s.complement = [](const Vector& th) -> Matrix {
        Matrix u = Matrix::Zero(4, 3);
        u(0, 0) = th(1);
        u(1, 0) = -th(0);
        u(2, 1) = 1.0;
        u(3, 2) = 1.0;
        return u;
    };
    s.column_derivatives = [](const Vector&) {
        std::vector<Matrix> v(3, Matrix::Zero(4, 4));
        v[0](0, 1) = 1.0;
        v[0](1, 0) = -1.0;
        return v;
    };
    return s;
}

ConstraintSpec constraint_by_name(const std::string& name) {
    if (name == "doa-cm") return make_doa_cm_constraint();
    if (name == "circle2d") return make_planar_circle_constraint(1.0);
    throw InvalidConstraint("unknown built-in constraint '" + name + "'");
}

DerivativeResult numeric_column_derivatives(const ConstraintSpec& spec, const Vector& theta,
                                            double step) {
    if (!(step > 0.0)) throw InvalidInput("derivative step must be positive");
    const int m = spec.dim_theta;
    const int nf = spec.dim_free();
    DerivativeResult out;
    out.v.assign(static_cast<size_t>(nf), Matrix::Zero(m, m));
    double umax = 0.0;
    for (int j = 0; j < m; ++j) {
        Vector tp = theta, tm = theta;
        tp(j) += step;
        tm(j) -= step;
        const Matrix up = spec.complement(tp);
        const Matrix um = spec.complement(tm);
        umax = std::max({umax, up.cwiseAbs().maxCoeff(), um.cwiseAbs().maxCoeff()});
        const Matrix d = (up - um) / (2.0 * step);
        for (int c = 0; c < nf; ++c) out.v[static_cast<size_t>(c)].col(j) = d.col(c);
    }
    // Rounding error of a central difference is about eps * |U| / step.
    const double rounding = std::numeric_limits<double>::epsilon() * umax / step;
    if (rounding > 1e-6)
        out.warning = "finite-difference step " + std::to_string(step) +
                      " gives rounding error near " + std::to_string(rounding);
    return out;
}

}  // namespace barankin
