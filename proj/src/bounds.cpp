#include "barankin/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "barankin/errors.hpp"
#include "barankin/parallel.hpp"

namespace barankin {

void validate_weight(const Matrix& w, int m) {
    if (w.rows() != m || w.cols() != m) throw InvalidInput("weight matrix has wrong shape");
    if (!is_psd(w)) throw InvalidInput("weight matrix is not PSD");
}

namespace {

void check_shapes(const TestPointSet& points, const MomentMatrixB& b) {
    if (points.size() < 1) throw InvalidInput("test-point set is empty");
    if (b.size() != points.size() + 1) throw InvalidInput("B does not match the test-point set");
}

// Reduced kernels are assembled and solved in long double. Nearby test points
// push their condition number toward 1e8, where a double solve keeps only
// about 1e-8 relative accuracy.
using Real = long double;
using LMatrix = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic>;
using LVector = Eigen::Matrix<Real, Eigen::Dynamic, 1>;

struct LSignedLog {
    Real log_abs;
    int sign;
};

LSignedLog signed_log_expm1_l(Real l) {
    if (l == 0) return {-std::numeric_limits<Real>::infinity(), 0};
    if (l > 0) return {l + std::log1p(-std::exp(-l)), 1};
    return {std::log(-std::expm1(l)), -1};
}

// C = B - 1 restricted to indices 1..P, rescaled by exp(-kappa_m - kappa_n).
struct ScaledExcess {
    LMatrix c;
    LVector kappa;
    bool saturated = false;
};

ScaledExcess scaled_excess(const MomentMatrixB& b) {
    const int p = b.size() - 1;
    ScaledExcess s;
    s.kappa = LVector::Zero(p);
    for (int m = 0; m < p; ++m) {
        const LSignedLog d = signed_log_expm1_l(b.log_entry(m + 1, m + 1));
        if (d.sign > 0) s.kappa(m) = std::max<Real>(0, d.log_abs) / 2;
    }
    s.c = LMatrix::Zero(p, p);
    for (int m = 0; m < p; ++m)
        for (int n = 0; n < p; ++n) {
            if (b.saturated(m + 1, n + 1)) s.saturated = true;
            const LSignedLog e = signed_log_expm1_l(b.log_entry(m + 1, n + 1));
            if (e.sign != 0) s.c(m, n) = e.sign * std::exp(e.log_abs - s.kappa(m) - s.kappa(n));
        }
    return s;
}

// Jacobi-equilibrated pseudo-inverse of a symmetric PSD matrix.
struct ScaledSolve {
    LMatrix pinv;   // of the equilibrated matrix
    LVector scale;  // equilibration factors d_i
    double condition = 1.0;
};

ScaledSolve equilibrated_pinv(const LMatrix& s) {
    ScaledSolve out;
    const Eigen::Index n = s.rows();
    out.scale = LVector::Ones(n);
    for (Eigen::Index i = 0; i < n; ++i)
        if (s(i, i) > 0) out.scale(i) = std::sqrt(s(i, i));
    const LMatrix inv_d = out.scale.cwiseInverse().asDiagonal();
    LMatrix ss = inv_d * s * inv_d;
    ss = (ss + ss.transpose()) / 2;
    if (!ss.allFinite()) throw InvalidInput("scaled kernel is not finite");
    Eigen::JacobiSVD<LMatrix> svd(ss, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const LVector& sv = svd.singularValues();
    const Real tol = static_cast<Real>(n) * std::numeric_limits<Real>::epsilon() * sv(0);
    LVector inv = LVector::Zero(sv.size());
    Real smin = sv(0);
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv(i) > tol && sv(i) > 0) {
            inv(i) = 1 / sv(i);
            smin = sv(i);
        }
    out.condition = sv(0) > 0 ? static_cast<double>(sv(0) / smin) : 1.0;
    out.pinv = svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
    return out;
}

LMatrix to_l(const Matrix& m) { return m.cast<Real>(); }
LVector to_l(const Vector& v) { return v.cast<Real>(); }

std::vector<Matrix> complements(const TestPointSet& points, const ConstraintSpec& spec) {
    std::vector<Matrix> u;
    for (int i = 0; i <= points.size(); ++i) u.push_back(spec.complement(points.at(i)));
    return u;
}

}  // namespace

Matrix t_matrix(const TestPointSet& points) {
    const Eigen::Index m = points.reference.size();
    Matrix t = Matrix::Zero(m, points.size() + 1);
    for (int i = 1; i <= points.size(); ++i) t.col(i) = points.at(i) - points.reference;
    return t;
}

Matrix assemble_d(const TestPointSet& points, const Matrix& w, const ConstraintSpec& spec,
                  const MomentMatrixB& b) {
    check_shapes(points, b);
    const auto u = complements(points, spec);
    const int r = spec.dim_free();
    const int n = points.size() + 1;
    Matrix d(n * r, n * r);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            d.block(i * r, j * r, r, r) =
                u[static_cast<size_t>(i)].transpose() * w * u[static_cast<size_t>(j)] * b.value(i, j);
    return d;
}

Vector assemble_t(const TestPointSet& points, const Matrix& w, const ConstraintSpec& spec) {
    const auto u = complements(points, spec);
    const int r = spec.dim_free();
    const int n = points.size() + 1;
    Vector t = Vector::Zero(n * r);
    for (int i = 1; i < n; ++i)
        t.segment(i * r, r) =
            u[static_cast<size_t>(i)].transpose() * w * (points.at(i) - points.reference);
    return t;
}

double cbtb_direct(const TestPointSet& points, const Matrix& w, const MomentMatrixB& b) {
    check_shapes(points, b);
    const Matrix t = t_matrix(points);
    return (t * pseudo_inverse(b.values()) * t.transpose() * w).trace();
}

double lu_cbtb_direct(const TestPointSet& points, const Matrix& w, const ConstraintSpec& spec,
                      const MomentMatrixB& b) {
    const Matrix d = assemble_d(points, w, spec, b);
    const Vector t = assemble_t(points, w, spec);
    return t.dot(pseudo_inverse(d) * t);
}

ReducedCbtb reduce_cbtb(const TestPointSet& points, const Matrix& w, const MomentMatrixB& b) {
    check_shapes(points, b);
    validate_weight(w, static_cast<int>(points.reference.size()));
    const int p = points.size();
    const ScaledExcess se = scaled_excess(b);
    const LVector ref = to_l(points.reference);
    LMatrix t_hat(ref.size(), p);
    for (int m = 0; m < p; ++m) t_hat.col(m) = (to_l(points.at(m + 1)) - ref) * std::exp(-se.kappa(m));
    const ScaledSolve sol = equilibrated_pinv(se.c);
    const LMatrix inv_d = sol.scale.cwiseInverse().asDiagonal();
    const LMatrix t_s = t_hat * inv_d;
    const LMatrix g = t_s * sol.pinv;
    ReducedCbtb out;
    out.gain = (g * inv_d).cast<double>();
    out.kappa = se.kappa.cast<double>();
    out.value = std::max(0.0, static_cast<double>((g * t_s.transpose() * to_l(w)).trace()));
    out.saturated = se.saturated;
    out.condition = sol.condition;
    return out;
}

ReducedLu reduce_lu(const TestPointSet& points, const Matrix& w, const ConstraintSpec& spec,
                    const MomentMatrixB& b) {
    check_shapes(points, b);
    validate_weight(w, spec.dim_theta);
    const int p = points.size();
    const int r = spec.dim_free();
    ReducedLu out;
    out.r = r;
    out.u = complements(points, spec);
    std::vector<LMatrix> u;
    for (const auto& m : out.u) u.push_back(to_l(m));
    const LMatrix wl = to_l(w);
    const LMatrix& u0 = u[0];
    const LMatrix a_pinv = to_l(pseudo_inverse(out.u[0].transpose() * w * out.u[0]));
    const LMatrix proj = wl - wl * u0 * a_pinv * u0.transpose() * wl;
    const ScaledExcess se = scaled_excess(b);
    const LVector ref = to_l(points.reference);

    // Schur complement of the reference block. The projector annihilates
    // U(theta), so only the differences U(theta_m) - U(theta) enter it.
    std::vector<LMatrix> du(static_cast<size_t>(p));
    for (int m = 0; m < p; ++m) du[static_cast<size_t>(m)] = u[static_cast<size_t>(m + 1)] - u0;
    LMatrix s(p * r, p * r);
    LVector t(p * r);
    for (int m = 0; m < p; ++m) {
        const LMatrix& um = u[static_cast<size_t>(m + 1)];
        for (int n = 0; n < p; ++n) {
            const LMatrix& un = u[static_cast<size_t>(n + 1)];
            s.block(m * r, n * r, r, r) =
                um.transpose() * wl * un * se.c(m, n) +
                du[static_cast<size_t>(m)].transpose() * proj * du[static_cast<size_t>(n)] *
                    std::exp(-se.kappa(m) - se.kappa(n));
        }
        t.segment(m * r, r) = um.transpose() * wl * (to_l(points.at(m + 1)) - ref) * std::exp(-se.kappa(m));
    }
    const ScaledSolve sol = equilibrated_pinv(s);
    const LVector inv_d = sol.scale.cwiseInverse();
    const LVector t_s = t.cwiseProduct(inv_d);
    const LVector lam_s = sol.pinv * t_s;
    const LVector lam = lam_s.cwiseProduct(inv_d);
    out.value = std::max(0.0, static_cast<double>(t_s.dot(lam_s)));
    out.kappa = se.kappa.cast<double>();
    out.saturated = se.saturated;
    out.condition = sol.condition;
    LVector acc = LVector::Zero(r);
    for (int m = 0; m < p; ++m) {
        out.lambda.push_back(lam.segment(m * r, r).cast<double>());
        acc += u0.transpose() * wl * u[static_cast<size_t>(m + 1)] * lam.segment(m * r, r) *
               std::exp(-se.kappa(m));
    }
    out.lambda0 = (-a_pinv * acc).cast<double>();
    return out;
}

PointBound cbtb_for_points(const TestPointSet& points, const Matrix& w, const MomentMatrixB& b) {
    const ReducedCbtb red = reduce_cbtb(points, w, b);
    PointBound pb;
    pb.value = red.value;
    pb.saturated = red.saturated;
    pb.condition = red.condition;
    pb.valid = std::isfinite(red.value);
    return pb;
}

PointBound lu_cbtb_for_points(const TestPointSet& points, const Matrix& w,
                              const ConstraintSpec& spec, const MomentMatrixB& b,
                              double feasibility_tol) {
    for (int i = 0; i <= points.size(); ++i)
        if (!spec.is_feasible(points.at(i), feasibility_tol))
            throw InvalidInput("test point violates constraint '" + spec.name + "'");
    const ReducedLu red = reduce_lu(points, w, spec, b);
    PointBound pb;
    pb.value = red.value;
    pb.saturated = red.saturated;
    pb.condition = red.condition;
    pb.valid = std::isfinite(red.value);
    return pb;
}

BoundResult supremum_bound(const std::vector<std::vector<double>>& params,
                           const std::function<PointBound(std::size_t)>& evaluate) {
    if (params.empty()) throw InvalidInput("supremum over an empty candidate list");
    std::vector<PointBound> vals(params.size());
    parallel_for(params.size(), [&](std::size_t i) { vals[i] = evaluate(i); });
    BoundResult res;
    bool found = false;
    for (std::size_t i = 0; i < params.size(); ++i) {
        const PointBound& v = vals[i];
        const bool ok = v.valid && std::isfinite(v.value);
        res.candidate_log.push_back({params[i], v.value, ok, v.saturated});
        if (v.saturated) ++res.saturated_count;
        if (!ok) continue;
        ++res.valid_count;
        const bool better =
            !found || v.value > res.value ||
            (v.value == res.value && params[i] < params[res.argmax]);
        if (better) {
            res.value = v.value;
            res.argmax = i;
            found = true;
        }
    }
    if (!found) throw AllCandidatesInvalid("no valid bound candidate");
    res.argmax_params = params[res.argmax];
    return res;
}

BoundResult supremum_bound(const std::vector<TestPointSet>& candidates,
                           const std::function<PointBound(const TestPointSet&)>& evaluate) {
    std::vector<std::vector<double>> params;
    for (std::size_t i = 0; i < candidates.size(); ++i) params.push_back({static_cast<double>(i)});
    BoundResult res = supremum_bound(params, [&](std::size_t i) { return evaluate(candidates[i]); });
    res.argmax_points = candidates[res.argmax];
    return res;
}

double ccrb(const Vector& theta, const ConstraintSpec& spec, const Matrix& w, const Matrix& fim) {
    validate_weight(w, spec.dim_theta);
    const Matrix u = spec.complement(theta);
    return (pseudo_inverse(u.transpose() * fim * u) * (u.transpose() * w * u)).trace();
}

Matrix c_uw(const Vector& theta, const ConstraintSpec& spec, const Matrix& w) {
    const Matrix u = spec.complement(theta);
    const int r = spec.dim_free();
    const auto v = spec.derivatives(theta);
    Matrix g(spec.dim_theta, r * r);
    for (int m = 0; m < r; ++m) g.middleCols(m * r, r) = v[static_cast<size_t>(m)] * u;
    const Matrix proj = w - w * u * pseudo_inverse(u.transpose() * w * u) * u.transpose() * w;
    return g.transpose() * proj * g;
}

double lu_ccrb(const Vector& theta, const ConstraintSpec& spec, const Matrix& w, const Matrix& fim) {
    validate_weight(w, spec.dim_theta);
    const Matrix u = spec.complement(theta);
    const Matrix a = u.transpose() * w * u;
    const Matrix jr = u.transpose() * fim * u;
    const Matrix k = kronecker(a, jr) + c_uw(theta, spec, w);
    const Vector va = vec(a);
    return va.dot(pseudo_inverse(k) * va);
}

double lu_cbtb_small_tau(const Vector& theta, const ConstraintSpec& spec, const Matrix& w,
                         const GaussianMeanModel& model, double tau) {
    if (!(tau > 0.0)) throw InvalidInput("tau must be positive");
    const Matrix u = spec.complement(theta);
    TestPointSet pts{theta, {}};
    for (int m = 0; m < spec.dim_free(); ++m) pts.points.push_back(theta + tau * u.col(m));
    const MomentMatrixB b = b_matrix_gaussian(model, pts);
    const double tol = std::max(kFeasibilityTol, 10.0 * tau * tau * (1.0 + theta.squaredNorm()));
    return lu_cbtb_for_points(pts, w, spec, b, tol).value;
}

}  // namespace barankin
