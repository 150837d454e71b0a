#include "barankin/moments.hpp"

#include <cmath>
#include <limits>

#include "barankin/errors.hpp"
#include "barankin/parallel.hpp"

namespace barankin {

void GaussianMeanModel::validate() const {
    if (!(noise_variance > 0.0) || !std::isfinite(noise_variance))
        throw InvalidInput("noise variance must be positive");
    if (obs_dim <= 0) throw InvalidInput("observation dimension must be positive");
    if (!mean_map) throw InvalidInput("mean map is not set");
}

SignedLog signed_log_expm1(double l) {
    if (l == 0.0) return {-std::numeric_limits<double>::infinity(), 0};
    if (l > 0.0) {
        // log(e^l - 1) = l + log(1 - e^-l)
        return {l + std::log(-std::expm1(-l)), 1};
    }
    return {std::log(-std::expm1(l)), -1};
}

MomentMatrixB::MomentMatrixB(Matrix log_b, TestPointSet points)
    : log_b_(std::move(log_b)), points_(std::move(points)) {}

double MomentMatrixB::value(int i, int j) const { return std::exp(log_b_(i, j)); }

double MomentMatrixB::excess(int i, int j) const { return std::expm1(log_b_(i, j)); }

bool MomentMatrixB::any_saturated() const {
    return log_b_.size() > 0 && log_b_.maxCoeff() > kSaturationLog;
}

Matrix MomentMatrixB::values() const { return log_b_.array().exp().matrix(); }

std::vector<CVector> point_means(const GaussianMeanModel& model, const TestPointSet& points) {
    std::vector<CVector> mu;
    mu.reserve(static_cast<size_t>(points.size() + 1));
    for (int i = 0; i <= points.size(); ++i) {
        CVector m = model.mean_map(points.at(i));
        if (m.size() != model.obs_dim) throw InvalidInput("mean map returned wrong length");
        mu.push_back(std::move(m));
    }
    return mu;
}

MomentMatrixB b_matrix_gaussian(const GaussianMeanModel& model, const TestPointSet& points) {
    model.validate();
    const auto mu = point_means(model, points);
    const int n = points.size() + 1;
    std::vector<CVector> delta(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) delta[static_cast<size_t>(i)] = mu[static_cast<size_t>(i)] - mu[0];
    const double c = model.log_b_factor();
    Matrix lb = Matrix::Zero(n, n);
    for (int i = 1; i < n; ++i)
        for (int j = i; j < n; ++j) {
            const double v =
                c * delta[static_cast<size_t>(i)].dot(delta[static_cast<size_t>(j)]).real();
            lb(i, j) = v;
            lb(j, i) = v;
        }
    return MomentMatrixB(std::move(lb), points);
}

CVector sample_observation(const GaussianMeanModel& model, const CVector& mean,
                           std::mt19937_64& rng) {
    CVector x(mean.size());
    if (model.real_valued) {
        std::normal_distribution<double> nd(0.0, std::sqrt(model.noise_variance));
        for (Eigen::Index q = 0; q < mean.size(); ++q) x(q) = mean(q) + Complex(nd(rng), 0.0);
    } else {
        std::normal_distribution<double> nd(0.0, std::sqrt(0.5 * model.noise_variance));
        for (Eigen::Index q = 0; q < mean.size(); ++q) {
            const double re = nd(rng);
            const double im = nd(rng);
            x(q) = mean(q) + Complex(re, im);
        }
    }
    return x;
}

Vector log_likelihood_ratios(const GaussianMeanModel& model, const std::vector<CVector>& means,
                             const CVector& x) {
    const double scale = model.real_valued ? 0.5 / model.noise_variance : 1.0 / model.noise_variance;
    const double base = (x - means[0]).squaredNorm();
    Vector out(static_cast<Eigen::Index>(means.size()));
    out(0) = 0.0;
    for (size_t m = 1; m < means.size(); ++m)
        out(static_cast<Eigen::Index>(m)) = -scale * ((x - means[m]).squaredNorm() - base);
    return out;
}

namespace {
struct McAcc {
    Matrix sum, sum_sq;
};
}  // namespace

MonteCarloB b_matrix_monte_carlo(const GaussianMeanModel& model, const TestPointSet& points,
                                 std::size_t trials, std::uint64_t seed) {
    model.validate();
    if (trials < 1) throw InvalidInput("Monte-Carlo B needs at least one trial");
    const auto mu = point_means(model, points);
    const int n = points.size() + 1;
    auto make = [n] { return McAcc{Matrix::Zero(n, n), Matrix::Zero(n, n)}; };
    auto body = [&](McAcc& acc, std::size_t t) {
        std::mt19937_64 rng(stream_seed(seed, t));
        // Index 0 has identically unit ratio, so only x under theta matters.
        const CVector x = sample_observation(model, mu[0], rng);
        const Vector l = log_likelihood_ratios(model, mu, x).array().exp().matrix();
        const Matrix prod = l * l.transpose();
        acc.sum += prod;
        acc.sum_sq += prod.cwiseProduct(prod);
    };
    auto merge = [](McAcc& a, const McAcc& b) {
        a.sum += b.sum;
        a.sum_sq += b.sum_sq;
    };
    const McAcc acc = block_reduce<McAcc>(trials, 4096, make, body, merge);
    const double nt = static_cast<double>(trials);
    MonteCarloB out;
    out.trials = trials;
    out.mean = acc.sum / nt;
    out.standard_error = Matrix::Zero(n, n);
    if (trials > 1) {
        // Sample variance from raw sums, clipped at zero against rounding.
        const Matrix var =
            ((acc.sum_sq - acc.sum.cwiseProduct(acc.sum) / nt) / (nt - 1.0)).cwiseMax(0.0);
        out.standard_error = (var / nt).cwiseSqrt();
    }
    // Entries involving index 0 only are exact.
    out.mean(0, 0) = 1.0;
    out.standard_error(0, 0) = 0.0;
    return out;
}

Matrix fisher_information_gaussian(const GaussianMeanModel& model, const Vector& theta,
                                   double step) {
    model.validate();
    if (!model.nondifferentiable.empty())
        throw UnsupportedModel("Fisher information requested along a non-differentiable coordinate");
    if (!(step > 0.0)) throw InvalidInput("derivative step must be positive");
    const Eigen::Index m = theta.size();
    Eigen::MatrixXcd d;
    if (model.jacobian) {
        d = model.jacobian(theta);
    } else {
        d.resize(model.obs_dim, m);
        for (Eigen::Index j = 0; j < m; ++j) {
            Vector tp = theta, tm = theta;
            tp(j) += step;
            tm(j) -= step;
            d.col(j) = (model.mean_map(tp) - model.mean_map(tm)) / (2.0 * step);
        }
    }
    const Matrix g = (d.adjoint() * d).real();
    return model.log_b_factor() * g;
}

double log_ratio_product_moment(const Matrix& log_b, const std::vector<int>& idx) {
    double s = 0.0;
    for (size_t i = 0; i < idx.size(); ++i)
        for (size_t j = i + 1; j < idx.size(); ++j) s += log_b(idx[i], idx[j]);
    return s;
}

}  // namespace barankin
