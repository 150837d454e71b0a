#include "barankin/simulation.hpp"

#include <cmath>
#include <memory>

#include "barankin/errors.hpp"
#include "barankin/estimators.hpp"
#include "barankin/parallel.hpp"

namespace barankin {

double norm_standard_error(const Vector& v, const Vector& se) {
    const double n = v.norm();
    if (n > 0.0) return std::sqrt((v.cwiseProduct(se) / n).squaredNorm());
    return se.norm();
}

CVector draw_noise(int q, double sigma2, std::mt19937_64& rng) {
    std::normal_distribution<double> nd(0.0, std::sqrt(0.5 * sigma2));
    CVector n(q);
    for (int i = 0; i < q; ++i) {
        const double re = nd(rng);
        const double im = nd(rng);
        n(i) = Complex(re, im);
    }
    return n;
}

namespace {

struct Acc {
    std::size_t ok = 0, failed = 0;
    double wse = 0, wse2 = 0, nu2 = 0;
    Vector e, e2, cb, cb2;
};

}  // namespace

TrialStatistics run_trials(const DoaScenario& s, const Estimator& est, std::size_t trials,
                           std::uint64_t seed, const Matrix& w) {
    s.validate();
    if (trials < 2) throw InvalidInput("run_trials needs at least two trials");
    const Vector theta = s.theta();
    const CVector mu = noiseless_mean(s);
    const Matrix u = make_doa_cm_constraint().complement(theta);
    const Matrix uw = u.transpose() * w;
    const Eigen::Index m = theta.size(), r = u.cols();
    auto make = [&] {
        return Acc{0, 0, 0, 0, 0, Vector::Zero(m), Vector::Zero(m), Vector::Zero(r), Vector::Zero(r)};
    };
    auto body = [&](Acc& a, std::size_t t) {
        std::mt19937_64 rng(stream_seed(seed, t));
        const CVector x = mu + draw_noise(s.q_sensors, s.noise_variance, rng);
        const auto th = est(x);
        if (!th || th->size() != m || !th->allFinite()) {
            ++a.failed;
            return;
        }
        const Vector e = *th - theta;
        const double wse = e.dot(w * e);
        const Vector cb = uw * e;
        ++a.ok;
        a.wse += wse;
        a.wse2 += wse * wse;
        a.nu2 += e.head(2).squaredNorm();
        a.e += e;
        a.e2 += e.cwiseProduct(e);
        a.cb += cb;
        a.cb2 += cb.cwiseProduct(cb);
    };
    auto merge = [](Acc& a, const Acc& b) {
        a.ok += b.ok;
        a.failed += b.failed;
        a.wse += b.wse;
        a.wse2 += b.wse2;
        a.nu2 += b.nu2;
        a.e += b.e;
        a.e2 += b.e2;
        a.cb += b.cb;
        a.cb2 += b.cb2;
    };
    const Acc a = block_reduce<Acc>(trials, 256, make, body, merge);

    TrialStatistics st;
    st.seed = seed;
    st.trials = a.ok;
    st.failed = a.failed;
    if (a.ok < 2) throw InvalidInput("fewer than two successful trials");
    const double n = static_cast<double>(a.ok);
    auto se_of = [n](double sum, double sum2) {
        const double var = std::max(0.0, (sum2 - sum * sum / n) / (n - 1.0));
        return std::sqrt(var / n);
    };
    st.wmse = a.wse / n;
    st.wmse_se = se_of(a.wse, a.wse2);
    st.sum_wse = a.wse;
    st.sum_nu_sq_error = a.nu2;
    st.mean_error = a.e / n;
    st.mean_error_se = Vector(m);
    for (Eigen::Index i = 0; i < m; ++i) st.mean_error_se(i) = se_of(a.e(i), a.e2(i));
    st.bias = st.mean_error.head(2);
    st.bias_se = st.mean_error_se.head(2);
    st.c_bias = a.cb / n;
    st.c_bias_se = Vector(r);
    for (Eigen::Index i = 0; i < r; ++i) st.c_bias_se(i) = se_of(a.cb(i), a.cb2(i));
    st.bias_norm = st.bias.norm();
    st.bias_norm_se = norm_standard_error(st.bias, st.bias_se);
    st.c_bias_norm = st.c_bias.norm();
    st.c_bias_norm_se = norm_standard_error(st.c_bias, st.c_bias_se);
    return st;
}

Estimator make_cml_estimator(const DoaScenario& s, int angle_grid_size, double refine_tol) {
    auto cml = std::make_shared<const CmlEstimator>(s, angle_grid_size, refine_tol);
    return [cml](const CVector& x) -> std::optional<Vector> { return cml->estimate(x).theta(); };
}

namespace {

SweepRecord run_point(double x, const DoaScenario& s, const EstimatorSettings& est,
                      std::size_t trials, std::uint64_t seed, const BoundSettings& bounds) {
    SweepRecord rec;
    rec.x = x;
    rec.scenario = s;
    rec.stats = run_trials(s, make_cml_estimator(s, est.angle_grid_size, est.refine_tol), trials, seed);
    rec.lu_cbtb = lu_cbtb_closed_form(s, bounds.grid).value;
    if (bounds.include_cbtb) rec.cbtb = cbtb_closed_form(s, bounds.grid).value;
    if (bounds.low_complexity)
        rec.low_complexity_lu_cbtb = lu_cbtb_closed_form(s, *bounds.low_complexity).value;
    return rec;
}

}  // namespace

std::vector<SweepRecord> snr_sweep(const DoaScenario& base, const std::vector<double>& snr_db,
                                   const EstimatorSettings& est, std::size_t trials,
                                   std::uint64_t seed, const BoundSettings& bounds) {
    if (snr_db.empty()) throw InvalidInput("empty SNR list");
    std::vector<SweepRecord> out;
    for (std::size_t i = 0; i < snr_db.size(); ++i)
        out.push_back(run_point(snr_db[i], with_snr_db(base, snr_db[i]), est, trials,
                                stream_seed(seed, i), bounds));
    return out;
}

std::vector<SweepRecord> angle_sweep(const DoaScenario& base, const std::vector<double>& angles,
                                     const EstimatorSettings& est, std::size_t trials,
                                     std::uint64_t seed, const BoundSettings& bounds) {
    if (angles.empty()) throw InvalidInput("empty angle list");
    std::vector<SweepRecord> out;
    for (std::size_t i = 0; i < angles.size(); ++i) {
        DoaScenario s = base;
        s.doa_angle = wrap_angle(angles[i]);
        out.push_back(run_point(angles[i], s, est, trials, stream_seed(seed, i), bounds));
    }
    return out;
}

}  // namespace barankin
