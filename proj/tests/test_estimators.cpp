#include <doctest.h>

#include <cmath>
#include <random>

#include "barankin/bounds.hpp"
#include "barankin/doa.hpp"
#include "barankin/errors.hpp"
#include "barankin/estimators.hpp"
#include "barankin/simulation.hpp"
#include "barankin/verification.hpp"

using namespace barankin;

namespace {

DoaScenario scenario(double snr_db) {
    DoaScenario s;
    s.zeta = 0.5;
    s.noise_variance = 0.5;
    s.doa_angle = 0.9 * M_PI;
    return with_snr_db(s, snr_db);
}

double angle_diff(double a, double b) { return std::abs(wrap_angle(a - b)); }

}  // namespace

TEST_CASE("CML recovers a noiseless on-grid observation") {
    DoaScenario s = scenario(0.0);
    s.zeta = 1.3;
    const int n = 4096;
    for (int k : {5, 1000, 3687}) {
        s.doa_angle = -M_PI + 2.0 * M_PI * k / n;
        for (double phase : qpsk_phases()) {
            s.phase = phase;
            const CmlEstimate e = CmlEstimator(s, n).estimate(noiseless_mean(s));
            CHECK(angle_diff(e.nu_angle, s.doa_angle) < 1e-7);
            CHECK(e.phi_hat == phase);
            CHECK(e.alpha_hat == doctest::Approx(s.amplitude).epsilon(1e-12));
        }
    }
}

TEST_CASE("CML objective is invariant under joint rotation") {
    const DoaScenario s = scenario(3.0);
    const CmlEstimator est(s);
    std::mt19937_64 rng(8);
    for (int i = 0; i < 10; ++i) {
        const CVector x = noiseless_mean(s) + draw_noise(4, s.noise_variance, rng);
        const CVector xr = x * std::polar(1.0, M_PI / 2);
        const CmlEstimate a = est.estimate(x);
        const CmlEstimate b = est.estimate(xr);
        CHECK(b.objective == doctest::Approx(a.objective).epsilon(1e-10));
        CHECK(angle_diff(b.phi_hat, a.phi_hat + M_PI / 2) < 1e-12);
        CHECK(angle_diff(b.nu_angle, a.nu_angle) < 1e-6);
    }
}

TEST_CASE("CML estimates lie on the constraint and refine the coarse point") {
    const DoaScenario s = scenario(-5.0);
    const CmlEstimator est(s, 256);
    const ConstraintSpec spec = make_doa_cm_constraint();
    std::mt19937_64 rng(2);
    for (int i = 0; i < 20; ++i) {
        const CVector x = noiseless_mean(s) + draw_noise(4, s.noise_variance, rng);
        const CmlEstimate e = est.estimate(x);
        const Vector th = e.theta();
        CHECK(std::abs(th(0) * th(0) + th(1) * th(1) - 1.0) < 1e-15);
        CHECK(spec.is_feasible(th));
        CHECK(e.objective >= est.coarse(x).objective);
        CHECK(e.alpha_hat == doctest::Approx(e.objective / 4));
    }
    CHECK_THROWS_AS(est.coarse(CVector::Zero(3)), InvalidInput);
    CHECK_THROWS_AS(CmlEstimator(s, 0), InvalidInput);
}

TEST_CASE("efficient estimators with degenerate test points return theta") {
    const DoaScenario s = scenario(0.0);
    const TestPointSet same{s.theta(), {s.theta(), s.theta()}};
    const MomentMatrixB b = b_matrix_gaussian(doa_model(s), same);
    const Vector lr = Vector::LinSpaced(3, 0.0, 0.7);
    CHECK((cbtb_efficient_estimate(same, doa_weight(), b, lr) - s.theta()).norm() == 0.0);
    const Vector eta = lu_cbtb_efficient_estimate(same, doa_weight(), make_doa_cm_constraint(), b, lr);
    CHECK(eta.norm() == 0.0);
}

TEST_CASE("CBTB-efficient estimator is mean-unbiased at every test point") {
    const DoaScenario s = scenario(0.0);
    const TestPointSet pts = make_doa_test_points(s, {M_PI / 4, M_PI / 2, 1e-5});
    const MomentMatrixB b = b_matrix_gaussian(doa_model(s), pts);
    const CbtbEfficientEstimator est(pts, doa_weight(), b);
    const Matrix coeff = est.ratio_coefficients();
    for (int k = 0; k <= pts.size(); ++k) {
        const Vector mean = ratio_affine_mean(coeff, b.log_entries(), k);
        CHECK((mean - (pts.at(k) - pts.reference)).cwiseAbs().maxCoeff() < 1e-9);
    }
    const Matrix w = doa_weight();
    const auto qm = ratio_quadratic_moments(coeff.transpose() * w * coeff, b.log_entries());
    // sum_ij G_ij B_ij cancels across entries near e^16, so only ~1e-8 survives.
    CHECK(std::abs(qm.first - est.bound()) < 1e-7 * est.bound());
    CHECK(est.bound() == doctest::Approx(cbtb_for_points(pts, w, b).value).epsilon(1e-12));

    // The affine form and the direct evaluation agree on a sample.
    const GaussianMeanModel model = doa_model(s);
    const auto means = point_means(model, pts);
    std::mt19937_64 rng(4);
    const Vector lr = log_likelihood_ratios(model, means, sample_observation(model, means[0], rng));
    Vector l(lr.size());
    for (Eigen::Index i = 0; i < lr.size(); ++i) l(i) = std::exp(lr(i));
    CHECK((est.estimate(lr) - (pts.reference + coeff * l)).norm() < 1e-9);
}

TEST_CASE("LU-efficient estimator is C-unbiased and attains the LU-CBTB") {
    const DoaScenario s = scenario(0.0);
    const ConstraintSpec spec = make_doa_cm_constraint();
    const Matrix w = doa_weight();
    const TestPointSet pts = make_doa_test_points(s, {M_PI / 4, M_PI / 2, 1e-5});
    const MomentMatrixB b = b_matrix_gaussian(doa_model(s), pts);
    const LuEfficientEstimator est(pts, w, spec, b);
    const Matrix coeff = est.ratio_coefficients();
    for (int k = 0; k <= pts.size(); ++k) {
        const Matrix uk = spec.complement(pts.at(k));
        const Vector tk = uk.transpose() * w * (pts.at(k) - pts.reference);
        const Vector cb = ratio_affine_mean(uk.transpose() * w * coeff, b.log_entries(), k) - tk;
        CHECK(cb.cwiseAbs().maxCoeff() < 1e-9);
    }
    const auto qm = ratio_quadratic_moments(coeff.transpose() * w * coeff, b.log_entries());
    // sum_ij G_ij B_ij cancels across entries near e^16, so only ~1e-8 survives.
    CHECK(std::abs(qm.first - est.bound()) < 1e-7 * est.bound());
    CHECK(est.bound() == doctest::Approx(lu_cbtb_for_points(pts, w, spec, b).value).epsilon(1e-12));
    CHECK_THROWS_AS(est.weighted_error(Vector::Zero(2)), InvalidInput);
}
