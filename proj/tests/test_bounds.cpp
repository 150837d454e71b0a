#include <doctest.h>

#include <cmath>
#include <random>

#include "barankin/bounds.hpp"
#include "barankin/doa.hpp"
#include "barankin/errors.hpp"

using namespace barankin;

namespace {

DoaScenario scenario(double snr_db) {
    DoaScenario s;
    s.zeta = 0.5;
    s.noise_variance = 0.5;
    s.doa_angle = 0.9 * M_PI;
    return with_snr_db(s, snr_db);
}

GaussianMeanModel real_identity(int m, double sigma2) {
    GaussianMeanModel g;
    g.obs_dim = m;
    g.noise_variance = sigma2;
    g.real_valued = true;
    g.mean_map = [](const Vector& th) -> CVector { return th.cast<Complex>(); };
    return g;
}

Vector circle_point(double w) {
    Vector v(2);
    v << std::cos(w), std::sin(w);
    return v;
}

struct LinearInstance {
    ConstraintSpec spec;
    GaussianMeanModel model;
    TestPointSet points;
    Matrix w;
};

LinearInstance linear_instance(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    const int m = 5, k = 2, p = 3;
    Matrix a(k, m), h(m + 1, m), g(m, m);
    for (auto* mat : {&a, &h, &g})
        for (Eigen::Index i = 0; i < mat->size(); ++i) mat->data()[i] = nd(rng);
    LinearInstance inst{make_linear_constraint(a), {}, {}, g.transpose() * g};
    const Matrix u = inst.spec.complement(Vector::Zero(m));
    auto feasible = [&] {
        Vector z(m - k);
        for (int i = 0; i < m - k; ++i) z(i) = 0.5 * nd(rng);
        return Vector(u * z);
    };
    inst.points.reference = feasible();
    for (int i = 0; i < p; ++i) inst.points.points.push_back(feasible());
    inst.model.obs_dim = m + 1;
    inst.model.real_valued = true;
    inst.model.noise_variance = 0.8;
    inst.model.mean_map = [h](const Vector& th) -> CVector { return (h * th).cast<Complex>(); };
    return inst;
}

}  // namespace

TEST_CASE("degenerate test points and zero weight give zero bounds") {
    const DoaScenario s = scenario(0.0);
    const GaussianMeanModel model = doa_model(s);
    const ConstraintSpec spec = make_doa_cm_constraint();
    const TestPointSet same{s.theta(), {s.theta(), s.theta()}};
    const MomentMatrixB b = b_matrix_gaussian(model, same);
    CHECK(t_matrix(same).norm() == 0.0);
    CHECK(cbtb_for_points(same, doa_weight(), b).value == 0.0);
    CHECK(lu_cbtb_for_points(same, doa_weight(), spec, b).value == 0.0);

    const TestPointSet pts = make_doa_test_points(s, {M_PI / 4, M_PI / 2, 1e-5});
    const MomentMatrixB bp = b_matrix_gaussian(model, pts);
    const Matrix zero = Matrix::Zero(4, 4);
    CHECK(cbtb_for_points(pts, zero, bp).value == 0.0);
    CHECK(lu_cbtb_for_points(pts, zero, spec, bp).value == 0.0);
}

TEST_CASE("DOA candidates: generic engine equals the closed forms") {
    const ConstraintSpec spec = make_doa_cm_constraint();
    for (double snr : {-15.0, 0.0, 12.0})
        for (double h : {-2.5, 0.3, M_PI / 4, 1.9})
            for (double hp : {-M_PI, -M_PI / 2, M_PI / 2}) {
                const DoaScenario s = scenario(snr);
                const DoaTestOffsets off{h, hp, 1e-5};
                const TestPointSet pts = make_doa_test_points(s, off);
                const MomentMatrixB b = b_matrix_gaussian(doa_model(s), pts);
                const double lu = lu_cbtb_for_points(pts, doa_weight(), spec, b).value;
                const double cb = cbtb_for_points(pts, doa_weight(), b).value;
                const double lu_cf = lu_cbtb_candidate(s, off).value;
                const double cb_cf = cbtb_candidate(s, off).value;
                CHECK(std::abs(lu - lu_cf) <= 1e-9 * std::max(1.0, lu_cf));
                CHECK(std::abs(cb - cb_cf) <= 1e-9 * std::max(1.0, cb_cf));
                CHECK(lu <= cb * (1 + 1e-9));
            }
}

TEST_CASE("literal assembly agrees with the reduced route when well conditioned") {
    const DoaScenario s = scenario(-5.0);
    const ConstraintSpec spec = make_doa_cm_constraint();
    const TestPointSet pts = make_doa_test_points(s, {1.2, M_PI / 2, 0.3});
    const MomentMatrixB b = b_matrix_gaussian(doa_model(s), pts);
    const double lu = lu_cbtb_for_points(pts, doa_weight(), spec, b).value;
    const double cb = cbtb_for_points(pts, doa_weight(), b).value;
    CHECK(lu_cbtb_direct(pts, doa_weight(), spec, b) == doctest::Approx(lu).epsilon(1e-7));
    CHECK(cbtb_direct(pts, doa_weight(), b) == doctest::Approx(cb).epsilon(1e-7));

    const Matrix d = assemble_d(pts, doa_weight(), spec, b);
    CHECK(d.rows() == 12);
    const Matrix ds = doa_d_structured(s, {1.2, M_PI / 2, 0.3});
    CHECK((d - ds).norm() <= 1e-12 * ds.norm());
    const Vector t = assemble_t(pts, doa_weight(), spec);
    CHECK((t - doa_t_structured({1.2, M_PI / 2, 0.3})).norm() < 1e-14);
}

TEST_CASE("linear constraints: LU-CBTB coincides with CBTB") {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const LinearInstance inst = linear_instance(seed);
        const MomentMatrixB b = b_matrix_gaussian(inst.model, inst.points);
        const double lu = lu_cbtb_for_points(inst.points, inst.w, inst.spec, b).value;
        const double cb = cbtb_for_points(inst.points, inst.w, b).value;
        CHECK(std::abs(lu - cb) <= 1e-9 * std::max(1.0, cb));
    }
}

TEST_CASE("infeasible test points are rejected by the LU route") {
    const ConstraintSpec spec = make_planar_circle_constraint(1.0);
    const TestPointSet pts{circle_point(0.0), {circle_point(0.5) * 1.01}};
    const MomentMatrixB b = b_matrix_gaussian(real_identity(2, 1.0), pts);
    CHECK_THROWS_AS(lu_cbtb_for_points(pts, Matrix::Identity(2, 2), spec, b), InvalidInput);
}

TEST_CASE("saturated kernels still give finite values") {
    const DoaScenario s = scenario(30.0);
    const ConstraintSpec spec = make_doa_cm_constraint();
    DoaScenario loud = s;
    loud.amplitude = 40.0;
    const TestPointSet pts = make_doa_test_points(loud, {2.0, -M_PI, 1e-5});
    const MomentMatrixB b = b_matrix_gaussian(doa_model(loud), pts);
    REQUIRE(b.any_saturated());
    const PointBound lu = lu_cbtb_for_points(pts, doa_weight(), spec, b);
    const PointBound cb = cbtb_for_points(pts, doa_weight(), b);
    CHECK(lu.saturated);
    CHECK(std::isfinite(lu.value));
    CHECK(std::isfinite(cb.value));
    CHECK(lu.value == doctest::Approx(lu_cbtb_candidate(loud, {2.0, -M_PI, 1e-5}).value).epsilon(1e-9));
}

TEST_CASE("supremum over candidates") {
    const std::vector<std::vector<double>> params{{0.0}, {1.0}, {2.0}};
    auto single = supremum_bound({{3.0}}, [](std::size_t) { return PointBound{0.7}; });
    CHECK(single.value == 0.7);
    CHECK(single.argmax == 0);

    const std::vector<double> vals{0.0, 0.4, 0.4};
    auto tie = supremum_bound(params, [&](std::size_t i) { return PointBound{vals[i]}; });
    CHECK(tie.value == 0.4);
    CHECK(tie.argmax == 1);
    CHECK(tie.valid_count == 3);

    const std::vector<std::vector<double>> rev{{2.0}, {1.0}};
    auto tie2 = supremum_bound(rev, [](std::size_t) { return PointBound{0.1}; });
    CHECK(tie2.argmax_params[0] == 1.0);

    auto zero = supremum_bound(params, [](std::size_t) { return PointBound{0.0}; });
    CHECK(zero.value == 0.0);

    CHECK_THROWS_AS(supremum_bound(params,
                                   [](std::size_t) {
                                       PointBound b;
                                       b.valid = false;
                                       return b;
                                   }),
                    AllCandidatesInvalid);
}

TEST_CASE("supremum on the full DOA grid matches the generic engine") {
    const DoaScenario s = scenario(0.0);
    const DoaGrid grid = standard_grid(64);
    const BoundResult cf = lu_cbtb_closed_form(s, grid);
    const auto cands = grid.candidates();
    std::vector<std::vector<double>> params;
    for (const auto& c : cands) params.push_back({c.h_nu, c.h_phi, c.h_alpha});
    const BoundResult gen =
        supremum_bound(params, [&](std::size_t i) { return lu_cbtb_generic(s, cands[i]); });
    CHECK(std::abs(gen.value - cf.value) <= 1e-9 * std::max(1.0, cf.value));
    CHECK(gen.argmax_params == cf.argmax_params);
    CHECK(cf.candidate_log.size() == cands.size());
}

TEST_CASE("CCRB and LU-CCRB on the planar circle") {
    const ConstraintSpec spec = make_planar_circle_constraint(1.0);
    const Vector th = circle_point(M_PI / 2);
    const Matrix eye = Matrix::Identity(2, 2);
    for (double sigma2 : {0.25, 0.5, 2.0}) {
        const Matrix fim = fisher_information_gaussian(real_identity(2, sigma2), th);
        CHECK(ccrb(th, spec, eye, fim) == doctest::Approx(sigma2).epsilon(1e-8));
        CHECK(lu_ccrb(th, spec, eye, fim) == doctest::Approx(sigma2 / (1 + sigma2)).epsilon(1e-8));
        CHECK(ccrb(th, spec, 3.0 * eye, 2.0 * fim) == doctest::Approx(1.5 * sigma2).epsilon(1e-8));
    }
    const Matrix exact_fim = eye / 0.5;
    CHECK(std::abs(lu_ccrb(th, spec, eye, exact_fim) - 0.5 / 1.5) < 1e-12);
    CHECK(c_uw(th, spec, eye)(0, 0) == doctest::Approx(1.0));
    CHECK(ccrb(th, spec, Matrix::Zero(2, 2), exact_fim) == 0.0);
    CHECK(lu_ccrb(th, spec, Matrix::Zero(2, 2), exact_fim) == 0.0);
}

TEST_CASE("LU-CCRB reduces to CCRB for linear constraints with W = I") {
    Matrix a(1, 3);
    a << 1, 2, -1;
    const ConstraintSpec spec = make_linear_constraint(a);
    Matrix h(4, 3);
    h << 1, 0, 2, 0, 1, 1, 3, -1, 0, 1, 1, 1;
    GaussianMeanModel g;
    g.obs_dim = 4;
    g.real_valued = true;
    g.noise_variance = 0.7;
    g.mean_map = [h](const Vector& th) -> CVector { return (h * th).cast<Complex>(); };
    const Vector th = Vector::Zero(3);
    const Matrix fim = fisher_information_gaussian(g, th);
    const Matrix eye = Matrix::Identity(3, 3);
    CHECK(c_uw(th, spec, eye).norm() == 0.0);
    CHECK(lu_ccrb(th, spec, eye, fim) == doctest::Approx(ccrb(th, spec, eye, fim)).epsilon(1e-12));
}

TEST_CASE("small-tau LU-CBTB approaches LU-CCRB") {
    const ConstraintSpec spec = make_planar_circle_constraint(1.0);
    const Vector th = circle_point(M_PI / 2);
    const Matrix eye = Matrix::Identity(2, 2);
    const GaussianMeanModel g = real_identity(2, 0.5);
    const double target = lu_ccrb(th, spec, eye, eye / 0.5);
    double prev = 1e300;
    for (double tau : {1e-2, 1e-3, 1e-4}) {
        const double err = std::abs(lu_cbtb_small_tau(th, spec, eye, g, tau) - target);
        CHECK(err < prev);
        prev = err;
    }
    CHECK(std::abs(lu_cbtb_small_tau(th, spec, eye, g, 1e-3) - target) < 0.01 * target);
    CHECK_THROWS_AS(lu_cbtb_small_tau(th, spec, eye, g, 0.0), InvalidInput);
}

TEST_CASE("weight validation") {
    CHECK_NOTHROW(validate_weight(Matrix::Identity(3, 3), 3));
    CHECK_THROWS_AS(validate_weight(Matrix::Identity(2, 2), 3), InvalidInput);
    Matrix neg = Matrix::Identity(2, 2);
    neg(1, 1) = -1;
    CHECK_THROWS_AS(validate_weight(neg, 2), InvalidInput);
}
