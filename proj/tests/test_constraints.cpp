#include <doctest.h>

#include <cmath>

#include "barankin/constraints.hpp"
#include "barankin/errors.hpp"

using namespace barankin;

namespace {

Vector vec2(double a, double b) {
    Vector v(2);
    v << a, b;
    return v;
}

Vector vec4(double a, double b, double c, double d) {
    Vector v(4);
    v << a, b, c, d;
    return v;
}

}  // namespace

TEST_CASE("linear constraint null space by hand") {
    Matrix a(1, 2);
    a << 1, -1;
    const ConstraintSpec s = make_linear_constraint(a);
    CHECK(s.dim_free() == 1);
    const Matrix u = s.complement(Vector::Zero(2));
    CHECK(std::abs(std::abs(u(0, 0)) - 1 / std::sqrt(2.0)) < 1e-15);
    CHECK(u(0, 0) == doctest::Approx(u(1, 0)).epsilon(1e-15));
    CHECK((a * u).norm() < 1e-15);

    Matrix a2(1, 2);
    a2 << 1, 0;
    const Matrix u2 = make_linear_constraint(a2).complement(Vector::Zero(2));
    CHECK(std::abs(u2(0, 0)) < 1e-15);
    CHECK(std::abs(std::abs(u2(1, 0)) - 1.0) < 1e-15);
}

TEST_CASE("linear constraint has zero column derivatives and orthonormal U") {
    Matrix a(2, 5);
    a << 1, 2, 0, -1, 3, 0, 1, 1, 1, -2;
    const ConstraintSpec s = make_linear_constraint(a);
    Vector t5 = Vector::LinSpaced(5, -1, 1);
    const Matrix u = s.complement(t5);
    CHECK((u.transpose() * u - Matrix::Identity(3, 3)).norm() < 1e-14);
    CHECK((s.jacobian(t5) * u).norm() < 1e-14);
    for (const Matrix& v : s.derivatives(t5)) CHECK(v.norm() == 0.0);
}

TEST_CASE("linear constraint errors") {
    Matrix a(2, 3);
    a << 1, 2, 3, 2, 4, 6;
    CHECK_THROWS_AS(make_linear_constraint(a), InvalidConstraint);
    CHECK_THROWS_AS(make_linear_constraint(Matrix::Ones(3, 3)), InvalidConstraint);
}

TEST_CASE("planar circle constraint") {
    const ConstraintSpec s = make_planar_circle_constraint(1.0);
    const Matrix u = s.complement(vec2(0, 1));
    CHECK(u(0, 0) == 1.0);
    CHECK(u(1, 0) == 0.0);
    for (double w : {0.3, 1.7, -2.2}) {
        const Vector th = vec2(std::cos(w), std::sin(w));
        CHECK(s.is_feasible(th));
        CHECK(std::abs((s.jacobian(th) * s.complement(th))(0, 0)) < 1e-15);
    }
    const Matrix v1 = s.derivatives(vec2(0.6, 0.8))[0];
    Matrix expect(2, 2);
    expect << 0, 1, -1, 0;
    CHECK(v1 == expect);
    CHECK_THROWS_AS(make_planar_circle_constraint(0.0), InvalidConstraint);
    CHECK_THROWS_AS(make_planar_circle_constraint(-1.0), InvalidConstraint);
}

TEST_CASE("doa-cm constraint") {
    const ConstraintSpec s = make_doa_cm_constraint();
    const Vector th = vec4(0, 1, M_PI / 4, 1);
    const Matrix u = s.complement(th);
    CHECK(u.col(0) == vec4(1, 0, 0, 0));
    CHECK((s.jacobian(th) * u).norm() == 0.0);
    CHECK((u.transpose() * u - Matrix::Identity(3, 3)).norm() == 0.0);
    CHECK(s.complement(vec4(1, 0, 0.3, 2)).col(0) == vec4(0, -1, 0, 0));
    for (double w = -3.0; w < 3.0; w += 0.37)
        CHECK(std::abs(s.f(vec4(std::cos(w), std::sin(w), 0.1, 0.5))(0)) < 1e-15);
    const auto v = s.derivatives(th);
    REQUIRE(v.size() == 3);
    CHECK(v[0](0, 1) == 1.0);
    CHECK(v[0](1, 0) == -1.0);
    CHECK(v[0].cwiseAbs().sum() == 2.0);
    CHECK(v[1].norm() == 0.0);
    CHECK(v[2].norm() == 0.0);
}

TEST_CASE("feasibility checks and lookup by name") {
    const ConstraintSpec s = constraint_by_name("circle2d");
    CHECK_NOTHROW(make_feasible(s, vec2(1, 0)));
    CHECK_THROWS_AS(make_feasible(s, vec2(1.1, 0)), InvalidInput);
    CHECK(constraint_by_name("doa-cm").dim_theta == 4);
    CHECK_THROWS_AS(constraint_by_name("sphere"), InvalidConstraint);
}

TEST_CASE("numeric column derivatives") {
    const ConstraintSpec circle = make_planar_circle_constraint(1.0);
    const Vector th = vec2(std::cos(0.4), std::sin(0.4));
    const DerivativeResult nd = numeric_column_derivatives(circle, th);
    CHECK_FALSE(nd.warning.has_value());
    CHECK((nd.v[0] - circle.column_derivatives(th)[0]).norm() < 1e-9);

    const ConstraintSpec doa = make_doa_cm_constraint();
    const Vector td = vec4(0.6, 0.8, 0.7, 1.3);
    const DerivativeResult dd = numeric_column_derivatives(doa, td);
    for (int c = 0; c < 3; ++c) CHECK((dd.v[c] - doa.column_derivatives(td)[c]).norm() < 1e-9);

    Matrix a(1, 3);
    a << 1, 1, 1;
    for (const Matrix& v : numeric_column_derivatives(make_linear_constraint(a), Vector::Zero(3)).v)
        CHECK(v.norm() == 0.0);

    CHECK(numeric_column_derivatives(circle, th, 1e-13).warning.has_value());
    CHECK_THROWS_AS(numeric_column_derivatives(circle, th, 0.0), InvalidInput);
}
