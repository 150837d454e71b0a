#include <doctest.h>

#include <random>

#include "barankin/errors.hpp"
#include "barankin/linalg.hpp"

using namespace barankin;

namespace {

Matrix random_matrix(int r, int c, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    Matrix m(r, c);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = nd(rng);
    return m;
}

}  // namespace

TEST_CASE("pseudo_inverse of identity and diagonal rank-deficient matrices") {
    CHECK(pseudo_inverse(Matrix::Identity(3, 3)).isApprox(Matrix::Identity(3, 3), 1e-15));
    Matrix d = Matrix::Zero(2, 2);
    d(0, 0) = 2.0;
    const Matrix p = pseudo_inverse(d);
    CHECK(p(0, 0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(p(1, 1) == 0.0);
    CHECK(p(0, 1) == 0.0);
}

TEST_CASE("pseudo_inverse of the all-ones matrix satisfies the Penrose conditions") {
    const Matrix a = Matrix::Ones(2, 2);
    const Matrix p = pseudo_inverse(a);
    CHECK((p - Matrix::Constant(2, 2, 0.25)).cwiseAbs().maxCoeff() < 1e-15);
    CHECK((a * p * a - a).norm() < 1e-14);
    CHECK((p * a * p - p).norm() < 1e-14);
    CHECK(((a * p).transpose() - a * p).norm() < 1e-14);
    CHECK(((p * a).transpose() - p * a).norm() < 1e-14);
}

TEST_CASE("pseudo_inverse of a random rectangular matrix") {
    const Matrix a = random_matrix(5, 3, 7);
    const Matrix p = pseudo_inverse(a);
    CHECK(p.rows() == 3);
    CHECK(p.cols() == 5);
    CHECK((a * p * a - a).norm() < 1e-12);
    CHECK((p * a - Matrix::Identity(3, 3)).norm() < 1e-12);
}

TEST_CASE("pseudo_inverse rejects non-finite input") {
    Matrix a = Matrix::Identity(2, 2);
    a(1, 0) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(pseudo_inverse(a), InvalidInput);
    a(1, 0) = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(pseudo_inverse(a), InvalidInput);
}

TEST_CASE("kronecker products") {
    const Matrix b = random_matrix(2, 3, 11);
    Matrix block = Matrix::Zero(4, 6);
    block.topLeftCorner(2, 3) = b;
    block.bottomRightCorner(2, 3) = b;
    CHECK(kronecker(Matrix::Identity(2, 2), b) == block);
    CHECK(kronecker(Matrix::Constant(1, 1, 2.0), b) == 2.0 * b);
    Matrix e11 = Matrix::Zero(3, 3);
    e11(0, 0) = 1.0;
    Matrix expect = Matrix::Zero(6, 6);
    expect.topLeftCorner(2, 2) = Matrix::Identity(2, 2);
    CHECK(kronecker(e11, Matrix::Identity(2, 2)) == expect);
}

TEST_CASE("vec stacks columns") {
    Matrix a(2, 2);
    a << 1, 3, 2, 4;
    const Vector v = vec(a);
    REQUIRE(v.size() == 4);
    CHECK(v(0) == 1);
    CHECK(v(1) == 2);
    CHECK(v(2) == 3);
    CHECK(v(3) == 4);
    CHECK(vec(Matrix::Zero(3, 2)) == Vector::Zero(6));
}

TEST_CASE("vec_permutation") {
    CHECK(vec_permutation(1) == Matrix::Identity(1, 1));
    Matrix s2 = Matrix::Zero(4, 4);
    s2(0, 0) = s2(1, 2) = s2(2, 1) = s2(3, 3) = 1;
    CHECK(vec_permutation(2) == s2);
    const Matrix s3 = vec_permutation(3);
    CHECK(s3 * s3 == Matrix::Identity(9, 9));
    const Matrix a = random_matrix(3, 3, 3);
    CHECK((vec(Matrix(a.transpose())) - s3 * vec(a)).norm() == 0.0);
}

TEST_CASE("is_psd") {
    CHECK(is_psd(Matrix::Identity(4, 4)));
    Matrix d = Matrix::Zero(2, 2);
    d(0, 0) = 1;
    d(1, 1) = -1;
    CHECK_FALSE(is_psd(d));
    const Matrix g = random_matrix(3, 5, 5);
    CHECK(is_psd(g.transpose() * g));
    CHECK_THROWS_AS(is_psd(Matrix::Zero(2, 3)), InvalidInput);
}

TEST_CASE("psd_sqrt squares back") {
    const Matrix g = random_matrix(4, 4, 9);
    const Matrix w = g.transpose() * g;
    const Matrix r = psd_sqrt(w);
    CHECK((r * r - w).norm() < 1e-10 * w.norm());
    CHECK((r - r.transpose()).norm() < 1e-12);
}
