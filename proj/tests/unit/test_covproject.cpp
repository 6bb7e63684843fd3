#include "doctest.h"
#include "support.hpp"

#include "smartsizer/covproject.hpp"
#include "smartsizer/error.hpp"

#include <cmath>
#include <random>

using namespace smartsizer;

TEST_CASE("exchangeable projection of a diagonal matrix") {
    Matrix m = Matrix::Zero(2, 2);
    m(0, 0) = 1.0;
    m(1, 1) = 3.0;
    const auto p = project_exchangeable(validate_covariance(m));
    CHECK(p.params.sigma2 == 2.0);
    CHECK(p.params.rho == 0.0);
    CHECK(p.positive_definite);
    CHECK(p.distance == doctest::Approx(std::sqrt(2.0)));
}

TEST_CASE("exchangeable matrices are fixed points") {
    const Matrix m = exchangeable_matrix(4, 2.0, 0.3);
    const auto p = project_exchangeable(validate_covariance(m));
    CHECK(p.matrix == m);
    CHECK(p.params.sigma2 == 2.0);
    CHECK(p.params.rho == doctest::Approx(0.3).epsilon(1e-15));
    CHECK(p.distance == 0.0);
}

TEST_CASE("exchangeable projection is idempotent and keeps the trace") {
    std::mt19937_64 rng(5);
    for (int t = 0; t < 10; ++t) {
        const Matrix m = testsupport::random_pd(5, rng);
        const auto once = project_exchangeable(validate_covariance(m));
        const auto twice = project_exchangeable(validate_covariance(once.matrix));
        CHECK(once.matrix == twice.matrix);
        CHECK(std::abs(once.matrix.trace() - m.trace()) <= 1e-12 * m.trace());
    }
}

TEST_CASE("block-exchangeable worked example") {
    Matrix m(5, 5);
    m << 4, 2, 2, 2, 2,
         2, 1, 0.6, 0.6, 0.6,
         2, 0.6, 2, 0.6, 0.6,
         2, 0.6, 0.6, 3, 0.6,
         2, 0.6, 0.6, 0.6, 4;
    // Not PSD, so validate with a loose tolerance just to reach the projection.
    const auto spec = validate_covariance(m, ValidationOptions{10.0});
    const auto p = project_block_exchangeable(spec, 0);
    CHECK(p.params.sigma1w2 == doctest::Approx(4.0));
    CHECK(p.params.sigma2w2 == doctest::Approx(2.5));
    CHECK(p.params.rho1 == doctest::Approx(2.0 / (2.0 * std::sqrt(2.5))));
    CHECK(p.params.rho2 == doctest::Approx(0.6 / 2.5));
    CHECK(p.matrix(0, 3) == doctest::Approx(2.0));
    CHECK(p.matrix(2, 4) == doctest::Approx(0.6));
}

TEST_CASE("block-exchangeable fixed point at any singleton position") {
    for (std::size_t s = 0; s < 5; ++s) {
        const Matrix m = block_exchangeable_matrix(5, s, 3.0, 1.5, 0.4, 0.2);
        const auto p = project_block_exchangeable(validate_covariance(m), s);
        CHECK(p.matrix == m);
        CHECK(p.params.singleton == s);
        CHECK(p.distance == 0.0);
        const auto again = project_block_exchangeable(validate_covariance(p.matrix), s);
        CHECK(again.matrix == p.matrix);
    }
}

TEST_CASE("projection minimizes the distance within the family") {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const Matrix m = testsupport::random_pd(4, rng);
    const auto p = project_exchangeable(validate_covariance(m));
    for (int t = 0; t < 100; ++t) {
        const Matrix c = exchangeable_matrix(4, p.params.sigma2 * (0.5 + u(rng)), -0.3 + 1.2 * u(rng));
        CHECK(p.distance <= frobenius_distance(m, c));
    }
}

TEST_CASE("frobenius distance") {
    CHECK(frobenius_distance(Matrix::Identity(2, 2), Matrix::Zero(2, 2)) == doctest::Approx(std::sqrt(2.0)));
    CHECK(frobenius_distance(Matrix::Identity(3, 3), Matrix::Identity(3, 3)) == 0.0);
    CHECK_THROWS_AS(frobenius_distance(Matrix::Identity(2, 2), Matrix::Identity(3, 3)), Error);
}

TEST_CASE("projection outside the PD cone is reported") {
    // Rank one; the exchangeable fit lands on rho = -1/2, the singular edge.
    Matrix m(3, 3);
    m << 1, -1, 0, -1, 1, 0, 0, 0, 0;
    const auto p = project_exchangeable(validate_covariance(m));
    CHECK(p.params.rho == doctest::Approx(-0.5));
    CHECK_FALSE(p.positive_definite);
    CHECK(p.matrix.rows() == 3);
}

TEST_CASE("projection preconditions") {
    CHECK_THROWS_AS(project_exchangeable(validate_covariance(Matrix::Identity(1, 1))), Error);
    CHECK_THROWS_AS(project_block_exchangeable(validate_covariance(Matrix::Identity(2, 2)), 0), Error);
    CHECK_THROWS_AS(project_block_exchangeable(validate_covariance(Matrix::Identity(4, 4)), 4), Error);
}
