#include "doctest.h"
#include "support.hpp"

#include "smartsizer/error.hpp"

#include <cmath>
#include <cstdlib>

using namespace smartsizer;

namespace {

Errc code_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an error");
    return Errc::invalid_argument;
}

}  // namespace

TEST_CASE("validation rejects malformed matrices") {
    CHECK(code_of([] { validate_covariance(Matrix::Identity(2, 3)); }) == Errc::not_square);
    Matrix asym = Matrix::Identity(3, 3);
    asym(0, 1) = 0.2;
    CHECK(code_of([&] { validate_covariance(asym); }) == Errc::not_symmetric);
    Matrix indef(2, 2);
    indef << 1, 2, 2, 1;
    try {
        validate_covariance(indef);
        FAIL("indefinite matrix accepted");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::not_positive_definite);
        CHECK(e.detail().find("pivot 1") != std::string::npos);
    }
    CHECK(code_of([] { validate_covariance(Matrix::Identity(1, 1)); }) == Errc::invalid_argument);
}

TEST_CASE("rounded rank-deficient matrices are accepted as semidefinite") {
    const auto spec = testsupport::load_spec("extend/sigma_ipw.csv");
    CHECK(spec.semidefinite());
    CHECK(spec.min_eigenvalue() < 0.0);
    CHECK(code_of([&] { cholesky(spec); }) == Errc::not_positive_definite);
    const Matrix f = sampling_factor(spec.matrix());
    // Clipping only touches the tiny negative eigenvalue.
    CHECK((f * f.transpose() - spec.matrix()).cwiseAbs().maxCoeff() < 0.02);

    ValidationOptions strict;
    strict.psd_tolerance = 1e-9;
    CHECK(code_of([&] { validate_covariance(spec.matrix(), strict); }) == Errc::not_positive_definite);
}

TEST_CASE("Cholesky factor reproduces a PD matrix") {
    std::mt19937_64 rng(3);
    const auto spec = validate_covariance(testsupport::random_pd(5, rng));
    CHECK_FALSE(spec.semidefinite());
    const Matrix l = cholesky(spec);
    CHECK((l * l.transpose() - spec.matrix()).norm() < 1e-12);
    CHECK(l(0, 1) == 0.0);
}

TEST_CASE("Monte Carlo config needs enough repetitions") {
    CHECK(code_of([] { MonteCarloConfig{999, 1}.validate(); }) == Errc::invalid_argument);
    MonteCarloConfig{1000, 1}.validate();
}

TEST_CASE("normal blocks depend only on seed, stream and shape") {
    auto collect = [](std::uint64_t seed, Stream s) {
        RowMatrix out(20000, 3);
        for_each_normal_block(seed, s, 20000, 3, [&](std::uint64_t first, const RowMatrix& z) {
            out.middleRows(static_cast<Eigen::Index>(first), z.rows()) = z;
        });
        return out;
    };
    const RowMatrix a = collect(5, Stream::power);
    CHECK(a == collect(5, Stream::power));
    CHECK(a != collect(6, Stream::power));
    CHECK(a != collect(5, Stream::sizing));

    setenv("SMARTSIZER_THREADS", "3", 1);
    const RowMatrix threaded = collect(5, Stream::power);
    unsetenv("SMARTSIZER_THREADS");
    CHECK(a == threaded);

    CHECK(std::abs(a.mean()) < 0.02);
    CHECK(std::abs((a.array() * a.array()).mean() - 1.0) < 0.02);
}

TEST_CASE("sample_mvn has the requested covariance") {
    Matrix s(2, 2);
    s << 2.0, 0.6, 0.6, 1.0;
    const auto sample = sample_mvn(validate_covariance(s), MonteCarloConfig{200000, 9});
    CHECK(sample.draws.rows() == 200000);
    const Matrix centered = sample.draws.rowwise() - sample.draws.colwise().mean();
    const Matrix cov = centered.transpose() * centered / 199999.0;
    CHECK(cov(0, 0) == doctest::Approx(2.0).epsilon(0.02));
    CHECK(cov(0, 1) == doctest::Approx(0.6).epsilon(0.03));
    CHECK(cov(1, 1) == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("empirical quantile uses the ceil(m p) order statistic") {
    CHECK(order_statistic_rank(100, 0.95) == 95);
    CHECK(order_statistic_rank(100, 0.951) == 96);
    CHECK(order_statistic_rank(10, 0.01) == 1);
    CHECK(order_statistic_rank(3, 0.7) == 3);
    CHECK(order_statistic_rank(10, 0.7) == 7);
    const std::vector<double> v{5, 1, 4, 2, 3};
    CHECK(empirical_quantile(v, 0.5) == 3);
    CHECK(empirical_quantile(v, 0.99) == 5);
    CHECK(code_of([] { empirical_quantile(std::vector<double>{}, 0.5); }) == Errc::empty_input);
    CHECK(code_of([&] { empirical_quantile(v, 1.0); }) == Errc::probability_out_of_range);
}

TEST_CASE("binomial estimate") {
    const auto e = binomial_estimate(25, 100, 4);
    CHECK(e.value == 0.25);
    CHECK(e.mc_se == doctest::Approx(std::sqrt(0.25 * 0.75 / 100)));
    CHECK(e.generator == kGeneratorName);
    CHECK(e.seed == 4);
}
