#include "doctest.h"
#include "support.hpp"

#include "smartsizer/error.hpp"
#include "smartsizer/mcb.hpp"

#include <cmath>

using namespace smartsizer;

namespace {
const MonteCarloConfig kCfg{200000, 17};
}

TEST_CASE("two arms give the one-sided normal quantile") {
    const auto spec = validate_covariance(Matrix::Identity(2, 2));
    const auto cv = critical_values(spec, 0.05, kCfg);
    CHECK(cv.values(0) == doctest::Approx(1.6449).epsilon(0.005));
    CHECK(cv.values(1) == doctest::Approx(1.6449).epsilon(0.005));
    CHECK(cv.mc.reps == kCfg.reps);
}

TEST_CASE("critical values are invariant to scaling the covariance") {
    std::mt19937_64 rng(2);
    const Matrix m = testsupport::random_pd(5, rng);
    const auto a = critical_values(validate_covariance(m), 0.05, kCfg);
    const auto b = critical_values(validate_covariance(7.5 * m), 0.05, kCfg);
    CHECK((a.values - b.values).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("exchangeable covariance gives equal critical values") {
    Matrix m = Matrix::Constant(4, 4, 0.3);
    m.diagonal().setConstant(1.0);
    const auto cv = critical_values(validate_covariance(m), 0.05, kCfg);
    CHECK(cv.values.maxCoeff() - cv.values.minCoeff() < 1e-12);
}

TEST_CASE("per-reference draws agree with one shared sample") {
    std::mt19937_64 rng(8);
    const auto spec = validate_covariance(testsupport::random_pd(4, rng));
    const auto direct = critical_values(spec, 0.05, kCfg);
    const auto shared = critical_values(spec, 0.05, sample_mvn(spec, kCfg));
    CHECK((direct.values - shared.values).cwiseAbs().maxCoeff() < 0.03);
}

TEST_CASE("critical values shrink as alpha grows") {
    std::mt19937_64 rng(4);
    const auto spec = validate_covariance(testsupport::random_pd(4, rng));
    const auto strict = critical_values(spec, 0.01, kCfg);
    const auto loose = critical_values(spec, 0.2, kCfg);
    CHECK((strict.values.array() > loose.values.array()).all());
}

TEST_CASE("critical value errors") {
    const auto spec = validate_covariance(Matrix::Identity(3, 3));
    CHECK_THROWS_AS(critical_values(spec, 0.0, kCfg), Error);
    CHECK_THROWS_AS(critical_values(spec, 0.6, kCfg), Error);
    Matrix same = Matrix::Constant(2, 2, 1.0);
    same(1, 1) = 1.0;
    const auto degenerate = validate_covariance(same);
    try {
        critical_values(degenerate, 0.05, kCfg);
        FAIL("degenerate pair accepted");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::degenerate_pair);
    }
    const auto sample = sample_mvn(validate_covariance(Matrix::Identity(2, 2)), kCfg);
    CHECK_THROWS_AS(critical_values(spec, 0.05, sample), Error);
}

TEST_CASE("set of best follows the MCB rule") {
    const auto spec = validate_covariance(Matrix::Identity(3, 3));
    CriticalValues cv;
    cv.values = Vector::Constant(3, 2.0);
    // s_ij / sqrt(n) = sqrt(2) / 10, so the margin is 0.2 sqrt(2) ~ 0.283.
    Vector theta(3);
    theta << 1.0, 0.8, 0.5;
    const auto best = set_of_best(theta, spec, 100, cv);
    CHECK(best.members == std::vector<std::size_t>{0, 1});
    CHECK(best.contains(0));
    CHECK_FALSE(best.contains(2));

    // Boundary ties count as members.
    theta << 1.0, 1.0 - 2.0 * std::sqrt(2.0) / 10.0, 0.0;
    cv.values(1) = 2.0;
    CHECK(set_of_best(theta, spec, 100, cv).contains(1));
}

TEST_CASE("the top estimate is always retained") {
    const auto spec = validate_covariance(Matrix::Identity(2, 2));
    CriticalValues cv;
    cv.values = Vector::Constant(2, -5.0);
    Vector theta(2);
    theta << 0.0, 1.0;
    const auto best = set_of_best(theta, spec, 10, cv);
    CHECK(best.contains(1));
}

TEST_CASE("EXTEND sets of best at n = 250") {
    const auto aipw = testsupport::load_spec("extend/sigma_aipw.csv");
    const Vector theta_aipw = orient(testsupport::load_vector("extend/theta_aipw.csv"), Direction::lower_is_better);
    const auto best_aipw = set_of_best(theta_aipw, aipw, 250, critical_values(aipw, 0.05, kCfg));
    CHECK(best_aipw.members == std::vector<std::size_t>{0, 1, 2, 3, 4, 6});

    const auto ipw = testsupport::load_spec("extend/sigma_ipw.csv");
    const Vector theta_ipw = orient(testsupport::load_vector("extend/theta_ipw.csv"), Direction::lower_is_better);
    const auto best_ipw = set_of_best(theta_ipw, ipw, 250, critical_values(ipw, 0.05, kCfg));
    CHECK(best_ipw.members.size() == 8);
}
