#include "doctest.h"
#include "support.hpp"

#include "smartsizer/error.hpp"
#include "smartsizer/sizing.hpp"

using namespace smartsizer;

namespace {

const MonteCarloConfig kCfg{200000, 31};

EffectConfig two_arm(double delta) {
    EffectConfig e;
    e.delta = Vector(2);
    e.delta << delta, 0.0;
    e.best_index = 1;
    e.delta_min = delta;
    return e;
}

}  // namespace

TEST_CASE("two-arm identity needs about 50") {
    const auto spec = validate_covariance(Matrix::Identity(2, 2));
    const auto r = sample_size(spec, two_arm(0.5), 0.05, 0.2, kCfg);
    CHECK(r.n >= 49);
    CHECK(r.n <= 51);
    CHECK(r.verified_power.value >= 0.79);
    CHECK(r.exclusion == std::vector<std::size_t>{0});
}

TEST_CASE("sizing distribution") {
    const auto spec = validate_covariance(Matrix::Identity(3, 3));
    EffectConfig e;
    e.delta = Vector(3);
    e.delta << 1.0, 2.0, 0.0;
    e.best_index = 2;
    e.delta_min = 1.0;
    CriticalValues cv;
    cv.values = Vector::Constant(3, 2.0);
    const auto d = sizing_distribution(spec, e, cv);
    CHECK(d.mean(0) == doctest::Approx(2.0 * std::sqrt(2.0) / 1.0));
    CHECK(d.mean(1) == doctest::Approx(2.0 * std::sqrt(2.0) / 2.0));
    CHECK(d.cov(0, 0) == doctest::Approx(2.0));
    CHECK(d.cov(0, 1) == doctest::Approx(1.0 / 2.0));
}

TEST_CASE("sizing argument errors") {
    const auto spec = validate_covariance(Matrix::Identity(2, 2));
    CHECK_THROWS_AS(sample_size(spec, two_arm(0.5), 0.05, 0.5, kCfg), Error);
    CHECK_THROWS_AS(sample_size(spec, two_arm(0.5), 0.05, 0.0, kCfg), Error);
    EffectConfig e = two_arm(0.5);
    e.delta_min = 1.0;
    try {
        sample_size(spec, e, 0.05, 0.2, kCfg);
        FAIL("empty exclusion set accepted");
    } catch (const Error& err) {
        CHECK(err.code() == Errc::empty_exclusion_set);
    }
}

TEST_CASE("bisection agrees with the quantile route") {
    const auto spec = testsupport::load_spec("extend/sigma_aipw.csv");
    const auto e = effects_from_theta(testsupport::load_vector("extend/theta_aipw.csv"), Direction::lower_is_better,
                                      2.0);
    const auto q = sample_size(spec, e, 0.05, 0.2, kCfg);
    const auto b = sample_size_bisection(spec, e, 0.05, 0.2, kCfg, 5000);
    CHECK(std::abs(static_cast<double>(q.n) - static_cast<double>(b.n)) <= 0.05 * static_cast<double>(q.n));
    CHECK(b.verified_power.value >= 0.8);
}

TEST_CASE("bisection limits") {
    const auto spec = validate_covariance(Matrix::Identity(2, 2));
    try {
        sample_size_bisection(spec, two_arm(0.5), 0.05, 0.2, kCfg, 10);
        FAIL("unreachable target accepted");
    } catch (const Error& err) {
        CHECK(err.code() == Errc::not_reached);
    }
    const auto r = sample_size_bisection(spec, two_arm(50.0), 0.05, 0.2, kCfg, 10);
    CHECK(r.n == 1);
    CHECK(has_warning(r.warnings, Warning::already_powered));
}

TEST_CASE("sizing is reproducible from the seed") {
    const auto spec = validate_covariance(Matrix::Identity(2, 2));
    const auto a = sample_size(spec, two_arm(0.5), 0.05, 0.2, kCfg);
    const auto b = sample_size(spec, two_arm(0.5), 0.05, 0.2, kCfg);
    CHECK(a.n == b.n);
    CHECK(a.c_star == b.c_star);
}
