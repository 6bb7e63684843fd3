#include "doctest.h"
#include "support.hpp"

#include "smartsizer/error.hpp"
#include "smartsizer/trialsim.hpp"

#include <cmath>
#include <sstream>

using namespace smartsizer;

TEST_CASE("true regime means") {
    const Vector t1 = true_theta(1, 0.25);
    CHECK(t1(0) == doctest::Approx(1.3125));
    CHECK(t1(1) == doctest::Approx(0.8125));
    CHECK(t1(2) == doctest::Approx(1.1875));
    CHECK(t1(3) == doctest::Approx(0.6875));
    const Vector t2 = true_theta(2, 2.0);
    const double expected[] = {1.0, 3.0, 2.75, 3.5, 3.0};
    for (int k = 0; k < 5; ++k) CHECK(t2(k) == doctest::Approx(expected[k]));
    CHECK(true_beta(2, 2.0)(2) == doctest::Approx(-0.25));
    CHECK(msm_spec(1).d.rows() == 4);
    CHECK(msm_spec(2).d.cols() == 5);
    CHECK_THROWS_AS(msm_spec(3), Error);
}

TEST_CASE("generation is deterministic and follows the re-randomization rule") {
    const auto a = generate_design1(500, 0.25, 3);
    const auto b = generate_design1(500, 0.25, 3);
    std::ostringstream sa, sb;
    write_trial_csv(sa, a);
    write_trial_csv(sb, b);
    CHECK(sa.str() == sb.str());
    for (const auto& r : a) {
        CHECK(r.responder == (r.o21 > 0.0));
        CHECK(r.has_a2() == !r.responder);
        if (r.has_a2()) CHECK((r.a2 == 1 || r.a2 == -1));
    }
    for (const auto& r : generate_design2(500, 2.0, 3)) {
        CHECK(r.has_a2() == (!r.responder && r.a1 == -1));
        if (r.has_a2()) CHECK((r.a2 >= 1 && r.a2 <= 4));
    }
    const auto c = generate_design1(500, 0.25, 4);
    CHECK(c[0].o11 != a[0].o11);
}

TEST_CASE("csv export") {
    std::ostringstream os;
    write_trial_csv(os, generate_design2(20, 2.0, 1));
    const std::string s = os.str();
    CHECK(s.rfind("id,o11,o12,a1,o21,o22,responder,a2,y\n", 0) == 0);
    CHECK(std::count(s.begin(), s.end(), '\n') == 21);
    CHECK(s.find("NA") != std::string::npos);
}

TEST_CASE("weights") {
    const auto msm = msm_spec(1);
    TrialRecord r;
    r.a1 = 1;
    r.responder = true;
    CHECK(consistent(msm, r, 0));
    CHECK(consistent(msm, r, 2));
    CHECK_FALSE(consistent(msm, r, 1));
    CHECK(weight_stage2(msm, r, 0) == doctest::Approx(2.0));
    r.responder = false;
    r.a2 = -1;
    CHECK_FALSE(consistent(msm, r, 0));
    CHECK(consistent(msm, r, 2));
    CHECK(weight_stage2(msm, r, 2) == doctest::Approx(4.0));
    CHECK(weight_stage1(msm, r, 2) == doctest::Approx(2.0));
}

TEST_CASE("large-sample estimates recover the truth") {
    for (const int design : {1, 2}) {
        const auto msm = msm_spec(design);
        const auto data = generate_trial(design, 200000, -1.0, 11);
        const Vector truth = true_theta(design, msm.default_delta);
        for (const Method m : {Method::ipw, Method::aipw}) {
            const auto r = fit(data, msm, m);
            for (Eigen::Index k = 0; k < truth.size(); ++k) {
                const double se = std::sqrt(r.sigma(k, k) / static_cast<double>(r.n));
                CHECK(std::abs(r.theta(k) - truth(k)) < 4.0 * se);
            }
        }
    }
}

TEST_CASE("no treatment effect gives equal regime means") {
    const auto msm = msm_spec(1);
    const auto r = fit(generate_trial(1, 200000, 0.0, 5), msm, Method::aipw);
    const double se = std::sqrt(r.sigma.diagonal().maxCoeff() / static_cast<double>(r.n));
    CHECK(r.theta.maxCoeff() - r.theta.minCoeff() < 8.0 * se);
}

TEST_CASE("AIPW with IPW-fitted means reproduces IPW") {
    const auto msm = msm_spec(1);
    const auto data = generate_trial(1, 2000, -1.0, 21);
    const auto ipw = fit_ipw(data, msm);
    const Matrix mu = (msm.d * ipw.beta).transpose().replicate(static_cast<Eigen::Index>(data.size()), 1);
    const auto aipw = fit_aipw(data, msm, mu, mu);
    CHECK((aipw.theta - ipw.theta).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("misspecified outcome model stays consistent") {
    const auto msm = msm_spec(2);
    const auto data = generate_trial(2, 100000, -1.0, 8);
    const Vector truth = true_theta(2, msm.default_delta);
    for (const OutcomeModel model : {OutcomeModel::intercept_only, OutcomeModel::noise_regressor}) {
        AipwOptions opt;
        opt.model = model;
        const auto r = fit_aipw(data, msm, opt);
        for (Eigen::Index k = 0; k < truth.size(); ++k) {
            const double se = std::sqrt(r.sigma(k, k) / static_cast<double>(r.n));
            CHECK(std::abs(r.theta(k) - truth(k)) < 3.5 * se);
        }
    }
}

TEST_CASE("sandwich is symmetric with a nonnegative diagonal") {
    for (const int design : {1, 2}) {
        const auto msm = msm_spec(design);
        const auto data = generate_trial(design, 400, -1.0, 2);
        for (const Method m : {Method::ipw, Method::aipw}) {
            const auto r = fit(data, msm, m);
            CHECK((r.sigma - r.sigma.transpose()).cwiseAbs().maxCoeff() == 0.0);
            CHECK(r.sigma.diagonal().minCoeff() >= 0.0);
            CHECK((sandwich_variance(data, msm, r) - r.sigma).cwiseAbs().maxCoeff() < 1e-10);
        }
    }
}

TEST_CASE("tiny trials are singular") {
    const auto msm = msm_spec(2);
    try {
        fit(generate_trial(2, 3, -1.0, 1), msm, Method::ipw);
        FAIL("fit succeeded on three records");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::singular_system);
    }
}

TEST_CASE("empirical power bookkeeping") {
    EmpiricalPowerConfig cfg;
    cfg.design = 1;
    cfg.n = 10;
    cfg.reps = 100;
    cfg.critical_reps = 2000;
    const auto r = empirical_power(cfg);
    CHECK(r.requested == 100);
    CHECK(r.usable + r.singular + r.not_psd == r.requested);
    CHECK(r.estimate.value < 0.2);
    CHECK(r.exclusion == std::vector<std::size_t>{1, 3});
    CHECK(r.best_index == 0);
    const auto again = empirical_power(cfg);
    CHECK(again.estimate.value == r.estimate.value);
}

TEST_CASE("averaged sandwich is stable across seeds") {
    const auto a = estimate_sigma(1, 2000, 40, Method::aipw, -1.0, 1);
    const auto b = estimate_sigma(1, 2000, 40, Method::aipw, -1.0, 2);
    CHECK(a.reps == 40);
    const double scale = a.sigma.cwiseAbs().maxCoeff();
    CHECK((a.sigma - b.sigma).cwiseAbs().maxCoeff() < 0.1 * scale);
}
