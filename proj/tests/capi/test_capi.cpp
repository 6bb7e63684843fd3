#include "doctest.h"

#include "smartsizer/smartsizer.h"

#include <cmath>
#include <cstring>
#include <string>
#include <vector>

namespace {

const std::string kFixtures = SMARTSIZER_FIXTURE_DIR;

ss_covariance* identity(size_t dim) {
    std::vector<double> m(dim * dim, 0.0);
    for (size_t i = 0; i < dim; ++i) m[i * dim + i] = 1.0;
    ss_covariance* cov = nullptr;
    REQUIRE(ss_covariance_create(m.data(), dim, 0.0, &cov) == SS_OK);
    return cov;
}

}  // namespace

TEST_CASE("library metadata") {
    CHECK(std::strlen(ss_version()) > 0);
    CHECK(std::string(ss_generator_name()) == "mt19937_64+boost-ziggurat");
    CHECK(std::string(ss_status_name(SS_ERR_NOT_SYMMETRIC)) == "not_symmetric");
    CHECK(std::string(ss_status_name(SS_ERR_BUFFER_TOO_SMALL)) == "buffer_too_small");
    CHECK(ss_mc_default().reps == 1000000);
}

TEST_CASE("invalid covariance reports a status and a message") {
    const double bad[] = {1.0, 2.0, 2.0, 1.0};
    ss_covariance* cov = nullptr;
    CHECK(ss_covariance_create(bad, 2, 0.0, &cov) == SS_ERR_NOT_POSITIVE_DEFINITE);
    CHECK(cov == nullptr);
    CHECK(std::string(ss_last_error()).find("not_positive_definite") != std::string::npos);
    const double asym[] = {1.0, 0.2, 0.1, 1.0};
    CHECK(ss_covariance_create(asym, 2, 0.0, &cov) == SS_ERR_NOT_SYMMETRIC);
    CHECK(ss_covariance_create(nullptr, 2, 0.0, &cov) == SS_ERR_INVALID_ARGUMENT);
    CHECK(ss_covariance_load((kFixtures + "/missing.csv").c_str(), &cov) == SS_ERR_IO);
}

TEST_CASE("buffers that are too small are refused") {
    ss_covariance* cov = identity(3);
    double out[4];
    CHECK(ss_covariance_entries(cov, out, 4) == SS_ERR_BUFFER_TOO_SMALL);
    double full[9];
    CHECK(ss_covariance_entries(cov, full, 9) == SS_OK);
    CHECK(full[4] == 1.0);
    size_t len = 0;
    CHECK(ss_read_vector("1, 2, 3", nullptr, 0, &len) == SS_OK);
    CHECK(len == 3);
    CHECK(ss_read_vector("1, 2, 3", out, 2, &len) == SS_ERR_BUFFER_TOO_SMALL);
    ss_covariance_destroy(cov);
}

TEST_CASE("two-arm power and size through the C API") {
    ss_covariance* cov = identity(2);
    const double delta[] = {0.5, 0.0};
    ss_effects* eff = nullptr;
    REQUIRE(ss_effects_from_delta(delta, 2, 1, 0.5, 0, &eff) == SS_OK);
    const ss_mc_config mc{200000, 7};

    ss_power_report pr{};
    size_t excl[2];
    double crit[2];
    REQUIRE(ss_power(cov, eff, 50, 0.05, mc, &pr, crit, excl) == SS_OK);
    CHECK(pr.estimate.value == doctest::Approx(0.804).epsilon(0.02));
    CHECK(pr.exclusion_count == 1);
    CHECK(excl[0] == 0);
    CHECK(crit[0] == doctest::Approx(1.645).epsilon(0.01));

    ss_size_report sr{};
    REQUIRE(ss_sample_size(cov, eff, 0.05, 0.2, mc, &sr, nullptr, nullptr) == SS_OK);
    CHECK(sr.n >= 49);
    CHECK(sr.n <= 51);
    CHECK(ss_sample_size(cov, eff, 0.05, 0.7, mc, &sr, nullptr, nullptr) == SS_ERR_BETA_OUT_OF_RANGE);
    CHECK(ss_sample_size_bisection(cov, eff, 0.05, 0.2, mc, 10, &sr) == SS_ERR_NOT_REACHED);

    const uint64_t grid[] = {50, 100};
    ss_estimate curve[2];
    REQUIRE(ss_power_curve(cov, eff, grid, 2, 0.05, mc, curve) == SS_OK);
    CHECK(curve[1].value == doctest::Approx(0.98).epsilon(0.01));
    ss_effects_destroy(eff);

    const double wide[] = {0.5, 0.0};
    REQUIRE(ss_effects_from_delta(wide, 2, 1, 1.0, 0, &eff) == SS_OK);
    CHECK(ss_sample_size(cov, eff, 0.05, 0.2, mc, &sr, nullptr, nullptr) == SS_ERR_EMPTY_EXCLUSION_SET);
    ss_effects_destroy(eff);
    ss_covariance_destroy(cov);
}

TEST_CASE("set of best and projection") {
    ss_covariance* cov = nullptr;
    REQUIRE(ss_covariance_load((kFixtures + "/extend/sigma_aipw.csv").c_str(), &cov) == SS_OK);
    double theta[8];
    size_t len = 0;
    REQUIRE(ss_read_vector((kFixtures + "/extend/theta_aipw.csv").c_str(), theta, 8, &len) == SS_OK);
    int flags[8];
    size_t count = 0;
    REQUIRE(ss_set_of_best(cov, theta, 8, 1, 250, 0.05, ss_mc_config{100000, 1}, flags, &count) == SS_OK);
    CHECK(count == 6);
    CHECK(flags[5] == 0);
    CHECK(flags[7] == 0);

    ss_projection p{};
    std::vector<double> m(64);
    REQUIRE(ss_project(cov, SS_BLOCK_EXCHANGEABLE, 0, &p, m.data()) == SS_OK);
    CHECK(p.singleton == 0);
    CHECK(p.distance > 0.0);
    CHECK(ss_project(cov, SS_BLOCK_EXCHANGEABLE, 8, &p, nullptr) == SS_ERR_INVALID_ARGUMENT);
    ss_covariance_destroy(cov);
}

TEST_CASE("trial helpers") {
    size_t dim = 0;
    REQUIRE(ss_design_dim(2, &dim) == SS_OK);
    CHECK(dim == 5);
    double theta[5];
    REQUIRE(ss_design_theta(2, -1.0, theta, 5) == SS_OK);
    CHECK(theta[3] == doctest::Approx(3.5));
    CHECK(ss_design_dim(7, &dim) == SS_ERR_INVALID_ARGUMENT);

    ss_trial_config cfg = ss_trial_default(1);
    cfg.n = 10;
    cfg.reps = 50;
    cfg.critical_reps = 2000;
    ss_empirical_report r{};
    REQUIRE(ss_empirical_power(&cfg, &r, nullptr) == SS_OK);
    CHECK(r.requested == 50);
    CHECK(r.exclusion_count == 2);
}

TEST_CASE("sweep returns CSV text") {
    char* csv = nullptr;
    const char* spec = R"({"template":"exchangeable","dim":4,"params":{"sigma2":1,"rho":0.5},
        "axes":[{"name":"rho","lower":0,"upper":0.5,"steps":2}],"effects":{"uniform":0.25,"best":1},
        "n":150,"reps":5000})";
    REQUIRE(ss_sweep_run(spec, ".", &csv) == SS_OK);
    REQUIRE(csv != nullptr);
    CHECK(std::string(csv).rfind("rho,power,mc_se,feasible", 0) == 0);
    ss_string_free(csv);
    CHECK(ss_sweep_run("{not json", ".", &csv) == SS_ERR_PARSE);
}
