#pragma once

// Two simulated SMART designs, IPW and AIPW estimators of the embedded-regime
// means with sandwich variances, and empirical MCB power over replicated trials.
//
// Design 1: A1 = +-1; non-responders (O21 <= 0) are re-randomized to A2 = +-1,
// responders keep A1. Four regimes (a1, a2), theta = D (b0, b_a1, b_a2).
// Design 2: A1 = +-1; only A1 = -1 non-responders are re-randomized, uniformly
// over A2 in {1, 2, 3, 4}. Five regimes: a1 = +1, then a1 = -1 with
// a2 = 4, 1, 2, 3.

#include "smartsizer/mcb.hpp"
#include "smartsizer/mvncore.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace smartsizer {

enum class Method { ipw, aipw };

const char* method_name(Method m);
/// "ipw" / "aipw"; errors: invalid_argument.
Method parse_method(const std::string& name);

struct TrialRecord {
    double o11 = 0.0;
    double o12 = 0.0;
    int a1 = 0;
    double o21 = 0.0;
    double o22 = 0.0;
    bool responder = false;  // o21 > 0
    int a2 = 0;              // 0 when the record was not re-randomized
    double y = 0.0;

    bool has_a2() const noexcept { return a2 != 0; }
};

using TrialData = std::vector<TrialRecord>;

struct Regime {
    int a1 = 0;
    int a2 = 0;  // 0: no second-stage option applies
};

struct MsmSpec {
    int design = 0;
    Matrix d;  // K x p, theta = D beta
    std::vector<Regime> regimes;
    double p1 = 0.5;  // first-stage randomization probability
    double p2 = 0.5;  // second-stage probability for re-randomized records
    double default_delta = 0.0;

    std::size_t regime_count() const noexcept { return regimes.size(); }
    std::size_t param_count() const noexcept { return static_cast<std::size_t>(d.cols()); }
};

/// Errors: invalid_argument for designs other than 1 and 2.
MsmSpec msm_spec(int design);

Vector true_beta(int design, double delta);
Vector true_theta(int design, double delta);

/// E[O21 | O21 <= 0]; the design-2 interaction is centered on it.
double nonresponder_o21_mean();

TrialData generate_design1(std::uint64_t n, double delta, std::uint64_t seed);
TrialData generate_design2(std::uint64_t n, double delta, std::uint64_t seed);
TrialData generate_trial(int design, std::uint64_t n, double delta, std::uint64_t seed);

/// Whether the record's treatment path is consistent with regime k.
bool consistent(const MsmSpec& msm, const TrialRecord& r, std::size_t k);
/// Inverse-probability weights for regime k: first stage only (w1) and full (w2).
double weight_stage1(const MsmSpec& msm, const TrialRecord& r, std::size_t k);
double weight_stage2(const MsmSpec& msm, const TrialRecord& r, std::size_t k);

/// Outcome models used by AIPW.
enum class OutcomeModel {
    correct,         // the design's own regressor set
    noise_regressor, // correct set plus an independent N(0, 1) column
    intercept_only,  // deliberately wrong: constant mean
};

struct AipwOptions {
    OutcomeModel model = OutcomeModel::correct;
    std::uint64_t noise_seed = 1;
};

struct EstimationResult {
    Method method = Method::ipw;
    Vector beta;
    Vector theta;
    Matrix sigma;  // sandwich covariance of sqrt(n) theta_hat
    std::uint64_t n = 0;
};

/// Weighted least squares over replicated (record, consistent regime) rows.
/// Errors: singular_system, empty_input.
EstimationResult fit_ipw(const TrialData& data, const MsmSpec& msm);

/// Augmented estimator with stage-2 and stage-1 conditional means fitted by
/// least squares. Errors: singular_system, empty_input.
EstimationResult fit_aipw(const TrialData& data, const MsmSpec& msm, const AipwOptions& options = {});

/// Same, with caller-supplied conditional means (n x K each): mu2(i, k) is the
/// stage-2 mean under regime k, mu1(i, k) its stage-1 counterpart.
EstimationResult fit_aipw(const TrialData& data, const MsmSpec& msm, const Matrix& mu2, const Matrix& mu1);

/// Recomputes D Gamma^-1 Lambda Gamma^-T D' for a fitted result. Gamma is the
/// Jacobian of the estimating equation actually solved (weighted for IPW).
/// Errors: singular_system.
Matrix sandwich_variance(const TrialData& data, const MsmSpec& msm, const EstimationResult& result,
                         const AipwOptions& options = {});

EstimationResult fit(const TrialData& data, const MsmSpec& msm, Method method, const AipwOptions& options = {});

struct EmpiricalPowerConfig {
    int design = 1;
    std::uint64_t n = 0;
    std::uint64_t reps = 1000;
    double alpha = 0.05;
    double delta_min = 0.5;
    double delta = -1.0;  // treatment effect; < 0 selects the design default
    Method method = Method::aipw;
    std::uint64_t seed = kDefaultSeed;
    std::uint64_t critical_reps = 20000;
};

struct EmpiricalPowerResult {
    MonteCarloEstimate estimate;  // over usable replicates
    /// Fraction of usable replicates in which every target arm was below the
    /// true best arm's lower limit, i.e. the comparison-with-the-best-arm bound.
    double bound_rate = 0.0;
    std::uint64_t requested = 0;
    std::uint64_t usable = 0;
    std::uint64_t singular = 0;  // estimating equations could not be solved
    std::uint64_t not_psd = 0;   // sandwich estimate rejected by validation
    std::vector<std::size_t> exclusion;
    std::size_t best_index = 0;
};

/// Each replicate: simulate, fit, sandwich, critical values from the estimated
/// covariance, set of best; success when every regime at least delta_min below
/// the true best is excluded. Replicate r uses seeds derived from (seed, r).
EmpiricalPowerResult empirical_power(const EmpiricalPowerConfig& cfg);

struct SigmaEstimate {
    Matrix sigma;  // mean sandwich covariance
    Vector theta;  // mean estimate
    std::uint64_t reps = 0;
    std::uint64_t n = 0;
    std::uint64_t singular = 0;
};

/// Averages the sandwich covariance over `reps` simulated datasets of size n.
SigmaEstimate estimate_sigma(int design, std::uint64_t n, std::uint64_t reps, Method method, double delta,
                             std::uint64_t seed);

/// One CSV row per record; a2 is NA when absent.
void write_trial_csv(std::ostream& os, const TrialData& data);

}  // namespace smartsizer
