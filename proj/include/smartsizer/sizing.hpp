#pragma once

// Minimum sample size for a target power. The power event is
// {max_i X_i < sqrt(n)} for an n-free Gaussian vector X, so the answer is the
// square of the (1 - beta) quantile of max_i X_i.

#include "smartsizer/power.hpp"

#include <cstdint>
#include <vector>

namespace smartsizer {

struct SizingDistribution {
    Vector mean;  // c_i sigma_iN sqrt(n) / Delta_i
    Matrix cov;   // (S_ij - S_iN - S_jN + S_NN) / (Delta_i Delta_j)
    std::vector<std::size_t> exclusion;
};

/// Errors: empty_exclusion_set, zero_effect.
SizingDistribution sizing_distribution(const CovarianceSpec& spec, const EffectConfig& effects,
                                       const CriticalValues& criticals);

struct SizingResult {
    std::uint64_t n = 0;
    double c_star = 0.0;
    MonteCarloEstimate verified_power;
    MonteCarloConfig mc;
    CriticalValues criticals;
    std::vector<std::size_t> exclusion;
    Vector delta;
    unsigned warnings = 0;
};

/// n = ceil(c*^2), or 1 with `already_powered` when c* <= 0. Power at the
/// returned n is re-estimated on an independent stream; when it falls more than
/// 3 standard errors below 1 - beta the whole computation is repeated once with
/// twice the repetitions before numerical_failure is raised.
///
/// Errors: beta_out_of_range (beta must lie in (0, 0.5)), empty_exclusion_set,
/// plus anything from critical_values.
SizingResult sample_size(const CovarianceSpec& spec, const EffectConfig& effects, double alpha, double beta,
                         const MonteCarloConfig& cfg);

/// Smallest n in [1, n_max] with power(n) >= 1 - beta, found by bisection on
/// one fixed set of draws (Stream::bisection), where power is exactly
/// monotone in n. Errors: not_reached when power(n_max) < 1 - beta.
SizingResult sample_size_bisection(const CovarianceSpec& spec, const EffectConfig& effects, double alpha,
                                   double beta, const MonteCarloConfig& cfg, std::uint64_t n_max);

}  // namespace smartsizer
