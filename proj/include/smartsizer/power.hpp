#pragma once

// Monte Carlo power of excluding every regime at least delta_min worse than the
// best from the MCB set of best, using the comparison-with-the-best-arm lower
// bound as the power function.

#include "smartsizer/mcb.hpp"
#include "smartsizer/mvncore.hpp"

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace smartsizer {

struct EffectConfig {
    Vector delta;  // Delta_i = theta_best - theta_i >= 0 (or delta_i when standardized)
    double delta_min = 0.0;
    std::size_t best_index = 0;
    bool standardized = false;

    /// Throws invalid_argument on a malformed configuration.
    void validate(std::size_t dim) const;
};

/// Effects implied by an estimate vector: the best regime is the argmax of the
/// oriented estimates and Delta_i is its distance from each regime.
EffectConfig effects_from_theta(const Vector& theta, Direction direction, double delta_min);

/// Converts standardized effects delta_i to Delta_i = delta_i * sigma_iN sqrt(n).
/// Returns the input unchanged when it is not standardized.
EffectConfig materialize_effects(const CovarianceSpec& spec, const EffectConfig& effects);

/// {i : Delta_i >= delta_min}, ascending, 0-based.
std::vector<std::size_t> exclusion_indices(const EffectConfig& effects);

/// Correlation of the standardized contrasts W_i over the exclusion set:
/// (S_ij - S_iN - S_jN + S_NN) / (sigma_iN sigma_jN), N = best index.
Matrix power_covariance(const CovarianceSpec& spec, const EffectConfig& effects);

enum class Warning : unsigned {
    none = 0,
    nothing_to_exclude = 1u << 0,
    already_powered = 1u << 1,
    covariance_semidefinite = 1u << 2,
    verification_rerun = 1u << 3,
};

inline unsigned operator|(unsigned a, Warning w) { return a | static_cast<unsigned>(w); }
inline bool has_warning(unsigned flags, Warning w) { return (flags & static_cast<unsigned>(w)) != 0; }
std::vector<std::string> warning_names(unsigned flags);

struct PowerResult {
    MonteCarloEstimate estimate;
    CriticalValues criticals;
    std::vector<std::size_t> exclusion;
    Vector delta;  // materialized effect sizes
    unsigned warnings = 0;
};

/// Evaluates the power event on a fixed set of W draws so that any number of
/// sample sizes share common random numbers.
class PowerEvaluator {
public:
    PowerEvaluator(const CovarianceSpec& spec, const EffectConfig& effects, const CriticalValues& criticals,
                   const MonteCarloConfig& cfg, Stream stream = Stream::power);

    /// Fraction of draws with W_i < -c_i + Delta_i sqrt(n) / sigma_iN for all i
    /// in the exclusion set. 1.0 when the exclusion set is empty.
    MonteCarloEstimate at(std::uint64_t n) const;

    const std::vector<std::size_t>& exclusion() const noexcept { return exclusion_; }
    const EffectConfig& effects() const noexcept { return effects_; }

private:
    EffectConfig effects_;
    std::vector<std::size_t> exclusion_;
    Vector offset_;  // -c_i
    Vector slope_;   // Delta_i / sigma_iN
    RowMatrix draws_;
    MonteCarloConfig cfg_;
};

/// Critical values come from Stream::critical, W draws from Stream::power; a
/// fixed seed therefore gives common random numbers across Sigma, effects and n.
PowerResult compute_power(const CovarianceSpec& spec, const EffectConfig& effects, std::uint64_t n,
                          double alpha, const MonteCarloConfig& cfg);

/// Reuses precomputed critical values.
PowerResult compute_power(const CovarianceSpec& spec, const EffectConfig& effects, std::uint64_t n,
                          const CriticalValues& criticals, const MonteCarloConfig& cfg);

struct CurvePoint {
    std::uint64_t n = 0;
    MonteCarloEstimate estimate;
};

/// One estimate per grid point, all on the same draws, hence exactly monotone
/// in n. Errors: empty_input, invalid_argument (grid not ascending).
std::vector<CurvePoint> power_curve(const CovarianceSpec& spec, const EffectConfig& effects,
                                    const std::vector<std::uint64_t>& n_grid, double alpha,
                                    const MonteCarloConfig& cfg);

}  // namespace smartsizer
