#include "smartsizer/power.hpp"

#include "smartsizer/error.hpp"

#include <cmath>

namespace smartsizer {

void EffectConfig::validate(std::size_t dim) const {
    if (static_cast<std::size_t>(delta.size()) != dim) {
        fail(Errc::dimension_mismatch, "effect vector has " + std::to_string(delta.size()) +
                                           " entries for " + std::to_string(dim) + " regimes");
    }
    if (best_index >= dim) fail(Errc::invalid_argument, "best index out of range");
    if (!(delta_min > 0.0) || !std::isfinite(delta_min)) {
        fail(Errc::invalid_argument, "delta_min must be positive");
    }
    for (Eigen::Index i = 0; i < delta.size(); ++i) {
        if (!std::isfinite(delta(i)) || delta(i) < 0.0) {
            fail(Errc::invalid_argument, "effect sizes must be finite and non-negative (entry " +
                                             std::to_string(i + 1) + ")");
        }
    }
    if (delta(static_cast<Eigen::Index>(best_index)) != 0.0) {
        fail(Errc::invalid_argument, "effect size of the best regime must be 0");
    }
}

EffectConfig effects_from_theta(const Vector& theta, Direction direction, double delta_min) {
    if (theta.size() == 0) fail(Errc::empty_input, "empty estimate vector");
    const Vector oriented = orient(theta, direction);
    Eigen::Index best = 0;
    const double top = oriented.maxCoeff(&best);
    EffectConfig effects;
    effects.delta = (Vector::Constant(oriented.size(), top) - oriented).cwiseMax(0.0);
    effects.delta(best) = 0.0;
    effects.delta_min = delta_min;
    effects.best_index = static_cast<std::size_t>(best);
    return effects;
}

EffectConfig materialize_effects(const CovarianceSpec& spec, const EffectConfig& effects) {
    effects.validate(spec.dim());
    if (!effects.standardized) return effects;
    const DiffScale scales = diff_scales(spec);
    EffectConfig out = effects;
    out.standardized = false;
    for (Eigen::Index i = 0; i < out.delta.size(); ++i) {
        out.delta(i) = effects.delta(i) * scales(static_cast<std::size_t>(i), effects.best_index);
    }
    return out;
}

std::vector<std::size_t> exclusion_indices(const EffectConfig& effects) {
    std::vector<std::size_t> out;
    for (Eigen::Index i = 0; i < effects.delta.size(); ++i) {
        if (effects.delta(i) >= effects.delta_min) out.push_back(static_cast<std::size_t>(i));
    }
    return out;
}

Matrix power_covariance(const CovarianceSpec& spec, const EffectConfig& effects) {
    const EffectConfig eff = materialize_effects(spec, effects);
    const auto excluded = exclusion_indices(eff);
    if (excluded.empty()) fail(Errc::empty_exclusion_set, "no regime is at least delta_min from the best");
    return difference_correlation(spec, diff_scales(spec), eff.best_index, excluded);
}

std::vector<std::string> warning_names(unsigned flags) {
    std::vector<std::string> out;
    if (has_warning(flags, Warning::nothing_to_exclude)) out.emplace_back("nothing_to_exclude");
    if (has_warning(flags, Warning::already_powered)) out.emplace_back("already_powered");
    if (has_warning(flags, Warning::covariance_semidefinite)) out.emplace_back("covariance_semidefinite");
    if (has_warning(flags, Warning::verification_rerun)) out.emplace_back("verification_rerun");
    return out;
}

PowerEvaluator::PowerEvaluator(const CovarianceSpec& spec, const EffectConfig& effects,
                               const CriticalValues& criticals, const MonteCarloConfig& cfg, Stream stream)
    : effects_(materialize_effects(spec, effects)), exclusion_(exclusion_indices(effects_)), cfg_(cfg) {
    cfg.validate();
    if (static_cast<std::size_t>(criticals.values.size()) != spec.dim()) {
        fail(Errc::dimension_mismatch, "critical values do not match the covariance dimension");
    }
    if (exclusion_.empty()) return;

    const DiffScale scales = diff_scales(spec);
    const auto m = static_cast<Eigen::Index>(exclusion_.size());
    offset_.resize(m);
    slope_.resize(m);
    for (Eigen::Index k = 0; k < m; ++k) {
        const std::size_t i = exclusion_[static_cast<std::size_t>(k)];
        offset_(k) = -criticals.values(static_cast<Eigen::Index>(i));
        slope_(k) = effects_.delta(static_cast<Eigen::Index>(i)) / scales(i, effects_.best_index);
    }
    const Matrix tilde = difference_correlation(spec, scales, effects_.best_index, exclusion_);
    draws_ = correlated_normals(sampling_factor(tilde, spec.psd_tolerance()), cfg.reps, cfg.seed, stream);
}

MonteCarloEstimate PowerEvaluator::at(std::uint64_t n) const {
    if (n == 0) fail(Errc::invalid_argument, "sample size must be at least 1");
    if (exclusion_.empty()) {
        MonteCarloEstimate est = binomial_estimate(cfg_.reps, cfg_.reps, cfg_.seed);
        return est;
    }
    const Vector threshold = offset_ + slope_ * std::sqrt(static_cast<double>(n));
    std::uint64_t hits = 0;
    const Eigen::Index cols = draws_.cols();
    for (Eigen::Index r = 0; r < draws_.rows(); ++r) {
        const double* w = draws_.data() + r * cols;
        bool all = true;
        for (Eigen::Index k = 0; k < cols && all; ++k) all = w[k] < threshold(k);
        hits += all ? 1 : 0;
    }
    return binomial_estimate(hits, cfg_.reps, cfg_.seed);
}

PowerResult compute_power(const CovarianceSpec& spec, const EffectConfig& effects, std::uint64_t n,
                          const CriticalValues& criticals, const MonteCarloConfig& cfg) {
    const PowerEvaluator evaluator(spec, effects, criticals, cfg);
    PowerResult result;
    result.estimate = evaluator.at(n);
    result.criticals = criticals;
    result.exclusion = evaluator.exclusion();
    result.delta = evaluator.effects().delta;
    if (result.exclusion.empty()) result.warnings = result.warnings | Warning::nothing_to_exclude;
    if (spec.semidefinite()) result.warnings = result.warnings | Warning::covariance_semidefinite;
    return result;
}

PowerResult compute_power(const CovarianceSpec& spec, const EffectConfig& effects, std::uint64_t n,
                          double alpha, const MonteCarloConfig& cfg) {
    effects.validate(spec.dim());
    return compute_power(spec, effects, n, critical_values(spec, alpha, cfg), cfg);
}

std::vector<CurvePoint> power_curve(const CovarianceSpec& spec, const EffectConfig& effects,
                                    const std::vector<std::uint64_t>& n_grid, double alpha,
                                    const MonteCarloConfig& cfg) {
    if (n_grid.empty()) fail(Errc::empty_input, "empty sample-size grid");
    for (std::size_t i = 0; i < n_grid.size(); ++i) {
        if (n_grid[i] == 0) fail(Errc::invalid_argument, "sample sizes must be at least 1");
        if (i && n_grid[i] < n_grid[i - 1]) fail(Errc::invalid_argument, "sample-size grid must be ascending");
    }
    effects.validate(spec.dim());
    const PowerEvaluator evaluator(spec, effects, critical_values(spec, alpha, cfg), cfg);
    std::vector<CurvePoint> curve;
    curve.reserve(n_grid.size());
    for (const auto n : n_grid) curve.push_back({n, evaluator.at(n)});
    return curve;
}

}  // namespace smartsizer
