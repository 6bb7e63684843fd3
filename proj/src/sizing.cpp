#include "smartsizer/sizing.hpp"

#include "smartsizer/error.hpp"

#include <cmath>

namespace smartsizer {

namespace {

void check_beta(double beta) {
    if (!(beta > 0.0 && beta < 0.5)) fail(Errc::beta_out_of_range, "beta must lie in (0, 0.5)");
}

struct QuantileStep {
    std::uint64_t n = 1;
    double c_star = 0.0;
    bool already_powered = false;
};

QuantileStep quantile_step(const SizingDistribution& dist, double beta, const MonteCarloConfig& cfg) {
    const Matrix factor = sampling_factor(dist.cov);
    std::vector<double> maxima(static_cast<std::size_t>(cfg.reps));
    for_each_normal_block(cfg.seed, Stream::sizing, cfg.reps, static_cast<std::size_t>(dist.mean.size()),
                          [&](std::uint64_t first, const RowMatrix& z) {
                              const RowMatrix x = z * factor.transpose();
                              for (Eigen::Index r = 0; r < x.rows(); ++r) {
                                  maxima[first + static_cast<std::uint64_t>(r)] =
                                      (x.row(r).transpose() + dist.mean).maxCoeff();
                              }
                          });
    QuantileStep step;
    step.c_star = empirical_quantile_inplace(maxima, 1.0 - beta);
    if (step.c_star <= 0.0) {
        step.already_powered = true;
        step.n = 1;
    } else {
        step.n = static_cast<std::uint64_t>(std::ceil(step.c_star * step.c_star));
    }
    return step;
}

}  // namespace

SizingDistribution sizing_distribution(const CovarianceSpec& spec, const EffectConfig& effects,
                                       const CriticalValues& criticals) {
    const EffectConfig eff = materialize_effects(spec, effects);
    SizingDistribution dist;
    dist.exclusion = exclusion_indices(eff);
    if (dist.exclusion.empty()) fail(Errc::empty_exclusion_set, "no regime is at least delta_min from the best");
    if (static_cast<std::size_t>(criticals.values.size()) != spec.dim()) {
        fail(Errc::dimension_mismatch, "critical values do not match the covariance dimension");
    }

    const DiffScale scales = diff_scales(spec);
    const std::size_t best = eff.best_index;
    const auto m = static_cast<Eigen::Index>(dist.exclusion.size());
    dist.mean.resize(m);
    dist.cov.resize(m, m);
    for (Eigen::Index a = 0; a < m; ++a) {
        const std::size_t i = dist.exclusion[static_cast<std::size_t>(a)];
        const double di = eff.delta(static_cast<Eigen::Index>(i));
        if (!(di > 0.0)) fail(Errc::zero_effect, "zero effect inside the exclusion set");
        dist.mean(a) = criticals.values(static_cast<Eigen::Index>(i)) * scales(i, best) / di;
        for (Eigen::Index b = 0; b <= a; ++b) {
            const std::size_t j = dist.exclusion[static_cast<std::size_t>(b)];
            const double dj = eff.delta(static_cast<Eigen::Index>(j));
            const double cov = spec(i, j) - spec(i, best) - spec(j, best) + spec(best, best);
            dist.cov(a, b) = dist.cov(b, a) = cov / (di * dj);
        }
    }
    return dist;
}

SizingResult sample_size(const CovarianceSpec& spec, const EffectConfig& effects, double alpha, double beta,
                         const MonteCarloConfig& cfg) {
    check_beta(beta);
    cfg.validate();
    effects.validate(spec.dim());
    const double target = 1.0 - beta;

    MonteCarloConfig run = cfg;
    unsigned warnings = spec.semidefinite() ? 0u | Warning::covariance_semidefinite : 0u;
    for (int attempt = 0; attempt < 2; ++attempt) {
        const CriticalValues criticals = critical_values(spec, alpha, run);
        const SizingDistribution dist = sizing_distribution(spec, effects, criticals);
        const QuantileStep step = quantile_step(dist, beta, run);

        const PowerEvaluator verifier(spec, effects, criticals, run, Stream::verification);
        SizingResult result;
        result.n = step.n;
        result.c_star = step.c_star;
        result.verified_power = verifier.at(step.n);
        result.mc = run;
        result.criticals = criticals;
        result.exclusion = dist.exclusion;
        result.delta = verifier.effects().delta;
        result.warnings = warnings;
        if (step.already_powered) result.warnings = result.warnings | Warning::already_powered;

        if (result.verified_power.value >= target - 3.0 * result.verified_power.mc_se) return result;
        warnings = warnings | Warning::verification_rerun;
        run.reps *= 2;
    }
    fail(Errc::numerical_failure, "verified power stayed below 1 - beta after doubling the repetitions");
}

SizingResult sample_size_bisection(const CovarianceSpec& spec, const EffectConfig& effects, double alpha,
                                   double beta, const MonteCarloConfig& cfg, std::uint64_t n_max) {
    check_beta(beta);
    if (n_max < 1) fail(Errc::invalid_argument, "n_max must be at least 1");
    effects.validate(spec.dim());
    const double target = 1.0 - beta;

    const CriticalValues criticals = critical_values(spec, alpha, cfg);
    const PowerEvaluator power(spec, effects, criticals, cfg, Stream::bisection);
    if (power.exclusion().empty()) fail(Errc::empty_exclusion_set, "no regime is at least delta_min from the best");

    SizingResult result;
    result.mc = cfg;
    result.criticals = criticals;
    result.exclusion = power.exclusion();
    result.delta = power.effects().delta;
    if (spec.semidefinite()) result.warnings = result.warnings | Warning::covariance_semidefinite;

    MonteCarloEstimate at_hi = power.at(n_max);
    if (at_hi.value < target) {
        fail(Errc::not_reached, "power " + std::to_string(at_hi.value) + " < " + std::to_string(target) +
                                    " at n_max = " + std::to_string(n_max));
    }
    MonteCarloEstimate at_one = power.at(1);
    if (at_one.value >= target) {
        result.n = 1;
        result.verified_power = at_one;
        result.warnings = result.warnings | Warning::already_powered;
        return result;
    }
    // Invariant: power(lo) < target <= power(hi).
    std::uint64_t lo = 1;
    std::uint64_t hi = n_max;
    while (hi - lo > 1) {
        const std::uint64_t mid = lo + (hi - lo) / 2;
        MonteCarloEstimate est = power.at(mid);
        if (est.value >= target) {
            hi = mid;
            at_hi = est;
        } else {
            lo = mid;
        }
    }
    result.n = hi;
    result.c_star = std::sqrt(static_cast<double>(hi));
    result.verified_power = at_hi;
    return result;
}

}  // namespace smartsizer
