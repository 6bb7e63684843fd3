#include "smartsizer/smartsizer.h"

#include "smartsizer/covproject.hpp"
#include "smartsizer/error.hpp"
#include "smartsizer/matrix_io.hpp"
#include "smartsizer/sizing.hpp"
#include "smartsizer/sweeps.hpp"
#include "smartsizer/trialsim.hpp"

#include <algorithm>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <new>
#include <stdexcept>
#include <string>

#ifndef SMARTSIZER_VERSION
#define SMARTSIZER_VERSION "0.0.0"
#endif

using namespace smartsizer;

struct ss_covariance {
    CovarianceSpec spec;
};

struct ss_effects {
    EffectConfig effects;
};

namespace {

thread_local std::string t_last_error;

struct BufferTooSmall : std::runtime_error {
    using std::runtime_error::runtime_error;
};

ss_status to_status(Errc code) { return static_cast<ss_status>(static_cast<int>(code) + 1); }

ss_status set_error(ss_status status, const std::string& message) {
    t_last_error = message;
    return status;
}

// Runs fn, translating exceptions into status codes.
template <class Fn>
ss_status guarded(Fn&& fn) {
    try {
        t_last_error.clear();
        fn();
        return SS_OK;
    } catch (const Error& e) {
        return set_error(to_status(e.code()), e.what());
    } catch (const BufferTooSmall& e) {
        return set_error(SS_ERR_BUFFER_TOO_SMALL, std::string("buffer_too_small: ") + e.what());
    } catch (const std::bad_alloc&) {
        return set_error(SS_ERR_INTERNAL, "internal: out of memory");
    } catch (const std::exception& e) {
        return set_error(SS_ERR_INTERNAL, std::string("internal: ") + e.what());
    }
}

void require(const void* p, const char* what) {
    if (p == nullptr) fail(Errc::invalid_argument, std::string(what) + " is null");
}

void check_capacity(std::size_t capacity, std::size_t needed) {
    if (capacity < needed) {
        throw BufferTooSmall("buffer holds " + std::to_string(capacity) + " values, " + std::to_string(needed) +
                             " needed");
    }
}

MonteCarloConfig mc_of(ss_mc_config mc) { return MonteCarloConfig{mc.reps, mc.seed}; }

ss_estimate estimate_of(const MonteCarloEstimate& e) { return ss_estimate{e.value, e.mc_se, e.reps, e.seed}; }

Vector copy_vector(const double* data, std::size_t n) {
    require(data, "vector");
    Vector v(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) v(static_cast<Eigen::Index>(i)) = data[i];
    return v;
}

void copy_matrix(const Matrix& m, double* out) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) out[i * m.cols() + j] = m(i, j);
    }
}

Matrix read_row_major(const double* data, std::size_t dim) {
    require(data, "matrix");
    Matrix m(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    for (std::size_t i = 0; i < dim; ++i) {
        for (std::size_t j = 0; j < dim; ++j) {
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = data[i * dim + j];
        }
    }
    return m;
}

void fill_size_report(const SizingResult& r, ss_size_report* report) {
    report->n = r.n;
    report->c_star = r.c_star;
    report->verified_power = estimate_of(r.verified_power);
    report->reps_used = r.mc.reps;
    report->warnings = r.warnings;
    report->exclusion_count = r.exclusion.size();
}

}  // namespace

extern "C" {

const char* ss_version(void) { return SMARTSIZER_VERSION; }

const char* ss_generator_name(void) { return kGeneratorName.data(); }

const char* ss_last_error(void) { return t_last_error.c_str(); }

const char* ss_status_name(ss_status status) {
    switch (status) {
        case SS_OK: return "ok";
        case SS_ERR_BUFFER_TOO_SMALL: return "buffer_too_small";
        case SS_ERR_INTERNAL: return "internal";
        default: break;
    }
    const int code = static_cast<int>(status) - 1;
    if (code >= 0 && code <= static_cast<int>(Errc::numerical_failure)) {
        return errc_name(static_cast<Errc>(code)).data();
    }
    return "unknown";
}

ss_mc_config ss_mc_default(void) { return ss_mc_config{kDefaultReps, kDefaultSeed}; }

ss_status ss_covariance_create(const double* row_major, size_t dim, double psd_tolerance, ss_covariance** out) {
    return guarded([&] {
        require(out, "out");
        ValidationOptions opt;
        if (psd_tolerance > 0.0) opt.psd_tolerance = psd_tolerance;
        *out = new ss_covariance{validate_covariance(read_row_major(row_major, dim), opt)};
    });
}

ss_status ss_covariance_load(const char* path, ss_covariance** out) {
    return guarded([&] {
        require(path, "path");
        require(out, "out");
        *out = new ss_covariance{validate_covariance(read_matrix_file(path))};
    });
}

ss_status ss_covariance_save(const ss_covariance* cov, const char* path) {
    return guarded([&] {
        require(cov, "covariance");
        require(path, "path");
        write_matrix_file(path, cov->spec.matrix());
    });
}

void ss_covariance_destroy(ss_covariance* cov) { delete cov; }

size_t ss_covariance_dim(const ss_covariance* cov) { return cov ? cov->spec.dim() : 0; }

int ss_covariance_semidefinite(const ss_covariance* cov) { return cov && cov->spec.semidefinite() ? 1 : 0; }

ss_status ss_covariance_entries(const ss_covariance* cov, double* out, size_t capacity) {
    return guarded([&] {
        require(cov, "covariance");
        require(out, "out");
        check_capacity(capacity, cov->spec.dim() * cov->spec.dim());
        copy_matrix(cov->spec.matrix(), out);
    });
}

ss_status ss_matrix_save(const double* row_major, size_t dim, const char* path) {
    return guarded([&] {
        require(path, "path");
        write_matrix_file(path, read_row_major(row_major, dim));
    });
}

ss_status ss_read_vector(const char* file_or_list, double* out, size_t capacity, size_t* length) {
    return guarded([&] {
        require(file_or_list, "input");
        require(length, "length");
        const Vector v = read_vector_arg(file_or_list);
        *length = static_cast<size_t>(v.size());
        if (out == nullptr) return;
        check_capacity(capacity, *length);
        for (Eigen::Index i = 0; i < v.size(); ++i) out[i] = v(i);
    });
}

ss_status ss_effects_from_delta(const double* delta, size_t dim, size_t best_index, double delta_min,
                                int standardized, ss_effects** out) {
    return guarded([&] {
        require(out, "out");
        EffectConfig e;
        e.delta = copy_vector(delta, dim);
        e.best_index = best_index;
        e.delta_min = delta_min;
        e.standardized = standardized != 0;
        e.validate(dim);
        *out = new ss_effects{e};
    });
}

ss_status ss_effects_from_theta(const double* theta, size_t dim, int lower_is_better, double delta_min,
                                ss_effects** out) {
    return guarded([&] {
        require(out, "out");
        const EffectConfig e = effects_from_theta(
            copy_vector(theta, dim), lower_is_better ? Direction::lower_is_better : Direction::higher_is_better,
            delta_min);
        e.validate(dim);
        *out = new ss_effects{e};
    });
}

void ss_effects_destroy(ss_effects* effects) { delete effects; }

size_t ss_effects_best_index(const ss_effects* effects) { return effects ? effects->effects.best_index : 0; }

double ss_effects_delta_min(const ss_effects* effects) { return effects ? effects->effects.delta_min : 0.0; }

ss_status ss_effects_delta(const ss_effects* effects, double* out, size_t capacity) {
    return guarded([&] {
        require(effects, "effects");
        require(out, "out");
        const Vector& d = effects->effects.delta;
        check_capacity(capacity, static_cast<std::size_t>(d.size()));
        for (Eigen::Index i = 0; i < d.size(); ++i) out[i] = d(i);
    });
}

ss_status ss_critical_values(const ss_covariance* cov, double alpha, ss_mc_config mc, double* out,
                             size_t capacity) {
    return guarded([&] {
        require(cov, "covariance");
        require(out, "out");
        check_capacity(capacity, cov->spec.dim());
        const CriticalValues cv = critical_values(cov->spec, alpha, mc_of(mc));
        for (Eigen::Index i = 0; i < cv.values.size(); ++i) out[i] = cv.values(i);
    });
}

ss_status ss_power(const ss_covariance* cov, const ss_effects* effects, uint64_t n, double alpha, ss_mc_config mc,
                   ss_power_report* report, double* critical_out, size_t* exclusion_out) {
    return guarded([&] {
        require(cov, "covariance");
        require(effects, "effects");
        require(report, "report");
        const PowerResult r = compute_power(cov->spec, effects->effects, n, alpha, mc_of(mc));
        report->estimate = estimate_of(r.estimate);
        report->warnings = r.warnings;
        report->exclusion_count = r.exclusion.size();
        if (critical_out) {
            for (Eigen::Index i = 0; i < r.criticals.values.size(); ++i) critical_out[i] = r.criticals.values(i);
        }
        if (exclusion_out) std::copy(r.exclusion.begin(), r.exclusion.end(), exclusion_out);
    });
}

ss_status ss_power_curve(const ss_covariance* cov, const ss_effects* effects, const uint64_t* n_grid, size_t count,
                         double alpha, ss_mc_config mc, ss_estimate* out) {
    return guarded([&] {
        require(cov, "covariance");
        require(effects, "effects");
        require(n_grid, "grid");
        require(out, "out");
        const std::vector<std::uint64_t> grid(n_grid, n_grid + count);
        const auto curve = power_curve(cov->spec, effects->effects, grid, alpha, mc_of(mc));
        for (std::size_t i = 0; i < curve.size(); ++i) out[i] = estimate_of(curve[i].estimate);
    });
}

ss_status ss_sample_size(const ss_covariance* cov, const ss_effects* effects, double alpha, double beta,
                         ss_mc_config mc, ss_size_report* report, double* critical_out, size_t* exclusion_out) {
    return guarded([&] {
        require(cov, "covariance");
        require(effects, "effects");
        require(report, "report");
        const SizingResult r = sample_size(cov->spec, effects->effects, alpha, beta, mc_of(mc));
        fill_size_report(r, report);
        if (critical_out) {
            for (Eigen::Index i = 0; i < r.criticals.values.size(); ++i) critical_out[i] = r.criticals.values(i);
        }
        if (exclusion_out) std::copy(r.exclusion.begin(), r.exclusion.end(), exclusion_out);
    });
}

ss_status ss_sample_size_bisection(const ss_covariance* cov, const ss_effects* effects, double alpha, double beta,
                                   ss_mc_config mc, uint64_t n_max, ss_size_report* report) {
    return guarded([&] {
        require(cov, "covariance");
        require(effects, "effects");
        require(report, "report");
        fill_size_report(sample_size_bisection(cov->spec, effects->effects, alpha, beta, mc_of(mc), n_max), report);
    });
}

ss_status ss_set_of_best(const ss_covariance* cov, const double* theta_hat, size_t dim, int lower_is_better,
                         uint64_t n, double alpha, ss_mc_config mc, int* member_flags, size_t* member_count) {
    return guarded([&] {
        require(cov, "covariance");
        require(member_flags, "member_flags");
        const Vector theta = orient(copy_vector(theta_hat, dim),
                                    lower_is_better ? Direction::lower_is_better : Direction::higher_is_better);
        const BestSet best = set_of_best(theta, cov->spec, n, critical_values(cov->spec, alpha, mc_of(mc)));
        for (std::size_t i = 0; i < dim; ++i) member_flags[i] = best.contains(i) ? 1 : 0;
        if (member_count) *member_count = best.members.size();
    });
}

ss_status ss_project(const ss_covariance* cov, ss_structure structure, size_t singleton, ss_projection* out,
                     double* matrix_out) {
    return guarded([&] {
        require(cov, "covariance");
        require(out, "out");
        *out = ss_projection{};
        Matrix m;
        if (structure == SS_EXCHANGEABLE) {
            const auto p = project_exchangeable(cov->spec);
            out->sigma2 = p.params.sigma2;
            out->rho = p.params.rho;
            out->positive_definite = p.positive_definite ? 1 : 0;
            out->distance = p.distance;
            m = p.matrix;
        } else if (structure == SS_BLOCK_EXCHANGEABLE) {
            const auto p = project_block_exchangeable(cov->spec, singleton);
            out->sigma1w2 = p.params.sigma1w2;
            out->sigma2w2 = p.params.sigma2w2;
            out->rho1 = p.params.rho1;
            out->rho2 = p.params.rho2;
            out->singleton = p.params.singleton;
            out->positive_definite = p.positive_definite ? 1 : 0;
            out->distance = p.distance;
            m = p.matrix;
        } else {
            fail(Errc::invalid_argument, "unknown structure");
        }
        if (matrix_out) copy_matrix(m, matrix_out);
    });
}

ss_status ss_frobenius_distance(const ss_covariance* a, const ss_covariance* b, double* out) {
    return guarded([&] {
        require(a, "a");
        require(b, "b");
        require(out, "out");
        *out = frobenius_distance(a->spec.matrix(), b->spec.matrix());
    });
}

ss_trial_config ss_trial_default(int design) {
    const EmpiricalPowerConfig d;
    ss_trial_config c{};
    c.design = design;
    c.n = 0;
    c.reps = d.reps;
    c.alpha = d.alpha;
    c.delta_min = d.delta_min;
    c.delta = d.delta;
    c.method = SS_AIPW;
    c.seed = d.seed;
    c.critical_reps = d.critical_reps;
    return c;
}

ss_status ss_empirical_power(const ss_trial_config* config, ss_empirical_report* report, size_t* exclusion_out) {
    return guarded([&] {
        require(config, "config");
        require(report, "report");
        EmpiricalPowerConfig c;
        c.design = config->design;
        c.n = config->n;
        c.reps = config->reps;
        c.alpha = config->alpha;
        c.delta_min = config->delta_min;
        c.delta = config->delta;
        c.method = config->method == SS_IPW ? Method::ipw : Method::aipw;
        c.seed = config->seed;
        c.critical_reps = config->critical_reps;
        const EmpiricalPowerResult r = empirical_power(c);
        report->estimate = estimate_of(r.estimate);
        report->bound_rate = r.bound_rate;
        report->requested = r.requested;
        report->usable = r.usable;
        report->singular = r.singular;
        report->not_psd = r.not_psd;
        report->best_index = r.best_index;
        report->exclusion_count = r.exclusion.size();
        if (exclusion_out) std::copy(r.exclusion.begin(), r.exclusion.end(), exclusion_out);
    });
}

ss_status ss_design_dim(int design, size_t* dim) {
    return guarded([&] {
        require(dim, "dim");
        *dim = msm_spec(design).regime_count();
    });
}

ss_status ss_design_theta(int design, double delta, double* out, size_t capacity) {
    return guarded([&] {
        require(out, "out");
        const Vector t = true_theta(design, delta);
        check_capacity(capacity, static_cast<std::size_t>(t.size()));
        for (Eigen::Index i = 0; i < t.size(); ++i) out[i] = t(i);
    });
}

ss_status ss_estimate_sigma(int design, uint64_t n, uint64_t reps, ss_method method, double delta, uint64_t seed,
                            double* sigma_out, double* theta_out, size_t dim, uint64_t* used) {
    return guarded([&] {
        require(sigma_out, "sigma_out");
        const std::size_t k = msm_spec(design).regime_count();
        if (dim != k) fail(Errc::dimension_mismatch, "design " + std::to_string(design) + " has " +
                                                         std::to_string(k) + " regimes");
        const SigmaEstimate est =
            estimate_sigma(design, n, reps, method == SS_IPW ? Method::ipw : Method::aipw, delta, seed);
        copy_matrix(est.sigma, sigma_out);
        if (theta_out) {
            for (Eigen::Index i = 0; i < est.theta.size(); ++i) theta_out[i] = est.theta(i);
        }
        if (used) *used = est.reps;
    });
}

ss_status ss_trial_export_csv(int design, uint64_t n, double delta, uint64_t seed, const char* path) {
    return guarded([&] {
        require(path, "path");
        std::ofstream os(path);
        if (!os) fail(Errc::io_error, std::string("cannot open ") + path);
        write_trial_csv(os, generate_trial(design, n, delta, seed));
        if (!os) fail(Errc::io_error, std::string("write failed: ") + path);
    });
}

ss_status ss_sweep_run(const char* json_spec, const char* base_dir, char** csv_out) {
    return guarded([&] {
        require(json_spec, "spec");
        require(csv_out, "csv_out");
        const SweepSpec spec = parse_sweep_spec(json_spec, base_dir ? base_dir : ".");
        const std::string csv = sweep_csv(run_sweep(spec));
        char* buf = static_cast<char*>(std::malloc(csv.size() + 1));
        if (!buf) throw std::bad_alloc();
        std::memcpy(buf, csv.c_str(), csv.size() + 1);
        *csv_out = buf;
    });
}

ss_status ss_sweep_delta_min(const ss_covariance* cov, const ss_effects* effects, const double* grid, size_t count,
                             double alpha, uint64_t n, ss_mc_config mc, ss_estimate* out) {
    return guarded([&] {
        require(cov, "covariance");
        require(effects, "effects");
        require(grid, "grid");
        require(out, "out");
        const SweepTable t =
            sweep_delta_min(cov->spec, effects->effects, std::vector<double>(grid, grid + count), alpha, n, mc_of(mc));
        for (std::size_t i = 0; i < t.rows.size(); ++i) out[i] = estimate_of(t.rows[i].estimate);
    });
}

ss_status ss_sweep_uniform_delta(const ss_covariance* cov, const double* grid, size_t count, double alpha,
                                 uint64_t n, ss_mc_config mc, size_t best_index, ss_estimate* out) {
    return guarded([&] {
        require(cov, "covariance");
        require(grid, "grid");
        require(out, "out");
        const SweepTable t = sweep_uniform_delta(cov->spec, std::vector<double>(grid, grid + count), alpha, n,
                                                 mc_of(mc), best_index);
        for (std::size_t i = 0; i < t.rows.size(); ++i) out[i] = estimate_of(t.rows[i].estimate);
    });
}

void ss_string_free(char* s) { std::free(s); }

}  // extern "C"
