#include "smartsizer/trialsim.hpp"

#include "smartsizer/error.hpp"

#include <boost/math/constants/constants.hpp>
#include <boost/random/bernoulli_distribution.hpp>
#include <boost/random/mersenne_twister.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_int_distribution.hpp>

#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <ostream>

namespace smartsizer {

namespace {

constexpr double kDesign1Delta = 0.25;
constexpr double kDesign2Delta = 2.0;

struct Draw {
    double o11, o12;
    int a1;
    double e21, e22;
    int a2_binary;
    int a2_four;
    double ey;
};

class RecordSource {
public:
    explicit RecordSource(std::uint64_t seed) : eng_(seed) {}
    Draw next() {
        Draw d{};
        d.o11 = normal_(eng_);
        d.o12 = normal_(eng_);
        d.a1 = coin_(eng_) ? 1 : -1;
        d.e21 = normal_(eng_);
        d.e22 = normal_(eng_);
        d.a2_binary = coin_(eng_) ? 1 : -1;
        d.a2_four = four_(eng_);
        d.ey = normal_(eng_);
        return d;
    }

private:
    boost::random::mt19937_64 eng_;
    boost::random::normal_distribution<double> normal_;
    boost::random::bernoulli_distribution<double> coin_{0.5};
    boost::random::uniform_int_distribution<int> four_{1, 4};
};

double resolve_delta(int design, double delta) {
    if (delta >= 0.0) return delta;
    return design == 1 ? kDesign1Delta : kDesign2Delta;
}

// Stage-2 outcome regressors evaluated at treatment path (a1, a2).
Vector stage2_row(int design, const TrialRecord& r, int a1, int a2) {
    const double nr = r.responder ? 0.0 : 1.0;
    if (design == 1) {
        Vector x(8);
        x << 1.0, r.o11, r.o12, r.o21, r.o22, a1, a1 * r.o11, nr * a2;
        return x;
    }
    const double low = a1 == -1 ? 1.0 : 0.0;
    const double rr = nr * low;
    Vector x(11);
    x << 1.0, r.o11, r.o12, r.o21, r.o22, low, low * r.o11, rr * (a2 == 1), rr * (a2 == 2), rr * (a2 == 3),
        rr * r.o21 * (a2 == 2);
    return x;
}

Vector least_squares(const Matrix& x, const Vector& y, const char* what) {
    const Eigen::ColPivHouseholderQR<Matrix> qr(x);
    if (qr.rank() < x.cols()) fail(Errc::singular_system, std::string("rank-deficient ") + what);
    return qr.solve(y);
}

Vector solve_square(const Matrix& a, const Vector& b, const char* what) {
    const Eigen::FullPivLU<Matrix> lu(a);
    if (lu.rank() < a.cols()) fail(Errc::singular_system, std::string("singular ") + what);
    return lu.solve(b);
}

Matrix inverse(const Matrix& a, const char* what) {
    const Eigen::FullPivLU<Matrix> lu(a);
    if (lu.rank() < a.cols()) fail(Errc::singular_system, std::string("singular ") + what);
    return lu.inverse();
}

void check_data(const TrialData& data) {
    if (data.empty()) fail(Errc::empty_input, "empty trial dataset");
}

struct ConditionalMeans {
    Matrix mu2;
    Matrix mu1;
};

ConditionalMeans fit_conditional_means(const TrialData& data, const MsmSpec& msm, const AipwOptions& options) {
    const auto n = static_cast<Eigen::Index>(data.size());
    const auto k_count = static_cast<Eigen::Index>(msm.regime_count());

    Vector noise;
    if (options.model == OutcomeModel::noise_regressor) {
        noise.resize(n);
        for_each_normal_block(options.noise_seed, Stream::calibration, static_cast<std::uint64_t>(n), 1,
                              [&](std::uint64_t first, const RowMatrix& z) {
                                  noise.segment(static_cast<Eigen::Index>(first), z.rows()) = z.col(0);
                              });
    }
    auto row = [&](Eigen::Index i, int a1, int a2) -> Vector {
        if (options.model == OutcomeModel::intercept_only) return Vector::Ones(1);
        Vector x = stage2_row(msm.design, data[static_cast<std::size_t>(i)], a1, a2);
        if (options.model == OutcomeModel::noise_regressor) {
            x.conservativeResize(x.size() + 1);
            x(x.size() - 1) = noise(i);
        }
        return x;
    };

    const auto p = row(0, data[0].a1, data[0].a2).size();
    Matrix x(n, p);
    Vector y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& r = data[static_cast<std::size_t>(i)];
        x.row(i) = row(i, r.a1, r.a2).transpose();
        y(i) = r.y;
    }
    const Vector gamma = least_squares(x, y, "stage-2 outcome regression");

    ConditionalMeans cm{Matrix(n, k_count), Matrix(n, k_count)};
    for (Eigen::Index k = 0; k < k_count; ++k) {
        const Regime& reg = msm.regimes[static_cast<std::size_t>(k)];
        for (Eigen::Index i = 0; i < n; ++i) cm.mu2(i, k) = row(i, reg.a1, reg.a2).dot(gamma);

        // Stage-1 mean: regress the stage-2 prediction on baseline covariates
        // among records that received the regime's first-stage treatment.
        std::vector<Eigen::Index> rows;
        for (Eigen::Index i = 0; i < n; ++i) {
            if (data[static_cast<std::size_t>(i)].a1 == reg.a1) rows.push_back(i);
        }
        const bool intercept_only = options.model == OutcomeModel::intercept_only;
        const Eigen::Index q = intercept_only ? 1 : 3;
        Matrix z(static_cast<Eigen::Index>(rows.size()), q);
        Vector target(static_cast<Eigen::Index>(rows.size()));
        for (std::size_t a = 0; a < rows.size(); ++a) {
            const auto& r = data[static_cast<std::size_t>(rows[a])];
            const auto ai = static_cast<Eigen::Index>(a);
            z(ai, 0) = 1.0;
            if (!intercept_only) {
                z(ai, 1) = r.o11;
                z(ai, 2) = r.o12;
            }
            target(ai) = cm.mu2(rows[a], k);
        }
        const Vector h = least_squares(z, target, "stage-1 outcome regression");
        for (Eigen::Index i = 0; i < n; ++i) {
            const auto& r = data[static_cast<std::size_t>(i)];
            cm.mu1(i, k) = intercept_only ? h(0) : h(0) + h(1) * r.o11 + h(2) * r.o12;
        }
    }
    return cm;
}

// Per-record score contributions and the Jacobian of the stacked equation.
struct Scores {
    Matrix u;      // n x p
    Matrix gamma;  // p x p
};

Matrix finish_sandwich(const MsmSpec& msm, const Scores& s) {
    const double n = static_cast<double>(s.u.rows());
    const Matrix lambda = s.u.transpose() * s.u / n;
    const Matrix g_inv = inverse(s.gamma, "Jacobian in the sandwich variance");
    const Matrix v = g_inv * lambda * g_inv.transpose();
    const Matrix sigma = msm.d * v * msm.d.transpose();
    return 0.5 * (sigma + sigma.transpose());
}

Scores ipw_scores(const TrialData& data, const MsmSpec& msm, const Vector& beta) {
    const auto n = static_cast<Eigen::Index>(data.size());
    const auto p = static_cast<Eigen::Index>(msm.param_count());
    Scores s{Matrix::Zero(n, p), Matrix::Zero(p, p)};
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& r = data[static_cast<std::size_t>(i)];
        for (std::size_t k = 0; k < msm.regime_count(); ++k) {
            const double w = weight_stage2(msm, r, k);
            if (w == 0.0) continue;
            const auto dk = msm.d.row(static_cast<Eigen::Index>(k));
            s.u.row(i) += w * (r.y - dk.dot(beta)) * dk;
            s.gamma -= w * dk.transpose() * dk;
        }
    }
    s.gamma /= static_cast<double>(n);
    return s;
}

Matrix pseudo_outcomes(const TrialData& data, const MsmSpec& msm, const Matrix& mu2, const Matrix& mu1) {
    const auto n = static_cast<Eigen::Index>(data.size());
    const auto k_count = static_cast<Eigen::Index>(msm.regime_count());
    if (mu2.rows() != n || mu1.rows() != n || mu2.cols() != k_count || mu1.cols() != k_count) {
        fail(Errc::dimension_mismatch, "conditional means must be n x K");
    }
    Matrix psi(n, k_count);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& r = data[static_cast<std::size_t>(i)];
        for (Eigen::Index k = 0; k < k_count; ++k) {
            const double w2 = weight_stage2(msm, r, static_cast<std::size_t>(k));
            const double w1 = weight_stage1(msm, r, static_cast<std::size_t>(k));
            psi(i, k) = w2 * r.y - (w2 - w1) * mu2(i, k) - (w1 - 1.0) * mu1(i, k);
        }
    }
    return psi;
}

Scores aipw_scores(const MsmSpec& msm, const Matrix& psi, const Vector& beta) {
    const Vector fitted = msm.d * beta;
    const Matrix resid = psi.rowwise() - fitted.transpose();
    return Scores{resid * msm.d, -(msm.d.transpose() * msm.d)};
}

EstimationResult aipw_from_psi(const MsmSpec& msm, const Matrix& psi) {
    const Vector mean_psi = psi.colwise().mean().transpose();
    EstimationResult res;
    res.method = Method::aipw;
    res.n = static_cast<std::uint64_t>(psi.rows());
    res.beta = solve_square(msm.d.transpose() * msm.d, msm.d.transpose() * mean_psi, "AIPW normal equations");
    res.theta = msm.d * res.beta;
    res.sigma = finish_sandwich(msm, aipw_scores(msm, psi, res.beta));
    return res;
}

}  // namespace

const char* method_name(Method m) { return m == Method::ipw ? "ipw" : "aipw"; }

Method parse_method(const std::string& name) {
    if (name == "ipw") return Method::ipw;
    if (name == "aipw") return Method::aipw;
    fail(Errc::invalid_argument, "unknown estimation method '" + name + "'");
}

MsmSpec msm_spec(int design) {
    MsmSpec m;
    m.design = design;
    if (design == 1) {
        m.regimes = {{1, 1}, {-1, 1}, {1, -1}, {-1, -1}};
        m.d.resize(4, 3);
        m.d << 1, 1, 1,
               1, -1, 1,
               1, 1, -1,
               1, -1, -1;
        m.p2 = 0.5;
        m.default_delta = kDesign1Delta;
    } else if (design == 2) {
        m.regimes = {{1, 0}, {-1, 4}, {-1, 1}, {-1, 2}, {-1, 3}};
        m.d.resize(5, 5);
        m.d << 1, 0, 0, 0, 0,
               1, 1, 0, 0, 0,
               1, 1, 1, 0, 0,
               1, 1, 0, 1, 0,
               1, 1, 0, 0, 1;
        m.p2 = 0.25;
        m.default_delta = kDesign2Delta;
    } else {
        fail(Errc::invalid_argument, "design must be 1 or 2");
    }
    return m;
}

double nonresponder_o21_mean() {
    // O21 ~ N(0, 1.25) marginally; E[X | X <= 0] = -sd * sqrt(2 / pi).
    return -std::sqrt(1.25) * std::sqrt(2.0 / boost::math::constants::pi<double>());
}

Vector true_beta(int design, double delta) {
    const MsmSpec msm = msm_spec(design);
    const double d = resolve_delta(design, delta);
    Vector b(msm.d.cols());
    if (design == 1) {
        b << 1.0, d, d / 4.0;
    } else {
        b << 1.0, d, -d / 8.0, d / 4.0, 0.0;
    }
    return b;
}

Vector true_theta(int design, double delta) { return msm_spec(design).d * true_beta(design, delta); }

TrialData generate_design1(std::uint64_t n, double delta, std::uint64_t seed) {
    if (n < 1) fail(Errc::invalid_argument, "trial size must be at least 1");
    RecordSource src(seed);
    TrialData data(static_cast<std::size_t>(n));
    for (auto& r : data) {
        const Draw d = src.next();
        r.o11 = d.o11;
        r.o12 = d.o12;
        r.a1 = d.a1;
        r.o21 = 0.5 * d.o11 + d.e21;
        r.o22 = 0.5 * d.o12 + d.e22;
        r.responder = r.o21 > 0.0;
        r.a2 = r.responder ? 0 : d.a2_binary;
        const double nr = r.responder ? 0.0 : 1.0;
        const double mean = 1.0 + r.o11 - r.o12 + r.o22 + r.o21 + r.a1 * (delta + r.o11 / 2.0) +
                            nr * r.a2 * delta / 2.0;
        r.y = mean + d.ey;
    }
    return data;
}

TrialData generate_design2(std::uint64_t n, double delta, std::uint64_t seed) {
    if (n < 1) fail(Errc::invalid_argument, "trial size must be at least 1");
    const double mu = nonresponder_o21_mean();
    RecordSource src(seed);
    TrialData data(static_cast<std::size_t>(n));
    for (auto& r : data) {
        const Draw d = src.next();
        r.o11 = d.o11;
        r.o12 = d.o12;
        r.a1 = d.a1;
        r.o21 = 0.5 * d.o11 + d.e21;
        r.o22 = 0.5 * d.o12 + d.e22;
        r.responder = r.o21 > 0.0;
        const bool rerandomized = r.a1 == -1 && !r.responder;
        r.a2 = rerandomized ? d.a2_four : 0;
        double mean = 1.0 + r.o11 - r.o12 + r.o21 + r.o22 + (r.a1 == -1 ? delta + r.o11 : 0.0);
        if (rerandomized) {
            if (r.a2 == 1) mean += -delta / 4.0;
            if (r.a2 == 2) mean += delta / 2.0 + delta / 2.0 * (r.o21 - mu);
        }
        r.y = mean + d.ey;
    }
    return data;
}

TrialData generate_trial(int design, std::uint64_t n, double delta, std::uint64_t seed) {
    const double d = resolve_delta(design, delta);
    if (design == 1) return generate_design1(n, d, seed);
    if (design == 2) return generate_design2(n, d, seed);
    fail(Errc::invalid_argument, "design must be 1 or 2");
}

bool consistent(const MsmSpec& msm, const TrialRecord& r, std::size_t k) {
    const Regime& reg = msm.regimes.at(k);
    return r.a1 == reg.a1 && (!r.has_a2() || r.a2 == reg.a2);
}

double weight_stage1(const MsmSpec& msm, const TrialRecord& r, std::size_t k) {
    return r.a1 == msm.regimes.at(k).a1 ? 1.0 / msm.p1 : 0.0;
}

double weight_stage2(const MsmSpec& msm, const TrialRecord& r, std::size_t k) {
    if (!consistent(msm, r, k)) return 0.0;
    return 1.0 / (msm.p1 * (r.has_a2() ? msm.p2 : 1.0));
}

EstimationResult fit_ipw(const TrialData& data, const MsmSpec& msm) {
    check_data(data);
    const auto p = static_cast<Eigen::Index>(msm.param_count());
    Matrix g = Matrix::Zero(p, p);
    Vector rhs = Vector::Zero(p);
    for (std::size_t k = 0; k < msm.regime_count(); ++k) {
        double wsum = 0.0;
        double wy = 0.0;
        for (const auto& r : data) {
            const double w = weight_stage2(msm, r, k);
            wsum += w;
            wy += w * r.y;
        }
        const auto dk = msm.d.row(static_cast<Eigen::Index>(k));
        g += wsum * dk.transpose() * dk;
        rhs += wy * dk.transpose();
    }
    EstimationResult res;
    res.method = Method::ipw;
    res.n = data.size();
    res.beta = solve_square(g, rhs, "IPW normal equations");
    res.theta = msm.d * res.beta;
    res.sigma = finish_sandwich(msm, ipw_scores(data, msm, res.beta));
    return res;
}

EstimationResult fit_aipw(const TrialData& data, const MsmSpec& msm, const Matrix& mu2, const Matrix& mu1) {
    check_data(data);
    return aipw_from_psi(msm, pseudo_outcomes(data, msm, mu2, mu1));
}

EstimationResult fit_aipw(const TrialData& data, const MsmSpec& msm, const AipwOptions& options) {
    check_data(data);
    const ConditionalMeans cm = fit_conditional_means(data, msm, options);
    return aipw_from_psi(msm, pseudo_outcomes(data, msm, cm.mu2, cm.mu1));
}

Matrix sandwich_variance(const TrialData& data, const MsmSpec& msm, const EstimationResult& result,
                         const AipwOptions& options) {
    check_data(data);
    if (result.method == Method::ipw) return finish_sandwich(msm, ipw_scores(data, msm, result.beta));
    const ConditionalMeans cm = fit_conditional_means(data, msm, options);
    return finish_sandwich(msm, aipw_scores(msm, pseudo_outcomes(data, msm, cm.mu2, cm.mu1), result.beta));
}

EstimationResult fit(const TrialData& data, const MsmSpec& msm, Method method, const AipwOptions& options) {
    return method == Method::ipw ? fit_ipw(data, msm) : fit_aipw(data, msm, options);
}

EmpiricalPowerResult empirical_power(const EmpiricalPowerConfig& cfg) {
    if (cfg.reps < 1) fail(Errc::invalid_argument, "reps must be at least 1");
    if (cfg.n < 1) fail(Errc::invalid_argument, "trial size must be at least 1");
    if (!(cfg.delta_min > 0.0)) fail(Errc::invalid_argument, "delta_min must be positive");
    if (!(cfg.alpha > 0.0 && cfg.alpha <= 0.5)) fail(Errc::alpha_out_of_range, "alpha must lie in (0, 0.5]");
    const MsmSpec msm = msm_spec(cfg.design);
    const double delta = resolve_delta(cfg.design, cfg.delta);
    const Vector truth = true_theta(cfg.design, delta);

    EmpiricalPowerResult out;
    out.requested = cfg.reps;
    Eigen::Index best = 0;
    truth.maxCoeff(&best);
    out.best_index = static_cast<std::size_t>(best);
    for (Eigen::Index i = 0; i < truth.size(); ++i) {
        if (truth(best) - truth(i) >= cfg.delta_min) out.exclusion.push_back(static_cast<std::size_t>(i));
    }

    enum Outcome : int { fail_fit, fail_psd, miss, hit };
    std::vector<int> outcome(static_cast<std::size_t>(cfg.reps), fail_fit);
    std::vector<char> bound(static_cast<std::size_t>(cfg.reps), 0);
    const double root_n = std::sqrt(static_cast<double>(cfg.n));
    parallel_for(static_cast<std::size_t>(cfg.reps), [&](std::size_t rep) {
        const std::uint64_t seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(Stream::trial), rep);
        const TrialData data = generate_trial(cfg.design, cfg.n, delta, seed);
        EstimationResult res;
        try {
            res = fit(data, msm, cfg.method);
        } catch (const Error& e) {
            if (e.code() != Errc::singular_system) throw;
            outcome[rep] = fail_fit;
            return;
        }
        try {
            const CovarianceSpec spec = validate_covariance(res.sigma);
            const CriticalValues cv = critical_values(spec, cfg.alpha, MonteCarloConfig{cfg.critical_reps, seed});
            const BestSet set = set_of_best(res.theta, spec, cfg.n, cv);
            bool all_out = true;
            bool all_below = true;
            const DiffScale scales = diff_scales(spec);
            for (const auto i : out.exclusion) {
                all_out = all_out && !set.contains(i);
                const auto ii = static_cast<Eigen::Index>(i);
                all_below = all_below && res.theta(ii) < res.theta(best) - cv.values(ii) *
                                                                             scales(i, out.best_index) / root_n;
            }
            outcome[rep] = all_out ? hit : miss;
            bound[rep] = all_below ? 1 : 0;
        } catch (const Error& e) {
            if (e.code() != Errc::not_positive_definite && e.code() != Errc::degenerate_pair &&
                e.code() != Errc::not_symmetric) {
                throw;
            }
            outcome[rep] = fail_psd;
        }
    });

    std::uint64_t hits = 0;
    std::uint64_t bound_hits = 0;
    for (std::size_t r = 0; r < outcome.size(); ++r) {
        switch (outcome[r]) {
            case fail_fit: ++out.singular; break;
            case fail_psd: ++out.not_psd; break;
            default:
                ++out.usable;
                hits += outcome[r] == hit ? 1 : 0;
                bound_hits += bound[r] ? 1 : 0;
        }
    }
    if (out.usable > 0) {
        out.estimate = binomial_estimate(hits, out.usable, cfg.seed);
        out.bound_rate = static_cast<double>(bound_hits) / static_cast<double>(out.usable);
    } else {
        out.estimate = MonteCarloEstimate{std::numeric_limits<double>::quiet_NaN(), 0.0, 0, cfg.seed};
    }
    return out;
}

SigmaEstimate estimate_sigma(int design, std::uint64_t n, std::uint64_t reps, Method method, double delta,
                             std::uint64_t seed) {
    if (reps < 1) fail(Errc::invalid_argument, "reps must be at least 1");
    const MsmSpec msm = msm_spec(design);
    const double d = resolve_delta(design, delta);
    const auto k = static_cast<Eigen::Index>(msm.regime_count());

    std::vector<Matrix> sigmas(static_cast<std::size_t>(reps));
    std::vector<Vector> thetas(static_cast<std::size_t>(reps));
    std::vector<char> ok(static_cast<std::size_t>(reps), 0);
    parallel_for(static_cast<std::size_t>(reps), [&](std::size_t rep) {
        const std::uint64_t s = derive_seed(seed, static_cast<std::uint64_t>(Stream::calibration), rep);
        try {
            const EstimationResult res = fit(generate_trial(design, n, d, s), msm, method);
            sigmas[rep] = res.sigma;
            thetas[rep] = res.theta;
            ok[rep] = 1;
        } catch (const Error& e) {
            if (e.code() != Errc::singular_system) throw;
        }
    });

    SigmaEstimate out{Matrix::Zero(k, k), Vector::Zero(k), 0, n, 0};
    for (std::size_t r = 0; r < sigmas.size(); ++r) {
        if (!ok[r]) {
            ++out.singular;
            continue;
        }
        out.sigma += sigmas[r];
        out.theta += thetas[r];
        ++out.reps;
    }
    if (out.reps == 0) fail(Errc::numerical_failure, "every replicate was singular");
    out.sigma /= static_cast<double>(out.reps);
    out.theta /= static_cast<double>(out.reps);
    return out;
}

void write_trial_csv(std::ostream& os, const TrialData& data) {
    const auto old = os.precision(17);
    os << "id,o11,o12,a1,o21,o22,responder,a2,y\n";
    for (std::size_t i = 0; i < data.size(); ++i) {
        const auto& r = data[i];
        os << i + 1 << ',' << r.o11 << ',' << r.o12 << ',' << r.a1 << ',' << r.o21 << ',' << r.o22 << ','
           << (r.responder ? 1 : 0) << ',';
        if (r.has_a2()) {
            os << r.a2;
        } else {
            os << "NA";
        }
        os << ',' << r.y << '\n';
    }
    os.precision(old);
}

}  // namespace smartsizer
