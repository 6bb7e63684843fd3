#include "smartsizer/mcb.hpp"

#include "smartsizer/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace smartsizer {

namespace {

void check_alpha(double alpha) {
    if (!(alpha > 0.0 && alpha <= 0.5)) fail(Errc::alpha_out_of_range, "alpha must lie in (0, 0.5]");
}

std::vector<std::size_t> all_but(std::size_t n, std::size_t skip) {
    std::vector<std::size_t> out;
    out.reserve(n - 1);
    for (std::size_t j = 0; j < n; ++j) {
        if (j != skip) out.push_back(j);
    }
    return out;
}

}  // namespace

Vector orient(const Vector& theta, Direction direction) {
    return direction == Direction::lower_is_better ? Vector(-theta) : theta;
}

DiffScale diff_scales(const CovarianceSpec& spec) {
    const auto n = static_cast<Eigen::Index>(spec.dim());
    const Matrix& s = spec.matrix();
    DiffScale out{Matrix::Zero(n, n)};
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double v = s(i, i) + s(j, j) - 2.0 * s(i, j);
            const double r = std::sqrt(std::max(v, 0.0));
            if (r < kDegenerateScale) {
                fail(Errc::degenerate_pair, "theta_" + std::to_string(i + 1) + " - theta_" +
                                                std::to_string(j + 1) + " has zero variance");
            }
            out.root_n(i, j) = out.root_n(j, i) = r;
        }
    }
    return out;
}

Matrix difference_correlation(const CovarianceSpec& spec, const DiffScale& scales, std::size_t ref,
                              const std::vector<std::size_t>& others) {
    const auto m = static_cast<Eigen::Index>(others.size());
    Matrix c(m, m);
    for (Eigen::Index a = 0; a < m; ++a) {
        for (Eigen::Index b = a; b < m; ++b) {
            const std::size_t j = others[static_cast<std::size_t>(a)];
            const std::size_t k = others[static_cast<std::size_t>(b)];
            const double cov = spec(j, k) - spec(j, ref) - spec(k, ref) + spec(ref, ref);
            c(a, b) = c(b, a) = (a == b) ? 1.0 : cov / (scales(j, ref) * scales(k, ref));
        }
    }
    return c;
}

CriticalValues critical_values(const CovarianceSpec& spec, double alpha, const MonteCarloConfig& cfg) {
    check_alpha(alpha);
    cfg.validate();
    const std::size_t n_arms = spec.dim();
    const DiffScale scales = diff_scales(spec);

    std::vector<Matrix> factors;
    factors.reserve(n_arms);
    for (std::size_t i = 0; i < n_arms; ++i) {
        factors.push_back(sampling_factor(difference_correlation(spec, scales, i, all_but(n_arms, i)),
                                          spec.psd_tolerance()));
    }

    const auto reps = static_cast<std::size_t>(cfg.reps);
    std::vector<std::vector<double>> maxima(n_arms, std::vector<double>(reps));
    for_each_normal_block(cfg.seed, Stream::critical, cfg.reps, n_arms - 1,
                          [&](std::uint64_t first, const RowMatrix& z) {
                              for (std::size_t i = 0; i < n_arms; ++i) {
                                  const RowMatrix d = z * factors[i].transpose();
                                  double* out = maxima[i].data() + first;
                                  for (Eigen::Index r = 0; r < d.rows(); ++r) out[r] = d.row(r).maxCoeff();
                              }
                          });

    CriticalValues cv;
    cv.alpha = alpha;
    cv.mc = cfg;
    cv.values.resize(static_cast<Eigen::Index>(n_arms));
    parallel_for(n_arms, [&](std::size_t i) {
        cv.values(static_cast<Eigen::Index>(i)) = empirical_quantile_inplace(maxima[i], 1.0 - alpha);
    });
    return cv;
}

CriticalValues critical_values(const CovarianceSpec& spec, double alpha, const MvnSample& shared) {
    check_alpha(alpha);
    const std::size_t n_arms = spec.dim();
    if (static_cast<std::size_t>(shared.draws.cols()) != n_arms) {
        fail(Errc::dimension_mismatch, "sample has " + std::to_string(shared.draws.cols()) +
                                           " columns for a " + std::to_string(n_arms) + "-arm covariance");
    }
    if (shared.draws.rows() == 0) fail(Errc::empty_input, "empty sample");
    const DiffScale scales = diff_scales(spec);
    const auto reps = static_cast<std::size_t>(shared.draws.rows());

    CriticalValues cv;
    cv.alpha = alpha;
    cv.mc = MonteCarloConfig{shared.reps, shared.seed};
    cv.values.resize(static_cast<Eigen::Index>(n_arms));
    parallel_for(n_arms, [&](std::size_t i) {
        std::vector<double> maxima(reps, -std::numeric_limits<double>::infinity());
        const auto ii = static_cast<Eigen::Index>(i);
        for (std::size_t r = 0; r < reps; ++r) {
            const auto row = shared.draws.row(static_cast<Eigen::Index>(r));
            for (Eigen::Index j = 0; j < shared.draws.cols(); ++j) {
                if (j == ii) continue;
                maxima[r] = std::max(maxima[r], (row(j) - row(ii)) / scales.root_n(ii, j));
            }
        }
        cv.values(ii) = empirical_quantile_inplace(maxima, 1.0 - alpha);
    });
    return cv;
}

bool BestSet::contains(std::size_t i) const {
    return std::binary_search(members.begin(), members.end(), i);
}

BestSet set_of_best(const Vector& theta_hat, const CovarianceSpec& spec, std::uint64_t n,
                    const CriticalValues& criticals) {
    const auto dim = static_cast<Eigen::Index>(spec.dim());
    if (theta_hat.size() != dim || criticals.values.size() != dim) {
        fail(Errc::dimension_mismatch, "theta_hat, Sigma and critical values must have the same length");
    }
    if (n == 0) fail(Errc::invalid_argument, "sample size must be at least 1");
    const DiffScale scales = diff_scales(spec);
    const double root_n = std::sqrt(static_cast<double>(n));

    BestSet best;
    best.theta_hat = theta_hat;
    best.criticals = criticals;
    best.n = n;
    Eigen::Index top = 0;
    theta_hat.maxCoeff(&top);
    for (Eigen::Index i = 0; i < dim; ++i) {
        double bound = -std::numeric_limits<double>::infinity();
        for (Eigen::Index j = 0; j < dim; ++j) {
            if (j == i) continue;
            bound = std::max(bound, theta_hat(j) - criticals.values(i) * scales.root_n(i, j) / root_n);
        }
        if (theta_hat(i) >= bound || i == top) best.members.push_back(static_cast<std::size_t>(i));
    }
    return best;
}

}  // namespace smartsizer
