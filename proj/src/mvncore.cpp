#include "smartsizer/mvncore.hpp"

#include "smartsizer/error.hpp"

#include <boost/random/mersenne_twister.hpp>
#include <boost/random/normal_distribution.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>

namespace smartsizer {

namespace {

thread_local bool t_inside_parallel = false;

std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

}  // namespace

CovarianceSpec validate_covariance(const Matrix& matrix, const ValidationOptions& options) {
    if (matrix.rows() != matrix.cols()) {
        fail(Errc::not_square, "matrix is " + std::to_string(matrix.rows()) + "x" +
                                   std::to_string(matrix.cols()));
    }
    if (matrix.rows() < 2) fail(Errc::invalid_argument, "covariance dimension must be at least 2");
    if (!matrix.allFinite()) fail(Errc::invalid_argument, "matrix has non-finite entries");

    const double max_abs = matrix.cwiseAbs().maxCoeff();
    const double asymmetry = (matrix - matrix.transpose()).cwiseAbs().maxCoeff();
    if (asymmetry > kSymmetryTolerance * max_abs) {
        fail(Errc::not_symmetric, "max |a_ij - a_ji| = " + std::to_string(asymmetry));
    }

    CovarianceSpec spec;
    spec.m_ = 0.5 * (matrix + matrix.transpose());
    spec.psd_tolerance_ = options.psd_tolerance;

    Matrix lower;
    std::size_t pivot = 0;
    if (try_cholesky(spec.m_, lower, pivot)) return spec;

    Eigen::SelfAdjointEigenSolver<Matrix> eig(spec.m_, Eigen::EigenvaluesOnly);
    const double lo = eig.eigenvalues().minCoeff();
    const double hi = eig.eigenvalues().maxCoeff();
    if (hi > 0.0 && lo >= -options.psd_tolerance * hi) {
        spec.semidefinite_ = true;
        spec.min_eigenvalue_ = lo;
        return spec;
    }
    fail(Errc::not_positive_definite,
         "Cholesky pivot " + std::to_string(pivot) + " is not positive (min eigenvalue " +
             std::to_string(lo) + ")");
}

bool try_cholesky(const Matrix& a, Matrix& lower, std::size_t& failed_pivot) {
    const Eigen::Index n = a.rows();
    lower = Matrix::Zero(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        double d = a(j, j);
        for (Eigen::Index k = 0; k < j; ++k) d -= lower(j, k) * lower(j, k);
        if (!(d > 0.0)) {
            failed_pivot = static_cast<std::size_t>(j);
            return false;
        }
        const double root = std::sqrt(d);
        lower(j, j) = root;
        for (Eigen::Index i = j + 1; i < n; ++i) {
            double s = a(i, j);
            for (Eigen::Index k = 0; k < j; ++k) s -= lower(i, k) * lower(j, k);
            lower(i, j) = s / root;
        }
    }
    return true;
}

Matrix cholesky(const CovarianceSpec& spec) {
    Matrix lower;
    std::size_t pivot = 0;
    if (spec.semidefinite() || !try_cholesky(spec.matrix(), lower, pivot)) {
        fail(Errc::not_positive_definite,
             "covariance is only semidefinite (Cholesky pivot " + std::to_string(pivot) + ")");
    }
    return lower;
}

Matrix sampling_factor(const Matrix& a, double psd_tolerance) {
    Matrix lower;
    std::size_t pivot = 0;
    if (try_cholesky(a, lower, pivot)) return lower;

    Eigen::SelfAdjointEigenSolver<Matrix> eig(a);
    const Vector& values = eig.eigenvalues();
    const double hi = values.maxCoeff();
    if (!(hi > 0.0) || values.minCoeff() < -psd_tolerance * hi) {
        fail(Errc::not_positive_definite,
             "matrix is not positive semidefinite (min eigenvalue " +
                 std::to_string(values.minCoeff()) + ")");
    }
    return eig.eigenvectors() * values.cwiseMax(0.0).cwiseSqrt().asDiagonal();
}

void MonteCarloConfig::validate() const {
    if (reps < kMinReps) {
        fail(Errc::invalid_argument,
             "Monte Carlo repetitions must be at least " + std::to_string(kMinReps));
    }
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) noexcept {
    return splitmix64(splitmix64(splitmix64(seed) ^ a) ^ (b * 0xd1b54a32d192ed03ULL));
}

std::size_t thread_count() {
    if (const char* env = std::getenv("SMARTSIZER_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && v >= 1) return static_cast<std::size_t>(v);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn) {
    const std::size_t workers = std::min(thread_count(), count);
    if (workers <= 1 || t_inside_parallel) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }

    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto work = [&] {
        t_inside_parallel = true;
        for (std::size_t i = next++; i < count; i = next++) {
            try {
                fn(i);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
                next = count;
            }
        }
        t_inside_parallel = false;
    };

    std::vector<std::thread> pool;
    pool.reserve(workers - 1);
    for (std::size_t t = 1; t < workers; ++t) pool.emplace_back(work);
    work();
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

void for_each_normal_block(std::uint64_t seed, Stream stream, std::uint64_t rows, std::size_t cols,
                           const std::function<void(std::uint64_t, const RowMatrix&)>& fn) {
    const std::uint64_t blocks = (rows + kBlockRows - 1) / kBlockRows;
    parallel_for(static_cast<std::size_t>(blocks), [&](std::size_t b) {
        const std::uint64_t first = b * kBlockRows;
        const auto n = static_cast<Eigen::Index>(std::min<std::uint64_t>(kBlockRows, rows - first));
        boost::random::mt19937_64 engine(
            derive_seed(seed, static_cast<std::uint64_t>(stream), static_cast<std::uint64_t>(b)));
        boost::random::normal_distribution<double> normal;
        RowMatrix z(n, static_cast<Eigen::Index>(cols));
        double* p = z.data();
        for (Eigen::Index k = 0; k < z.size(); ++k) p[k] = normal(engine);
        fn(first, z);
    });
}

RowMatrix correlated_normals(const Matrix& factor, std::uint64_t reps, std::uint64_t seed, Stream stream) {
    const auto dim = static_cast<std::size_t>(factor.rows());
    RowMatrix out(static_cast<Eigen::Index>(reps), factor.rows());
    for_each_normal_block(seed, stream, reps, dim, [&](std::uint64_t first, const RowMatrix& z) {
        out.middleRows(static_cast<Eigen::Index>(first), z.rows()).noalias() = z * factor.transpose();
    });
    return out;
}

MvnSample sample_mvn(const CovarianceSpec& spec, const MonteCarloConfig& cfg) {
    cfg.validate();
    MvnSample sample;
    sample.draws = correlated_normals(sampling_factor(spec.matrix(), spec.psd_tolerance()), cfg.reps,
                                      cfg.seed, Stream::sample);
    sample.seed = cfg.seed;
    sample.reps = cfg.reps;
    return sample;
}

std::size_t order_statistic_rank(std::size_t m, double p) {
    const double x = static_cast<double>(m) * p;
    double k = std::ceil(x);
    // m * p that lands a hair above an integer through rounding of p.
    if (k - x > 1.0 - 1e-9) k -= 1.0;
    return static_cast<std::size_t>(std::clamp(k, 1.0, static_cast<double>(m)));
}

double empirical_quantile_inplace(std::vector<double>& values, double p) {
    if (values.empty()) fail(Errc::empty_input, "quantile of an empty list");
    if (!(p > 0.0 && p < 1.0)) fail(Errc::probability_out_of_range, "p must lie in (0, 1)");
    const std::size_t k = order_statistic_rank(values.size(), p) - 1;
    std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(k), values.end());
    return values[k];
}

double empirical_quantile(std::span<const double> values, double p) {
    std::vector<double> copy(values.begin(), values.end());
    return empirical_quantile_inplace(copy, p);
}

MonteCarloEstimate binomial_estimate(std::uint64_t successes, std::uint64_t reps, std::uint64_t seed) {
    MonteCarloEstimate est;
    est.reps = reps;
    est.seed = seed;
    est.value = reps ? static_cast<double>(successes) / static_cast<double>(reps) : 0.0;
    est.mc_se = reps ? std::sqrt(est.value * (1.0 - est.value) / static_cast<double>(reps)) : 0.0;
    return est;
}

}  // namespace smartsizer
