#pragma once

// Covariance validation, factorization, seeded multivariate normal draws and
// empirical quantiles. Everything random in the library is drawn through
// for_each_normal_block so that results depend only on (seed, stream, shape).

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace smartsizer {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline constexpr std::string_view kGeneratorName = "mt19937_64+boost-ziggurat";
inline constexpr double kSymmetryTolerance = 1e-12;
/// Smallest eigenvalue allowed, relative to the largest, for a matrix that
/// fails Cholesky to still be accepted as positive semidefinite.
inline constexpr double kDefaultPsdTolerance = 1e-4;
inline constexpr std::uint64_t kMinReps = 1000;
inline constexpr std::uint64_t kDefaultReps = 1'000'000;
inline constexpr std::uint64_t kDefaultSeed = 20190527;

struct ValidationOptions {
    double psd_tolerance = kDefaultPsdTolerance;
};

/// A validated symmetric covariance matrix of sqrt(n) * theta_hat.
///
/// Instances are positive definite, or positive semidefinite within the
/// validation tolerance. The latter happens for SMART designs with more
/// embedded regimes than marginal-model parameters, where Sigma = D V D' is
/// rank deficient and published entries are rounded.
class CovarianceSpec {
public:
    std::size_t dim() const noexcept { return static_cast<std::size_t>(m_.rows()); }
    const Matrix& matrix() const noexcept { return m_; }
    double operator()(std::size_t i, std::size_t j) const {
        return m_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
    /// True when Cholesky failed and the matrix was accepted as PSD.
    bool semidefinite() const noexcept { return semidefinite_; }
    /// Smallest eigenvalue; only computed for semidefinite inputs (0 otherwise).
    double min_eigenvalue() const noexcept { return min_eigenvalue_; }
    double psd_tolerance() const noexcept { return psd_tolerance_; }

private:
    friend CovarianceSpec validate_covariance(const Matrix&, const ValidationOptions&);
    Matrix m_;
    bool semidefinite_ = false;
    double min_eigenvalue_ = 0.0;
    double psd_tolerance_ = kDefaultPsdTolerance;
};

/// Errors: not_square, not_symmetric, not_positive_definite (with pivot index).
CovarianceSpec validate_covariance(const Matrix& matrix, const ValidationOptions& options = {});

/// Lower-triangular L with L L' = Sigma. Throws not_positive_definite for
/// semidefinite specs.
Matrix cholesky(const CovarianceSpec& spec);

/// Plain Cholesky. Returns false and sets failed_pivot (0-based) when a pivot
/// is not strictly positive.
bool try_cholesky(const Matrix& a, Matrix& lower, std::size_t& failed_pivot);

/// Square-root factor F with F F' = A for a PSD matrix. Uses Cholesky when it
/// succeeds, otherwise a symmetric eigendecomposition with eigenvalues below
/// zero (within psd_tolerance * max eigenvalue) set to zero.
Matrix sampling_factor(const Matrix& a, double psd_tolerance = kDefaultPsdTolerance);

struct MonteCarloConfig {
    std::uint64_t reps = kDefaultReps;
    std::uint64_t seed = kDefaultSeed;

    /// Throws invalid_argument when reps < kMinReps.
    void validate() const;
};

/// Independent sub-streams derived from one master seed. Each Monte Carlo
/// consumer draws from its own stream, so two computations that use the same
/// seed share common random numbers.
enum class Stream : std::uint64_t {
    critical = 1,
    power = 2,
    sizing = 3,
    verification = 4,
    bisection = 5,
    sample = 6,
    trial = 7,
    calibration = 8,
};

inline constexpr std::size_t kBlockRows = 8192;

/// Mixes (seed, a, b) into a fresh 64-bit seed (splitmix64 finalizer).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) noexcept;

/// Generates rows x cols standard normals in blocks of kBlockRows rows and
/// hands each block to fn(first_row, block). Blocks may run concurrently; the
/// values are a pure function of (seed, stream, cols, block index).
void for_each_normal_block(std::uint64_t seed, Stream stream, std::uint64_t rows, std::size_t cols,
                           const std::function<void(std::uint64_t, const RowMatrix&)>& fn);

/// Worker count: SMARTSIZER_THREADS if set, otherwise hardware concurrency.
std::size_t thread_count();

/// Runs fn(i) for i in [0, count) across thread_count() workers. Nested calls
/// run serially on the calling worker.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn);

struct MvnSample {
    RowMatrix draws;  // reps x N
    std::uint64_t seed = 0;
    std::uint64_t reps = 0;
};

MvnSample sample_mvn(const CovarianceSpec& spec, const MonteCarloConfig& cfg);

/// Draws with an explicit factor (rows of the result are F z).
RowMatrix correlated_normals(const Matrix& factor, std::uint64_t reps, std::uint64_t seed, Stream stream);

/// 1-based rank ceil(m * p), clamped to [1, m].
std::size_t order_statistic_rank(std::size_t m, double p);

/// The ceil(m p)-th smallest value. Errors: empty_input, probability_out_of_range.
double empirical_quantile(std::span<const double> values, double p);
/// Same, reordering values in place instead of copying.
double empirical_quantile_inplace(std::vector<double>& values, double p);

struct MonteCarloEstimate {
    double value = 0.0;
    double mc_se = 0.0;
    std::uint64_t reps = 0;
    std::uint64_t seed = 0;
    std::string generator{kGeneratorName};
};

MonteCarloEstimate binomial_estimate(std::uint64_t successes, std::uint64_t reps, std::uint64_t seed);

}  // namespace smartsizer
