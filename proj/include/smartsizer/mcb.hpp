#pragma once

// Multiple comparisons with the best: per-regime critical values and the set
// of regimes statistically indistinguishable from the best.

#include "smartsizer/mvncore.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

namespace smartsizer {

inline constexpr double kDegenerateScale = 1e-10;

enum class Direction { higher_is_better, lower_is_better };

/// Flips estimates so that larger is better.
Vector orient(const Vector& theta, Direction direction);

/// Pairwise sd of sqrt(n) (theta_i - theta_j): sqrt(S_ii + S_jj - 2 S_ij).
struct DiffScale {
    Matrix root_n;  // N x N, zero diagonal

    double operator()(std::size_t i, std::size_t j) const {
        return root_n(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
};

/// Errors: degenerate_pair when an off-diagonal scale is below kDegenerateScale.
DiffScale diff_scales(const CovarianceSpec& spec);

struct CriticalValues {
    double alpha = 0.05;
    Vector values;  // c_{i,alpha}, one per regime
    MonteCarloConfig mc;
};

/// c_i is the (1 - alpha) empirical quantile of max_{j != i} (Z_j - Z_i) / sigma_ij
/// with Z ~ N(0, Sigma).
///
/// For each i the standardized differences are drawn directly from their own
/// correlation matrix, all i sharing one base matrix of standard normals
/// (Stream::critical). The draws depend only on the correlations of the
/// differences, so c is exactly invariant under Sigma -> k Sigma and equal
/// across all exchangeable Sigma of a given dimension.
///
/// Errors: alpha_out_of_range (alpha must lie in (0, 0.5]), degenerate_pair.
CriticalValues critical_values(const CovarianceSpec& spec, double alpha, const MonteCarloConfig& cfg);

/// Same quantity evaluated on caller-supplied draws Z ~ N(0, Sigma), one row
/// per draw. Useful for common random numbers across calls.
CriticalValues critical_values(const CovarianceSpec& spec, double alpha, const MvnSample& shared);

/// Correlation matrix of ((Z_j - Z_ref) / sigma_{j,ref})_{j in others}.
Matrix difference_correlation(const CovarianceSpec& spec, const DiffScale& scales, std::size_t ref,
                              const std::vector<std::size_t>& others);

struct BestSet {
    std::vector<std::size_t> members;  // 0-based, ascending
    Vector theta_hat;                  // oriented so larger is better
    CriticalValues criticals;
    std::uint64_t n = 0;

    bool contains(std::size_t i) const;
};

/// EDTR_i is kept iff theta_i >= max_{j != i} [theta_j - c_i sigma_ij / sqrt(n)].
/// theta_hat must already be oriented (larger is better).
///
/// Errors: dimension_mismatch, invalid_argument (n == 0), degenerate_pair.
BestSet set_of_best(const Vector& theta_hat, const CovarianceSpec& spec, std::uint64_t n,
                    const CriticalValues& criticals);

}  // namespace smartsizer
