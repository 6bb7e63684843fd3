#pragma once

// Frobenius-nearest exchangeable and block-exchangeable covariance matrices.

#include "smartsizer/mvncore.hpp"

#include <cstddef>

namespace smartsizer {

struct ExchangeableParams {
    double sigma2 = 0.0;  // common variance
    double rho = 0.0;     // common correlation
    double cov = 0.0;     // rho * sigma2, the value actually assembled
};

struct BlockExchangeableParams {
    std::size_t singleton = 0;  // 0-based index of the lone arm
    double sigma1w2 = 0.0;      // singleton variance
    double sigma2w2 = 0.0;      // common block variance
    double rho1 = 0.0;          // singleton-to-block correlation
    double rho2 = 0.0;          // within-block correlation
    double cov1 = 0.0;          // rho1 sigma1w sigma2w
    double cov2 = 0.0;          // rho2 sigma2w^2
};

/// The projected matrix is returned even when it is not positive definite;
/// `positive_definite` says whether it would validate.
template <class Params>
struct Projection {
    Params params;
    Matrix matrix;
    bool positive_definite = false;
    double distance = 0.0;  // Frobenius distance to the input
};

/// sigma2 = mean diagonal, rho sigma2 = mean off-diagonal. Needs N >= 2.
Projection<ExchangeableParams> project_exchangeable(const CovarianceSpec& spec);

/// One singleton arm, every other arm in one exchangeable block. Needs N >= 3.
Projection<BlockExchangeableParams> project_block_exchangeable(const CovarianceSpec& spec, std::size_t singleton);

Matrix exchangeable_matrix(std::size_t dim, double sigma2, double rho);
Matrix block_exchangeable_matrix(std::size_t dim, std::size_t singleton, double sigma1w2, double sigma2w2,
                                 double rho1, double rho2);

/// Errors: dimension_mismatch.
double frobenius_distance(const Matrix& a, const Matrix& b);

}  // namespace smartsizer
