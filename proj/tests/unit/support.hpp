#pragma once

#include "smartsizer/matrix_io.hpp"
#include "smartsizer/mvncore.hpp"

#include <random>
#include <string>

namespace testsupport {

inline std::string fixture(const std::string& rel) { return std::string(SMARTSIZER_FIXTURE_DIR) + "/" + rel; }

inline smartsizer::CovarianceSpec load_spec(const std::string& rel) {
    return smartsizer::validate_covariance(smartsizer::read_matrix_file(fixture(rel)));
}

inline smartsizer::Vector load_vector(const std::string& rel) {
    return smartsizer::read_vector_arg(fixture(rel));
}

/// Random PD matrix: A A' / dim plus a ridge, with uneven scales.
inline smartsizer::Matrix random_pd(std::size_t dim, std::mt19937_64& rng) {
    std::normal_distribution<double> z;
    std::uniform_real_distribution<double> scale(0.5, 2.0);
    smartsizer::Matrix a(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        const double s = scale(rng);
        for (Eigen::Index j = 0; j < a.cols(); ++j) a(i, j) = s * z(rng);
    }
    smartsizer::Matrix m = a * a.transpose() / static_cast<double>(dim);
    m.diagonal().array() += 0.1;
    return 0.5 * (m + m.transpose());
}

}  // namespace testsupport
