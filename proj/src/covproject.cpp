#include "smartsizer/covproject.hpp"

#include "smartsizer/error.hpp"

#include <cmath>
#include <vector>

namespace smartsizer {

namespace {

// Mean taken relative to the first value so that a constant input comes back
// bit for bit; projections are then exact fixed points.
class ShiftedMean {
public:
    void add(double x) {
        if (count_ == 0) first_ = x;
        sum_ += x - first_;
        ++count_;
    }
    double value() const { return first_ + sum_ / static_cast<double>(count_); }

private:
    double first_ = 0.0;
    double sum_ = 0.0;
    std::size_t count_ = 0;
};

bool is_positive_definite(const Matrix& m) {
    Matrix lower;
    std::size_t pivot = 0;
    return try_cholesky(m, lower, pivot);
}

}  // namespace

Matrix exchangeable_matrix(std::size_t dim, double sigma2, double rho) {
    const auto n = static_cast<Eigen::Index>(dim);
    Matrix m = Matrix::Constant(n, n, rho * sigma2);
    m.diagonal().setConstant(sigma2);
    return m;
}

Matrix block_exchangeable_matrix(std::size_t dim, std::size_t singleton, double sigma1w2, double sigma2w2,
                                 double rho1, double rho2) {
    if (singleton >= dim) fail(Errc::invalid_argument, "singleton index out of range");
    const auto n = static_cast<Eigen::Index>(dim);
    const auto s = static_cast<Eigen::Index>(singleton);
    Matrix m = Matrix::Constant(n, n, rho2 * sigma2w2);
    m.diagonal().setConstant(sigma2w2);
    const double cross = rho1 * std::sqrt(sigma1w2 * sigma2w2);
    m.row(s).setConstant(cross);
    m.col(s).setConstant(cross);
    m(s, s) = sigma1w2;
    return m;
}

double frobenius_distance(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        fail(Errc::dimension_mismatch, "matrices differ in shape");
    }
    return (a - b).norm();
}

Projection<ExchangeableParams> project_exchangeable(const CovarianceSpec& spec) {
    const auto n = static_cast<Eigen::Index>(spec.dim());
    if (n < 2) fail(Errc::invalid_argument, "exchangeable projection needs at least 2 arms");
    const Matrix& s = spec.matrix();
    ShiftedMean diag;
    ShiftedMean off;
    for (Eigen::Index i = 0; i < n; ++i) {
        diag.add(s(i, i));
        for (Eigen::Index j = 0; j < n; ++j) {
            if (j != i) off.add(s(i, j));
        }
    }

    Projection<ExchangeableParams> out;
    out.params.sigma2 = diag.value();
    out.params.cov = off.value();
    out.params.rho = out.params.cov / out.params.sigma2;
    out.matrix = Matrix::Constant(n, n, out.params.cov);
    out.matrix.diagonal().setConstant(out.params.sigma2);
    out.positive_definite = is_positive_definite(out.matrix);
    out.distance = frobenius_distance(s, out.matrix);
    return out;
}

Projection<BlockExchangeableParams> project_block_exchangeable(const CovarianceSpec& spec, std::size_t singleton) {
    const std::size_t dim = spec.dim();
    if (dim < 3) fail(Errc::invalid_argument, "block-exchangeable projection needs at least 3 arms");
    if (singleton >= dim) fail(Errc::invalid_argument, "singleton index out of range");
    std::vector<std::size_t> block;
    for (std::size_t j = 0; j < dim; ++j) {
        if (j != singleton) block.push_back(j);
    }

    ShiftedMean diag;
    ShiftedMean cross;
    ShiftedMean within;
    for (const auto i : block) {
        diag.add(spec(i, i));
        cross.add(spec(singleton, i));
        for (const auto j : block) {
            if (j != i) within.add(spec(i, j));
        }
    }

    Projection<BlockExchangeableParams> out;
    auto& p = out.params;
    p.singleton = singleton;
    p.sigma1w2 = spec(singleton, singleton);
    p.sigma2w2 = diag.value();
    p.cov1 = cross.value();
    p.cov2 = within.value();
    p.rho1 = p.cov1 / std::sqrt(p.sigma1w2 * p.sigma2w2);
    p.rho2 = p.cov2 / p.sigma2w2;

    const auto n = static_cast<Eigen::Index>(dim);
    const auto s = static_cast<Eigen::Index>(singleton);
    out.matrix = Matrix::Constant(n, n, p.cov2);
    out.matrix.diagonal().setConstant(p.sigma2w2);
    out.matrix.row(s).setConstant(p.cov1);
    out.matrix.col(s).setConstant(p.cov1);
    out.matrix(s, s) = p.sigma1w2;
    out.positive_definite = is_positive_definite(out.matrix);
    out.distance = frobenius_distance(spec.matrix(), out.matrix);
    return out;
}

}  // namespace smartsizer
