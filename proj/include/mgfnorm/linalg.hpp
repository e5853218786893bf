#pragma once

#include <limits>
#include <utility>

#include <Eigen/Dense>

#include "mgfnorm/common.hpp"

namespace mgfnorm {

/**
 * @brief An n x d data matrix, rows = observations.
 *
 * Requires n >= d + 1 (needed for the sample covariance to be invertible
 * with probability one) and finite entries. Both are checked on
 * construction.
 */
struct Sample {
    Matrix data;

    Sample() = default;
    explicit Sample(Matrix m) : data(std::move(m)) {
        if (n() < d() + 1) {
            throw std::invalid_argument("Sample: need n >= d + 1, got n=" +
                                        std::to_string(n()) + ", d=" + std::to_string(d()));
        }
        if (!data.allFinite()) {
            throw std::invalid_argument("Sample: non-finite entries");
        }
    }

    [[nodiscard]] Index n() const { return data.rows(); }
    [[nodiscard]] Index d() const { return data.cols(); }
};

/// Symmetric positive definite d x d matrix (sample covariance, its inverse
/// square root, ...). Construction does not re-verify positive definiteness;
/// the factories that produce these do.
struct SymmetricPD {
    Matrix m;
};

enum class ResidualSource {
    IidStandardized,  ///< Y_j = S^{-1/2} (X_j - mean), empirically standardized
    GarchResidual,    ///< volatility-model residuals, used as-is
};

/**
 * @brief Empirically standardized observations (or volatility-model
 * residuals sharing the same numeric pipeline).
 *
 * In the i.i.d. case the rows sum to zero and have sample covariance
 * (divisor n) equal to the identity by construction.
 */
struct ScaledResiduals {
    Matrix y;
    ResidualSource source = ResidualSource::IidStandardized;

    [[nodiscard]] Index n() const { return y.rows(); }
    [[nodiscard]] Index d() const { return y.cols(); }
};

namespace detail {

inline void check_not_singular(const Vector& eigenvalues, Index d) {
    const double max_ev = eigenvalues.maxCoeff();
    const double thresh =
        static_cast<double>(d) * std::numeric_limits<double>::epsilon() * max_ev;
    if (!(eigenvalues.minCoeff() > thresh)) {
        throw SingularCovariance("covariance matrix is numerically singular (min "
                                 "eigenvalue " +
                                 std::to_string(eigenvalues.minCoeff()) + ")");
    }
}

}  // namespace detail

/**
 * @brief Sample mean and sample covariance with divisor n.
 *
 * Note the divisor: cov = (1/n) sum (x_j - mean)(x_j - mean)^T, not the
 * bias-corrected 1/(n-1) that most libraries default to. Everything
 * downstream (scaled residuals, critical-value tables) assumes the
 * divisor-n convention.
 *
 * @throws SingularCovariance if the covariance has an eigenvalue at or below
 *         d * machine-eps * (largest eigenvalue).
 */
inline std::pair<Vector, SymmetricPD> sample_mean_cov(const Sample& s) {
    const Index n = s.n();
    const Vector mean = s.data.colwise().mean().transpose();
    Matrix centered = s.data.rowwise() - mean.transpose();
    Matrix cov = (centered.adjoint() * centered) / static_cast<double>(n);
    cov = ((cov + cov.transpose()) / 2.0).eval();  // enforce exact symmetry

    Eigen::SelfAdjointEigenSolver<Matrix> es(cov, Eigen::EigenvaluesOnly);
    detail::check_not_singular(es.eigenvalues(), s.d());
    return {mean, SymmetricPD{std::move(cov)}};
}

/**
 * @brief Inverse of the unique symmetric square root of an SPD matrix.
 *
 * Computed from the symmetric eigendecomposition m = V diag(l) V^T as
 * V diag(l^{-1/2}) V^T. The result R is symmetric and satisfies
 * R * m * R = I to ~1e-10. A Cholesky factor would not do here: the scaled
 * residuals are defined with the *symmetric* root.
 *
 * @throws SingularCovariance on a numerically singular input.
 */
inline SymmetricPD sym_inv_sqrt(const SymmetricPD& spd) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(spd.m);
    const Vector& ev = es.eigenvalues();
    detail::check_not_singular(ev, spd.m.rows());
    const Vector inv_sqrt = ev.array().rsqrt().matrix();
    Matrix r = es.eigenvectors() * inv_sqrt.asDiagonal() * es.eigenvectors().transpose();
    r = ((r + r.transpose()) / 2.0).eval();
    return SymmetricPD{std::move(r)};
}

/// Symmetric square root (same eigendecomposition route as sym_inv_sqrt).
inline SymmetricPD sym_sqrt(const SymmetricPD& spd) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(spd.m);
    const Vector& ev = es.eigenvalues();
    detail::check_not_singular(ev, spd.m.rows());
    const Vector sqrt_ev = ev.array().sqrt().matrix();
    Matrix r = es.eigenvectors() * sqrt_ev.asDiagonal() * es.eigenvectors().transpose();
    r = ((r + r.transpose()) / 2.0).eval();
    return SymmetricPD{std::move(r)};
}

/**
 * @brief Scaled residuals Y_j = S_n^{-1/2} (X_j - mean).
 *
 * Output rows sum to zero and have sample covariance (divisor n) equal to
 * I_d up to rounding. The Gram matrix {Y_i^T Y_j} is invariant under
 * full-rank affine transformations of the input, which is what makes every
 * statistic built on it affine invariant.
 */
inline ScaledResiduals scale_residuals(const Sample& s) {
    auto [mean, cov] = sample_mean_cov(s);
    const SymmetricPD root = sym_inv_sqrt(cov);
    Matrix y = (s.data.rowwise() - mean.transpose()) * root.m;  // root is symmetric
    return ScaledResiduals{std::move(y), ResidualSource::IidStandardized};
}

}  // namespace mgfnorm
