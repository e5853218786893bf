#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "mgfnorm/alternatives.hpp"
#include "mgfnorm/common.hpp"
#include "mgfnorm/linalg.hpp"
#include "mgfnorm/montecarlo.hpp"
#include "mgfnorm/optimizer.hpp"
#include "mgfnorm/parallel.hpp"
#include "mgfnorm/rng.hpp"
#include "mgfnorm/statistic.hpp"

namespace mgfnorm {

/// Model orders of a constant-conditional-correlation GARCH(p, q).
struct GarchSpec {
    int d = 1;
    int p = 1;  ///< ARCH order (lags of squared observations)
    int q = 1;  ///< GARCH order (lags of conditional variance)

    void validate() const {
        if (d < 1 || p < 1 || q < 0) {
            throw std::invalid_argument("GarchSpec: need d >= 1, p >= 1, q >= 0");
        }
    }

    /// Free parameters: d intercepts, (p+q) d^2 lag matrices, d(d-1)/2
    /// correlations.
    [[nodiscard]] int param_count() const {
        return d + (p + q) * d * d + d * (d - 1) / 2;
    }
};

/**
 * @brief CCC-GARCH parameters.
 *
 * Volatility recursion (componentwise, (2) = Hadamard square):
 *   sigma^2_j = b + sum_k B_k X^{(2)}_{j-k} + sum_k Gamma_k sigma^2_{j-k},
 * conditional covariance Sigma_j = D_j R D_j with D_j = diag(sigma_j).
 * b has positive entries, B_k / Gamma_k nonnegative entries, R is a
 * correlation matrix.
 */
struct GarchParams {
    Vector b;
    std::vector<Matrix> B;
    std::vector<Matrix> Gamma;
    Matrix R;

    [[nodiscard]] int d() const { return static_cast<int>(b.size()); }

    void validate() const {
        const Index dim = b.size();
        if (dim < 1) throw std::invalid_argument("GarchParams: empty intercept");
        if ((b.array() <= 0.0).any()) {
            throw std::invalid_argument("GarchParams: intercepts must be positive");
        }
        for (const auto& m : B) {
            if (m.rows() != dim || m.cols() != dim || (m.array() < 0.0).any()) {
                throw std::invalid_argument("GarchParams: bad ARCH matrix");
            }
        }
        for (const auto& m : Gamma) {
            if (m.rows() != dim || m.cols() != dim || (m.array() < 0.0).any()) {
                throw std::invalid_argument("GarchParams: bad GARCH matrix");
            }
        }
        if (R.rows() != dim || R.cols() != dim) {
            throw std::invalid_argument("GarchParams: bad correlation matrix");
        }
        for (Index i = 0; i < dim; ++i) {
            if (std::abs(R(i, i) - 1.0) > 1e-12) {
                throw std::invalid_argument("GarchParams: R must have unit diagonal");
            }
        }
        Eigen::SelfAdjointEigenSolver<Matrix> es(R, Eigen::EigenvaluesOnly);
        if (es.eigenvalues().minCoeff() <= 0.0) {
            throw std::invalid_argument("GarchParams: R must be positive definite");
        }
    }

    /// Spectral radius of sum_k B_k + sum_k Gamma_k; below 1 is the usual
    /// sufficient stationarity screen (advisory, not enforced).
    [[nodiscard]] double stationarity_proxy() const {
        Matrix total = Matrix::Zero(b.size(), b.size());
        for (const auto& m : B) total += m;
        for (const auto& m : Gamma) total += m;
        return total.eigenvalues().cwiseAbs().maxCoeff();
    }

    /// Fixed point of the expected recursion, (I - sum B - sum Gamma)^{-1} b.
    /// Valid as the unconditional variance when the stationarity proxy < 1.
    [[nodiscard]] Vector unconditional_variance() const {
        Matrix total = Matrix::Zero(b.size(), b.size());
        for (const auto& m : B) total += m;
        for (const auto& m : Gamma) total += m;
        const Matrix coeff = Matrix::Identity(b.size(), b.size()) - total;
        return coeff.fullPivLu().solve(b);
    }
};

/// The d-variate benchmark design used across the simulation studies:
/// b = 0.1, B_1 all 0.1, Gamma_1 diagonal gamma / off-diagonal 0.01,
/// equicorrelation r.
inline GarchParams equicorrelated_ccc_design(int d, double gamma, double r) {
    GarchParams params;
    params.b = Vector::Constant(d, 0.1);
    params.B.push_back(Matrix::Constant(d, d, 0.1));
    Matrix g = Matrix::Constant(d, d, 0.01);
    g.diagonal().setConstant(gamma);
    params.Gamma.push_back(std::move(g));
    params.R = Matrix::Constant(d, d, r);
    params.R.diagonal().setOnes();
    params.validate();
    return params;
}

namespace garch_detail {

constexpr double kExplosionGuard = 1e12;

/// sigma^2_j for every observation row, under the presample convention
/// X_j = 0 (j <= 0) and sigma^2_j = presample_var (j <= 0).
/// Returns false (instead of throwing) when the recursion leaves the guard
/// region, so the likelihood can report +inf to the optimizer.
inline bool volatility_recursion(const GarchParams& params, const Matrix& x,
                                 const Vector& presample_var, Matrix& sig2) {
    const Index n = x.rows();
    const Index d = x.cols();
    const auto p = static_cast<Index>(params.B.size());
    const auto q = static_cast<Index>(params.Gamma.size());
    const Matrix x2 = x.cwiseProduct(x);
    sig2.resize(n, d);
    Vector acc(d);
    for (Index j = 0; j < n; ++j) {
        acc = params.b;
        for (Index k = 1; k <= p; ++k) {
            if (j - k >= 0) acc.noalias() += params.B[k - 1] * x2.row(j - k).transpose();
        }
        for (Index k = 1; k <= q; ++k) {
            if (j - k >= 0) {
                acc.noalias() += params.Gamma[k - 1] * sig2.row(j - k).transpose();
            } else {
                acc.noalias() += params.Gamma[k - 1] * presample_var;
            }
        }
        if (!(acc.maxCoeff() < kExplosionGuard) || !(acc.minCoeff() > 0.0)) return false;
        sig2.row(j) = acc.transpose();
    }
    return true;
}

/// Symmetric square root of D R D with D = diag(sqrt(sig2_row)).
inline Matrix conditional_sqrt(const Vector& sig2_row, const Matrix& r_corr) {
    const Vector vol = sig2_row.array().sqrt().matrix();
    Matrix sigma = vol.asDiagonal() * r_corr * vol.asDiagonal();
    return sym_sqrt(SymmetricPD{std::move(sigma)}).m;
}

inline Matrix conditional_inv_sqrt(const Vector& sig2_row, const Matrix& r_corr) {
    const Vector vol = sig2_row.array().sqrt().matrix();
    Matrix sigma = vol.asDiagonal() * r_corr * vol.asDiagonal();
    return sym_inv_sqrt(SymmetricPD{std::move(sigma)}).m;
}

// --- smooth reparameterization ---------------------------------------------
//
// Positivity constraints go through log; the correlation matrix goes through
// the angles of a unit-row lower-triangular Cholesky factor, so any
// unconstrained vector maps to a valid parameter set.

inline double sigmoid(double u) { return 1.0 / (1.0 + std::exp(-u)); }
inline double logit(double s) { return std::log(s / (1.0 - s)); }

inline Matrix correlation_from_angles(const Vector& angles, int d) {
    Matrix chol = Matrix::Zero(d, d);
    chol(0, 0) = 1.0;
    Index a = 0;
    for (Index i = 1; i < d; ++i) {
        double prod = 1.0;
        for (Index k = 0; k < i; ++k) {
            const double theta = angles(a++);
            chol(i, k) = std::cos(theta) * prod;
            prod *= std::sin(theta);
        }
        chol(i, i) = prod;
    }
    Matrix r = chol * chol.transpose();
    r.diagonal().setOnes();
    return r;
}

inline Vector angles_from_correlation(const Matrix& r_corr) {
    const Index d = r_corr.rows();
    Eigen::LLT<Matrix> llt(r_corr);
    if (llt.info() != Eigen::Success) {
        throw std::invalid_argument("correlation matrix is not positive definite");
    }
    const Matrix chol = llt.matrixL();
    Vector angles(d * (d - 1) / 2);
    Index a = 0;
    for (Index i = 1; i < d; ++i) {
        double prod = 1.0;
        for (Index k = 0; k < i; ++k) {
            double c = chol(i, k) / prod;
            c = std::clamp(c, -1.0 + 1e-12, 1.0 - 1e-12);
            const double theta = std::acos(c);
            angles(a++) = theta;
            prod *= std::sin(theta);
        }
    }
    return angles;
}

inline Vector pack_parameters(const GarchParams& params) {
    const int d = params.d();
    const auto p = static_cast<int>(params.B.size());
    const auto q = static_cast<int>(params.Gamma.size());
    Vector phi(d + (p + q) * d * d + d * (d - 1) / 2);
    Index at = 0;
    auto log_floor = [](double v) { return std::log(std::max(v, 1e-12)); };
    for (int i = 0; i < d; ++i) phi(at++) = log_floor(params.b(i));
    for (const auto& m : params.B) {
        for (int r = 0; r < d; ++r) {
            for (int c = 0; c < d; ++c) phi(at++) = log_floor(m(r, c));
        }
    }
    for (const auto& m : params.Gamma) {
        for (int r = 0; r < d; ++r) {
            for (int c = 0; c < d; ++c) phi(at++) = log_floor(m(r, c));
        }
    }
    const Vector angles = angles_from_correlation(params.R);
    for (Index i = 0; i < angles.size(); ++i) phi(at++) = logit(angles(i) / kPi);
    return phi;
}

inline GarchParams unpack_parameters(const Vector& phi, const GarchSpec& spec) {
    GarchParams params;
    const int d = spec.d;
    Index at = 0;
    params.b.resize(d);
    for (int i = 0; i < d; ++i) params.b(i) = std::exp(phi(at++));
    for (int k = 0; k < spec.p; ++k) {
        Matrix m(d, d);
        for (int r = 0; r < d; ++r) {
            for (int c = 0; c < d; ++c) m(r, c) = std::exp(phi(at++));
        }
        params.B.push_back(std::move(m));
    }
    for (int k = 0; k < spec.q; ++k) {
        Matrix m(d, d);
        for (int r = 0; r < d; ++r) {
            for (int c = 0; c < d; ++c) m(r, c) = std::exp(phi(at++));
        }
        params.Gamma.push_back(std::move(m));
    }
    Vector angles(d * (d - 1) / 2);
    for (Index i = 0; i < angles.size(); ++i) angles(i) = kPi * sigmoid(phi(at++));
    params.R = correlation_from_angles(angles, d);
    return params;
}

}  // namespace garch_detail

/**
 * @brief Simulate a CCC-GARCH path driven by the supplied innovations.
 *
 * The innovation matrix must have n + burnin rows (mean-zero, unit-covariance
 * rows are the caller's contract); the first `innovations.rows() - n` steps
 * are discarded as burn-in. The recursion starts from X = 0 and the model's
 * unconditional variance (falling back to b when the stationarity proxy is
 * not < 1). X_j = Sigma_j^{1/2} eps_j with the *symmetric* square root.
 *
 * @throws NonStationaryExplosion if any sigma^2 exceeds 1e12.
 */
inline Sample simulate_ccc_garch(const GarchParams& params, Index n,
                                 const Matrix& innovations) {
    params.validate();
    const Index total = innovations.rows();
    const Index d = params.b.size();
    if (innovations.cols() != d) {
        throw std::invalid_argument("simulate_ccc_garch: innovation dimension mismatch");
    }
    if (total < n) {
        throw std::invalid_argument("simulate_ccc_garch: need at least n innovation rows");
    }

    Vector start_var = params.stationarity_proxy() < 1.0 ? params.unconditional_variance()
                                                         : params.b;
    if ((start_var.array() <= 0.0).any()) start_var = params.b;

    const auto p = static_cast<Index>(params.B.size());
    const auto q = static_cast<Index>(params.Gamma.size());
    Matrix x(total, d);
    Matrix sig2(total, d);
    Vector acc(d);
    for (Index j = 0; j < total; ++j) {
        acc = params.b;
        for (Index k = 1; k <= p; ++k) {
            if (j - k >= 0) {
                acc.noalias() += params.B[k - 1] *
                                 x.row(j - k).cwiseProduct(x.row(j - k)).transpose();
            }
        }
        for (Index k = 1; k <= q; ++k) {
            if (j - k >= 0) {
                acc.noalias() += params.Gamma[k - 1] * sig2.row(j - k).transpose();
            } else {
                acc.noalias() += params.Gamma[k - 1] * start_var;
            }
        }
        if (!(acc.maxCoeff() < garch_detail::kExplosionGuard)) {
            throw NonStationaryExplosion(
                "simulate_ccc_garch: sigma^2 exceeded 1e12 at step " + std::to_string(j));
        }
        sig2.row(j) = acc.transpose();
        x.row(j) = (garch_detail::conditional_sqrt(acc, params.R) *
                    innovations.row(j).transpose())
                       .transpose();
    }
    return Sample(x.bottomRows(n));
}

/// Bootstrap-style conditional path: X*_j = Sigma~_j^{1/2}(theta) eps_j with
/// the same presample convention as the fitting recursion (no burn-in).
inline Matrix simulate_fitted_path(const GarchParams& params, const Matrix& innovations,
                                   const Vector& presample_var) {
    const Index n = innovations.rows();
    const Index d = innovations.cols();
    const auto p = static_cast<Index>(params.B.size());
    const auto q = static_cast<Index>(params.Gamma.size());
    Matrix x(n, d);
    Matrix sig2(n, d);
    Vector acc(d);
    for (Index j = 0; j < n; ++j) {
        acc = params.b;
        for (Index k = 1; k <= p; ++k) {
            if (j - k >= 0) {
                acc.noalias() += params.B[k - 1] *
                                 x.row(j - k).cwiseProduct(x.row(j - k)).transpose();
            }
        }
        for (Index k = 1; k <= q; ++k) {
            if (j - k >= 0) {
                acc.noalias() += params.Gamma[k - 1] * sig2.row(j - k).transpose();
            } else {
                acc.noalias() += params.Gamma[k - 1] * presample_var;
            }
        }
        if (!(acc.maxCoeff() < garch_detail::kExplosionGuard)) {
            throw NonStationaryExplosion("simulate_fitted_path: sigma^2 exceeded 1e12");
        }
        sig2.row(j) = acc.transpose();
        x.row(j) = (garch_detail::conditional_sqrt(acc, params.R) *
                    innovations.row(j).transpose())
                       .transpose();
    }
    return x;
}

/// Result of a quasi-maximum-likelihood fit.
struct GarchFit {
    GarchParams params;
    double loglik = 0.0;  ///< L_n at the optimum
    int iterations = 0;
    bool converged = false;
    bool small_sample = false;  ///< n < 50 * param_count heuristic tripped
    Vector presample_var;       ///< presample variance used by the recursion
    ScaledResiduals residuals;  ///< eps~_j = Sigma~_j^{-1/2}(theta^) X_j
};

namespace garch_detail {

/// -2 L_n(theta) for the observed series, +inf outside the useful region.
/// With Sigma_j = D_j R D_j the quadratic form and determinant reduce to
/// z_j^T R^{-1} z_j (z = X / sigma) and log|R| + sum_i log sigma^2_{ji},
/// so R is inverted once per call and each step costs O(d^2).
class QmleObjective {
public:
    QmleObjective(const Matrix& x, const GarchSpec& spec, Vector presample_var)
        : x_(x), spec_(spec), presample_var_(std::move(presample_var)) {}

    double operator()(const Vector& phi) const {
        const GarchParams params = unpack_parameters(phi, spec_);
        Eigen::LLT<Matrix> llt(params.R);
        if (llt.info() != Eigen::Success) {
            return std::numeric_limits<double>::infinity();
        }
        const Matrix lmat = llt.matrixL();
        double log_det_r = 0.0;
        for (Index i = 0; i < spec_.d; ++i) log_det_r += 2.0 * std::log(lmat(i, i));
        const Matrix r_inv = llt.solve(Matrix::Identity(spec_.d, spec_.d));

        Matrix sig2;
        if (!volatility_recursion(params, x_, presample_var_, sig2)) {
            return std::numeric_limits<double>::infinity();
        }
        const Index n = x_.rows();
        KahanSum total;
        Vector z(spec_.d);
        for (Index j = 0; j < n; ++j) {
            z = (x_.row(j).transpose().array() / sig2.row(j).transpose().array().sqrt())
                    .matrix();
            const double quad = z.dot(r_inv * z);
            const double log_det = log_det_r + sig2.row(j).array().log().sum();
            total.add(quad + log_det);
        }
        const double value = total.value();
        return std::isfinite(value) ? value : std::numeric_limits<double>::infinity();
    }

private:
    const Matrix& x_;
    GarchSpec spec_;
    Vector presample_var_;
};

inline Vector column_variances(const Matrix& x) {
    const Vector mean = x.colwise().mean().transpose();
    return (x.rowwise() - mean.transpose())
        .cwiseProduct(x.rowwise() - mean.transpose())
        .colwise()
        .mean()
        .transpose();
}

inline GarchParams default_start(const GarchSpec& spec, const Vector& sample_var) {
    GarchParams params;
    const int d = spec.d;
    const double arch = 0.05 / spec.p;
    const double garch_diag = 0.6 / std::max(1, spec.q);
    for (int k = 0; k < spec.p; ++k) params.B.push_back(Matrix::Constant(d, d, arch));
    for (int k = 0; k < spec.q; ++k) {
        Matrix g = Matrix::Constant(d, d, 0.01);
        g.diagonal().setConstant(garch_diag);
        params.Gamma.push_back(std::move(g));
    }
    Matrix total = Matrix::Zero(d, d);
    for (const auto& m : params.B) total += m;
    for (const auto& m : params.Gamma) total += m;
    params.b = ((Matrix::Identity(d, d) - total) * sample_var).cwiseMax(1e-4);
    params.R = Matrix::Identity(d, d);
    return params;
}

}  // namespace garch_detail

/**
 * @brief Gaussian QMLE of a CCC-GARCH model.
 *
 * Maximizes L_n(theta) = -1/2 sum_j [ X_j^T Sigma~_j^{-1}(theta) X_j
 * + log|Sigma~_j(theta)| ] over the smooth reparameterization (logs for the
 * positive/nonnegative blocks, Cholesky angles for R) with BFGS and
 * central-difference gradients. Presample: X_j = 0 and sigma^2 = the
 * componentwise sample variance of x for j <= 0. Residuals use the
 * symmetric inverse square root of the fitted conditional covariance.
 *
 * @throws ExplosiveRegion  if the likelihood is non-finite at the start
 * @throws OptimizerFailed  if BFGS does not converge
 */
inline GarchFit qmle_fit(const Sample& x, const GarchSpec& spec,
                         const std::optional<GarchParams>& init = std::nullopt) {
    spec.validate();
    if (x.d() != spec.d) throw std::invalid_argument("qmle_fit: dimension mismatch");
    const Index n = x.n();

    const Vector sample_var = garch_detail::column_variances(x.data);
    const GarchParams start_params =
        init.has_value() ? *init : garch_detail::default_start(spec, sample_var);
    const Vector phi0 = garch_detail::pack_parameters(start_params);

    garch_detail::QmleObjective objective(x.data, spec, sample_var);
    if (!std::isfinite(objective(phi0))) {
        throw ExplosiveRegion("qmle_fit: likelihood non-finite at the starting point");
    }

    MinimizeOptions opts;
    opts.grad_tol = 1e-4 * std::sqrt(static_cast<double>(n));  // gradient scales with n
    opts.f_tol = 1e-11;
    MinimizeResult min_res = minimize_bfgs(objective, phi0, opts);
    if (!min_res.converged) {
        throw OptimizerFailed("qmle_fit: no convergence after " +
                              std::to_string(min_res.iterations) + " iterations (|g|=" +
                              std::to_string(min_res.grad_norm) + ")");
    }

    GarchFit fit;
    fit.params = garch_detail::unpack_parameters(min_res.x, spec);
    fit.loglik = -0.5 * min_res.f;
    fit.iterations = min_res.iterations;
    fit.converged = true;
    fit.small_sample = n < 50LL * spec.param_count();
    fit.presample_var = sample_var;

    Matrix sig2;
    if (!garch_detail::volatility_recursion(fit.params, x.data, sample_var, sig2)) {
        throw ExplosiveRegion("qmle_fit: fitted recursion left the guard region");
    }
    Matrix resid(n, spec.d);
    for (Index j = 0; j < n; ++j) {
        resid.row(j) =
            (garch_detail::conditional_inv_sqrt(sig2.row(j).transpose(), fit.params.R) *
             x.data.row(j).transpose())
                .transpose();
    }
    fit.residuals = ScaledResiduals{std::move(resid), ResidualSource::GarchResidual};
    return fit;
}

/// T^G_{n,beta}: the test statistic evaluated directly on the fit residuals,
/// with no re-centering or re-whitening (the innovations are mean zero with
/// unit covariance under the null, so the residuals are used as-is).
inline StatisticValue garch_test_statistic(const GarchFit& fit, const Beta& beta) {
    return compute_tn_beta(fit.residuals, beta);
}

/// Outcome of a test run: the statistic on both scales plus the Monte Carlo
/// p-value and the bookkeeping needed to reproduce it.
struct TestOutcome {
    StatisticValue stat{};
    double p_value = 1.0;
    std::int64_t null_reps = 0;  ///< bootstrap or null-simulation replicates used
    std::int64_t failures = 0;   ///< replicates dropped after a failed refit
    std::uint64_t seed = 0;
};

namespace garch_detail {

enum : std::uint64_t {
    kSaltBootInnov = 0x21,
    kSaltBootRetry = 0x22,
    kSaltWarpData = 0x31,
    kSaltWarpBoot = 0x32,
    kSaltWarpRetry = 0x33,
};

/// Fit with one retry from a perturbed start. Returns nullopt if both
/// attempts fail.
inline std::optional<GarchFit> fit_with_retry(const Sample& x, const GarchSpec& spec,
                                              const std::optional<GarchParams>& init,
                                              RngStream& retry_stream) {
    try {
        return qmle_fit(x, spec, init);
    } catch (const std::exception&) {
        // fall through to the perturbed restart
    }
    try {
        Vector phi = pack_parameters(
            init.has_value() ? *init : default_start(spec, column_variances(x.data)));
        for (Index i = 0; i < phi.size(); ++i) phi(i) += 0.2 * retry_stream.normal();
        return qmle_fit(x, spec, unpack_parameters(phi, spec));
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

}  // namespace garch_detail

/**
 * @brief Parametric bootstrap test for Gaussian innovations.
 *
 * (i) fit the model and compute T^G on the residuals; (ii) simulate b_reps
 * series from the fitted model with fresh N(0, I) innovations, using the
 * same presample convention as the fit; (iii) refit each series, recompute
 * the statistic, and return the add-one Monte Carlo p-value.
 *
 * Replicates whose refit fails (after one retry from a perturbed start) are
 * dropped and counted; more than 5% failures aborts, since silently
 * excluding them would bias the null estimate.
 */
inline TestOutcome bootstrap_test(const Sample& x, const GarchSpec& spec, const Beta& beta,
                                  std::int64_t b_reps, std::uint64_t seed,
                                  int workers = 0) {
    if (b_reps < 99) throw std::invalid_argument("bootstrap_test: need b_reps >= 99");
    const GarchFit fit = qmle_fit(x, spec);
    const StatisticValue observed = garch_test_statistic(fit, beta);

    std::vector<double> boot_stats(static_cast<std::size_t>(b_reps),
                                   std::numeric_limits<double>::quiet_NaN());
    parallel_for(b_reps, workers, [&](std::int64_t k) {
        auto innov_stream = RngStream::substream(seed, static_cast<std::uint64_t>(k),
                                                 garch_detail::kSaltBootInnov);
        auto retry_stream = RngStream::substream(seed, static_cast<std::uint64_t>(k),
                                                 garch_detail::kSaltBootRetry);
        Matrix innov(x.n(), x.d());
        for (Index i = 0; i < innov.rows(); ++i) {
            for (Index j = 0; j < innov.cols(); ++j) innov(i, j) = innov_stream.normal();
        }
        const Sample xstar(simulate_fitted_path(fit.params, innov, fit.presample_var));
        auto refit = garch_detail::fit_with_retry(xstar, spec, fit.params, retry_stream);
        if (refit.has_value()) {
            boot_stats[static_cast<std::size_t>(k)] =
                garch_test_statistic(*refit, beta).t_scaled;
        }
    });

    std::vector<double> kept;
    kept.reserve(boot_stats.size());
    for (double v : boot_stats) {
        if (std::isfinite(v)) kept.push_back(v);
    }
    const auto failures = static_cast<std::int64_t>(boot_stats.size() - kept.size());
    if (failures * 20 > b_reps) {
        throw OptimizerFailed("bootstrap_test: " + std::to_string(failures) + " of " +
                              std::to_string(b_reps) + " replicate fits failed (> 5%)");
    }

    TestOutcome outcome;
    outcome.stat = observed;
    outcome.p_value = empirical_p_value(observed.t_scaled, kept);
    outcome.null_reps = static_cast<std::int64_t>(kept.size());
    outcome.failures = failures;
    outcome.seed = seed;
    return outcome;
}

/// Which statistic a simulation study tracks.
enum class StatisticKind {
    Mgf,  ///< T^G_{n,beta} (scaled)
    Hw,   ///< CF-based comparator on the same residuals
};

/// One cell of a level/power study: the data-generating design plus the
/// statistic to evaluate.
struct WarpSpeedDesign {
    GarchParams true_params;
    AlternativeSpec innovation_dist;  ///< standardized draws drive the recursion
    int n = 300;
    int burnin = 500;
    double stat_param = 2.1;  ///< beta (Mgf) or beta_hw (Hw)
    StatisticKind kind = StatisticKind::Mgf;
    double alpha = 0.05;
};

struct WarpSpeedResult {
    double rejection_rate = 0.0;
    double critical_value = 0.0;
    std::int64_t mc_used = 0;
    std::int64_t failures = 0;
};

/**
 * @brief Warp-speed level/power estimate.
 *
 * For each Monte Carlo sample: simulate from the true design, fit, compute
 * the statistic, then generate exactly one parametric-bootstrap resample and
 * its refitted statistic. The pooled resample statistics form the null
 * reference; the rejection rate is the fraction of original statistics above
 * the pooled (1 - alpha) quantile.
 */
inline WarpSpeedResult warp_speed_study(const WarpSpeedDesign& design,
                                        std::int64_t mc_samples, std::uint64_t seed,
                                        int workers = 0) {
    if (mc_samples < 500) {
        throw std::invalid_argument("warp_speed_study: need mc_samples >= 500");
    }
    if (design.innovation_dist.d != design.true_params.d()) {
        throw std::invalid_argument("warp_speed_study: innovation dimension mismatch");
    }
    const GarchSpec spec{design.true_params.d(),
                         static_cast<int>(design.true_params.B.size()),
                         static_cast<int>(design.true_params.Gamma.size())};
    const Beta beta_for_mgf(design.kind == StatisticKind::Mgf ? design.stat_param : 3.0);

    auto evaluate = [&](const ScaledResiduals& resid) {
        return design.kind == StatisticKind::Mgf
                   ? compute_tn_beta(resid, beta_for_mgf).t_scaled
                   : hw_statistic(resid, design.stat_param);
    };

    const auto nan = std::numeric_limits<double>::quiet_NaN();
    std::vector<double> stats(static_cast<std::size_t>(mc_samples), nan);
    std::vector<double> boot(static_cast<std::size_t>(mc_samples), nan);

    parallel_for(mc_samples, workers, [&](std::int64_t k) {
        auto data_stream = RngStream::substream(seed, static_cast<std::uint64_t>(k),
                                                garch_detail::kSaltWarpData);
        auto boot_stream = RngStream::substream(seed, static_cast<std::uint64_t>(k),
                                                garch_detail::kSaltWarpBoot);
        auto retry_stream = RngStream::substream(seed, static_cast<std::uint64_t>(k),
                                                 garch_detail::kSaltWarpRetry);

        const Matrix innov = sample_standardized_innovations(
            design.innovation_dist, design.n + design.burnin, data_stream);
        std::optional<Sample> x;
        try {
            x = simulate_ccc_garch(design.true_params, design.n, innov);
        } catch (const NonStationaryExplosion&) {
            return;  // counted as a failure below
        }
        auto fit = garch_detail::fit_with_retry(*x, spec, std::nullopt, retry_stream);
        if (!fit.has_value()) return;
        const double t_obs = evaluate(fit->residuals);

        Matrix star(design.n, spec.d);
        for (Index i = 0; i < star.rows(); ++i) {
            for (Index j = 0; j < star.cols(); ++j) star(i, j) = boot_stream.normal();
        }
        const Sample xstar(simulate_fitted_path(fit->params, star, fit->presample_var));
        auto refit = garch_detail::fit_with_retry(xstar, spec, fit->params, retry_stream);
        if (!refit.has_value()) return;

        stats[static_cast<std::size_t>(k)] = t_obs;
        boot[static_cast<std::size_t>(k)] = evaluate(refit->residuals);
    });

    std::vector<double> pooled;
    std::vector<double> observed;
    pooled.reserve(boot.size());
    observed.reserve(stats.size());
    for (std::size_t k = 0; k < stats.size(); ++k) {
        if (std::isfinite(stats[k]) && std::isfinite(boot[k])) {
            observed.push_back(stats[k]);
            pooled.push_back(boot[k]);
        }
    }
    const auto failures = static_cast<std::int64_t>(mc_samples) -
                          static_cast<std::int64_t>(observed.size());
    if (failures * 20 > mc_samples) {
        throw OptimizerFailed("warp_speed_study: " + std::to_string(failures) +
                              " Monte Carlo samples failed (> 5%)");
    }

    std::sort(pooled.begin(), pooled.end());
    WarpSpeedResult result;
    result.critical_value = upper_quantile(pooled, design.alpha);
    std::int64_t rejections = 0;
    for (double t : observed) {
        if (t > result.critical_value) ++rejections;
    }
    result.rejection_rate =
        static_cast<double>(rejections) / static_cast<double>(observed.size());
    result.mc_used = static_cast<std::int64_t>(observed.size());
    result.failures = failures;
    return result;
}

}  // namespace mgfnorm
