#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace mgfnorm {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Sample covariance matrix is numerically singular (smallest eigenvalue at
/// or below d * machine-eps * largest eigenvalue).
struct SingularCovariance : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Weight parameter outside its admissible range (beta <= 1 for the
/// statistic, beta <= 2 for asymptotic moments).
struct BetaOutOfRange : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// An exponential term would overflow; the computation is aborted instead of
/// silently saturating.
struct NonFiniteResult : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Product quadrature requested beyond the supported dimension cap.
struct DimensionTooLarge : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Malformed alternative-distribution parameters.
struct InvalidSpec : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// CSV / parameter-file parse failure; message carries the location.
struct ParseError : std::runtime_error {
    ParseError(const std::string& msg, std::size_t row, std::size_t col)
        : std::runtime_error(msg + " (row " + std::to_string(row) + ", column " +
                             std::to_string(col) + ")"),
          row(row),
          col(col) {}
    std::size_t row;
    std::size_t col;
};

/// Quasi-Newton search did not converge within the iteration budget.
struct OptimizerFailed : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Likelihood was non-finite at a feasible starting point.
struct ExplosiveRegion : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Volatility recursion blew past the explosion guard during simulation.
struct NonStationaryExplosion : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Neumaier compensated accumulator. Long pairwise sums in the statistics
/// must not depend on accumulation order beyond ~1e-12 relative, so every
/// O(n^2) reduction goes through this.
class KahanSum {
public:
    void add(double x) {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x)) {
            comp_ += (sum_ - t) + x;
        } else {
            comp_ += (x - t) + sum_;
        }
        sum_ = t;
    }
    [[nodiscard]] double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

constexpr double kPi = 3.14159265358979323846;

}  // namespace mgfnorm
