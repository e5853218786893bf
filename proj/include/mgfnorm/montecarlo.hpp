#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "mgfnorm/common.hpp"
#include "mgfnorm/linalg.hpp"
#include "mgfnorm/parallel.hpp"
#include "mgfnorm/rng.hpp"
#include "mgfnorm/statistic.hpp"

namespace mgfnorm {

/// Monte Carlo run configuration. The seed keys every replicate's substream,
/// so the same (reps, seed) pair reproduces identical tables for any worker
/// count.
struct McConfig {
    std::int64_t reps = 100000;
    std::uint64_t seed = 1;
    std::vector<double> alpha_levels = {0.05, 0.10};
    int workers = 0;  // 0 = all hardware threads

    void validate() const {
        if (reps < 100) throw std::invalid_argument("McConfig: reps must be >= 100");
        for (double a : alpha_levels) {
            if (!(a > 0.0 && a < 1.0)) {
                throw std::invalid_argument("McConfig: alpha levels must lie in (0,1)");
            }
        }
    }
};

struct CriticalEntry {
    int d;
    int n;
    double beta;
    double alpha;
    double value;  ///< critical value on the pi^{-d/2} scale
    std::int64_t reps;
    std::uint64_t seed;
};

/// Empirical upper quantiles of the null distribution, plus bookkeeping.
struct CriticalTable {
    std::vector<CriticalEntry> entries;
    std::int64_t resampled_replicates = 0;  ///< singular-covariance redraws

    [[nodiscard]] double lookup(int d, int n, double beta, double alpha) const {
        for (const auto& e : entries) {
            if (e.d == d && e.n == n && std::abs(e.beta - beta) < 1e-12 &&
                std::abs(e.alpha - alpha) < 1e-12) {
                return e.value;
            }
        }
        throw std::invalid_argument("CriticalTable: no entry for requested key");
    }

    void write_csv(std::ostream& os) const {
        os << "d,n,beta,alpha,critical_value,reps,seed\n";
        os.precision(17);
        for (const auto& e : entries) {
            os << e.d << ',' << e.n << ',' << e.beta << ',' << e.alpha << ','
               << std::scientific << e.value << std::defaultfloat << ',' << e.reps << ','
               << e.seed << '\n';
        }
    }
};

/// i.i.d. N_d(0, I) sample with rows drawn from the given stream.
inline Sample sample_standard_normal(int n, int d, RngStream& stream) {
    Matrix data(n, d);
    for (Index i = 0; i < n; ++i) {
        for (Index j = 0; j < d; ++j) data(i, j) = stream.normal();
    }
    return Sample(std::move(data));
}

/// Upper empirical alpha-quantile by the order statistic ceil(N (1-alpha)).
inline double upper_quantile(std::vector<double> sorted_draws, double alpha) {
    const auto reps = static_cast<std::int64_t>(sorted_draws.size());
    std::int64_t rank = static_cast<std::int64_t>(
        std::ceil(static_cast<double>(reps) * (1.0 - alpha)));
    rank = std::clamp<std::int64_t>(rank, 1, reps);
    return sorted_draws[static_cast<std::size_t>(rank - 1)];
}

namespace detail {

/// Replicate-level salt values keep substreams of distinct purposes apart.
enum : std::uint64_t {
    kSaltNull = 0x11,
    kSaltRetry = 0x7e,
};

}  // namespace detail

/**
 * @brief Null-distribution draws of the scaled statistic at (d, n, beta).
 *
 * Replicate k: draw an N_d(0,I) sample of size n from substream k,
 * standardize, evaluate the statistic. Replicates run in parallel but the
 * returned vector is ordered by index, so output is worker-count
 * independent. A replicate whose sample covariance is numerically singular
 * (possible in floating point for tiny n) is redrawn from a retry stream;
 * redraws are counted through `resampled`.
 */
inline std::vector<double> simulate_null_statistics(int d, int n, const Beta& beta,
                                                    std::int64_t reps, std::uint64_t seed,
                                                    int workers,
                                                    std::int64_t* resampled = nullptr) {
    std::vector<double> stats(static_cast<std::size_t>(reps));
    std::vector<std::uint8_t> redrawn(static_cast<std::size_t>(reps), 0);
    parallel_for(reps, workers, [&](std::int64_t k) {
        auto stream = RngStream::substream(seed, static_cast<std::uint64_t>(k),
                                           detail::kSaltNull);
        for (int attempt = 0;; ++attempt) {
            try {
                const Sample s = sample_standard_normal(n, d, stream);
                stats[static_cast<std::size_t>(k)] =
                    compute_tn_beta(scale_residuals(s), beta).t_scaled;
                break;
            } catch (const SingularCovariance&) {
                redrawn[static_cast<std::size_t>(k)] = 1;
                if (attempt > 32) throw;
                stream = RngStream::substream(
                    seed, static_cast<std::uint64_t>(k) * 64 + attempt, detail::kSaltRetry);
            }
        }
    });
    if (resampled != nullptr) {
        *resampled = std::count(redrawn.begin(), redrawn.end(), std::uint8_t{1});
    }
    return stats;
}

/**
 * @brief Critical values for the scaled statistic at every alpha in cfg.
 *
 * Simulates cfg.reps null replicates and takes upper empirical quantiles
 * (order statistic ceil(reps (1-alpha))).
 */
inline CriticalTable estimate_critical_values(int d, int n, const Beta& beta,
                                              const McConfig& cfg) {
    cfg.validate();
    if (n < d + 1) throw std::invalid_argument("estimate_critical_values: n must be >= d+1");
    CriticalTable table;
    std::vector<double> stats = simulate_null_statistics(d, n, beta, cfg.reps, cfg.seed,
                                                         cfg.workers,
                                                         &table.resampled_replicates);
    std::sort(stats.begin(), stats.end());
    for (double alpha : cfg.alpha_levels) {
        table.entries.push_back(CriticalEntry{d, n, beta.value(), alpha,
                                              upper_quantile(stats, alpha), cfg.reps,
                                              cfg.seed});
    }
    return table;
}

/**
 * @brief Monte Carlo p-value with the add-one convention,
 *        (1 + #{draws >= observed}) / (1 + #draws), which can never be 0.
 */
inline double empirical_p_value(double observed, std::span<const double> null_draws) {
    if (null_draws.empty()) {
        throw std::invalid_argument("empirical_p_value: need at least one null draw");
    }
    std::int64_t count = 0;
    for (double v : null_draws) {
        if (v >= observed) ++count;
    }
    return static_cast<double>(1 + count) / static_cast<double>(1 + null_draws.size());
}

}  // namespace mgfnorm
