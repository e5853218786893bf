#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace mgfnorm {

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

}  // namespace detail

/**
 * @brief A self-contained random stream with explicit, portable samplers.
 *
 * Streams are derived hierarchically from a master seed and a replicate
 * index, so replicate k of a Monte Carlo run is recomputable in isolation
 * and results never depend on how replicates were distributed over worker
 * threads. All transforms (uniform, normal, gamma, ...) are implemented
 * here on top of the raw 64-bit engine output; none of the
 * implementation-defined std::*_distribution classes are used, so a given
 * seed produces identical draws on every platform.
 */
class RngStream {
public:
    explicit RngStream(std::uint64_t seed) : engine_(detail::splitmix64(seed)) {}

    /// Stream for replicate `index` of the run keyed by (master, salt).
    /// Distinct salts separate independent purposes within one run.
    static RngStream substream(std::uint64_t master, std::uint64_t index,
                               std::uint64_t salt = 0) {
        std::uint64_t h = detail::splitmix64(master ^ (0x9E3779B97F4A7C15ULL * (salt + 1)));
        h = detail::splitmix64(h ^ index);
        return RngStream(h);
    }

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform on (0, 1]; safe as a log() argument.
    double uniform01() {
        return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    }

    /// Uniform on (0, 1), both endpoints excluded.
    double uniform_open() {
        return (static_cast<double>(next_u64() >> 12) + 0.5) * 0x1.0p-52;
    }

    /// Uniform on (lo, hi].
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    /// Standard normal via the Marsaglia polar method (second variate cached).
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform01() - 1.0;
            v = 2.0 * uniform01() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double f = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * f;
        has_spare_ = true;
        return u * f;
    }

    double exponential() { return -std::log(uniform01()); }

    /// Gamma(shape, scale 1), Marsaglia-Tsang; boosting handles shape < 1.
    double gamma(double shape) {
        if (shape < 1.0) {
            const double u = uniform01();
            return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
        }
        const double d = shape - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x, v;
            do {
                x = normal();
                v = 1.0 + c * x;
            } while (v <= 0.0);
            v = v * v * v;
            const double u = uniform01();
            if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
            if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
        }
    }

    double chi_squared(double dof) { return 2.0 * gamma(dof / 2.0); }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace mgfnorm
