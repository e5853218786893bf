#pragma once

#include <cmath>
#include <string>
#include <utility>

#include <boost/math/special_functions/gamma.hpp>

#include "mgfnorm/common.hpp"
#include "mgfnorm/linalg.hpp"
#include "mgfnorm/rng.hpp"

namespace mgfnorm {

/**
 * @brief The alternative distributions exercised in the power studies.
 *
 * ASE(theta):  elliptical theta-stable (sub-Gaussian construction),
 *              theta in (0, 2]; theta = 2 is the Gaussian boundary.
 * T(theta):    multivariate Student t with theta > 0 degrees of freedom.
 * GN(theta):   i.i.d. marginals with density proportional to
 *              exp(-|x|^theta / theta); coincides with N(0,1) at theta = 2.
 * AEP(a,p1,p2): i.i.d. marginals from the two-piece asymmetric exponential
 *              power distribution, mass a left of the mode.
 */
struct AlternativeSpec {
    enum class Family { Normal, T, Ase, Gn, Aep };

    Family family = Family::Normal;
    int d = 1;
    double theta = 0.0;  // T / ASE / GN shape
    double aep_alpha = 0.0, aep_p1 = 0.0, aep_p2 = 0.0;

    void validate() const {
        if (d < 1) throw InvalidSpec("alternative: dimension must be >= 1");
        switch (family) {
            case Family::Normal:
                break;
            case Family::T:
                if (!(theta > 0.0)) throw InvalidSpec("t: df must be > 0");
                break;
            case Family::Ase:
                if (!(theta > 0.0 && theta <= 2.0)) {
                    throw InvalidSpec("ase: stability index must lie in (0, 2]");
                }
                break;
            case Family::Gn:
                if (!(theta > 0.0)) throw InvalidSpec("gn: shape must be > 0");
                break;
            case Family::Aep:
                if (!(aep_alpha > 0.0 && aep_alpha < 1.0)) {
                    throw InvalidSpec("aep: alpha must lie in (0, 1)");
                }
                if (!(aep_p1 > 0.0 && aep_p2 > 0.0)) {
                    throw InvalidSpec("aep: p1, p2 must be > 0");
                }
                break;
        }
    }

    [[nodiscard]] std::string describe() const {
        switch (family) {
            case Family::Normal: return "normal";
            case Family::T: return "t:" + std::to_string(theta);
            case Family::Ase: return "ase:" + std::to_string(theta);
            case Family::Gn: return "gn:" + std::to_string(theta);
            case Family::Aep:
                return "aep:" + std::to_string(aep_alpha) + "," + std::to_string(aep_p1) +
                       "," + std::to_string(aep_p2);
        }
        return "?";
    }
};

/// Parse "normal", "t:5", "ase:1.75", "gn:1.65" or "aep:0.4,1.182,1.820".
inline AlternativeSpec parse_alternative(const std::string& text, int d) {
    AlternativeSpec spec;
    spec.d = d;
    const auto colon = text.find(':');
    const std::string name = text.substr(0, colon);
    const std::string args = colon == std::string::npos ? "" : text.substr(colon + 1);
    try {
        if (name == "normal") {
            spec.family = AlternativeSpec::Family::Normal;
        } else if (name == "t" || name == "ase" || name == "gn") {
            spec.family = name == "t"     ? AlternativeSpec::Family::T
                          : name == "ase" ? AlternativeSpec::Family::Ase
                                          : AlternativeSpec::Family::Gn;
            spec.theta = std::stod(args);
        } else if (name == "aep") {
            spec.family = AlternativeSpec::Family::Aep;
            std::size_t pos1 = args.find(',');
            std::size_t pos2 = args.find(',', pos1 + 1);
            if (pos1 == std::string::npos || pos2 == std::string::npos) {
                throw InvalidSpec("aep needs three parameters: alpha,p1,p2");
            }
            spec.aep_alpha = std::stod(args.substr(0, pos1));
            spec.aep_p1 = std::stod(args.substr(pos1 + 1, pos2 - pos1 - 1));
            spec.aep_p2 = std::stod(args.substr(pos2 + 1));
        } else {
            throw InvalidSpec("unknown alternative family '" + name + "'");
        }
    } catch (const std::invalid_argument&) {
        throw InvalidSpec("could not parse alternative spec '" + text + "'");
    } catch (const std::out_of_range&) {
        throw InvalidSpec("could not parse alternative spec '" + text + "'");
    }
    spec.validate();
    return spec;
}

namespace detail {

/**
 * Totally skewed positive alpha-stable subordinator for the sub-Gaussian
 * elliptical stable construction, alpha = theta/2 in (0, 1).
 *
 * Chambers-Mallows-Stuck with skewness 1; the scale (cos(pi alpha / 2))^{1/alpha}
 * required by the construction cancels the CMS prefactor, leaving
 *   A = sin(alpha (V + pi/2)) / cos(V)^{1/alpha}
 *       * [cos(V - alpha (V + pi/2)) / W]^{(1-alpha)/alpha},
 * V ~ U(-pi/2, pi/2), W ~ Exp(1).
 */
inline double positive_stable_subgaussian(double alpha, RngStream& stream) {
    const double v = kPi * (stream.uniform_open() - 0.5);
    double w = 0.0;
    while (w == 0.0) w = -std::log(stream.uniform_open());
    const double shifted = alpha * (v + kPi / 2.0);
    return std::sin(shifted) / std::pow(std::cos(v), 1.0 / alpha) *
           std::pow(std::cos(v - shifted) / w, (1.0 - alpha) / alpha);
}

/// Generalized-normal marginal, density proportional to exp(-|x|^theta/theta):
/// |X| = (theta G)^{1/theta} with G ~ Gamma(1/theta), sign symmetric.
inline double gn_marginal(double theta, RngStream& stream) {
    const double g = stream.gamma(1.0 / theta);
    const double mag = std::pow(theta * g, 1.0 / theta);
    return (stream.next_u64() & 1ULL) ? mag : -mag;
}

struct AepPieces {
    double alpha;        // left-piece probability
    double alpha_star;   // left-piece scale split
    double p1, p2;
};

inline double aep_kep(double p) {
    return 1.0 / (2.0 * std::pow(p, 1.0 / p) * std::tgamma(1.0 + 1.0 / p));
}

inline AepPieces aep_pieces(const AlternativeSpec& spec) {
    const double k1 = aep_kep(spec.aep_p1);
    const double k2 = aep_kep(spec.aep_p2);
    const double astar =
        spec.aep_alpha * k1 / (spec.aep_alpha * k1 + (1.0 - spec.aep_alpha) * k2);
    return AepPieces{spec.aep_alpha, astar, spec.aep_p1, spec.aep_p2};
}

}  // namespace detail

/**
 * @brief Exact quantile function of the AEP marginal (mode at 0, unit scale).
 *
 * Each half of the density is an exponential-power piece, so each half of
 * the CDF inverts through the regularized incomplete-gamma inverse:
 * sampling plugs uniforms straight into this, which keeps the tails exact.
 */
inline double aep_quantile(const AlternativeSpec& spec, double u) {
    if (!(u > 0.0 && u < 1.0)) throw std::invalid_argument("aep_quantile: u in (0,1)");
    const auto pc = detail::aep_pieces(spec);
    if (u < pc.alpha) {
        const double g = boost::math::gamma_p_inv(1.0 / pc.p1, 1.0 - u / pc.alpha);
        return -2.0 * pc.alpha_star * std::pow(pc.p1 * g, 1.0 / pc.p1);
    }
    const double g =
        boost::math::gamma_p_inv(1.0 / pc.p2, (u - pc.alpha) / (1.0 - pc.alpha));
    return 2.0 * (1.0 - pc.alpha_star) * std::pow(pc.p2 * g, 1.0 / pc.p2);
}

/// Population mean and variance of the AEP marginal, from the closed-form
/// absolute moments of each exponential-power piece.
inline std::pair<double, double> aep_mean_variance(const AlternativeSpec& spec) {
    const auto pc = detail::aep_pieces(spec);
    auto piece_abs_moment = [](double mass, double scale, double p, int k) {
        return mass * std::pow(scale, k) * std::pow(p, static_cast<double>(k) / p) *
               std::exp(std::lgamma((k + 1.0) / p) - std::lgamma(1.0 / p));
    };
    const double m1 = -piece_abs_moment(pc.alpha, 2.0 * pc.alpha_star, pc.p1, 1) +
                      piece_abs_moment(1.0 - pc.alpha, 2.0 * (1.0 - pc.alpha_star), pc.p2, 1);
    const double m2 = piece_abs_moment(pc.alpha, 2.0 * pc.alpha_star, pc.p1, 2) +
                      piece_abs_moment(1.0 - pc.alpha, 2.0 * (1.0 - pc.alpha_star), pc.p2, 2);
    return {m1, m2 - m1 * m1};
}

/**
 * @brief Draw n i.i.d. rows from the alternative, unstandardized.
 *
 * The normality test is affine invariant, so the scale conventions
 * (documented per family above) do not affect power.
 */
inline Sample sample_alternative(const AlternativeSpec& spec, int n, RngStream& stream) {
    spec.validate();
    const int d = spec.d;
    Matrix data(n, d);
    switch (spec.family) {
        case AlternativeSpec::Family::Normal:
            for (Index i = 0; i < n; ++i)
                for (Index j = 0; j < d; ++j) data(i, j) = stream.normal();
            break;
        case AlternativeSpec::Family::T:
            for (Index i = 0; i < n; ++i) {
                const double scale = std::sqrt(spec.theta / stream.chi_squared(spec.theta));
                for (Index j = 0; j < d; ++j) data(i, j) = scale * stream.normal();
            }
            break;
        case AlternativeSpec::Family::Ase:
            for (Index i = 0; i < n; ++i) {
                // theta = 2 degenerates the subordinator to a constant.
                const double s = spec.theta == 2.0
                                     ? 1.0
                                     : detail::positive_stable_subgaussian(spec.theta / 2.0,
                                                                           stream);
                const double scale = std::sqrt(s);
                for (Index j = 0; j < d; ++j) data(i, j) = scale * stream.normal();
            }
            break;
        case AlternativeSpec::Family::Gn:
            for (Index i = 0; i < n; ++i)
                for (Index j = 0; j < d; ++j) data(i, j) = detail::gn_marginal(spec.theta, stream);
            break;
        case AlternativeSpec::Family::Aep:
            for (Index i = 0; i < n; ++i)
                for (Index j = 0; j < d; ++j)
                    data(i, j) = aep_quantile(spec, stream.uniform_open());
            break;
    }
    return Sample(std::move(data));
}

/**
 * @brief Draws with population mean 0 and unit covariance, for use as
 *        volatility-model innovations.
 *
 * T(theta) needs theta > 2 here (finite variance); ASE below 2 has none and
 * is rejected.
 */
inline Matrix sample_standardized_innovations(const AlternativeSpec& spec, int n,
                                              RngStream& stream) {
    spec.validate();
    const int d = spec.d;
    Matrix data(n, d);
    switch (spec.family) {
        case AlternativeSpec::Family::Normal:
            for (Index i = 0; i < n; ++i)
                for (Index j = 0; j < d; ++j) data(i, j) = stream.normal();
            break;
        case AlternativeSpec::Family::T: {
            if (!(spec.theta > 2.0)) {
                throw InvalidSpec("standardized t innovations need df > 2");
            }
            const double scale0 = std::sqrt((spec.theta - 2.0) / spec.theta);
            for (Index i = 0; i < n; ++i) {
                const double scale =
                    scale0 * std::sqrt(spec.theta / stream.chi_squared(spec.theta));
                for (Index j = 0; j < d; ++j) data(i, j) = scale * stream.normal();
            }
            break;
        }
        case AlternativeSpec::Family::Ase:
            if (spec.theta < 2.0) {
                throw InvalidSpec("ase has infinite variance below theta = 2; cannot "
                                  "standardize");
            }
            for (Index i = 0; i < n; ++i)
                for (Index j = 0; j < d; ++j) data(i, j) = stream.normal();
            break;
        case AlternativeSpec::Family::Gn: {
            const double sd = std::sqrt(std::pow(spec.theta, 2.0 / spec.theta) *
                                        std::exp(std::lgamma(3.0 / spec.theta) -
                                                 std::lgamma(1.0 / spec.theta)));
            for (Index i = 0; i < n; ++i)
                for (Index j = 0; j < d; ++j)
                    data(i, j) = detail::gn_marginal(spec.theta, stream) / sd;
            break;
        }
        case AlternativeSpec::Family::Aep: {
            const auto [mean, var] = aep_mean_variance(spec);
            const double sd = std::sqrt(var);
            for (Index i = 0; i < n; ++i)
                for (Index j = 0; j < d; ++j)
                    data(i, j) = (aep_quantile(spec, stream.uniform_open()) - mean) / sd;
            break;
        }
    }
    return data;
}

}  // namespace mgfnorm
