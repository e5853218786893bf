#pragma once

#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "mgfnorm/common.hpp"
#include "mgfnorm/linalg.hpp"

namespace mgfnorm {

/// Nodes and weights for integrating f against exp(-x^2) on the real line.
struct GaussHermiteRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/**
 * @brief Gauss-Hermite rule (physicists' weight exp(-x^2)) of given order.
 *
 * Golub-Welsch: the nodes are the eigenvalues of the Jacobi matrix of the
 * Hermite three-term recurrence (off-diagonal sqrt(k/2)), the weights are
 * sqrt(pi) times the squared first components of the eigenvectors.
 */
inline GaussHermiteRule gauss_hermite(int order) {
    if (order < 1) throw std::invalid_argument("gauss_hermite: order must be >= 1");
    Matrix jacobi = Matrix::Zero(order, order);
    for (int k = 1; k < order; ++k) {
        const double b = std::sqrt(k / 2.0);
        jacobi(k, k - 1) = b;
        jacobi(k - 1, k) = b;
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(jacobi);
    GaussHermiteRule rule;
    rule.nodes.resize(order);
    rule.weights.resize(order);
    const double mu0 = std::sqrt(kPi);
    for (int i = 0; i < order; ++i) {
        rule.nodes[i] = es.eigenvalues()(i);
        const double v0 = es.eigenvectors()(0, i);
        rule.weights[i] = mu0 * v0 * v0;
    }
    return rule;
}

/**
 * @brief The statistic by direct numerical integration of its definition,
 *        n * Int (M_n(t) - exp(|t|^2/2))^2 exp(-beta |t|^2) dt.
 *
 * Independent cross-check for the closed form in statistic.hpp: this path
 * never touches the pairwise-sum representation. The substitution
 * t = u / sqrt(beta) absorbs the weight into the Gauss-Hermite product rule;
 * the remaining integrand is entire with sub-Gaussian growth, so the rule
 * converges spectrally in the order.
 *
 * Cost grows as order^d, hence the hard d <= 3 cap.
 *
 * @throws DimensionTooLarge if d > 3.
 */
inline double tn_beta_quadrature(const ScaledResiduals& y, double beta, int quad_order) {
    const Index n = y.n();
    const Index d = y.d();
    if (d > 3) throw DimensionTooLarge("tn_beta_quadrature supports d <= 3");
    if (!(beta > 1.0)) throw BetaOutOfRange("quadrature requires beta > 1");

    const GaussHermiteRule rule = gauss_hermite(quad_order);
    const double inv_sqrt_beta = 1.0 / std::sqrt(beta);

    // Iterate over the d-dimensional product grid with an index vector.
    std::vector<int> idx(static_cast<std::size_t>(d), 0);
    Vector t(d);
    KahanSum total;
    for (;;) {
        double w = 1.0;
        for (Index k = 0; k < d; ++k) {
            const int i = idx[static_cast<std::size_t>(k)];
            t(k) = rule.nodes[static_cast<std::size_t>(i)] * inv_sqrt_beta;
            w *= rule.weights[static_cast<std::size_t>(i)];
        }
        // Empirical MGF of the residuals at t, minus the N(0, I) MGF.
        KahanSum mn;
        for (Index j = 0; j < n; ++j) {
            mn.add(std::exp(t.dot(y.y.row(j))));
        }
        const double diff = mn.value() / static_cast<double>(n) - std::exp(0.5 * t.squaredNorm());
        total.add(w * diff * diff);

        Index pos = 0;
        while (pos < d) {
            if (++idx[static_cast<std::size_t>(pos)] < quad_order) break;
            idx[static_cast<std::size_t>(pos)] = 0;
            ++pos;
        }
        if (pos == d) break;
    }
    return static_cast<double>(n) * std::pow(beta, -0.5 * static_cast<double>(d)) *
           total.value();
}

}  // namespace mgfnorm
