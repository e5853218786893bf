#include <catch2/catch_amalgamated.hpp>

#include "mgfnorm/quadrature.hpp"
#include "mgfnorm/rng.hpp"

using namespace mgfnorm;

TEST_CASE("gauss_hermite integrates Gaussian moments exactly") {
    const auto rule = gauss_hermite(20);
    double m0 = 0.0, m2 = 0.0, m4 = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        const double x = rule.nodes[i], w = rule.weights[i];
        m0 += w;
        m2 += w * x * x;
        m4 += w * x * x * x * x;
    }
    const double sqrt_pi = std::sqrt(kPi);
    CHECK(m0 == Catch::Approx(sqrt_pi).epsilon(1e-13));
    CHECK(m2 == Catch::Approx(0.5 * sqrt_pi).epsilon(1e-13));
    CHECK(m4 == Catch::Approx(0.75 * sqrt_pi).epsilon(1e-13));
}

TEST_CASE("tn_beta_quadrature: degenerate single point") {
    // All-zero residual, n = 1, d = 1, beta = 2: the defining integral
    // collapses to sqrt(pi) (1/sqrt(2) + 1 - 2/sqrt(1.5)).
    ScaledResiduals y{Matrix::Zero(1, 1), ResidualSource::IidStandardized};
    const double expected = std::sqrt(kPi) * (1.0 / std::sqrt(2.0) + 1.0 - 2.0 / std::sqrt(1.5));
    CHECK(tn_beta_quadrature(y, 2.0, 64) == Catch::Approx(expected).epsilon(1e-9));
    CHECK(expected == Catch::Approx(0.131363).margin(5e-7));
}

TEST_CASE("tn_beta_quadrature: self-convergence in the order") {
    RngStream stream(5150);
    Matrix m(10, 2);
    for (Index i = 0; i < 10; ++i) {
        for (Index j = 0; j < 2; ++j) m(i, j) = stream.normal();
    }
    const ScaledResiduals y = scale_residuals(Sample(m));
    const double q48 = tn_beta_quadrature(y, 3.0, 48);
    const double q64 = tn_beta_quadrature(y, 3.0, 64);
    CHECK(q48 == Catch::Approx(q64).epsilon(1e-8));
}

TEST_CASE("tn_beta_quadrature: dimension cap and beta domain") {
    ScaledResiduals y4{Matrix::Zero(6, 4), ResidualSource::IidStandardized};
    CHECK_THROWS_AS(tn_beta_quadrature(y4, 3.0, 16), DimensionTooLarge);
    ScaledResiduals y1{Matrix::Zero(3, 1), ResidualSource::IidStandardized};
    CHECK_THROWS_AS(tn_beta_quadrature(y1, 1.0, 16), BetaOutOfRange);
}
