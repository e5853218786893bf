#include <catch2/catch_amalgamated.hpp>

#include "mgfnorm/montecarlo.hpp"
#include "mgfnorm/quadrature.hpp"
#include "mgfnorm/statistic.hpp"
#include "support/oracles.hpp"

using namespace mgfnorm;

namespace {

ScaledResiduals standardized(int n, int d, std::uint64_t seed) {
    RngStream stream(seed);
    return scale_residuals(sample_standard_normal(n, d, stream));
}

// Visibly skewed data: exponential marginals pushed through standardization.
ScaledResiduals skewed_residuals(int n, int d, std::uint64_t seed) {
    RngStream stream(seed);
    Matrix m(n, d);
    for (Index i = 0; i < n; ++i) {
        for (Index j = 0; j < d; ++j) m(i, j) = stream.exponential();
    }
    return scale_residuals(Sample(std::move(m)));
}

double scaled_limit_form(const ScaledResiduals& y, double beta) {
    const StatisticValue s = compute_tn_beta(y, Beta(beta));
    const double d = static_cast<double>(y.d());
    return std::pow(beta, 3.0 + 0.5 * d) * 96.0 * s.t_scaled / static_cast<double>(y.n());
}

}  // namespace

TEST_CASE("compute_tn_beta: degenerate single point matches hand arithmetic") {
    ScaledResiduals y{Matrix::Zero(1, 1), ResidualSource::IidStandardized};
    const StatisticValue s = compute_tn_beta(y, Beta(2.0));
    CHECK(s.t_raw == Catch::Approx(0.131363).margin(5e-7));
    CHECK(s.t_raw == s.t_scaled * std::pow(kPi, 0.5));  // exact bookkeeping
    CHECK(s.t_raw >= 0.0);
}

TEST_CASE("compute_tn_beta agrees with the quadrature oracle") {
    RngStream pick(42);
    int checked = 0;
    for (std::uint64_t seed = 1; checked < 12; ++seed) {
        const int d = 1 + static_cast<int>(seed % 2);
        const int n = 5 + static_cast<int>(pick.next_u64() % 16);
        if (n < d + 2) continue;
        for (double beta : {2.5, 3.0, 5.0}) {
            const ScaledResiduals y = standardized(n, d, 1000 + seed);
            const double closed = compute_tn_beta(y, Beta(beta)).t_raw;
            const double quad = tn_beta_quadrature(y, beta, 64);
            CHECK(closed == Catch::Approx(quad).epsilon(1e-6));
        }
        ++checked;
    }
}

TEST_CASE("compute_tn_beta: affine invariance") {
    RngStream stream(7);
    const int n = 40, d = 3;
    Matrix base(n, d);
    for (Index i = 0; i < n; ++i) {
        for (Index j = 0; j < d; ++j) base(i, j) = stream.normal();
    }
    const double t0 = compute_tn_beta(scale_residuals(Sample(base)), Beta(3.0)).t_raw;
    for (int trial = 0; trial < 20; ++trial) {
        Matrix a(d, d);
        do {
            for (Index i = 0; i < d; ++i) {
                for (Index j = 0; j < d; ++j) a(i, j) = stream.normal();
            }
        } while (std::abs(a.determinant()) < 1e-3);
        Vector shift(d);
        for (Index i = 0; i < d; ++i) shift(i) = 5.0 * stream.normal();
        Matrix transformed = base * a.transpose();
        transformed.rowwise() += shift.transpose();
        const double t1 =
            compute_tn_beta(scale_residuals(Sample(transformed)), Beta(3.0)).t_raw;
        CHECK(t1 == Catch::Approx(t0).epsilon(1e-8));
    }
}

TEST_CASE("compute_tn_beta: overflow raises instead of saturating") {
    Matrix m(2, 1);
    m << 1500.0, -1500.0;  // |y|^2 / beta ~ 2e6/1.1 >> 700
    ScaledResiduals y{std::move(m), ResidualSource::GarchResidual};
    CHECK_THROWS_AS(compute_tn_beta(y, Beta(1.1)), NonFiniteResult);
}

TEST_CASE("Beta domain checks") {
    CHECK_THROWS_AS(Beta(1.0), BetaOutOfRange);
    CHECK_THROWS_AS(Beta(0.5), BetaOutOfRange);
    CHECK_FALSE(Beta(1.5).asymptotics_valid());
    CHECK(Beta(2.5).asymptotics_valid());
    CHECK(Beta(3.0).gamma() == Catch::Approx(2.0));
    CHECK(Beta(3.0).eta() == Catch::Approx(15.0));
}

TEST_CASE("skewness measures: symmetric configurations cancel") {
    Matrix m(4, 2);
    m << 1, 0, -1, 0, 0, 1, 0, -1;  // {e1, -e1, e2, -e2}
    ScaledResiduals y{std::move(m), ResidualSource::IidStandardized};
    CHECK(mardia_skewness(y) == Catch::Approx(0.0).margin(1e-15));
    CHECK(mrs_skewness(y) == Catch::Approx(0.0).margin(1e-15));
    CHECK(mardia_kurtosis(y) == Catch::Approx(1.0));

    Matrix pair(2, 1);
    pair << -1, 1;
    ScaledResiduals y1{std::move(pair), ResidualSource::IidStandardized};
    CHECK(mardia_skewness(y1) == Catch::Approx(0.0).margin(1e-15));
    CHECK(mrs_skewness(y1) == Catch::Approx(0.0).margin(1e-15));
    CHECK(mardia_kurtosis(y1) == Catch::Approx(1.0));
}

TEST_CASE("mrs_skewness equals its norm identity") {
    for (std::uint64_t seed : {10u, 11u, 12u}) {
        const ScaledResiduals y = standardized(35, 2, seed);
        Vector weighted = Vector::Zero(2);
        for (Index j = 0; j < y.n(); ++j) {
            weighted += y.y.row(j).transpose() * y.y.row(j).squaredNorm();
        }
        weighted /= static_cast<double>(y.n());
        CHECK(mrs_skewness(y) == Catch::Approx(weighted.squaredNorm()).epsilon(1e-12));
    }
}

TEST_CASE("skewness_summary is internally consistent") {
    const ScaledResiduals y = skewed_residuals(40, 2, 5);
    const SkewnessSummary s = skewness_summary(y);
    CHECK(s.limit_combo == Catch::Approx(2.0 * s.b1d + 3.0 * s.b1d_tilde).epsilon(1e-12));
    CHECK(s.b1d >= 0.0);
    CHECK(s.b1d_tilde >= 0.0);
    CHECK(skewness_limit_statistic(y) == Catch::Approx(s.limit_combo).epsilon(1e-12));
}

TEST_CASE("large normal sample: population skewness 0, kurtosis d(d+2)", "[slow]") {
    const ScaledResiduals y3 = standardized(10000, 3, 314);
    CHECK(mardia_skewness(y3) < 0.05);
    const ScaledResiduals y2 = standardized(10000, 2, 315);
    CHECK(mardia_kurtosis(y2) == Catch::Approx(8.0).margin(0.3));
}

TEST_CASE("beta -> infinity: scaled statistic approaches the skewness combo") {
    // error decreases along the ladder, and the extrapolated limit matches
    for (std::uint64_t seed : {21u, 22u, 23u}) {
        const ScaledResiduals y = skewed_residuals(30, 2, seed);
        const double target = skewness_limit_statistic(y);
        REQUIRE(target > 1e-3);

        const double e2 = std::abs(scaled_limit_form(y, 1e2) - target);
        const double e3 = std::abs(scaled_limit_form(y, 1e3) - target);
        const double e4 = std::abs(scaled_limit_form(y, 1e4) - target);
        CHECK(e3 < e2);
        CHECK(e4 < e3);

        std::vector<double> h, f;
        for (double beta : {200.0, 400.0, 800.0, 1600.0}) {
            h.push_back(1.0 / beta);
            f.push_back(scaled_limit_form(y, beta));
        }
        const double limit = test_oracles::extrapolate_to_zero(h, f);
        CHECK(limit == Catch::Approx(target).epsilon(1e-3));
    }
}

TEST_CASE("asymptotic_mean: hand value and domain") {
    CHECK(asymptotic_mean(1, Beta(3.0)) == Catch::Approx(0.0883).margin(5e-4));
    CHECK_THROWS_AS(asymptotic_mean(1, Beta(2.0)), BetaOutOfRange);
    CHECK_THROWS_AS(asymptotic_mean(1, Beta(1.5)), BetaOutOfRange);

    // decreasing to zero in beta for fixed d
    double prev = asymptotic_mean(2, Beta(2.5));
    for (double beta : {3.0, 4.0, 6.0, 10.0, 30.0, 100.0}) {
        const double cur = asymptotic_mean(2, Beta(beta));
        CHECK(cur < prev);
        CHECK(cur > 0.0);
        prev = cur;
    }
    CHECK(prev < 1e-3);
}

TEST_CASE("asymptotic_mean matches the kernel-integration oracle") {
    for (int d : {1, 2, 3}) {
        for (double beta : {2.5, 3.0, 4.0, 6.0}) {
            const double formula = asymptotic_mean(d, Beta(beta));
            const double oracle = test_oracles::integrate_kernel_diagonal(d, beta, 80);
            CHECK(formula == Catch::Approx(oracle).epsilon(1e-8));
        }
    }
}

TEST_CASE("asymptotic_variance matches the double-integration oracle") {
    for (int d : {1, 2}) {
        for (double beta : {2.5, 3.0, 4.0, 6.0}) {
            const double formula = asymptotic_variance(d, Beta(beta));
            const double oracle = test_oracles::integrate_kernel_squared(d, beta, 40);
            CHECK(formula == Catch::Approx(oracle).epsilon(1e-6));
        }
    }
}

TEST_CASE("asymptotic_variance positive on a (d, beta) grid") {
    for (int d = 1; d <= 10; ++d) {
        for (double beta : {2.1, 2.5, 3.0, 5.0, 10.0, 50.0}) {
            CHECK(asymptotic_variance(d, Beta(beta)) > 0.0);
        }
    }
}

TEST_CASE("kernel_c: zero argument, symmetry, nonnegative diagonal") {
    Vector zero = Vector::Zero(2);
    Vector t(2);
    t << 0.7, -0.3;
    CHECK(kernel_c(zero, t) == Catch::Approx(0.0).margin(1e-15));

    RngStream stream(8);
    for (int trial = 0; trial < 30; ++trial) {
        Vector s(3), u(3);
        for (Index i = 0; i < 3; ++i) {
            s(i) = stream.normal();
            u(i) = stream.normal();
        }
        CHECK(kernel_c(s, u) == Catch::Approx(kernel_c(u, s)).epsilon(1e-14));
        CHECK(kernel_c(s, s) >= 0.0);
        const double t2 = s.squaredNorm();
        const double direct =
            std::exp(t2) * (std::exp(t2) - 1.0 - t2 - 0.5 * t2 * t2);
        CHECK(kernel_c(s, s) == Catch::Approx(direct).epsilon(1e-10));
    }
}

TEST_CASE("kernel_c matches the empirical covariance of W_n", "[slow]") {
    // E[W_n(s) W_n(t)] -> C(s,t); estimated over many null replicates.
    const int n = 300, reps = 100000, d = 2;
    Vector s(d), t(d);
    s << 0.5, 0.0;
    t << 0.3, 0.4;

    std::vector<double> ws(reps), wt(reps);
    parallel_for(reps, 0, [&](std::int64_t k) {
        auto stream = RngStream::substream(424242, static_cast<std::uint64_t>(k));
        const ScaledResiduals y = scale_residuals(sample_standard_normal(n, d, stream));
        double ms = 0.0, mt = 0.0;
        for (Index j = 0; j < n; ++j) {
            ms += std::exp(s.dot(y.y.row(j)));
            mt += std::exp(t.dot(y.y.row(j)));
        }
        const double root_n = std::sqrt(static_cast<double>(n));
        ws[static_cast<std::size_t>(k)] =
            root_n * (ms / n - std::exp(0.5 * s.squaredNorm()));
        wt[static_cast<std::size_t>(k)] =
            root_n * (mt / n - std::exp(0.5 * t.squaredNorm()));
    });

    double mean_s = 0.0, mean_t = 0.0;
    for (int k = 0; k < reps; ++k) {
        mean_s += ws[static_cast<std::size_t>(k)];
        mean_t += wt[static_cast<std::size_t>(k)];
    }
    mean_s /= reps;
    mean_t /= reps;
    double cov = 0.0, var_prod = 0.0;
    for (int k = 0; k < reps; ++k) {
        const double a = ws[static_cast<std::size_t>(k)] - mean_s;
        const double b = wt[static_cast<std::size_t>(k)] - mean_t;
        cov += a * b;
        var_prod += a * a * b * b;
    }
    cov /= reps;
    const double se = std::sqrt((var_prod / reps - cov * cov) / reps);
    CHECK(std::abs(cov - kernel_c(s, t)) < 3.0 * se + 0.01);
}

TEST_CASE("hw_statistic: degenerate single point") {
    ScaledResiduals y{Matrix::Zero(1, 1), ResidualSource::IidStandardized};
    const double expected = 1.0 - 2.0 / std::sqrt(2.0) + 1.0 / std::sqrt(3.0);
    CHECK(hw_statistic(y, 1.0) == Catch::Approx(expected).epsilon(1e-12));
}

TEST_CASE("hw_statistic matches its quadrature oracle") {
    for (std::uint64_t seed : {31u, 32u, 33u}) {
        const ScaledResiduals y = standardized(15, 1, seed);
        for (double bw : {0.5, 1.0}) {
            const double closed = hw_statistic(y, bw);
            const double oracle = test_oracles::integrate_hw(y, bw, 80);
            CHECK(closed == Catch::Approx(oracle).epsilon(1e-6));
        }
    }
    const ScaledResiduals y2 = standardized(12, 2, 34);
    CHECK(hw_statistic(y2, 0.5) ==
          Catch::Approx(test_oracles::integrate_hw(y2, 0.5, 64)).epsilon(1e-6));
}
