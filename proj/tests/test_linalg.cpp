#include <catch2/catch_amalgamated.hpp>

#include "mgfnorm/linalg.hpp"
#include "mgfnorm/montecarlo.hpp"
#include "mgfnorm/rng.hpp"

using namespace mgfnorm;

namespace {

Sample random_sample(int n, int d, std::uint64_t seed) {
    RngStream stream(seed);
    Matrix m(n, d);
    for (Index i = 0; i < n; ++i) {
        for (Index j = 0; j < d; ++j) m(i, j) = stream.normal();
    }
    return Sample(std::move(m));
}

}  // namespace

TEST_CASE("sample_mean_cov: hand arithmetic, divisor n") {
    Matrix m(2, 1);
    m << 0.0, 2.0;
    auto [mean, cov] = sample_mean_cov(Sample(m));
    CHECK(mean(0) == Catch::Approx(1.0));
    CHECK(cov.m(0, 0) == Catch::Approx(1.0));  // divisor n = 2, not n - 1
}

TEST_CASE("sample_mean_cov: whitened large sample is near identity", "[slow]") {
    RngStream stream(77);
    const Sample s = sample_standard_normal(10000, 2, stream);
    auto [mean, cov] = sample_mean_cov(s);
    for (Index i = 0; i < 2; ++i) {
        for (Index j = 0; j < 2; ++j) {
            CHECK(std::abs(cov.m(i, j) - (i == j ? 1.0 : 0.0)) < 0.1);
        }
    }
}

TEST_CASE("sample_mean_cov: repeated column is singular") {
    Matrix m(5, 2);
    RngStream stream(3);
    for (Index i = 0; i < 5; ++i) {
        m(i, 0) = stream.normal();
        m(i, 1) = m(i, 0);
    }
    CHECK_THROWS_AS(sample_mean_cov(Sample(m)), SingularCovariance);
}

TEST_CASE("Sample rejects n < d + 1 and non-finite entries") {
    CHECK_THROWS_AS(Sample(Matrix::Zero(2, 2)), std::invalid_argument);
    Matrix bad = Matrix::Zero(4, 2);
    bad(1, 1) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(Sample(bad), std::invalid_argument);
}

TEST_CASE("sym_inv_sqrt: identity and diagonal cases") {
    const Matrix id = Matrix::Identity(3, 3);
    CHECK((sym_inv_sqrt(SymmetricPD{id}).m - id).cwiseAbs().maxCoeff() < 1e-14);

    Matrix diag = Matrix::Zero(2, 2);
    diag(0, 0) = 4.0;
    diag(1, 1) = 9.0;
    const Matrix r = sym_inv_sqrt(SymmetricPD{diag}).m;
    CHECK(r(0, 0) == Catch::Approx(0.5));
    CHECK(r(1, 1) == Catch::Approx(1.0 / 3.0));
    CHECK(std::abs(r(0, 1)) < 1e-15);
}

TEST_CASE("sym_inv_sqrt: defining equation on random SPD matrices") {
    RngStream stream(11);
    for (int trial = 0; trial < 25; ++trial) {
        const int d = 1 + static_cast<int>(stream.next_u64() % 5);
        Matrix a(d, d);
        for (Index i = 0; i < d; ++i) {
            for (Index j = 0; j < d; ++j) a(i, j) = stream.normal();
        }
        Matrix spd = a * a.transpose() + 0.5 * Matrix::Identity(d, d);
        const Matrix r = sym_inv_sqrt(SymmetricPD{spd}).m;
        CHECK((r - r.transpose()).cwiseAbs().maxCoeff() < 1e-12);
        CHECK((r * spd * r - Matrix::Identity(d, d)).cwiseAbs().maxCoeff() < 1e-10);
    }
}

TEST_CASE("scale_residuals: 1-D two-point case") {
    Matrix m(2, 1);
    m << 0.0, 2.0;
    const ScaledResiduals y = scale_residuals(Sample(m));
    CHECK(y.y(0, 0) == Catch::Approx(-1.0));
    CHECK(y.y(1, 0) == Catch::Approx(1.0));
}

TEST_CASE("scale_residuals: construction identities") {
    for (std::uint64_t seed : {1u, 2u, 3u, 4u, 5u}) {
        const int n = 30 + static_cast<int>(seed);
        const int d = 1 + static_cast<int>(seed % 4);
        const ScaledResiduals y = scale_residuals(random_sample(n, d, seed));

        const Vector colsum = y.y.colwise().sum().transpose();
        CHECK(colsum.cwiseAbs().maxCoeff() < 1e-8 * n);

        const Matrix gram_cov = y.y.transpose() * y.y / static_cast<double>(n);
        CHECK((gram_cov - Matrix::Identity(d, d)).cwiseAbs().maxCoeff() < 1e-8);

        // sum of squared norms = n * d comes with the covariance identity
        CHECK(y.y.squaredNorm() == Catch::Approx(static_cast<double>(n) * d).epsilon(1e-8));
    }
}

TEST_CASE("scale_residuals: affine invariance of the Gram matrix") {
    RngStream stream(99);
    const int n = 25, d = 3;
    const Sample base = random_sample(n, d, 1234);
    const Matrix gram0 = scale_residuals(base).y * scale_residuals(base).y.transpose();

    for (int trial = 0; trial < 20; ++trial) {
        Matrix a(d, d);
        do {
            for (Index i = 0; i < d; ++i) {
                for (Index j = 0; j < d; ++j) a(i, j) = stream.normal();
            }
        } while (std::abs(a.determinant()) < 1e-3);
        Vector shift(d);
        for (Index i = 0; i < d; ++i) shift(i) = 10.0 * stream.normal();

        Matrix transformed = base.data * a.transpose();
        transformed.rowwise() += shift.transpose();
        const Matrix gram1 =
            scale_residuals(Sample(transformed)).y * scale_residuals(Sample(transformed)).y.transpose();
        const double scale = gram0.cwiseAbs().maxCoeff();
        CHECK((gram1 - gram0).cwiseAbs().maxCoeff() < 1e-8 * scale);
    }
}
