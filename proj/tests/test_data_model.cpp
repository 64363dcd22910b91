#include <cmath>

#include <gtest/gtest.h>

#include "spikegrad/data_model.hpp"
#include "spikegrad/errors.hpp"

using namespace spikegrad;

namespace {

SpikedDataSpec spec_with_q(Index n, Index d, double nu, double alpha, Vector q) {
    SpikedDataSpec s;
    s.n = n;
    s.d = d;
    s.nu = nu;
    s.alpha = alpha;
    s.q = std::move(q);
    return s;
}

Vector unit(Index d, Index k) {
    Vector e = Vector::Zero(d);
    e(k) = 1.0;
    return e;
}

double variance(const Vector& v) {
    return (v.array() - v.mean()).square().sum() / static_cast<double>(v.size() - 1);
}

}  // namespace

TEST(BulkEigenvalues, Examples) {
    EXPECT_EQ(bulk_eigenvalues(4, 0.0), Vector::Ones(4));
    const Vector b = bulk_eigenvalues(3, 1.0);
    EXPECT_DOUBLE_EQ(b(0), 1.0);
    EXPECT_DOUBLE_EQ(b(1), 0.5);
    EXPECT_DOUBLE_EQ(b(2), 1.0 / 3.0);
    const Vector c = bulk_eigenvalues(2, 2.0);
    EXPECT_DOUBLE_EQ(c(1), 0.25);
}

TEST(BulkEigenvalues, NonincreasingWithUnitTop) {
    for (double alpha : {0.0, 0.3, 5.0 / 9.0, 8.0 / 9.0, 2.5}) {
        const Vector b = bulk_eigenvalues(200, alpha);
        EXPECT_EQ(b(0), 1.0);
        for (Index k = 1; k < b.size(); ++k) EXPECT_LE(b(k), b(k - 1));
        EXPECT_GT(b.minCoeff(), 0.0);
    }
}

TEST(SpikedData, SpecValidation) {
    EXPECT_THROW(spec_with_q(10, 3, 0.1, 0.0, Vector::Ones(3)).validate(), InvalidArgument);
    EXPECT_THROW(spec_with_q(10, 3, -0.1, 0.0, unit(3, 0)).validate(), InvalidArgument);
    EXPECT_THROW(spec_with_q(10, 3, 0.1, 0.0, unit(4, 0)).validate(), ShapeMismatch);
    EXPECT_NO_THROW(spec_with_q(10, 3, 0.1, 0.0, unit(3, 0)).validate());
}

TEST(SpikedData, ZetaIsExactPower) {
    auto s = spec_with_q(750, 4, 0.375, 0.0, unit(4, 0));
    Rng rng(1);
    const DataSample x = sample_spiked_data(s, rng);
    EXPECT_EQ(x.zeta, std::pow(750.0, 0.375));
}

TEST(SpikedData, ReconstructionIsExact) {
    Rng rng(4);
    for (double nu : {0.0, 0.25, 0.75}) {
        auto s = make_data_spec(60, 40, nu, 0.5, rng);
        const DataSample x = sample_spiked_data(s, rng);
        const Matrix rebuilt = x.X_B + x.zeta * x.z * x.q.transpose();
        EXPECT_LE((x.X - rebuilt).norm(), 1e-10);
    }
}

TEST(SpikedData, ZetaZeroGivesBulkOnly) {
    Rng rng(2);
    auto s = make_data_spec(30, 10, 0.5, 0.0, rng, true);
    const DataSample x = sample_spiked_data(s, rng);
    EXPECT_EQ(x.zeta, 0.0);
    EXPECT_EQ((x.X - x.X_B).norm(), 0.0);
}

TEST(SpikedData, SpikeVarianceAlongQ) {
    // nu = 0 and alpha = 0 give Var(x^T e1) = 1 + 1 with q = e1.
    const Index n = 100000;
    auto s = spec_with_q(n, 3, 0.0, 0.0, unit(3, 0));
    Rng rng(10);
    const DataSample x = sample_spiked_data(s, rng);
    const double se = std::sqrt(2.0 * 4.0 / n);
    EXPECT_NEAR(variance(x.X.col(0)), 2.0, 3.0 * se);
}

TEST(SpikedData, ScalarVarianceSum) {
    const Index n = 1000;
    auto s = spec_with_q(n, 1, 0.25, 0.0, unit(1, 0));
    Rng rng(12);
    const DataSample x = sample_spiked_data(s, rng);
    const double expected = 1.0 + std::pow(1000.0, 0.5);
    EXPECT_NEAR(variance(x.X.col(0)), expected, 4.0 * expected * std::sqrt(2.0 / n));
}

TEST(SpikedData, CovarianceConsistency) {
    const Index n = 100000, d = 10;
    Rng rng(21);
    auto s = make_data_spec(n, d, 0.1, 0.5, rng);
    const DataSample x = sample_spiked_data(s, rng);
    Matrix sigma = bulk_eigenvalues(d, 0.5).asDiagonal();
    sigma += x.zeta * x.zeta * x.q * x.q.transpose();
    const Matrix emp = x.X.transpose() * x.X / static_cast<double>(n);
    for (Index i = 0; i < d; ++i)
        for (Index j = 0; j < d; ++j) {
            const double se = std::sqrt((sigma(i, i) * sigma(j, j) + sigma(i, j) * sigma(i, j)) / n);
            EXPECT_NEAR(emp(i, j), sigma(i, j), 5.0 * se) << i << "," << j;
        }
}

TEST(SpikedData, DeterministicGivenSeed) {
    Rng a(77), b(77);
    auto sa = make_data_spec(20, 5, 0.3, 0.2, a);
    auto sb = make_data_spec(20, 5, 0.3, 0.2, b);
    EXPECT_EQ((sample_spiked_data(sa, a).X - sample_spiked_data(sb, b).X).norm(), 0.0);
}

TEST(Center, Examples) {
    Matrix x(2, 1);
    x << 1, 3;
    Matrix want(2, 1);
    want << -1, 1;
    EXPECT_EQ(center(x), want);

    Matrix c = Matrix::Constant(4, 2, 7.5);
    EXPECT_EQ(center(c).norm(), 0.0);

    Rng rng(3);
    const Matrix y = center(rng.normal_matrix(50, 6));
    EXPECT_LE(y.colwise().mean().cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_LE((center(y) - y).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(SpikeEstimate, LogLogOlsRecoversExactPowerLaw) {
    const Vector ev = bulk_eigenvalues(500, 0.7);
    EXPECT_NEAR(loglog_alpha(ev, 2, 400, 1e-12), 0.7, 1e-12);
}

TEST(SpikeEstimate, DegenerateSpectrumThrows) {
    EXPECT_THROW(estimate_spike_exponent(Matrix::Zero(10, 4)), DegenerateSpectrum);
}

TEST(SpikeEstimate, RecoversNuFromSyntheticData) {
    Rng rng(31);
    auto s = make_data_spec(2000, 1000, 0.4, 0.0, rng);
    const DataSample x = sample_spiked_data(s, rng);
    const SpikeEstimate est = estimate_spike_exponent(center(x.X));
    EXPECT_GE(est.nu_hat, 0.35);
    EXPECT_LE(est.nu_hat, 0.45);
    for (Index k = 1; k < est.bulk_eigenvalues.size(); ++k)
        EXPECT_LE(est.bulk_eigenvalues(k), est.bulk_eigenvalues(k - 1));
}

TEST(SpikeEstimate, WhiteNoiseHasNoSpike) {
    Rng rng(32);
    const Matrix x = rng.normal_matrix(2000, 1000);
    EXPECT_LE(estimate_spike_exponent(center(x)).nu_hat, 0.1);
}

class RoundTrip : public ::testing::TestWithParam<std::pair<double, double>> {};

TEST_P(RoundTrip, RecoversNuAndAlpha) {
    const auto [nu, alpha] = GetParam();
    Rng rng(1000 + static_cast<std::uint64_t>(nu * 100 + alpha * 10));
    auto s = make_data_spec(2000, 1500, nu, alpha, rng);
    const DataSample x = sample_spiked_data(s, rng);
    const SpikeEstimate est = estimate_spike_exponent(center(x.X));
    if (nu >= 0.25) {
        EXPECT_NEAR(est.nu_hat, nu, 0.07);
    } else {
        EXPECT_LE(est.nu_hat, 0.1);
    }
    EXPECT_NEAR(est.alpha_hat, alpha, 0.15);
}

INSTANTIATE_TEST_SUITE_P(Grid, RoundTrip,
                         ::testing::Values(std::pair{0.0, 0.0}, std::pair{0.0, 0.5}, std::pair{0.25, 0.0},
                                           std::pair{0.25, 0.5}, std::pair{0.5, 0.0}, std::pair{0.5, 0.5}));
