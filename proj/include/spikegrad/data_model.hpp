#pragma once

#include <cstdint>

#include "spikegrad/linalg.hpp"
#include "spikegrad/rng.hpp"

namespace spikegrad {

// Rows of X ~ N(0, diag(k^-alpha) + zeta^2 q q^T) with zeta = n^nu.
struct SpikedDataSpec {
    Index n = 1;
    Index d = 1;
    double nu = 0.0;
    double alpha = 0.0;
    Vector q;                // unit spike direction
    bool zeta_zero = false;  // spike switched off entirely
    std::uint64_t seed = 0;

    double zeta() const;
    void validate() const;
};

// Fills q uniformly on the sphere.
SpikedDataSpec make_data_spec(Index n, Index d, double nu, double alpha, Rng& rng,
                              bool zeta_zero = false);

struct DataSample {
    Matrix X;    // X_B + zeta z q^T
    Matrix X_B;  // bulk
    Vector z;    // spike coordinates
    double zeta = 0.0;
    Vector q;

    Index n() const { return X.rows(); }
    Index d() const { return X.cols(); }
    RankOne spike() const { return RankOne(z, q, zeta); }
};

Vector bulk_eigenvalues(Index d, double alpha);

DataSample sample_spiked_data(const SpikedDataSpec& spec, Rng& rng);
DataSample sample_spiked_data(const SpikedDataSpec& spec);  // uses Rng(spec.seed)

Matrix center(const Matrix& X);

enum class AlphaMethod {
    simulation_matched,  // fit a simulated Gaussian bulk to the observed log spectrum
    loglog_ols           // plain least squares of log lambda_k on log k
};

struct SpikeEstimateOptions {
    double floor = 1e-12;
    double fit_fraction = 0.8;  // ranks 2 .. floor(fraction * min(n, d))
    AlphaMethod alpha_method = AlphaMethod::simulation_matched;
    double alpha_max = 3.0;
    std::uint64_t simulation_seed = 12345;
};

struct SpikeEstimate {
    double nu_hat = 0.0;
    double alpha_hat = 0.0;
    double top_eigenvalue = 0.0;
    Vector bulk_eigenvalues;  // nonincreasing, ranks 2..min(n, d)
};

// Eigenvalues of (1/n) X^T X, nonincreasing, length min(n, d).
Vector covariance_eigenvalues(const Matrix& X);

SpikeEstimate estimate_spike_exponent(const Matrix& X, const SpikeEstimateOptions& options = {});

double loglog_alpha(const Vector& eigenvalues, Index first_rank, Index last_rank, double floor);

}  // namespace spikegrad
