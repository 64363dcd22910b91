#pragma once

#include "spikegrad/data_model.hpp"
#include "spikegrad/linalg.hpp"
#include "spikegrad/loss_residue.hpp"
#include "spikegrad/network.hpp"

namespace spikegrad {

// Gradients are d x m (the gradient with respect to W^T).
Matrix gradient_from_residue(const Network& net, const Matrix& X, const Vector& r);
Matrix gradient(const Network& net, const Matrix& X, const Vector& y, Loss loss);

struct GradientDecomposition {
    Matrix G;
    RankOne S1;   // residue spike, left factor X_B^T r
    RankOne S12;  // interpolant, left factor q, right factor a o mu
    RankOne S2;   // data spike, left factor q
    Matrix E;
    Vector mu;
    Matrix sigma_perp;  // n x m
    Vector r;

    // S1 + S12 + S2; rank at most two.
    LowRank spikes() const;
    double reconstruction_error() const;  // ||G - S1 - S12 - S2 - E||_F / ||G||_F
};

GradientDecomposition decompose(const Network& net, const DataSample& sample, const Vector& y, Loss loss,
                                const Vector& mu);
GradientDecomposition decompose_residue(const Network& net, const DataSample& sample, const Vector& r,
                                        const Vector& mu);

Matrix sigma_prime_perp(const Network& net, const Matrix& X, const Vector& mu);

// Large-spike ReLU limit: (1/2) sign(z) sign(Wq)^T.
Matrix relu_perp_closed_form(const DataSample& sample, const Matrix& W);

// m x d, the gradient of (lambda/2)||W||_F^2.
Matrix weight_decay_gradient(const Matrix& W, double lambda);

// Penalty lambda/(2n) sum_i ||d f(x_i)/dW||_F^2.
double jacobian_penalty_value(const Network& net, const Matrix& X, double lambda);
// Psi = diag(||x_i||^2) (sigma' o sigma'')(X W^T), n x m.
Matrix jacobian_psi(const Network& net, const Matrix& X);
// d x m gradient of the penalty.
Matrix jacobian_penalty_grad(const Network& net, const Matrix& X, double lambda);

struct JacobianPenaltyPieces {
    Matrix grad;  // d x m, lambda (S3 + E2)
    RankOne S3;   // (gamma^2/n) X_S^T Psi, without lambda
    Matrix E2;    // (gamma^2/n) X_B^T Psi, without lambda
    Matrix Psi;
    bool exact_zero = false;  // sigma'' vanishes identically (relu, linear_test)
};

JacobianPenaltyPieces jacobian_penalty_gradient(const Network& net, const DataSample& sample, double lambda);

Matrix add_input_noise(const Matrix& X, double tau2, Rng& rng);
// Same noise added to X and X_B, so the bulk/spike split is kept.
DataSample add_input_noise(const DataSample& sample, double tau2, Rng& rng);

}  // namespace spikegrad
