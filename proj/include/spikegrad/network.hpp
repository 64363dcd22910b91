#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "spikegrad/data_model.hpp"
#include "spikegrad/linalg.hpp"
#include "spikegrad/rng.hpp"

namespace spikegrad {

enum class Activation { relu, sigmoid, tanh, elu, swish, softplus, linear_test };
enum class Scaling { ntk, mf };

struct ActivationValue {
    double value;
    double d1;
    double d2;
};

ActivationValue activation_eval(Activation kind, double u);

// Elementwise evaluation on a preactivation matrix.
Matrix activation_apply(Activation kind, const Matrix& P);
Matrix activation_d1(Activation kind, const Matrix& P);
Matrix activation_d2(Activation kind, const Matrix& P);

// True when sigma'' vanishes identically (the Jacobian penalty gradient is then zero).
bool has_zero_second_derivative(Activation kind);

std::string to_string(Activation kind);
std::string to_string(Scaling scaling);
Activation parse_activation(std::string_view name);  // user-facing names only
Scaling parse_scaling(std::string_view name);

double gamma(Scaling scaling, Index m);

struct Network {
    Matrix W;  // m x d, unit rows
    Vector a;  // length m, entries +-1
    Scaling scaling = Scaling::ntk;
    Activation activation = Activation::relu;

    Index width() const { return W.rows(); }
    Index input_dim() const { return W.cols(); }
    double gamma() const { return spikegrad::gamma(scaling, W.rows()); }
    void validate() const;
};

struct WeightInit {
    enum class Kind { sphere, spiked, ortho_to_q, data_dependent };
    Kind kind = Kind::sphere;
    double c = 0.0;  // spiked: W_S + c 1 q^T
};

std::string to_string(WeightInit::Kind kind);
WeightInit::Kind parse_weight_init(std::string_view name);

Matrix init_weights(const WeightInit& init, Index m, Index d, const Vector& q, const Matrix* X, Rng& rng);
Vector sample_outer_weights(Index m, Rng& rng);

Vector forward(const Network& net, const Matrix& X);
Matrix weight_normalize(const Matrix& W);

// Variance of w^T x under x ~ N(0, diag(lambda) + zeta^2 q q^T + extra * I).
struct InputCovariance {
    Vector bulk;   // diagonal of the bulk covariance
    Vector q;
    double zeta = 0.0;
    double extra_isotropic = 0.0;

    static InputCovariance from_spec(const SpikedDataSpec& spec, double extra_isotropic = 0.0);
    Vector projected_variances(const Matrix& W) const;
};

// Monte-Carlo mu_j = E sigma'(w_j^T x). Each neuron draws its own n_samples
// standard normals g and averages sigma'(s_j g) with s_j^2 = w_j^T Sigma w_j,
// which has the same law as evaluating on fresh Gaussian inputs.
Vector estimate_mu(const Network& net, const InputCovariance& cov, Index n_samples, Rng& rng);
Vector estimate_mu(const Network& net, const SpikedDataSpec& spec, Index n_samples, Rng& rng);

}  // namespace spikegrad
