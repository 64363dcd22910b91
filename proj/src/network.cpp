#include "spikegrad/network.hpp"

#include <cmath>

#include "spikegrad/errors.hpp"

namespace spikegrad {

namespace {

inline double logistic(double u) {
    if (u >= 0.0) return 1.0 / (1.0 + std::exp(-u));
    const double e = std::exp(u);
    return e / (1.0 + e);
}

template <int Order>
double eval_order(Activation kind, double u) {
    const ActivationValue v = activation_eval(kind, u);
    if constexpr (Order == 0) return v.value;
    else if constexpr (Order == 1) return v.d1;
    else return v.d2;
}

}  // namespace

ActivationValue activation_eval(Activation kind, double u) {
    switch (kind) {
    case Activation::relu:
        if (u > 0.0) return {u, 1.0, 0.0};
        if (u < 0.0) return {0.0, 0.0, 0.0};
        return {0.0, 0.5, 0.0};
    case Activation::sigmoid: {
        const double s = logistic(u);
        const double d1 = s * (1.0 - s);
        return {s, d1, d1 * (1.0 - 2.0 * s)};
    }
    case Activation::tanh: {
        const double t = std::tanh(u);
        const double d1 = 1.0 - t * t;
        return {t, d1, -2.0 * t * d1};
    }
    case Activation::elu:
        if (u > 0.0) return {u, 1.0, 0.0};
        return {std::expm1(u), std::exp(u), std::exp(u)};
    case Activation::swish: {
        const double s = logistic(u);
        const double s1 = s * (1.0 - s);
        const double s2 = s1 * (1.0 - 2.0 * s);
        return {u * s, s + u * s1, 2.0 * s1 + u * s2};
    }
    case Activation::softplus: {
        const double s = logistic(u);
        const double value = std::max(u, 0.0) + std::log1p(std::exp(-std::abs(u)));
        return {value, s, s * (1.0 - s)};
    }
    case Activation::linear_test:
        return {u, 1.0, 0.0};
    }
    throw InvalidArgument("activation_eval: unknown activation");
}

Matrix activation_apply(Activation kind, const Matrix& P) {
    return P.unaryExpr([kind](double u) { return eval_order<0>(kind, u); });
}

Matrix activation_d1(Activation kind, const Matrix& P) {
    return P.unaryExpr([kind](double u) { return eval_order<1>(kind, u); });
}

Matrix activation_d2(Activation kind, const Matrix& P) {
    return P.unaryExpr([kind](double u) { return eval_order<2>(kind, u); });
}

bool has_zero_second_derivative(Activation kind) {
    return kind == Activation::relu || kind == Activation::linear_test;
}

std::string to_string(Activation kind) {
    switch (kind) {
    case Activation::relu: return "relu";
    case Activation::sigmoid: return "sigmoid";
    case Activation::tanh: return "tanh";
    case Activation::elu: return "elu";
    case Activation::swish: return "swish";
    case Activation::softplus: return "softplus";
    case Activation::linear_test: return "linear_test";
    }
    return "unknown";
}

std::string to_string(Scaling scaling) {
    return scaling == Scaling::ntk ? "ntk" : "mf";
}

Activation parse_activation(std::string_view name) {
    if (name == "relu") return Activation::relu;
    if (name == "sigmoid") return Activation::sigmoid;
    if (name == "tanh") return Activation::tanh;
    if (name == "elu") return Activation::elu;
    if (name == "swish") return Activation::swish;
    if (name == "softplus") return Activation::softplus;
    throw InvalidArgument("unknown activation '" + std::string(name) + "'");
}

Scaling parse_scaling(std::string_view name) {
    if (name == "ntk") return Scaling::ntk;
    if (name == "mf") return Scaling::mf;
    throw InvalidArgument("unknown scaling '" + std::string(name) + "'");
}

double gamma(Scaling scaling, Index m) {
    if (m < 1) throw InvalidArgument("gamma: width must be positive");
    const double md = static_cast<double>(m);
    return scaling == Scaling::ntk ? 1.0 / std::sqrt(md) : 1.0 / md;
}

void Network::validate() const {
    if (a.size() != W.rows()) throw ShapeMismatch("Network: a must have one entry per row of W");
    for (Index j = 0; j < W.rows(); ++j) {
        if (std::abs(W.row(j).norm() - 1.0) > 1e-10) throw InvalidArgument("Network: rows of W must be unit norm");
        if (std::abs(a(j)) != 1.0) throw InvalidArgument("Network: outer weights must be +-1");
    }
}

std::string to_string(WeightInit::Kind kind) {
    switch (kind) {
    case WeightInit::Kind::sphere: return "sphere";
    case WeightInit::Kind::spiked: return "spiked";
    case WeightInit::Kind::ortho_to_q: return "ortho_to_q";
    case WeightInit::Kind::data_dependent: return "data_dependent";
    }
    return "unknown";
}

WeightInit::Kind parse_weight_init(std::string_view name) {
    if (name == "sphere") return WeightInit::Kind::sphere;
    if (name == "spiked") return WeightInit::Kind::spiked;
    if (name == "ortho_to_q") return WeightInit::Kind::ortho_to_q;
    if (name == "data_dependent") return WeightInit::Kind::data_dependent;
    throw InvalidArgument("unknown weight init '" + std::string(name) + "'");
}

Matrix init_weights(const WeightInit& init, Index m, Index d, const Vector& q, const Matrix* X, Rng& rng) {
    if (q.size() != d) throw ShapeMismatch("init_weights: q must have length d");
    if (init.kind == WeightInit::Kind::data_dependent) {
        if (X == nullptr) throw MissingData("init_weights: data_dependent mode needs X");
        if (X->cols() != d) throw ShapeMismatch("init_weights: X must have d columns");
    }
    Matrix W = weight_normalize(rng.normal_matrix(m, d));
    switch (init.kind) {
    case WeightInit::Kind::sphere:
        return W;
    case WeightInit::Kind::spiked:
        W.rowwise() += init.c * q.transpose();
        return weight_normalize(W);
    case WeightInit::Kind::ortho_to_q: {
        W -= (W * q) * q.transpose();
        W = weight_normalize(W);
        W -= (W * q) * q.transpose();  // second pass removes rounding residue
        return weight_normalize(W);
    }
    case WeightInit::Kind::data_dependent: {
        const Matrix WXt = W * X->transpose();
        return weight_normalize(WXt * *X);
    }
    }
    throw InvalidArgument("init_weights: unknown mode");
}

Vector sample_outer_weights(Index m, Rng& rng) {
    Vector a(m);
    for (Index j = 0; j < m; ++j) a(j) = rng.sign();
    return a;
}

Vector forward(const Network& net, const Matrix& X) {
    if (X.cols() != net.input_dim()) throw ShapeMismatch("forward: X has wrong column count");
    const Matrix P = X * net.W.transpose();
    return net.gamma() * (activation_apply(net.activation, P) * net.a);
}

Matrix weight_normalize(const Matrix& W) {
    Matrix out = W;
    for (Index j = 0; j < W.rows(); ++j) {
        const double norm = W.row(j).norm();
        if (!(norm > 0.0)) throw ZeroRow("weight_normalize: row " + std::to_string(j) + " has zero norm");
        out.row(j) /= norm;
    }
    return out;
}

InputCovariance InputCovariance::from_spec(const SpikedDataSpec& spec, double extra_isotropic) {
    InputCovariance cov;
    cov.bulk = bulk_eigenvalues(spec.d, spec.alpha);
    cov.q = spec.q;
    cov.zeta = spec.zeta();
    cov.extra_isotropic = extra_isotropic;
    return cov;
}

Vector InputCovariance::projected_variances(const Matrix& W) const {
    if (bulk.size() != W.cols()) throw ShapeMismatch("projected_variances: dimension mismatch");
    Vector var = W.cwiseAbs2() * bulk;
    if (zeta != 0.0) var += (zeta * zeta) * (W * q).cwiseAbs2();
    if (extra_isotropic != 0.0) var += extra_isotropic * W.rowwise().squaredNorm();
    return var;
}

Vector estimate_mu(const Network& net, const InputCovariance& cov, Index n_samples, Rng& rng) {
    if (n_samples < 1) throw InvalidArgument("estimate_mu: n_samples must be positive");
    const Vector scale = cov.projected_variances(net.W).cwiseSqrt();
    const Vector g = rng.normal_vector(n_samples);
    Vector mu(net.width());
    for (Index j = 0; j < net.width(); ++j) {
        double acc = 0.0;
        for (Index k = 0; k < n_samples; ++k) acc += activation_eval(net.activation, scale(j) * g(k)).d1;
        mu(j) = acc / static_cast<double>(n_samples);
    }
    return mu;
}

Vector estimate_mu(const Network& net, const SpikedDataSpec& spec, Index n_samples, Rng& rng) {
    return estimate_mu(net, InputCovariance::from_spec(spec), n_samples, rng);
}

}  // namespace spikegrad
