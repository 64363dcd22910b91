#include "spikegrad/gradient_decomp.hpp"

#include <cmath>

#include "spikegrad/errors.hpp"

namespace spikegrad {

namespace {

void check_shapes(const Network& net, const Matrix& X, Index n_vec, const char* where) {
    if (X.cols() != net.input_dim()) throw ShapeMismatch(std::string(where) + ": X has wrong column count");
    if (n_vec != X.rows()) throw ShapeMismatch(std::string(where) + ": vector length differs from row count");
    if (net.a.size() != net.width()) throw ShapeMismatch(std::string(where) + ": a has wrong length");
}

}  // namespace

Matrix gradient_from_residue(const Network& net, const Matrix& X, const Vector& r) {
    check_shapes(net, X, r.size(), "gradient");
    const Matrix D = activation_d1(net.activation, X * net.W.transpose());
    const Matrix M = r.asDiagonal() * D * net.a.asDiagonal();
    return (net.gamma() / static_cast<double>(X.rows())) * (X.transpose() * M);
}

Matrix gradient(const Network& net, const Matrix& X, const Vector& y, Loss loss) {
    check_shapes(net, X, y.size(), "gradient");
    return gradient_from_residue(net, X, residue(loss, forward(net, X), y));
}

LowRank GradientDecomposition::spikes() const {
    LowRank B(G.rows(), G.cols());
    B.add(S1);
    B.add(S12);
    B.add(S2);
    return B;
}

double GradientDecomposition::reconstruction_error() const {
    const Matrix diff = G - S1.dense() - S12.dense() - S2.dense() - E;
    const double g = G.norm();
    return g > 0.0 ? diff.norm() / g : diff.norm();
}

Matrix sigma_prime_perp(const Network& net, const Matrix& X, const Vector& mu) {
    if (mu.size() != net.width()) throw ShapeMismatch("sigma_prime_perp: mu must have length m");
    if (X.cols() != net.input_dim()) throw ShapeMismatch("sigma_prime_perp: X has wrong column count");
    Matrix D = activation_d1(net.activation, X * net.W.transpose());
    D.rowwise() -= mu.transpose();
    return D;
}

GradientDecomposition decompose_residue(const Network& net, const DataSample& sample, const Vector& r,
                                        const Vector& mu) {
    check_shapes(net, sample.X, r.size(), "decompose");
    if (mu.size() != net.width()) throw ShapeMismatch("decompose: mu must have length m");
    if (sample.X_B.rows() != sample.X.rows() || sample.X_B.cols() != sample.X.cols())
        throw ShapeMismatch("decompose: X_B shape differs from X");

    const double n = static_cast<double>(sample.n());
    const double g = net.gamma();
    const double zeta = sample.zeta;

    GradientDecomposition out;
    out.r = r;
    out.mu = mu;
    const Matrix D = activation_d1(net.activation, sample.X * net.W.transpose());
    out.sigma_perp = D.rowwise() - mu.transpose();

    const Matrix M = r.asDiagonal() * D * net.a.asDiagonal();
    const Matrix Mperp = r.asDiagonal() * out.sigma_perp * net.a.asDiagonal();
    const Vector a_mu = net.a.cwiseProduct(mu);

    out.G = (g / n) * (sample.X.transpose() * M);
    out.S1 = RankOne(sample.X_B.transpose() * r, a_mu, g / n);
    out.S12 = RankOne(sample.q, a_mu, g * zeta * sample.z.dot(r) / n);
    out.S2 = RankOne(sample.q, Mperp.transpose() * sample.z, g * zeta / n);
    out.E = (g / n) * (sample.X_B.transpose() * Mperp);
    return out;
}

GradientDecomposition decompose(const Network& net, const DataSample& sample, const Vector& y, Loss loss,
                                const Vector& mu) {
    check_shapes(net, sample.X, y.size(), "decompose");
    return decompose_residue(net, sample, residue(loss, forward(net, sample.X), y), mu);
}

Matrix relu_perp_closed_form(const DataSample& sample, const Matrix& W) {
    if (W.cols() != sample.q.size()) throw ShapeMismatch("relu_perp_closed_form: W has wrong column count");
    const auto sgn = [](double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); };
    const Vector sz = sample.z.unaryExpr(sgn);
    const Vector sw = (W * sample.q).unaryExpr(sgn);
    return 0.5 * sz * sw.transpose();
}

Matrix weight_decay_gradient(const Matrix& W, double lambda) {
    if (!(lambda >= 0.0)) throw InvalidArgument("weight_decay_gradient: lambda must be nonnegative");
    return lambda * W;
}

Matrix jacobian_psi(const Network& net, const Matrix& X) {
    if (X.cols() != net.input_dim()) throw ShapeMismatch("jacobian_psi: X has wrong column count");
    const Matrix P = X * net.W.transpose();
    Matrix Psi = activation_d1(net.activation, P).cwiseProduct(activation_d2(net.activation, P));
    return X.rowwise().squaredNorm().asDiagonal() * Psi;
}

double jacobian_penalty_value(const Network& net, const Matrix& X, double lambda) {
    if (X.cols() != net.input_dim()) throw ShapeMismatch("jacobian_penalty_value: X has wrong column count");
    const Matrix D = activation_d1(net.activation, X * net.W.transpose());
    const Vector per_sample = (D.cwiseAbs2() * net.a.cwiseAbs2()).cwiseProduct(X.rowwise().squaredNorm());
    const double g = net.gamma();
    return lambda * g * g * per_sample.sum() / (2.0 * static_cast<double>(X.rows()));
}

Matrix jacobian_penalty_grad(const Network& net, const Matrix& X, double lambda) {
    if (!(lambda >= 0.0)) throw InvalidArgument("jacobian_penalty_grad: lambda must be nonnegative");
    if (has_zero_second_derivative(net.activation)) return Matrix::Zero(net.input_dim(), net.width());
    const double g = net.gamma();
    return (lambda * g * g / static_cast<double>(X.rows())) * (X.transpose() * jacobian_psi(net, X));
}

JacobianPenaltyPieces jacobian_penalty_gradient(const Network& net, const DataSample& sample, double lambda) {
    if (!(lambda >= 0.0)) throw InvalidArgument("jacobian_penalty_gradient: lambda must be nonnegative");
    const Index d = net.input_dim(), m = net.width();
    JacobianPenaltyPieces out;
    out.exact_zero = has_zero_second_derivative(net.activation);
    if (out.exact_zero) {
        out.grad = Matrix::Zero(d, m);
        out.E2 = Matrix::Zero(d, m);
        out.S3 = RankOne(sample.q, Vector::Zero(m), 0.0);
        out.Psi = Matrix::Zero(sample.n(), m);
        return out;
    }
    const double g = net.gamma();
    const double n = static_cast<double>(sample.n());
    out.Psi = jacobian_psi(net, sample.X);
    out.E2 = (g * g / n) * (sample.X_B.transpose() * out.Psi);
    out.S3 = RankOne(sample.q, out.Psi.transpose() * sample.z, g * g * sample.zeta / n);
    out.grad = lambda * (out.E2 + out.S3.dense());
    return out;
}

Matrix add_input_noise(const Matrix& X, double tau2, Rng& rng) {
    if (!(tau2 >= 0.0)) throw InvalidArgument("add_input_noise: tau2 must be nonnegative");
    if (tau2 == 0.0) return X;
    return X + rng.normal_matrix(X.rows(), X.cols(), std::sqrt(tau2));
}

DataSample add_input_noise(const DataSample& sample, double tau2, Rng& rng) {
    if (!(tau2 >= 0.0)) throw InvalidArgument("add_input_noise: tau2 must be nonnegative");
    DataSample out = sample;
    if (tau2 == 0.0) return out;
    const Matrix noise = rng.normal_matrix(sample.n(), sample.d(), std::sqrt(tau2));
    out.X += noise;
    out.X_B += noise;
    return out;
}

}  // namespace spikegrad
