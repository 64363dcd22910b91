#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "spikegrad/errors.hpp"
#include "spikegrad/network.hpp"

using namespace spikegrad;

namespace {

const std::vector<Activation> kAll = {Activation::relu,  Activation::sigmoid,  Activation::tanh,       Activation::elu,
                                      Activation::swish, Activation::softplus, Activation::linear_test};

bool is_c2(Activation a) {
    return a == Activation::sigmoid || a == Activation::tanh || a == Activation::swish ||
           a == Activation::softplus || a == Activation::linear_test;
}

Network make_net(Matrix W, Vector a, Scaling s, Activation act) {
    Network net;
    net.W = std::move(W);
    net.a = std::move(a);
    net.scaling = s;
    net.activation = act;
    return net;
}

}  // namespace

TEST(Activation, PaperValues) {
    auto v = activation_eval(Activation::sigmoid, 0.0);
    EXPECT_DOUBLE_EQ(v.value, 0.5);
    EXPECT_DOUBLE_EQ(v.d1, 0.25);
    EXPECT_DOUBLE_EQ(v.d2, 0.0);

    v = activation_eval(Activation::relu, -3.0);
    EXPECT_EQ(v.value, 0.0);
    EXPECT_EQ(v.d1, 0.0);
    EXPECT_EQ(v.d2, 0.0);
    v = activation_eval(Activation::relu, 3.0);
    EXPECT_EQ(v.value, 3.0);
    EXPECT_EQ(v.d1, 1.0);
    EXPECT_EQ(v.d2, 0.0);

    v = activation_eval(Activation::swish, 0.0);
    EXPECT_DOUBLE_EQ(v.value, 0.0);
    EXPECT_DOUBLE_EQ(v.d1, 0.5);
    EXPECT_DOUBLE_EQ(v.d2, 0.5);
}

TEST(Activation, ReluKinkConvention) {
    const auto v = activation_eval(Activation::relu, 0.0);
    EXPECT_EQ(v.value, 0.0);
    EXPECT_EQ(v.d1, 0.5);
    EXPECT_EQ(v.d2, 0.0);
}

TEST(Activation, ClosedForms) {
    for (double u : {-2.5, -0.3, 0.7, 4.0}) {
        const double s = 1.0 / (1.0 + std::exp(-u));
        EXPECT_NEAR(activation_eval(Activation::sigmoid, u).value, s, 1e-15);
        EXPECT_NEAR(activation_eval(Activation::tanh, u).d1, 1.0 - std::tanh(u) * std::tanh(u), 1e-15);
        EXPECT_NEAR(activation_eval(Activation::softplus, u).value, std::log(1.0 + std::exp(u)), 1e-14);
        EXPECT_NEAR(activation_eval(Activation::swish, u).value, u * s, 1e-15);
        EXPECT_NEAR(activation_eval(Activation::elu, u).value, u > 0 ? u : std::exp(u) - 1.0, 1e-15);
    }
    // Large inputs stay finite.
    for (Activation a : kAll) {
        for (double u : {-800.0, 800.0}) {
            const auto v = activation_eval(a, u);
            EXPECT_TRUE(std::isfinite(v.d1) && std::isfinite(v.d2)) << to_string(a);
        }
    }
}

TEST(Activation, FiniteDifferenceConsistency) {
    const double h = 1e-4;
    for (Activation a : kAll) {
        for (double u = -10.0; u <= 10.0; u += 0.137) {
            if (std::abs(u) < 1e-3) continue;  // kinks of relu and elu
            const double fd1 = (activation_eval(a, u + h).value - activation_eval(a, u - h).value) / (2 * h);
            EXPECT_NEAR(fd1, activation_eval(a, u).d1, 1e-6) << to_string(a) << " u=" << u;
            if (is_c2(a) || (std::abs(u) > 2 * h && a != Activation::relu)) {
                const double fd2 = (activation_eval(a, u + h).d1 - activation_eval(a, u - h).d1) / (2 * h);
                EXPECT_NEAR(fd2, activation_eval(a, u).d2, 1e-6) << to_string(a) << " u=" << u;
            }
        }
    }
}

TEST(Activation, LipschitzBoundTwo) {
    const double L = 2.0;
    std::vector<double> grid;
    for (double u = -10.0; u <= 10.0; u += 0.05) grid.push_back(u);
    for (Activation a : kAll) {
        for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
            for (std::size_t j = i + 1; j < grid.size(); j += 7) {
                const double du = grid[j] - grid[i];
                const auto vi = activation_eval(a, grid[i]), vj = activation_eval(a, grid[j]);
                EXPECT_LE(std::abs(vj.value - vi.value), L * du + 1e-12) << to_string(a);
                if (a != Activation::relu) EXPECT_LE(std::abs(vj.d1 - vi.d1), L * du + 1e-12) << to_string(a);
            }
        }
    }
}

TEST(Activation, Names) {
    for (const char* name : {"relu", "sigmoid", "tanh", "elu", "swish", "softplus"})
        EXPECT_EQ(to_string(parse_activation(name)), name);
    EXPECT_THROW(parse_activation("linear_test"), InvalidArgument);
    EXPECT_THROW(parse_activation("gelu"), InvalidArgument);
    EXPECT_EQ(parse_scaling("ntk"), Scaling::ntk);
    EXPECT_EQ(parse_scaling("mf"), Scaling::mf);
    EXPECT_THROW(parse_scaling("lazy"), InvalidArgument);
}

TEST(Scaling, Gamma) {
    EXPECT_DOUBLE_EQ(gamma(Scaling::ntk, 100), 0.1);
    EXPECT_DOUBLE_EQ(gamma(Scaling::mf, 100), 0.01);
    EXPECT_THROW(gamma(Scaling::mf, 0), InvalidArgument);
}

TEST(Forward, LinearUnitRows) {
    const Index m = 16, d = 3;
    Matrix W = Matrix::Zero(m, d);
    W.col(0).setOnes();
    const Network net = make_net(W, Vector::Ones(m), Scaling::ntk, Activation::linear_test);
    Matrix X(2, d);
    X << 0.5, 1, 2, -1.25, 3, 4;
    const Vector f = forward(net, X);
    EXPECT_NEAR(f(0), std::sqrt(16.0) * 0.5, 1e-14);
    EXPECT_NEAR(f(1), std::sqrt(16.0) * -1.25, 1e-14);
}

TEST(Forward, ZeroInput) {
    Rng rng(1);
    const Index m = 9, d = 4;
    const Matrix W = init_weights({}, m, d, random_unit_vector(d, rng), nullptr, rng);
    const Vector a = sample_outer_weights(m, rng);
    const Matrix X = Matrix::Zero(1, d);
    EXPECT_EQ(forward(make_net(W, a, Scaling::ntk, Activation::relu), X)(0), 0.0);
    const Network sig = make_net(W, a, Scaling::mf, Activation::sigmoid);
    EXPECT_NEAR(forward(sig, X)(0), gamma(Scaling::mf, m) * a.sum() * 0.5, 1e-15);
}

TEST(Forward, ShapeMismatch) {
    Rng rng(1);
    const Network net = make_net(weight_normalize(rng.normal_matrix(3, 4)), Vector::Ones(3), Scaling::ntk,
                                 Activation::tanh);
    EXPECT_THROW(forward(net, Matrix::Zero(2, 5)), ShapeMismatch);
}

TEST(WeightNormalize, Examples) {
    Matrix W(1, 2);
    W << 3, 4;
    const Matrix u = weight_normalize(W);
    EXPECT_DOUBLE_EQ(u(0, 0), 0.6);
    EXPECT_DOUBLE_EQ(u(0, 1), 0.8);
    EXPECT_LE((weight_normalize(u) - u).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_THROW(weight_normalize(Matrix::Zero(2, 2)), ZeroRow);
}

TEST(InitWeights, UnitRowsInEveryMode) {
    Rng rng(5);
    const Index m = 40, d = 30;
    const Vector q = random_unit_vector(d, rng);
    const Matrix X = rng.normal_matrix(25, d);
    for (auto kind : {WeightInit::Kind::sphere, WeightInit::Kind::spiked, WeightInit::Kind::ortho_to_q,
                      WeightInit::Kind::data_dependent}) {
        const Matrix W = init_weights({kind, 2.0}, m, d, q, &X, rng);
        for (Index j = 0; j < m; ++j) EXPECT_NEAR(W.row(j).norm(), 1.0, 1e-10) << to_string(kind);
    }
}

TEST(InitWeights, SphereProjectionMoments) {
    Rng rng(6);
    const Index m = 500, d = 500;
    const Vector q = random_unit_vector(d, rng);
    const Matrix W = init_weights({}, m, d, q, nullptr, rng);
    const Vector proj = W * q;
    const double mean_sq = proj.squaredNorm() / m;
    EXPECT_NEAR(mean_sq, 1.0 / d, 3.0 * std::sqrt(2.0 / (double(d) * d) / m));
    EXPECT_NEAR(proj.mean(), 0.0, 4.0 * std::sqrt(1.0 / d / m));
}

TEST(InitWeights, OrthoToQ) {
    Rng rng(7);
    const Vector q = random_unit_vector(50, rng);
    const Matrix W = init_weights({WeightInit::Kind::ortho_to_q, 0.0}, 60, 50, q, nullptr, rng);
    EXPECT_LE((W * q).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(InitWeights, SpikedRowsAlignWithQ) {
    Rng rng(8);
    const Index d = 1000;
    const Vector q = random_unit_vector(d, rng);
    const Matrix W = init_weights({WeightInit::Kind::spiked, std::sqrt(750.0)}, 200, d, q, nullptr, rng);
    EXPECT_GT((W * q).minCoeff(), 0.9);
}

TEST(InitWeights, DataDependentNeedsX) {
    Rng rng(9);
    const Vector q = random_unit_vector(5, rng);
    EXPECT_THROW(init_weights({WeightInit::Kind::data_dependent, 0.0}, 3, 5, q, nullptr, rng), MissingData);
}

TEST(InitWeights, DataDependentIsWsTimesGram) {
    Rng a(10), b(10);
    const Index m = 6, d = 4;
    const Vector q = Vector::Unit(d, 0);
    Rng xr(11);
    const Matrix X = xr.normal_matrix(12, d);
    const Matrix W = init_weights({WeightInit::Kind::data_dependent, 0.0}, m, d, q, &X, a);
    const Matrix Ws = init_weights({}, m, d, q, nullptr, b);
    const Matrix want = weight_normalize(Ws * X.transpose() * X);
    EXPECT_LE((W - want).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(OuterWeights, PlusMinusOne) {
    Rng rng(12);
    const Vector a = sample_outer_weights(1000, rng);
    for (Index j = 0; j < a.size(); ++j) EXPECT_EQ(std::abs(a(j)), 1.0);
    EXPECT_NEAR(a.mean(), 0.0, 4.0 / std::sqrt(1000.0));
}

TEST(EstimateMu, ReluIsOneHalf) {
    Rng rng(13);
    const Index d = 30, m = 20, N = 10000;
    auto spec = make_data_spec(100, d, 0.5, 0.5, rng);
    const Network net = make_net(init_weights({}, m, d, spec.q, nullptr, rng), sample_outer_weights(m, rng),
                                 Scaling::ntk, Activation::relu);
    const Vector mu = estimate_mu(net, spec, N, rng);
    EXPECT_LE((mu.array() - 0.5).abs().maxCoeff(), 3.0 / std::sqrt(double(N)));
}

TEST(EstimateMu, SwishIsOneHalf) {
    Rng rng(14);
    const Index d = 30, m = 20, N = 10000;
    auto spec = make_data_spec(100, d, 0.25, 0.0, rng);
    const Network net = make_net(init_weights({}, m, d, spec.q, nullptr, rng), sample_outer_weights(m, rng),
                                 Scaling::ntk, Activation::swish);
    const Vector mu = estimate_mu(net, spec, N, rng);
    EXPECT_LE((mu.array() - 0.5).abs().maxCoeff(), 4.0 * 0.6 / std::sqrt(double(N)));
}

TEST(EstimateMu, SigmoidTinyVarianceIsQuarter) {
    Rng rng(15);
    const Index d = 10, m = 5;
    InputCovariance cov;
    cov.bulk = Vector::Constant(d, 1e-8);
    cov.q = Vector::Unit(d, 0);
    const Network net = make_net(init_weights({}, m, d, cov.q, nullptr, rng), Vector::Ones(m), Scaling::ntk,
                                 Activation::sigmoid);
    const Vector mu = estimate_mu(net, cov, 10000, rng);
    EXPECT_LE((mu.array() - 0.25).abs().maxCoeff(), 1e-8);
}

TEST(EstimateMu, MatchesBruteForceInputSampling) {
    // Oracle: draw x from the full spiked covariance and average sigma'(W x).
    Rng rng(16);
    const Index d = 20, m = 6, N = 200000;
    auto spec = make_data_spec(50, d, 0.3, 0.7, rng);
    const Network net = make_net(init_weights({WeightInit::Kind::spiked, 0.5}, m, d, spec.q, nullptr, rng),
                                 sample_outer_weights(m, rng), Scaling::ntk, Activation::tanh);
    spec.n = N;  // keep zeta from the original n
    const double zeta = std::pow(50.0, 0.3);
    Rng xr(17);
    Matrix X = xr.normal_matrix(N, d) * bulk_eigenvalues(d, 0.7).cwiseSqrt().asDiagonal();
    X += zeta * xr.normal_vector(N) * spec.q.transpose();
    const Matrix D = activation_d1(Activation::tanh, X * net.W.transpose());
    const Vector brute = D.colwise().mean();
    const Vector sd = ((D.rowwise() - brute.transpose()).cwiseAbs2().colwise().sum() / double(N)).cwiseSqrt();

    InputCovariance cov = InputCovariance::from_spec(spec);
    cov.zeta = zeta;
    const Vector mu = estimate_mu(net, cov, N, rng);
    for (Index j = 0; j < m; ++j) EXPECT_NEAR(mu(j), brute(j), 5.0 * std::sqrt(2.0) * sd(j) / std::sqrt(double(N)));
}

TEST(EstimateMu, ExtraIsotropicVarianceAdds) {
    Rng rng(18);
    const Index d = 8;
    InputCovariance cov;
    cov.bulk = bulk_eigenvalues(d, 1.0);
    cov.q = Vector::Unit(d, 1);
    cov.zeta = 2.0;
    cov.extra_isotropic = 0.25;
    const Matrix W = weight_normalize(rng.normal_matrix(3, d));
    const Vector v = cov.projected_variances(W);
    Matrix sigma = cov.bulk.asDiagonal();
    sigma += 4.0 * cov.q * cov.q.transpose() + 0.25 * Matrix::Identity(d, d);
    for (Index j = 0; j < 3; ++j) EXPECT_NEAR(v(j), W.row(j) * sigma * W.row(j).transpose(), 1e-12);
}

TEST(ScalingVariance, MeanFieldShrinksNtkStays) {
    const Index d = 50, draws = 4000;
    auto output_variance = [&](Scaling s, Index m, std::uint64_t seed) {
        Rng rng(seed);
        const Vector q = random_unit_vector(d, rng);
        Network net = make_net(init_weights({}, m, d, q, nullptr, rng), Vector::Ones(m), s, Activation::tanh);
        std::vector<double> f;
        for (Index t = 0; t < draws; ++t) {
            net.a = sample_outer_weights(m, rng);
            const Matrix x = rng.normal_matrix(1, d);
            f.push_back(forward(net, x)(0));
        }
        double mean = 0, var = 0;
        for (double v : f) mean += v / draws;
        for (double v : f) var += (v - mean) * (v - mean) / (draws - 1);
        return var;
    };
    const double mf = output_variance(Scaling::mf, 4000, 1) / output_variance(Scaling::mf, 1000, 2);
    const double ntk = output_variance(Scaling::ntk, 4000, 3) / output_variance(Scaling::ntk, 1000, 4);
    EXPECT_GE(mf, 0.2);
    EXPECT_LE(mf, 0.35);
    EXPECT_GE(ntk, 0.8);
    EXPECT_LE(ntk, 1.25);
}

TEST(Network, Validate) {
    Rng rng(19);
    Network net = make_net(weight_normalize(rng.normal_matrix(4, 3)), Vector::Ones(4), Scaling::ntk, Activation::relu);
    EXPECT_NO_THROW(net.validate());
    net.a(0) = 0.5;
    EXPECT_THROW(net.validate(), InvalidArgument);
    net.a(0) = 1.0;
    net.W(0, 0) += 0.1;
    EXPECT_THROW(net.validate(), InvalidArgument);
}
