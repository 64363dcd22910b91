#include <cmath>

#include <gtest/gtest.h>

#include "spikegrad/errors.hpp"
#include "spikegrad/experiments.hpp"

using namespace spikegrad;

namespace {

Scenario small(double nu, Activation act, Scaling sc, Loss loss = Loss::mse) {
    Scenario s;
    s.n = 300;
    s.d = 400;
    s.m = 500;
    s.nu = nu;
    s.activation = act;
    s.scaling = sc;
    s.loss = loss;
    s.mu_samples = 4000;
    s.seed = 42;
    return s;
}

}  // namespace

TEST(Scenario, Validation) {
    Scenario s;
    EXPECT_NO_THROW(s.validate());
    s.trials = 0;
    EXPECT_THROW(s.validate(), InvalidArgument);
    s.trials = 1;
    s.classify.threshold = 1.0;
    EXPECT_THROW(s.validate(), InvalidArgument);
    s.classify.threshold = 0.5;
    s.regularizer.strength = -1.0;
    EXPECT_THROW(s.validate(), InvalidArgument);
    EXPECT_THROW(parse_regularizer("dropout"), InvalidArgument);
}

TEST(Scenario, SpikedInitExponent) {
    Scenario s;
    s.n = 400;
    s.weight_init.kind = WeightInit::Kind::spiked;
    s.init_c_exponent = 0.5;
    EXPECT_DOUBLE_EQ(s.resolved_init().c, 20.0);
}

TEST(Scenario, GridRatios) {
    const Scenario s = scale_scenario(Scenario{}, 750, {});
    EXPECT_EQ(s.d, 1000);
    EXPECT_EQ(s.m, 1250);
}

TEST(RunScenario, NoSpikeMeanFieldGivesResidueSpike) {
    Scenario s = small(0.0, Activation::sigmoid, Scaling::mf);
    s.zeta_zero = true;
    const auto res = run_scenario(s);
    const auto& rep = res.aggregate;
    ASSERT_EQ(rep.spikes.size(), 1u);
    EXPECT_EQ(rep.spikes[0].label, SpikeLabel::residue);
    EXPECT_GE(rep.spikes[0].g_alignment, 0.8);
    EXPECT_LE(res.trials[0].reconstruction_error, 1e-10);
    EXPECT_EQ(res.trials[0].norm_S2, 0.0);
}

TEST(RunScenario, LargeSpikeReluGivesDataSpike) {
    const auto res = run_scenario(small(0.75, Activation::relu, Scaling::ntk));
    EXPECT_EQ(res.aggregate.top_label(), SpikeLabel::data);
    EXPECT_GE(res.aggregate.spikes[0].g_alignment, 0.8);
}

TEST(RunScenario, RegularizersRun) {
    for (auto kind : {Regularizer::Kind::weight_decay, Regularizer::Kind::input_noise, Regularizer::Kind::jacobian}) {
        Scenario s = small(0.5, Activation::tanh, Scaling::ntk);
        s.n = 120;
        s.d = 150;
        s.m = 100;
        s.regularizer = {kind, 0.5};
        const auto res = run_scenario(s);
        EXPECT_FALSE(res.aggregate.singular_values.size() == 0);
        EXPECT_FALSE(res.trials[0].jacobian_exact_zero);
    }
    Scenario s = small(0.5, Activation::relu, Scaling::ntk);
    s.n = 60;
    s.d = 80;
    s.m = 50;
    s.regularizer = {Regularizer::Kind::jacobian, 1.0};
    EXPECT_TRUE(run_scenario(s).trials[0].jacobian_exact_zero);
}

TEST(RunScenario, DeterministicAcrossJobCounts) {
    Scenario s = small(0.5, Activation::swish, Scaling::ntk, Loss::hinge);
    s.n = 100;
    s.d = 120;
    s.m = 90;
    s.trials = 4;
    const auto a = run_scenario(s, 1);
    const auto b = run_scenario(s, 4);
    EXPECT_EQ(a.aggregate.singular_values, b.aggregate.singular_values);
    for (std::size_t t = 0; t < a.trials.size(); ++t) EXPECT_EQ(a.trials[t].norm_S1, b.trials[t].norm_S1);
    Scenario other = s;
    other.seed = 43;
    EXPECT_NE(run_scenario(other).aggregate.singular_values, a.aggregate.singular_values);
}

TEST(Beta, ResidueEqualToZGivesZero) {
    Scenario base;
    base.seed = 1;
    const auto fit = estimate_beta(base, {60, 120, 240}, 5, 2,
                                   [](const Scenario&, const TrialSetup& t, Rng&) { return t.sample.z; });
    EXPECT_NEAR(fit.beta_hat, 0.0, 0.1);
    EXPECT_EQ(fit.d_grid, (std::vector<Index>{80, 160, 320}));
}

TEST(Beta, PlantedExponentOne) {
    Scenario base;
    base.seed = 2;
    auto planted = [](const Scenario& s, const TrialSetup& t, Rng& rng) {
        const Vector& z = t.sample.z;
        const Vector zhat = z / z.norm();
        Vector u = rng.normal_vector(z.size());
        u -= u.dot(zhat) * zhat;
        u /= u.norm();
        const double c = std::sqrt(double(s.n)) / (std::sqrt(double(s.d)) * z.norm());
        return Vector(c * zhat + std::sqrt(1.0 - c * c) * u);
    };
    const auto fit = estimate_beta(base, {60, 120, 240, 480}, 3, 2, planted);
    EXPECT_NEAR(fit.beta_hat, 1.0, 1e-6);
    EXPECT_NEAR(fit.r2, 1.0, 1e-9);
}

TEST(Beta, IndependentResidueGivesOne) {
    Scenario base;
    base.seed = 3;
    auto independent = [](const Scenario&, const TrialSetup& t, Rng& rng) { return rng.normal_vector(t.sample.n()); };
    const auto fit = estimate_beta(base, {60, 120, 240, 480}, 150, 4, independent);
    EXPECT_NEAR(fit.beta_hat, 1.0, 0.15);
}

TEST(Beta, Errors) {
    Scenario base;
    EXPECT_THROW(estimate_beta(base, {100}, 2), InvalidArgument);
    EXPECT_THROW(estimate_beta(base, {100, 100}, 2), InvalidArgument);
    auto zero = [](const Scenario&, const TrialSetup& t, Rng&) { return Vector(Vector::Zero(t.sample.n())); };
    EXPECT_THROW(estimate_beta(base, {40, 80}, 2, 1, zero), DegenerateFit);
}

TEST(Monitors, Examples) {
    Rng rng(4);
    const Index d = 50, m = 40;
    auto spec = make_data_spec(100, d, 0.0, 0.0, rng);
    Network net;
    net.W = init_weights({}, m, d, spec.q, nullptr, rng);
    net.a = sample_outer_weights(m, rng);
    net.scaling = Scaling::ntk;
    net.activation = Activation::tanh;
    const InputCovariance cov = InputCovariance::from_spec(spec);
    Vector one_hot = Vector::Zero(100);
    one_hot(7) = -2.0;
    const Vector z = rng.normal_vector(100);
    const auto rec = monitor_assumptions(net, cov, one_hot, z, 5000, rng);
    EXPECT_GE(rec.mu_min, 0.1);
    EXPECT_LE(rec.mu_max, 1.0);
    EXPECT_DOUBLE_EQ(rec.inf_over_l2, 1.0);
    EXPECT_NEAR(rec.z_alignment, std::abs(z(7)) / 10.0, 1e-14);

    net.activation = Activation::linear_test;
    const auto lin = monitor_assumptions(net, cov, one_hot, z, 100, rng);
    EXPECT_EQ(lin.mu_min, 1.0);
    EXPECT_EQ(lin.mu_max, 1.0);
}

TEST(Exponents, AuditPointIsConsistentWithDecomposition) {
    Scenario s = small(0.2, Activation::sigmoid, Scaling::ntk);
    s.n = 90;
    s.d = 120;
    s.m = 150;
    const AuditPoint p = audit_trial(s, 0);
    const TrialResult full = run_trial(s, 0);
    const double rootmg = std::sqrt(150.0) * gamma(Scaling::ntk, 150);
    EXPECT_NEAR(p.s1_scaled, full.norm_S1 / rootmg, 1e-9 * p.s1_scaled);
    EXPECT_NEAR(p.s2_scaled, full.norm_S2 / rootmg, 1e-9 * p.s2_scaled);
    EXPECT_NEAR(p.s1_over_e, full.norm_S1 / full.norm_E, 1e-5 * p.s1_over_e);
}

TEST(Training, PairedRunsShareInputs) {
    Scenario s = small(0.0, Activation::sigmoid, Scaling::mf);
    s.n = 80;
    s.d = 100;
    s.m = 120;
    s.mu_samples = 500;
    TrainOptions opt;
    opt.epochs = 4;
    opt.compare_scalings = true;
    opt.angle_rank = 2;
    const TrainResult res = train(s, opt);
    ASSERT_EQ(res.histories.size(), 2u);
    EXPECT_EQ(res.histories[0].scaling, Scaling::mf);
    EXPECT_EQ(res.histories[1].scaling, Scaling::ntk);
    EXPECT_EQ(res.histories[0].input_hash, res.histories[1].input_hash);
    for (const auto& h : res.histories) {
        ASSERT_EQ(h.records.size(), 5u);
        for (std::size_t e = 0; e < h.records.size(); ++e) {
            const auto& r = h.records[e];
            EXPECT_EQ(r.epoch, Index(e));
            for (double a : {r.align_q, r.align_residue, r.align_target, r.align_G0}) {
                EXPECT_GE(a, 0.0);
                EXPECT_LE(a, 1.0 + 1e-12);
            }
            ASSERT_TRUE(r.principal_angle_deg.has_value());
            EXPECT_TRUE(std::isfinite(r.loss));
        }
        EXPECT_NEAR(h.records[0].align_G0, 1.0, 1e-12);
        EXPECT_NEAR(*h.records[0].principal_angle_deg, 0.0, 1e-3);
    }
    // NTK takes much bigger steps than MF on the same inputs.
    EXPECT_GT(*res.histories[1].records.back().principal_angle_deg, 0.0);
}

TEST(Training, DeterministicSingleRun) {
    Scenario s = small(0.0, Activation::tanh, Scaling::ntk);
    s.n = 80;
    s.d = 100;
    s.m = 120;
    s.mu_samples = 500;
    const auto a = train(s, 3, false);
    const auto b = train(s, 3, false);
    ASSERT_EQ(a.histories.size(), 1u);
    for (std::size_t e = 0; e < 4; ++e) {
        EXPECT_EQ(a.histories[0].records[e].loss, b.histories[0].records[e].loss);
        EXPECT_EQ(a.histories[0].records[e].align_q, b.histories[0].records[e].align_q);
        EXPECT_FALSE(a.histories[0].records[e].principal_angle_deg.has_value());
    }
    EXPECT_THROW(train(s, 0, false), InvalidArgument);
}

TEST(Training, RegularizedRunsStayFinite) {
    for (auto kind : {Regularizer::Kind::weight_decay, Regularizer::Kind::input_noise, Regularizer::Kind::jacobian}) {
        Scenario s = small(0.5, Activation::tanh, Scaling::mf);
        s.n = 60;
        s.d = 70;
        s.m = 80;
        s.mu_samples = 300;
        s.regularizer = {kind, 0.1};
        const auto res = train(s, 2, false);
        for (const auto& r : res.histories[0].records) EXPECT_TRUE(std::isfinite(r.loss));
    }
}
