#include "spikegrad/experiments.hpp"

#include <cmath>

#include "spikegrad/errors.hpp"

namespace spikegrad {

std::string to_string(Regularizer::Kind kind) {
    switch (kind) {
    case Regularizer::Kind::none: return "none";
    case Regularizer::Kind::weight_decay: return "weight_decay";
    case Regularizer::Kind::input_noise: return "input_noise";
    case Regularizer::Kind::jacobian: return "jacobian";
    }
    return "none";
}

Regularizer::Kind parse_regularizer(std::string_view name) {
    if (name == "none") return Regularizer::Kind::none;
    if (name == "weight_decay") return Regularizer::Kind::weight_decay;
    if (name == "input_noise") return Regularizer::Kind::input_noise;
    if (name == "jacobian") return Regularizer::Kind::jacobian;
    throw InvalidArgument("unknown regularizer '" + std::string(name) + "'");
}

void Scenario::validate() const {
    if (n < 1 || d < 1 || m < 1) throw InvalidArgument("Scenario: n, d, m must be positive");
    if (!(nu >= 0.0) || !(alpha >= 0.0)) throw InvalidArgument("Scenario: nu and alpha must be nonnegative");
    if (trials < 1) throw InvalidArgument("Scenario: trials must be at least 1");
    if (mu_samples < 1) throw InvalidArgument("Scenario: mu_samples must be at least 1");
    if (!(regularizer.strength >= 0.0)) throw InvalidArgument("Scenario: regularizer strength must be nonnegative");
    if (!(noise_std >= 0.0)) throw InvalidArgument("Scenario: noise_std must be nonnegative");
    if (!(classify.threshold > 0.0 && classify.threshold < 1.0))
        throw InvalidArgument("Scenario: threshold must lie in (0, 1)");
    if (!(classify.gap_factor > 1.0)) throw InvalidArgument("Scenario: gap_factor must exceed 1");
    if (classify.max_spikes < 1) throw InvalidArgument("Scenario: max_spikes must be at least 1");
}

WeightInit Scenario::resolved_init() const {
    WeightInit init = weight_init;
    if (init.kind == WeightInit::Kind::spiked && init_c_exponent)
        init.c = std::pow(static_cast<double>(n), *init_c_exponent);
    return init;
}

Rng trial_stream(const Scenario& s, Index trial) {
    return Rng(s.seed).split(s.scenario_id).split(static_cast<std::uint64_t>(trial));
}

TrialSetup build_trial(const Scenario& s, Rng& stream) {
    s.validate();
    TrialSetup t;
    Rng data_rng = stream.split(1);
    t.spec = make_data_spec(s.n, s.d, s.nu, s.alpha, data_rng, s.zeta_zero);
    t.sample = sample_spiked_data(t.spec, data_rng);

    Rng target_rng = stream.split(2);
    t.target = random_target_model(s.target, s.d, target_rng, s.noise_std);
    t.y = make_targets(t.target, t.sample.X, s.loss, target_rng);

    Rng net_rng = stream.split(3);
    t.net.W = init_weights(s.resolved_init(), s.m, s.d, t.spec.q, &t.sample.X, net_rng);
    t.net.a = sample_outer_weights(s.m, net_rng);
    t.net.scaling = s.scaling;
    t.net.activation = s.activation;
    return t;
}

namespace {

double spectral_norm(const Matrix& M) {
    IterativeSvdOptions opt;
    opt.tolerance = 1e-6;
    opt.max_iterations = 5000;
    return top_singular_triplets(M, 1, opt).values(0);
}

std::vector<Candidate> make_candidates(const DataSample& work, const TrialSetup& t, const Vector& r) {
    std::vector<Candidate> out;
    const Vector xr = work.X_B.transpose() * r;
    if (xr.norm() > 0.0) out.push_back({SpikeLabel::residue, xr});
    out.push_back({SpikeLabel::data, work.q});
    const Vector xy = work.X_B.transpose() * t.y;
    if (xy.norm() > 0.0) out.push_back({SpikeLabel::target, xy});
    if (t.target.kind == TargetModel::Kind::single_index) out.push_back({SpikeLabel::teacher, t.target.directions[0]});
    return out;
}

}  // namespace

TrialResult run_trial(const Scenario& s, Index trial) {
    Rng stream = trial_stream(s, trial);
    const TrialSetup t = build_trial(s, stream);

    double extra_var = 0.0;
    DataSample work = t.sample;
    if (s.regularizer.kind == Regularizer::Kind::input_noise && s.regularizer.strength > 0.0) {
        Rng noise_rng = stream.split(4);
        work = add_input_noise(t.sample, s.regularizer.strength, noise_rng);
        extra_var = s.regularizer.strength;
    }
    Rng mu_rng = stream.split(5);
    const Vector mu = estimate_mu(t.net, InputCovariance::from_spec(t.spec, extra_var), s.mu_samples, mu_rng);
    const Vector r = residue(s.loss, forward(t.net, work.X), t.y);

    TrialResult out;
    out.trial = trial;
    GradientDecomposition dec = decompose_residue(t.net, work, r, mu);
    out.reconstruction_error = dec.reconstruction_error();
    LowRank B = dec.spikes();
    Matrix G = dec.G;
    if (s.regularizer.kind == Regularizer::Kind::weight_decay) {
        G += weight_decay_gradient(t.net.W, s.regularizer.strength).transpose();
    } else if (s.regularizer.kind == Regularizer::Kind::jacobian) {
        const JacobianPenaltyPieces jp = jacobian_penalty_gradient(t.net, work, s.regularizer.strength);
        G += jp.grad;
        B.add(jp.S3.scaled(s.regularizer.strength));
        out.jacobian_exact_zero = jp.exact_zero;
    }

    out.report = classify_spikes(G, B, make_candidates(work, t, r), s.classify);
    out.norm_S1 = dec.S1.norm();
    out.norm_S12 = dec.S12.norm();
    out.norm_S2 = dec.S2.norm();
    out.norm_E = spectral_norm(dec.E);
    out.norm_G = out.report.singular_values.size() > 0 ? out.report.singular_values(0) : 0.0;
    if (r.norm() > 0.0) out.residue = residue_diagnostics(r, t.sample.z);
    return out;
}

ScenarioResult run_scenario(const Scenario& s, int jobs) {
    s.validate();
    ScenarioResult out;
    out.trials.resize(static_cast<std::size_t>(s.trials));
    parallel_for(s.trials, jobs, [&](Index i) { out.trials[static_cast<std::size_t>(i)] = run_trial(s, i); });
    std::vector<SpectralReport> reports;
    for (const auto& t : out.trials) reports.push_back(t.report);
    out.aggregate = aggregate_reports(reports, s.classify);
    return out;
}

Vector network_residue(const Scenario& at_n, const TrialSetup& setup, Rng&) {
    return residue(at_n.loss, forward(setup.net, setup.sample.X), setup.y);
}

Scenario scale_scenario(const Scenario& base, Index n, const GridRatios& ratios) {
    Scenario s = base;
    s.n = n;
    s.d = std::max<Index>(1, static_cast<Index>(std::llround(static_cast<double>(n) / ratios.psi1)));
    s.m = std::max<Index>(1, static_cast<Index>(std::llround(ratios.psi2 * static_cast<double>(s.d))));
    return s;
}

BetaFit estimate_beta(const Scenario& base, const std::vector<Index>& n_grid, Index trials, int jobs,
                      const ResidueProvider& provider, const GridRatios& ratios) {
    if (n_grid.size() < 2) throw InvalidArgument("estimate_beta: n_grid needs at least two points");
    for (std::size_t i = 1; i < n_grid.size(); ++i)
        if (n_grid[i] <= n_grid[i - 1]) throw InvalidArgument("estimate_beta: n_grid must be strictly increasing");
    if (trials < 1) throw InvalidArgument("estimate_beta: trials must be at least 1");

    const Index points = static_cast<Index>(n_grid.size());
    std::vector<double> value(static_cast<std::size_t>(points * trials), 0.0);
    std::vector<char> valid(value.size(), 0);
    parallel_for(points * trials, jobs, [&](Index job) {
        const Index i = job / trials, t = job % trials;
        const Scenario s = scale_scenario(base, n_grid[static_cast<std::size_t>(i)], ratios);
        Rng stream = Rng(base.seed).split(base.scenario_id).split(static_cast<std::uint64_t>(s.n)).split(
            static_cast<std::uint64_t>(t));
        const TrialSetup setup = build_trial(s, stream);
        Rng extra = stream.split(6);
        const Vector r = provider ? provider(s, setup, extra) : network_residue(s, setup, extra);
        if (!(r.norm() > 0.0)) return;
        value[static_cast<std::size_t>(job)] = residue_diagnostics(r, setup.sample.z).z_alignment;
        valid[static_cast<std::size_t>(job)] = 1;
    });

    BetaFit fit;
    fit.trials = trials;
    fit.n_grid = n_grid;
    std::vector<double> x, y;
    for (Index i = 0; i < points; ++i) {
        double sum = 0.0;
        Index count = 0;
        for (Index t = 0; t < trials; ++t) {
            const auto k = static_cast<std::size_t>(i * trials + t);
            if (valid[k]) {
                sum += value[k];
                ++count;
            }
        }
        const double mean = count > 0 ? sum / static_cast<double>(count) : 0.0;
        const Index d = scale_scenario(base, n_grid[static_cast<std::size_t>(i)], ratios).d;
        fit.d_grid.push_back(d);
        fit.mean_alignment.push_back(mean);
        if (!(mean > 0.0)) throw DegenerateFit("estimate_beta: mean alignment is zero at n = " +
                                               std::to_string(n_grid[static_cast<std::size_t>(i)]));
        x.push_back(std::log(static_cast<double>(d)));
        y.push_back(std::log(mean));
    }
    const LineFit line = fit_line(x, y);
    fit.beta_hat = -2.0 * line.slope;
    fit.intercept = line.intercept;
    fit.r2 = line.r2;
    return fit;
}

AuditPoint audit_trial(const Scenario& s, Index trial) {
    Rng stream = trial_stream(s, trial);
    const TrialSetup t = build_trial(s, stream);
    Rng mu_rng = stream.split(5);
    const Vector mu = estimate_mu(t.net, t.spec, s.mu_samples, mu_rng);

    const double n = static_cast<double>(s.n);
    const double g = t.net.gamma();
    Matrix Mperp = t.sample.X * t.net.W.transpose();
    const Vector f = g * (activation_apply(s.activation, Mperp) * t.net.a);
    const Vector r = residue(s.loss, f, t.y);
    Mperp = activation_d1(s.activation, Mperp);
    Mperp.rowwise() -= mu.transpose();
    Mperp = r.asDiagonal() * Mperp * t.net.a.asDiagonal();

    const double s1 = (g / n) * (t.sample.X_B.transpose() * r).norm() * t.net.a.cwiseProduct(mu).norm();
    const double s2 = (g * t.sample.zeta / n) * (Mperp.transpose() * t.sample.z).norm();
    const Matrix E = (g / n) * (t.sample.X_B.transpose() * Mperp);
    const double e = spectral_norm(E);
    const double root_m_gamma = std::sqrt(static_cast<double>(s.m)) * g;

    AuditPoint p;
    p.n = s.n;
    p.d = s.d;
    p.m = s.m;
    p.e_ratio = e / (root_m_gamma * r.cwiseAbs().maxCoeff());
    p.s1_over_e = s1 / e;
    p.s1_scaled = s1 / root_m_gamma;
    p.s2_scaled = s2 / root_m_gamma;
    return p;
}

ExponentAudit run_exponent_audit(const Scenario& base, const std::vector<Index>& n_grid, Index trials, int jobs,
                                 const GridRatios& ratios) {
    if (n_grid.size() < 2) throw InvalidArgument("run_exponent_audit: n_grid needs at least two points");
    ExponentAudit audit;
    std::vector<double> logn, e_ratio, s1e, s1, s2;
    for (Index n : n_grid) {
        const Scenario s = scale_scenario(base, n, ratios);
        std::vector<AuditPoint> pts(static_cast<std::size_t>(trials));
        parallel_for(trials, jobs, [&](Index t) { pts[static_cast<std::size_t>(t)] = audit_trial(s, t); });
        AuditPoint mean;
        mean.n = s.n;
        mean.d = s.d;
        mean.m = s.m;
        for (const auto& p : pts) {
            mean.e_ratio += p.e_ratio / static_cast<double>(trials);
            mean.s1_over_e += p.s1_over_e / static_cast<double>(trials);
            mean.s1_scaled += p.s1_scaled / static_cast<double>(trials);
            mean.s2_scaled += p.s2_scaled / static_cast<double>(trials);
        }
        audit.points.push_back(mean);
        logn.push_back(std::log(static_cast<double>(n)));
        e_ratio.push_back(std::log(mean.e_ratio));
        s1e.push_back(std::log(mean.s1_over_e));
        s1.push_back(std::log(mean.s1_scaled));
        s2.push_back(std::log(mean.s2_scaled));
    }
    audit.slope_e_ratio = fit_line(logn, e_ratio).slope;
    audit.slope_s1_over_e = fit_line(logn, s1e).slope;
    audit.slope_s1 = fit_line(logn, s1).slope;
    audit.slope_s2 = fit_line(logn, s2).slope;
    return audit;
}

AssumptionRecord monitor_assumptions(const Network& net, const InputCovariance& cov, const Vector& r, const Vector& z,
                                     Index mu_samples, Rng& rng) {
    AssumptionRecord rec;
    const Vector mu = estimate_mu(net, cov, mu_samples, rng);
    rec.mu_min = mu.minCoeff();
    rec.mu_max = mu.maxCoeff();
    const ResidueDiagnostics diag = residue_diagnostics(r, z);
    rec.inf_over_l2 = diag.inf_over_l2;
    rec.z_alignment = diag.z_alignment;
    return rec;
}

}  // namespace spikegrad
