#include <cmath>

#include "spikegrad/errors.hpp"
#include "spikegrad/experiments.hpp"

namespace spikegrad {

namespace {

struct Run {
    Network net;
    TrainHistory history;
    Vector u0;
    double initial_loss = 0.0;
};

Vector top_left_vector(const Matrix& G) {
    IterativeSvdOptions opt;
    opt.tolerance = 1e-8;
    opt.max_iterations = 20000;
    return top_singular_triplets(G, 1, opt).left.col(0);
}

double safe_alignment(const Vector& u, const Vector& v) {
    return v.norm() > 0.0 && u.norm() > 0.0 ? alignment(u, v) : 0.0;
}

}  // namespace

TrainResult train(const Scenario& s, Index epochs, bool compare_scalings) {
    TrainOptions opt;
    opt.epochs = epochs;
    opt.compare_scalings = compare_scalings;
    return train(s, opt);
}

TrainResult train(const Scenario& s, const TrainOptions& opt) {
    if (opt.epochs < 1) throw InvalidArgument("train: epochs must be at least 1");
    s.validate();
    Rng stream = trial_stream(s, 0);
    const TrialSetup setup = build_trial(s, stream);

    const bool noisy = s.regularizer.kind == Regularizer::Kind::input_noise && s.regularizer.strength > 0.0;
    const InputCovariance cov = InputCovariance::from_spec(setup.spec, noisy ? s.regularizer.strength : 0.0);
    const Vector xy = setup.sample.X_B.transpose() * setup.y;

    const std::uint64_t data_hash = hash_matrix(setup.y, hash_matrix(setup.sample.X));

    std::vector<Run> runs;
    const std::vector<Scaling> scalings =
        opt.compare_scalings ? std::vector<Scaling>{Scaling::mf, Scaling::ntk} : std::vector<Scaling>{s.scaling};
    for (Scaling sc : scalings) {
        Run run;
        run.net = setup.net;
        run.net.scaling = sc;
        run.history.scaling = sc;
        run.history.input_hash = hash_matrix(run.net.a, hash_matrix(run.net.W, data_hash));
        runs.push_back(std::move(run));
    }

    for (Index epoch = 0; epoch <= opt.epochs; ++epoch) {
        DataSample noisy_sample;
        if (noisy) {
            Rng noise_rng = stream.split(4).split(static_cast<std::uint64_t>(epoch));
            noisy_sample = add_input_noise(setup.sample, s.regularizer.strength, noise_rng);
        }
        const DataSample& work = noisy ? noisy_sample : setup.sample;
        std::vector<Matrix> grads;
        for (Run& run : runs) {
            const Vector preds = forward(run.net, work.X);
            const Vector r = residue(s.loss, preds, setup.y);
            double loss = loss_value(s.loss, preds, setup.y);
            Matrix G = gradient_from_residue(run.net, work.X, r);
            if (s.regularizer.kind == Regularizer::Kind::weight_decay) {
                G += weight_decay_gradient(run.net.W, s.regularizer.strength).transpose();
                loss += 0.5 * s.regularizer.strength * run.net.W.squaredNorm();
            } else if (s.regularizer.kind == Regularizer::Kind::jacobian) {
                G += jacobian_penalty_grad(run.net, work.X, s.regularizer.strength);
                loss += jacobian_penalty_value(run.net, work.X, s.regularizer.strength);
            }
            if (!std::isfinite(loss)) throw DivergenceDetected("train: loss is not finite at epoch " + std::to_string(epoch));
            if (epoch == 0) run.initial_loss = loss;
            if (loss > opt.divergence_factor * run.initial_loss)
                throw DivergenceDetected("train: loss exceeded the divergence bound at epoch " + std::to_string(epoch));

            const Vector u = top_left_vector(G);
            if (epoch == 0) run.u0 = u;
            EpochRecord rec;
            rec.epoch = epoch;
            rec.loss = loss;
            rec.align_q = safe_alignment(u, work.q);
            rec.align_residue = safe_alignment(u, work.X_B.transpose() * r);
            rec.align_target = safe_alignment(u, xy);
            rec.align_G0 = safe_alignment(u, run.u0);
            Rng mu_rng = stream.split(5).split(static_cast<std::uint64_t>(epoch));
            const AssumptionRecord mon = monitor_assumptions(run.net, cov, r, setup.sample.z, s.mu_samples, mu_rng);
            rec.mu_min = mon.mu_min;
            rec.mu_max = mon.mu_max;
            rec.r_inf_over_l2 = mon.inf_over_l2;
            rec.z_align = mon.z_alignment;
            run.history.records.push_back(rec);
            grads.push_back(std::move(G));
        }
        if (runs.size() == 2) {
            const Index k = std::min<Index>(opt.angle_rank, std::min(s.m, s.d));
            const Vector angles =
                principal_angles(top_right_subspace(runs[0].net.W, k), top_right_subspace(runs[1].net.W, k));
            for (Run& run : runs) run.history.records.back().principal_angle_deg = angles.mean();
        }
        if (epoch == opt.epochs) break;
        for (std::size_t i = 0; i < runs.size(); ++i) {
            const double eta = 1.0 / runs[i].net.gamma();
            runs[i].net.W = weight_normalize(runs[i].net.W - eta * grads[i].transpose());
        }
    }

    TrainResult out;
    for (Run& run : runs) {
        const auto& recs = run.history.records;
        for (std::size_t t = 1; t < recs.size(); ++t) {
            const bool before = recs[t - 1].align_q > recs[t - 1].align_residue;
            const bool now = recs[t].align_q > recs[t].align_residue;
            if (before != now) {
                run.history.crossing_epoch = recs[t].epoch;
                break;
            }
        }
        out.histories.push_back(std::move(run.history));
    }
    return out;
}

}  // namespace spikegrad
