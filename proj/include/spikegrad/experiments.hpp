#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "spikegrad/data_model.hpp"
#include "spikegrad/gradient_decomp.hpp"
#include "spikegrad/loss_residue.hpp"
#include "spikegrad/network.hpp"
#include "spikegrad/spectra_align.hpp"

namespace spikegrad {

struct Regularizer {
    enum class Kind { none, weight_decay, input_noise, jacobian };
    Kind kind = Kind::none;
    double strength = 0.0;  // lambda, or tau^2 for input noise
};

std::string to_string(Regularizer::Kind kind);
Regularizer::Kind parse_regularizer(std::string_view name);

struct Scenario {
    std::uint64_t scenario_id = 0;
    Index n = 750;
    Index d = 1000;
    Index m = 1250;
    double nu = 0.0;
    double alpha = 0.0;
    bool zeta_zero = false;
    Activation activation = Activation::relu;
    Loss loss = Loss::mse;
    Scaling scaling = Scaling::ntk;
    WeightInit weight_init;
    std::optional<double> init_c_exponent;  // spiked init with c = n^exponent
    TargetModel::Kind target = TargetModel::Kind::triple_index;
    double noise_std = 1.0;
    Regularizer regularizer;
    Index trials = 1;
    std::uint64_t seed = 0;
    Index mu_samples = 10000;
    ClassifyOptions classify;

    void validate() const;
    WeightInit resolved_init() const;
};

// Everything drawn for one trial before any gradient is taken.
struct TrialSetup {
    SpikedDataSpec spec;
    DataSample sample;
    TargetModel target;
    Vector y;
    Network net;
};

Rng trial_stream(const Scenario& s, Index trial);
TrialSetup build_trial(const Scenario& s, Rng& stream);

struct TrialResult {
    Index trial = 0;
    SpectralReport report;
    double norm_S1 = 0.0;
    double norm_S12 = 0.0;
    double norm_S2 = 0.0;
    double norm_E = 0.0;
    double norm_G = 0.0;
    double reconstruction_error = 0.0;
    ResidueDiagnostics residue;
    bool jacobian_exact_zero = false;
};

struct ScenarioResult {
    std::vector<TrialResult> trials;
    SpectralReport aggregate;
};

TrialResult run_trial(const Scenario& s, Index trial);
ScenarioResult run_scenario(const Scenario& s, int jobs = 1);

// Residue at initialisation for the beta regression; tests may plant their own.
using ResidueProvider = std::function<Vector(const Scenario& at_n, const TrialSetup& setup, Rng& rng)>;
Vector network_residue(const Scenario& at_n, const TrialSetup& setup, Rng& rng);

struct GridRatios {
    double psi1 = 0.75;  // n / d
    double psi2 = 1.25;  // m / d
};

Scenario scale_scenario(const Scenario& base, Index n, const GridRatios& ratios);

struct BetaFit {
    double beta_hat = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
    std::vector<Index> n_grid;
    std::vector<Index> d_grid;
    std::vector<double> mean_alignment;
    Index trials = 0;
};

BetaFit estimate_beta(const Scenario& base, const std::vector<Index>& n_grid, Index trials, int jobs = 1,
                      const ResidueProvider& provider = {}, const GridRatios& ratios = {});

struct AuditPoint {
    Index n = 0, d = 0, m = 0;
    double e_ratio = 0.0;   // ||E|| / (sqrt(m) gamma ||r||_inf)
    double s1_over_e = 0.0;
    double s1_scaled = 0.0; // ||S1|| / (sqrt(m) gamma)
    double s2_scaled = 0.0; // ||S2|| / (sqrt(m) gamma)
};

struct ExponentAudit {
    std::vector<AuditPoint> points;
    double slope_e_ratio = 0.0;
    double slope_s1_over_e = 0.0;
    double slope_s1 = 0.0;
    double slope_s2 = 0.0;
};

AuditPoint audit_trial(const Scenario& at_n, Index trial);
ExponentAudit run_exponent_audit(const Scenario& base, const std::vector<Index>& n_grid, Index trials, int jobs = 1,
                                 const GridRatios& ratios = {});

struct AssumptionRecord {
    double mu_min = 0.0;
    double mu_max = 0.0;
    double inf_over_l2 = 0.0;
    double z_alignment = 0.0;
};

AssumptionRecord monitor_assumptions(const Network& net, const InputCovariance& cov, const Vector& r, const Vector& z,
                                     Index mu_samples, Rng& rng);

struct EpochRecord {
    Index epoch = 0;
    double loss = 0.0;
    double align_q = 0.0;
    double align_residue = 0.0;
    double align_target = 0.0;
    double align_G0 = 0.0;
    double mu_min = 0.0;
    double mu_max = 0.0;
    double r_inf_over_l2 = 0.0;
    double z_align = 0.0;
    std::optional<double> principal_angle_deg;
};

struct TrainHistory {
    Scaling scaling = Scaling::ntk;
    std::vector<EpochRecord> records;
    std::uint64_t input_hash = 0;            // X, y, W0, a
    std::optional<Index> crossing_epoch;     // first epoch where q vs residue dominance flips
};

struct TrainOptions {
    Index epochs = 50;
    bool compare_scalings = false;
    Index angle_rank = 5;
    double divergence_factor = 1e6;
};

struct TrainResult {
    std::vector<TrainHistory> histories;  // one, or mf then ntk when comparing
};

TrainResult train(const Scenario& s, const TrainOptions& options);
TrainResult train(const Scenario& s, Index epochs, bool compare_scalings);

}  // namespace spikegrad
