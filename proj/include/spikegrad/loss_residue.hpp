#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "spikegrad/linalg.hpp"
#include "spikegrad/rng.hpp"

namespace spikegrad {

enum class Loss { mse, bce, hinge };

std::string to_string(Loss loss);
Loss parse_loss(std::string_view name);

struct TargetModel {
    enum class Kind { single_index, triple_index };
    Kind kind = Kind::triple_index;
    std::vector<Vector> directions;  // omega, or beta1..beta3
    double noise_std = 1.0;

    Index dim() const { return directions.empty() ? 0 : directions.front().size(); }
    void validate() const;
};

std::string to_string(TargetModel::Kind kind);
TargetModel::Kind parse_target_kind(std::string_view name);

TargetModel single_index_model(Vector omega, double noise_std = 1.0);
TargetModel triple_index_model(Vector beta1, Vector beta2, Vector beta3, double noise_std = 1.0);
TargetModel random_target_model(TargetModel::Kind kind, Index d, Rng& rng, double noise_std = 1.0);

// Noise-free f*(x) for every row of X.
Vector target_function(const TargetModel& model, const Matrix& X);

// mse: f* + noise; bce: f* as is; hinge: sign(f* - 0.5) with ties at +1.
Vector make_targets(const TargetModel& model, const Matrix& X, Loss loss, Rng& rng);

// Per-sample derivative of the loss with respect to the prediction.
Vector residue(Loss loss, const Vector& preds, const Vector& y);

// (1/n) sum of per-sample losses; bce is the logistic loss on logits and
// accepts any real y.
double loss_value(Loss loss, const Vector& preds, const Vector& y);

struct ResidueDiagnostics {
    double inf_over_l2 = 0.0;  // ||r||_inf / ||r||_2
    double z_alignment = 0.0;  // |z^T r| / (sqrt(n) ||r||_2)
};

ResidueDiagnostics residue_diagnostics(const Vector& r, const Vector& z);

}  // namespace spikegrad
