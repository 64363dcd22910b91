#include "spikegrad/loss_residue.hpp"

#include <cmath>

#include "spikegrad/errors.hpp"
#include "spikegrad/network.hpp"

namespace spikegrad {

namespace {

inline double logistic(double u) {
    return activation_eval(Activation::sigmoid, u).value;
}

inline double softplus(double u) {
    return activation_eval(Activation::softplus, u).value;
}

void check_lengths(const Vector& a, const Vector& b, const char* where) {
    if (a.size() != b.size()) throw ShapeMismatch(std::string(where) + ": vector lengths differ");
}

}  // namespace

std::string to_string(Loss loss) {
    switch (loss) {
    case Loss::mse: return "mse";
    case Loss::bce: return "bce";
    case Loss::hinge: return "hinge";
    }
    return "unknown";
}

Loss parse_loss(std::string_view name) {
    if (name == "mse") return Loss::mse;
    if (name == "bce") return Loss::bce;
    if (name == "hinge") return Loss::hinge;
    throw InvalidArgument("unknown loss '" + std::string(name) + "'");
}

std::string to_string(TargetModel::Kind kind) {
    return kind == TargetModel::Kind::single_index ? "single_index" : "triple_index";
}

TargetModel::Kind parse_target_kind(std::string_view name) {
    if (name == "single_index") return TargetModel::Kind::single_index;
    if (name == "triple_index") return TargetModel::Kind::triple_index;
    throw InvalidArgument("unknown target '" + std::string(name) + "'");
}

void TargetModel::validate() const {
    const std::size_t want = kind == Kind::single_index ? 1 : 3;
    if (directions.size() != want) throw InvalidArgument("TargetModel: wrong number of directions");
    for (const auto& v : directions) {
        if (v.size() != directions.front().size()) throw ShapeMismatch("TargetModel: directions differ in length");
        if (std::abs(v.norm() - 1.0) > 1e-10) throw InvalidArgument("TargetModel: directions must be unit vectors");
    }
    if (!(noise_std >= 0.0)) throw InvalidArgument("TargetModel: noise_std must be nonnegative");
}

TargetModel single_index_model(Vector omega, double noise_std) {
    TargetModel m;
    m.kind = TargetModel::Kind::single_index;
    m.directions = {std::move(omega)};
    m.noise_std = noise_std;
    m.validate();
    return m;
}

TargetModel triple_index_model(Vector beta1, Vector beta2, Vector beta3, double noise_std) {
    TargetModel m;
    m.kind = TargetModel::Kind::triple_index;
    m.directions = {std::move(beta1), std::move(beta2), std::move(beta3)};
    m.noise_std = noise_std;
    m.validate();
    return m;
}

TargetModel random_target_model(TargetModel::Kind kind, Index d, Rng& rng, double noise_std) {
    if (kind == TargetModel::Kind::single_index) return single_index_model(random_unit_vector(d, rng), noise_std);
    Vector b1 = random_unit_vector(d, rng);
    Vector b2 = random_unit_vector(d, rng);
    Vector b3 = random_unit_vector(d, rng);
    return triple_index_model(std::move(b1), std::move(b2), std::move(b3), noise_std);
}

Vector target_function(const TargetModel& model, const Matrix& X) {
    model.validate();
    if (X.cols() != model.dim()) throw ShapeMismatch("target_function: X has wrong column count");
    if (model.kind == TargetModel::Kind::single_index)
        return (X * model.directions[0]).unaryExpr([](double u) { return logistic(u); });
    const Vector p1 = X * model.directions[0];
    const Vector p2 = X * model.directions[1];
    const Vector p3 = X * model.directions[2];
    Vector f(X.rows());
    for (Index i = 0; i < X.rows(); ++i) f(i) = logistic(p1(i)) + std::tanh(p2(i)) + std::max(p3(i), 0.0);
    return f;
}

Vector make_targets(const TargetModel& model, const Matrix& X, Loss loss, Rng& rng) {
    Vector f = target_function(model, X);
    switch (loss) {
    case Loss::mse:
        if (model.noise_std > 0.0) f += rng.normal_vector(f.size(), model.noise_std);
        return f;
    case Loss::bce:
        return f;
    case Loss::hinge:
        return f.unaryExpr([](double v) { return v - 0.5 >= 0.0 ? 1.0 : -1.0; });
    }
    throw InvalidArgument("make_targets: unknown loss");
}

Vector residue(Loss loss, const Vector& preds, const Vector& y) {
    check_lengths(preds, y, "residue");
    switch (loss) {
    case Loss::mse:
        return preds - y;
    case Loss::bce:
        return preds.unaryExpr([](double u) { return logistic(u); }) - y;
    case Loss::hinge: {
        Vector r(preds.size());
        for (Index i = 0; i < preds.size(); ++i) r(i) = y(i) * preds(i) >= 1.0 ? 0.0 : -y(i);
        return r;
    }
    }
    throw InvalidArgument("residue: unknown loss");
}

double loss_value(Loss loss, const Vector& preds, const Vector& y) {
    check_lengths(preds, y, "loss_value");
    const Index n = preds.size();
    if (n == 0) return 0.0;
    double total = 0.0;
    for (Index i = 0; i < n; ++i) {
        const double f = preds(i);
        switch (loss) {
        case Loss::mse: total += 0.5 * (f - y(i)) * (f - y(i)); break;
        case Loss::bce: total += softplus(f) - y(i) * f; break;
        case Loss::hinge: total += std::max(0.0, 1.0 - y(i) * f); break;
        }
    }
    return total / static_cast<double>(n);
}

ResidueDiagnostics residue_diagnostics(const Vector& r, const Vector& z) {
    check_lengths(r, z, "residue_diagnostics");
    const double norm = r.norm();
    if (!(norm > 0.0)) throw ZeroResidue("residue_diagnostics: residue is zero");
    ResidueDiagnostics out;
    out.inf_over_l2 = r.cwiseAbs().maxCoeff() / norm;
    out.z_alignment = std::abs(z.dot(r)) / (std::sqrt(static_cast<double>(r.size())) * norm);
    return out;
}

}  // namespace spikegrad
