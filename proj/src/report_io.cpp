#include "spikegrad/report_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "spikegrad/errors.hpp"

namespace spikegrad {

const std::vector<std::string> kSpectrumColumns = {"trial", "rank", "singular_value", "spike_label", "alignment"};
const std::vector<std::string> kHistoryColumns = {"epoch",  "loss",   "align_q",       "align_residue",
                                                  "align_target", "align_G0", "mu_min", "mu_max",
                                                  "r_inf_over_l2", "z_align"};
const std::vector<std::string> kBetaColumns = {"scenario_id", "activation", "loss",          "nu",
                                               "alpha",       "scaling",    "n",             "mean_alignment"};

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string csv_line(const std::vector<std::string>& cells) {
    std::string out;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out += ',';
        out += cells[i];
    }
    out += '\n';
    return out;
}

std::string spectrum_csv(const ScenarioResult& result) {
    std::string out = csv_line(kSpectrumColumns);
    for (const auto& t : result.trials) {
        const Vector& sv = t.report.singular_values;
        for (Index k = 0; k < sv.size(); ++k) {
            std::string label = "bulk", align;
            if (k < static_cast<Index>(t.report.spikes.size())) {
                const SpikeInfo& s = t.report.spikes[static_cast<std::size_t>(k)];
                label = to_string(s.label);
                align = format_number(s.alignment);
            }
            out += csv_line({std::to_string(t.trial), std::to_string(k + 1), format_number(sv(k)), label, align});
        }
    }
    return out;
}

std::string history_csv(const TrainHistory& h, bool with_angle) {
    std::vector<std::string> header = kHistoryColumns;
    if (with_angle) header.push_back("principal_angle_deg");
    std::string out = csv_line(header);
    for (const auto& r : h.records) {
        std::vector<std::string> cells = {std::to_string(r.epoch),        format_number(r.loss),
                                          format_number(r.align_q),       format_number(r.align_residue),
                                          format_number(r.align_target),  format_number(r.align_G0),
                                          format_number(r.mu_min),        format_number(r.mu_max),
                                          format_number(r.r_inf_over_l2), format_number(r.z_align)};
        if (with_angle) cells.push_back(r.principal_angle_deg ? format_number(*r.principal_angle_deg) : "");
        out += csv_line(cells);
    }
    return out;
}

std::string beta_csv(const std::vector<BetaRow>& rows) {
    std::string out = csv_line(kBetaColumns);
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.fit.n_grid.size(); ++i) {
            out += csv_line({std::to_string(row.scenario_id), to_string(row.scenario.activation),
                             to_string(row.scenario.loss), format_number(row.scenario.nu),
                             format_number(row.scenario.alpha), to_string(row.scenario.scaling),
                             std::to_string(row.fit.n_grid[i]), format_number(row.fit.mean_alignment[i])});
        }
    }
    return out;
}

nlohmann::json fit_json(const std::vector<BetaRow>& rows) {
    nlohmann::json out = nlohmann::json::object();
    for (const auto& row : rows)
        out[std::to_string(row.scenario_id)] = {{"beta_hat", row.fit.beta_hat}, {"r2", row.fit.r2}};
    return out;
}

nlohmann::json spectral_report_json(const SpectralReport& rep) {
    nlohmann::json j;
    j["singular_values"] = std::vector<double>(rep.singular_values.data(),
                                               rep.singular_values.data() + rep.singular_values.size());
    nlohmann::json spikes = nlohmann::json::array();
    for (const auto& s : rep.spikes) {
        spikes.push_back({{"label", to_string(s.label)},
                          {"rank", s.rank},
                          {"value", s.value},
                          {"overlay", s.overlay},
                          {"alignment", s.alignment},
                          {"g_alignment", s.g_alignment}});
    }
    j["spikes"] = spikes;
    nlohmann::json overlay = nlohmann::json::array();
    for (Index i = 0; i < rep.overlay_values.size(); ++i)
        overlay.push_back({{"label", to_string(rep.overlay_labels[static_cast<std::size_t>(i)])},
                           {"value", rep.overlay_values(i)}});
    j["overlay"] = overlay;
    nlohmann::json top = nlohmann::json::object();
    for (std::size_t c = 0; c < rep.candidate_labels.size(); ++c)
        top[to_string(rep.candidate_labels[c])] = rep.top_alignments(static_cast<Index>(c));
    j["top_vector_alignment"] = top;
    return j;
}

nlohmann::json report_json(const Scenario& s, const ScenarioResult& result) {
    nlohmann::json j = spectral_report_json(result.aggregate);
    double s1 = 0, s12 = 0, s2 = 0, e = 0, g = 0, e_over_g = 0, recon = 0, inf = 0, za = 0;
    bool jac_zero = false;
    for (const auto& t : result.trials) {
        s1 += t.norm_S1;
        s12 += t.norm_S12;
        s2 += t.norm_S2;
        e += t.norm_E;
        g += t.norm_G;
        e_over_g += t.norm_G > 0.0 ? t.norm_E / t.norm_G : 0.0;
        recon = std::max(recon, t.reconstruction_error);
        inf += t.residue.inf_over_l2;
        za += t.residue.z_alignment;
        jac_zero = jac_zero || t.jacobian_exact_zero;
    }
    const double n = static_cast<double>(result.trials.size());
    j["residual_metrics"] = {{"mean_norm_S1", s1 / n},
                             {"mean_norm_S12", s12 / n},
                             {"mean_norm_S2", s2 / n},
                             {"mean_norm_E", e / n},
                             {"mean_norm_G", g / n},
                             {"mean_E_over_G", e_over_g / n},
                             {"max_reconstruction_error", recon},
                             {"mean_r_inf_over_l2", inf / n},
                             {"mean_z_align", za / n}};
    if (s.regularizer.kind == Regularizer::Kind::jacobian) j["jacobian_exact_zero"] = jac_zero;
    j["trials"] = result.trials.size();
    j["scenario_id"] = s.scenario_id;
    return j;
}

nlohmann::json train_summary_json(const Scenario& s, const TrainResult& result) {
    nlohmann::json j;
    nlohmann::json runs = nlohmann::json::array();
    for (const auto& h : result.histories) {
        double min_g0 = 1.0;
        for (const auto& r : h.records) min_g0 = std::min(min_g0, r.align_G0);
        char hash[24];
        std::snprintf(hash, sizeof(hash), "%016llx", static_cast<unsigned long long>(h.input_hash));
        nlohmann::json run = {{"scaling", to_string(h.scaling)},
                              {"epochs", h.records.empty() ? 0 : h.records.back().epoch},
                              {"final_loss", h.records.empty() ? 0.0 : h.records.back().loss},
                              {"min_align_G0", min_g0},
                              {"input_hash", hash}};
        run["crossing_epoch"] = h.crossing_epoch ? nlohmann::json(*h.crossing_epoch) : nlohmann::json(nullptr);
        if (!h.records.empty() && h.records.back().principal_angle_deg)
            run["final_principal_angle_deg"] = *h.records.back().principal_angle_deg;
        runs.push_back(run);
    }
    j["runs"] = runs;
    j["paired"] = result.histories.size() == 2;
    if (result.histories.size() == 2) j["inputs_identical"] = result.histories[0].input_hash == result.histories[1].input_hash;
    j["scenario_id"] = s.scenario_id;
    return j;
}

nlohmann::json estimate_json(const SpikeEstimate& est, Index n, Index d) {
    return {{"nu_hat", est.nu_hat},
            {"alpha_hat", est.alpha_hat},
            {"n", n},
            {"d", d},
            {"top_eigenvalue", est.top_eigenvalue}};
}

void write_text_file(const std::string& path, const std::string& contents) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write '" + path + "'");
    out << contents;
    if (!out) throw IoError("failed writing '" + path + "'");
}

}  // namespace spikegrad
