#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "spikegrad/data_model.hpp"
#include "spikegrad/experiments.hpp"

namespace spikegrad {

extern const std::vector<std::string> kSpectrumColumns;
extern const std::vector<std::string> kHistoryColumns;  // without the optional angle column
extern const std::vector<std::string> kBetaColumns;

std::string format_number(double v);
std::string csv_line(const std::vector<std::string>& cells);

std::string spectrum_csv(const ScenarioResult& result);
std::string history_csv(const TrainHistory& history, bool with_angle);

struct BetaRow {
    std::uint64_t scenario_id = 0;
    Scenario scenario;
    BetaFit fit;
};
std::string beta_csv(const std::vector<BetaRow>& rows);
nlohmann::json fit_json(const std::vector<BetaRow>& rows);

nlohmann::json report_json(const Scenario& s, const ScenarioResult& result);
nlohmann::json spectral_report_json(const SpectralReport& report);
nlohmann::json train_summary_json(const Scenario& s, const TrainResult& result);
nlohmann::json estimate_json(const SpikeEstimate& est, Index n, Index d);

void write_text_file(const std::string& path, const std::string& contents);

}  // namespace spikegrad
