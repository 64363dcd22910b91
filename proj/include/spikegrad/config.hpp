#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "spikegrad/data_model.hpp"
#include "spikegrad/experiments.hpp"

namespace spikegrad {

enum class Command { spectrum, train, beta, ingest };

std::string to_string(Command cmd);
Command parse_command(std::string_view name);

struct BetaGrid {
    std::vector<Activation> activations;
    std::vector<Loss> losses;
    std::vector<double> nus;
    std::vector<double> alphas;
    std::vector<Scaling> scalings;
};

struct IngestSpec {
    std::string path;
    std::string format;  // "idx" or "csv"
    bool has_header = false;
    Index max_rows = 0;
    bool center = true;
    SpikeEstimateOptions estimate;
};

struct RunConfig {
    Command command = Command::spectrum;
    Scenario scenario;
    TrainOptions train;
    std::vector<Index> n_grid;
    std::optional<BetaGrid> grid;
    GridRatios ratios;
    IngestSpec ingest;
    int jobs = 1;
    std::string out_dir = ".";
    bool write_csv = true;
    bool write_json = true;
};

// Throws ConfigError naming the offending field.
RunConfig parse_config(const nlohmann::json& doc, Command cmd);
RunConfig load_config(const std::string& path, Command cmd);

}  // namespace spikegrad
