#pragma once

#include <exception>
#include <vector>

#include "spikegrad/config.hpp"

namespace spikegrad {

enum ExitCode { exit_ok = 0, exit_config = 2, exit_io = 3, exit_numerical = 4 };

int exit_code_for(const std::exception& e);

void cmd_spectrum(const RunConfig& cfg);
void cmd_train(const RunConfig& cfg);
void cmd_beta(const RunConfig& cfg);
void cmd_ingest(const RunConfig& cfg);

// Scenario list of a beta sweep, in a fixed order with ids 0, 1, 2, ...
std::vector<Scenario> expand_beta_grid(const RunConfig& cfg);

int run_cli(int argc, char** argv);

}  // namespace spikegrad
