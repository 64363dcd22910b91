#include "spikegrad/cli.hpp"

#include <filesystem>
#include <iostream>

#include <CLI11.hpp>

#include "spikegrad/errors.hpp"
#include "spikegrad/ingest.hpp"
#include "spikegrad/report_io.hpp"

namespace spikegrad {

int exit_code_for(const std::exception& e) {
    if (const auto* err = dynamic_cast<const Error*>(&e)) {
        switch (err->kind()) {
        case ErrorKind::config:
        case ErrorKind::usage: return exit_config;
        case ErrorKind::io: return exit_io;
        case ErrorKind::numerical: return exit_numerical;
        }
    }
    if (dynamic_cast<const nlohmann::json::exception*>(&e)) return exit_config;
    return exit_numerical;
}

namespace {

std::string out_path(const RunConfig& cfg, const std::string& name) {
    return (std::filesystem::path(cfg.out_dir) / name).string();
}

void ensure_out_dir(const RunConfig& cfg) {
    std::error_code ec;
    std::filesystem::create_directories(cfg.out_dir, ec);
    if (ec || !std::filesystem::is_directory(cfg.out_dir))
        throw IoError("cannot create output directory '" + cfg.out_dir + "'");
}

void write_json(const RunConfig& cfg, const std::string& name, const nlohmann::json& j) {
    write_text_file(out_path(cfg, name), j.dump(2) + "\n");
}

}  // namespace

void cmd_spectrum(const RunConfig& cfg) {
    ensure_out_dir(cfg);
    const ScenarioResult result = run_scenario(cfg.scenario, cfg.jobs);
    if (cfg.write_csv) write_text_file(out_path(cfg, "spectrum.csv"), spectrum_csv(result));
    if (cfg.write_json) write_json(cfg, "report.json", report_json(cfg.scenario, result));
}

void cmd_train(const RunConfig& cfg) {
    ensure_out_dir(cfg);
    const TrainResult result = train(cfg.scenario, cfg.train);
    if (cfg.write_csv) {
        if (result.histories.size() == 2) {
            for (const auto& h : result.histories)
                write_text_file(out_path(cfg, "history_" + to_string(h.scaling) + ".csv"), history_csv(h, true));
        } else {
            write_text_file(out_path(cfg, "history.csv"), history_csv(result.histories.front(), false));
        }
    }
    if (cfg.write_json) write_json(cfg, "summary.json", train_summary_json(cfg.scenario, result));
}

std::vector<Scenario> expand_beta_grid(const RunConfig& cfg) {
    std::vector<Scenario> out;
    if (!cfg.grid) {
        out.push_back(cfg.scenario);
        return out;
    }
    const BetaGrid& g = *cfg.grid;
    std::uint64_t id = 0;
    for (Activation act : g.activations)
        for (Loss loss : g.losses)
            for (double nu : g.nus)
                for (double alpha : g.alphas)
                    for (Scaling sc : g.scalings) {
                        Scenario s = cfg.scenario;
                        s.activation = act;
                        s.loss = loss;
                        s.nu = nu;
                        s.alpha = alpha;
                        s.scaling = sc;
                        s.scenario_id = id++;
                        out.push_back(s);
                    }
    return out;
}

void cmd_beta(const RunConfig& cfg) {
    ensure_out_dir(cfg);
    std::vector<BetaRow> rows;
    for (const Scenario& s : expand_beta_grid(cfg)) {
        BetaRow row;
        row.scenario_id = s.scenario_id;
        row.scenario = s;
        row.fit = estimate_beta(s, cfg.n_grid, s.trials, cfg.jobs, {}, cfg.ratios);
        rows.push_back(std::move(row));
    }
    if (cfg.write_csv) write_text_file(out_path(cfg, "beta.csv"), beta_csv(rows));
    if (cfg.write_json) write_json(cfg, "fit.json", fit_json(rows));
}

void cmd_ingest(const RunConfig& cfg) {
    const IngestSpec& in = cfg.ingest;
    DatasetMatrix data = in.format == "csv" ? load_matrix_csv(in.path, in.has_header, in.max_rows)
                                            : load_idx(in.path, in.max_rows);
    if (in.center) {
        data.X = center(data.X);
        data.centered = true;
    }
    const SpikeEstimate est = estimate_spike_exponent(data.X, in.estimate);
    ensure_out_dir(cfg);
    write_json(cfg, "estimate.json", estimate_json(est, data.X.rows(), data.X.cols()));
}

int run_cli(int argc, char** argv) {
    CLI::App app{"Spiked-data gradient spectra laboratory"};
    app.require_subcommand(1);

    std::string config_path, out_dir = ".", format;
    std::uint64_t seed = 0;
    int jobs = 0;
    for (const char* name : {"spectrum", "train", "beta", "ingest"}) {
        CLI::App* sub = app.add_subcommand(name);
        sub->add_option("--config", config_path, "JSON config file")->required();
        sub->add_option("--out", out_dir, "output directory");
        sub->add_option("--seed", seed, "root seed (overrides run.seed)");
        sub->add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);
        sub->add_option("--format", format, "write only csv or only json")->check(CLI::IsMember({"csv", "json"}));
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? exit_ok : exit_config;
    }

    try {
        const Command cmd = parse_command(app.get_subcommands().front()->get_name());
        const CLI::App* sub = app.get_subcommands().front();
        RunConfig cfg = load_config(config_path, cmd);
        cfg.out_dir = out_dir;
        if (sub->count("--seed")) cfg.scenario.seed = seed;
        if (sub->count("--jobs")) cfg.jobs = jobs;
        if (!format.empty()) {
            cfg.write_csv = format == "csv";
            cfg.write_json = format == "json";
        }
        switch (cmd) {
        case Command::spectrum: cmd_spectrum(cfg); break;
        case Command::train: cmd_train(cfg); break;
        case Command::beta: cmd_beta(cfg); break;
        case Command::ingest: cmd_ingest(cfg); break;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code_for(e);
    }
    return exit_ok;
}

}  // namespace spikegrad
