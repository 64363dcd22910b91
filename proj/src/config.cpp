#include "spikegrad/config.hpp"

#include <fstream>
#include <set>

#include "spikegrad/errors.hpp"

namespace spikegrad {

using nlohmann::json;

std::string to_string(Command cmd) {
    switch (cmd) {
    case Command::spectrum: return "spectrum";
    case Command::train: return "train";
    case Command::beta: return "beta";
    case Command::ingest: return "ingest";
    }
    return "spectrum";
}

Command parse_command(std::string_view name) {
    if (name == "spectrum") return Command::spectrum;
    if (name == "train") return Command::train;
    if (name == "beta") return Command::beta;
    if (name == "ingest") return Command::ingest;
    throw ConfigError("unknown command '" + std::string(name) + "'");
}

namespace {

// Walks one config section, remembering the dotted path for error messages.
class Section {
public:
    Section(const json& node, std::string path) : node_(node), path_(std::move(path)) {
        if (!node_.is_object()) throw ConfigError("field '" + path_ + "' must be an object");
    }

    void allow(std::initializer_list<const char*> keys) const {
        std::set<std::string> ok(keys.begin(), keys.end());
        for (auto it = node_.begin(); it != node_.end(); ++it)
            if (!ok.count(it.key())) throw ConfigError("unknown key '" + join(it.key()) + "'");
    }

    bool has(const char* key) const { return node_.contains(key); }
    const json& raw(const char* key) const { return node_.at(key); }
    std::string join(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    void require(const char* key) const {
        if (!has(key)) throw ConfigError("missing required field '" + join(key) + "'");
    }

    double number(const char* key) const {
        require(key);
        const json& v = node_.at(key);
        if (!v.is_number()) throw ConfigError("field '" + join(key) + "' must be a number");
        return v.get<double>();
    }
    double number(const char* key, double fallback) const { return has(key) ? number(key) : fallback; }

    Index count(const char* key, Index min_value = 1) const {
        require(key);
        const json& v = node_.at(key);
        if (!v.is_number_integer() || v.get<long long>() < min_value)
            throw ConfigError("field '" + join(key) + "' must be an integer >= " + std::to_string(min_value));
        return static_cast<Index>(v.get<long long>());
    }
    Index count(const char* key, Index fallback, Index min_value) const {
        return has(key) ? count(key, min_value) : fallback;
    }

    std::uint64_t u64(const char* key, std::uint64_t fallback) const {
        if (!has(key)) return fallback;
        const json& v = node_.at(key);
        if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
            throw ConfigError("field '" + join(key) + "' must be a nonnegative integer");
        return v.get<std::uint64_t>();
    }

    bool boolean(const char* key, bool fallback) const {
        if (!has(key)) return fallback;
        const json& v = node_.at(key);
        if (!v.is_boolean()) throw ConfigError("field '" + join(key) + "' must be true or false");
        return v.get<bool>();
    }

    std::string text(const char* key) const {
        require(key);
        const json& v = node_.at(key);
        if (!v.is_string()) throw ConfigError("field '" + join(key) + "' must be a string");
        return v.get<std::string>();
    }

    template <class Parse>
    auto tag(const char* key, Parse parse) const {
        const std::string value = text(key);
        try {
            return parse(value);
        } catch (const InvalidArgument& e) {
            throw ConfigError("field '" + join(key) + "': " + e.what());
        }
    }

    template <class Parse>
    auto tag_list(const char* key, Parse parse) const {
        require(key);
        const json& v = node_.at(key);
        if (!v.is_array() || v.empty()) throw ConfigError("field '" + join(key) + "' must be a nonempty list");
        std::vector<decltype(parse(std::string()))> out;
        for (const auto& item : v) {
            if (!item.is_string()) throw ConfigError("field '" + join(key) + "' must list strings");
            try {
                out.push_back(parse(item.get<std::string>()));
            } catch (const InvalidArgument& e) {
                throw ConfigError("field '" + join(key) + "': " + e.what());
            }
        }
        return out;
    }

    std::vector<double> number_list(const char* key) const {
        require(key);
        const json& v = node_.at(key);
        if (!v.is_array() || v.empty()) throw ConfigError("field '" + join(key) + "' must be a nonempty list");
        std::vector<double> out;
        for (const auto& item : v) {
            if (!item.is_number()) throw ConfigError("field '" + join(key) + "' must list numbers");
            out.push_back(item.get<double>());
        }
        return out;
    }

    Section child(const char* key) const { return Section(node_.at(key), join(key)); }
    const json& node() const { return node_; }

private:
    const json& node_;
    std::string path_;
};

// A field given either as a bare tag string or as an object with "kind".
const json& kind_node(const json& root, const char* name, json& holder) {
    const json& v = root.at(name);
    if (v.is_string()) {
        holder = json{{"kind", v}};
        return holder;
    }
    return v;
}

void parse_data(const Section& data, Command cmd, RunConfig& cfg) {
    data.allow({"n", "d", "nu", "alpha", "zeta_zero", "path", "format", "has_header", "max_rows", "center",
                "alpha_method"});
    Scenario& s = cfg.scenario;
    if (cmd == Command::ingest) {
        cfg.ingest.path = data.text("path");
        if (data.has("format")) {
            cfg.ingest.format = data.text("format");
        } else {
            const auto& p = cfg.ingest.path;
            cfg.ingest.format = p.size() >= 4 && p.substr(p.size() - 4) == ".csv" ? "csv" : "idx";
        }
        if (cfg.ingest.format != "csv" && cfg.ingest.format != "idx")
            throw ConfigError("field 'data.format' must be \"csv\" or \"idx\"");
        cfg.ingest.has_header = data.boolean("has_header", false);
        cfg.ingest.max_rows = data.count("max_rows", 0, 0);
        cfg.ingest.center = data.boolean("center", true);
        if (data.has("alpha_method")) {
            const std::string m = data.text("alpha_method");
            if (m == "simulation_matched") cfg.ingest.estimate.alpha_method = AlphaMethod::simulation_matched;
            else if (m == "loglog_ols") cfg.ingest.estimate.alpha_method = AlphaMethod::loglog_ols;
            else throw ConfigError("field 'data.alpha_method' must be \"simulation_matched\" or \"loglog_ols\"");
        }
        return;
    }
    if (cmd != Command::beta) {
        s.n = data.count("n");
        s.d = data.count("d");
    }
    if (cmd != Command::beta || !cfg.grid) {
        s.nu = data.number("nu");
        s.alpha = data.number("alpha");
    }
    s.zeta_zero = data.boolean("zeta_zero", false);
    if (s.nu < 0.0) throw ConfigError("field 'data.nu' must be nonnegative");
    if (s.alpha < 0.0) throw ConfigError("field 'data.alpha' must be nonnegative");
}

void parse_network(const Section& net, Command cmd, RunConfig& cfg) {
    net.allow({"width", "activation", "scaling", "weight_init"});
    Scenario& s = cfg.scenario;
    if (cmd != Command::beta) s.m = net.count("width");
    const bool from_grid = cmd == Command::beta && cfg.grid;
    if (!from_grid) {
        s.activation = net.tag("activation", parse_activation);
        if (!(cmd == Command::train && cfg.train.compare_scalings)) s.scaling = net.tag("scaling", parse_scaling);
    }
    if (net.has("weight_init")) {
        json holder;
        const Section wi(kind_node(net.node(), "weight_init", holder), net.join("weight_init"));
        wi.allow({"kind", "c", "c_exponent"});
        s.weight_init.kind = wi.tag("kind", parse_weight_init);
        if (s.weight_init.kind == WeightInit::Kind::spiked) {
            if (wi.has("c") == wi.has("c_exponent"))
                throw ConfigError("field '" + wi.join("c") + "': spiked init needs exactly one of c, c_exponent");
            if (wi.has("c")) s.weight_init.c = wi.number("c");
            else s.init_c_exponent = wi.number("c_exponent");
        }
    }
}

}  // namespace

RunConfig parse_config(const json& doc, Command cmd) {
    RunConfig cfg;
    cfg.command = cmd;
    const Section root(doc, "");
    root.allow({"data", "network", "loss", "target", "regularizer", "run"});
    Scenario& s = cfg.scenario;

    // run first: the beta grid and paired-training flag change what else is required.
    if (root.has("run")) {
        const Section run = root.child("run");
        run.allow({"trials", "seed", "jobs", "mu_samples", "epochs", "compare_scalings", "angle_rank", "n_grid", "psi1",
                   "psi2", "grid", "threshold", "gap_factor", "max_spikes", "scenario_id"});
        s.trials = run.count("trials", 1, 1);
        s.seed = run.u64("seed", 0);
        s.scenario_id = run.u64("scenario_id", 0);
        cfg.jobs = static_cast<int>(run.count("jobs", 1, 1));
        s.mu_samples = run.count("mu_samples", 10000, 1);
        s.classify.threshold = run.number("threshold", s.classify.threshold);
        s.classify.gap_factor = run.number("gap_factor", s.classify.gap_factor);
        s.classify.max_spikes = run.count("max_spikes", s.classify.max_spikes, 1);
        if (!(s.classify.threshold > 0.0 && s.classify.threshold < 1.0))
            throw ConfigError("field 'run.threshold' must lie in (0, 1)");
        if (!(s.classify.gap_factor > 1.0)) throw ConfigError("field 'run.gap_factor' must exceed 1");
        if (cmd == Command::train) {
            cfg.train.epochs = run.count("epochs", 1);
            cfg.train.compare_scalings = run.boolean("compare_scalings", false);
            cfg.train.angle_rank = run.count("angle_rank", cfg.train.angle_rank, 1);
        }
        if (cmd == Command::beta) {
            const auto grid = run.number_list("n_grid");
            for (double v : grid) {
                if (v < 1 || v != static_cast<double>(static_cast<Index>(v)))
                    throw ConfigError("field 'run.n_grid' must list positive integers");
                cfg.n_grid.push_back(static_cast<Index>(v));
            }
            if (cfg.n_grid.size() < 2) throw ConfigError("field 'run.n_grid' needs at least two entries");
            for (std::size_t i = 1; i < cfg.n_grid.size(); ++i)
                if (cfg.n_grid[i] <= cfg.n_grid[i - 1]) throw ConfigError("field 'run.n_grid' must be strictly increasing");
            cfg.ratios.psi1 = run.number("psi1", cfg.ratios.psi1);
            cfg.ratios.psi2 = run.number("psi2", cfg.ratios.psi2);
            if (!(cfg.ratios.psi1 > 0.0) || !(cfg.ratios.psi2 > 0.0))
                throw ConfigError("fields 'run.psi1' and 'run.psi2' must be positive");
            if (run.has("grid")) {
                const Section g = run.child("grid");
                g.allow({"activations", "losses", "nu", "alpha", "scalings"});
                BetaGrid grid_axes;
                grid_axes.activations = g.tag_list("activations", parse_activation);
                grid_axes.losses = g.tag_list("losses", parse_loss);
                grid_axes.nus = g.number_list("nu");
                grid_axes.alphas = g.number_list("alpha");
                grid_axes.scalings = g.tag_list("scalings", parse_scaling);
                cfg.grid = grid_axes;
            }
        }
    } else if (cmd == Command::train) {
        throw ConfigError("missing required field 'run.epochs'");
    } else if (cmd == Command::beta) {
        throw ConfigError("missing required field 'run.n_grid'");
    }

    if (cmd == Command::ingest) {
        root.require("data");
        parse_data(root.child("data"), cmd, cfg);
        return cfg;
    }

    const bool from_grid = cmd == Command::beta && cfg.grid;
    if (root.has("data")) parse_data(root.child("data"), cmd, cfg);
    else if (cmd != Command::beta || !from_grid) root.require("data");

    if (root.has("network")) parse_network(root.child("network"), cmd, cfg);
    else if (!from_grid) root.require("network");

    if (root.has("loss")) {
        json holder;
        const Section loss(kind_node(doc, "loss", holder), "loss");
        loss.allow({"kind"});
        s.loss = loss.tag("kind", parse_loss);
    } else if (!from_grid) {
        root.require("loss");
    }

    if (root.has("target")) {
        json holder;
        const Section target(kind_node(doc, "target", holder), "target");
        target.allow({"kind", "noise_std"});
        s.target = target.tag("kind", parse_target_kind);
        s.noise_std = target.number("noise_std", 1.0);
        if (s.noise_std < 0.0) throw ConfigError("field 'target.noise_std' must be nonnegative");
    }

    if (root.has("regularizer")) {
        json holder;
        const Section reg(kind_node(doc, "regularizer", holder), "regularizer");
        reg.allow({"kind", "strength"});
        s.regularizer.kind = reg.tag("kind", parse_regularizer);
        if (s.regularizer.kind != Regularizer::Kind::none) s.regularizer.strength = reg.number("strength");
        if (s.regularizer.strength < 0.0) throw ConfigError("field 'regularizer.strength' must be nonnegative");
    }

    try {
        if (cmd != Command::beta) s.validate();
    } catch (const InvalidArgument& e) {
        throw ConfigError(e.what());
    }
    return cfg;
}

RunConfig load_config(const std::string& path, Command cmd) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config '" + path + "'");
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("config '" + path + "' is not valid JSON: " + e.what());
    }
    return parse_config(doc, cmd);
}

}  // namespace spikegrad
