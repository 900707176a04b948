#include "sevlm/run_config.hpp"

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include "json.hpp"

namespace sevlm {

using nlohmann::json;

namespace {

void reject_unknown(const json& obj, std::string_view section, std::initializer_list<std::string_view> allowed) {
    if (!obj.is_object()) {
        throw ConfigError("config section '" + std::string(section) + "' must be an object");
    }
    for (const auto& [key, _] : obj.items()) {
        bool known = false;
        for (std::string_view a : allowed) {
            known = known || key == a;
        }
        if (!known) {
            throw ConfigError("unknown config key '" + std::string(section) + (section.empty() ? "" : ".") + key + "'");
        }
    }
}

template <typename T>
void read(const json& obj, const char* key, T& dst, std::string_view section) {
    if (!obj.contains(key)) {
        return;
    }
    try {
        const json& v = obj.at(key);
        if constexpr (std::is_same_v<T, std::size_t> || std::is_same_v<T, std::uint64_t>) {
            if (!v.is_number_unsigned()) {
                throw ConfigError("must be a non-negative integer");
            }
        } else if constexpr (std::is_same_v<T, double>) {
            if (!v.is_number()) {
                throw ConfigError("must be a number");
            }
        } else if constexpr (std::is_same_v<T, std::string>) {
            if (!v.is_string()) {
                throw ConfigError("must be a string");
            }
        }
        dst = v.get<T>();
    } catch (const std::exception& e) {
        throw ConfigError("config key '" + std::string(section) + "." + key + "': " + e.what());
    }
}

Weighting weighting_from_json(const json& v) {
    if (v.is_string()) {
        return parse_weighting(v.get<std::string>());
    }
    if (v.is_array() && v.size() == 3 && v[0].is_number() && v[1].is_number() && v[2].is_number()) {
        return Weighting(WeightConfig{v[0].get<double>(), v[1].get<double>(), v[2].get<double>(), ""});
    }
    throw ConfigError("'weights' must be mild, strong, balanced, uniform-ce, \"a,b,g\" or [a, b, g]");
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
    std::filesystem::path path(p);
    return path.is_absolute() ? path : base / path;
}

}  // namespace

void RunConfig::validate() const {
    if (data_path.empty()) {
        throw ConfigError("config must name a data file (data.path)");
    }
    double total = 0.0;
    for (double f : split) {
        if (!(f > 0.0)) {
            throw ConfigError("data.split fractions must be positive");
        }
        total += f;
    }
    if (std::abs(total - 1.0) > 1e-9) {
        throw ConfigError("data.split fractions must sum to 1");
    }
    ModelConfig probe = model;
    probe.vocab_size = probe.vocab_size == 0 ? 1 : probe.vocab_size;
    try {
        probe.validate();
        train.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    if (checkpoint_path.empty() || history_path.empty()) {
        throw ConfigError("output paths must not be empty");
    }
}

RunConfig parse_run_config(std::string_view text, const std::filesystem::path& base_dir) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    reject_unknown(root, "", {"seed", "weights", "data", "model", "train", "output"});

    RunConfig cfg;
    read(root, "seed", cfg.seed, "");
    if (root.contains("weights")) {
        try {
            cfg.train.weighting = weighting_from_json(root.at("weights"));
        } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what());
        }
    }
    if (root.contains("data")) {
        const json& d = root.at("data");
        reject_unknown(d, "data", {"path", "split", "mode"});
        std::string path;
        read(d, "path", path, "data");
        if (!path.empty()) {
            cfg.data_path = resolve(base_dir, path);
        }
        if (d.contains("split")) {
            const json& s = d.at("split");
            if (!s.is_array() || s.size() != 3) {
                throw ConfigError("data.split must be an array of three fractions");
            }
            for (std::size_t i = 0; i < 3; ++i) {
                if (!s[i].is_number()) {
                    throw ConfigError("data.split entries must be numbers");
                }
                cfg.split[i] = s[i].get<double>();
            }
        }
        std::string mode = "strict";
        read(d, "mode", mode, "data");
        if (mode == "strict") {
            cfg.load_mode = LoadMode::Strict;
        } else if (mode == "permissive") {
            cfg.load_mode = LoadMode::Permissive;
        } else {
            throw ConfigError("data.mode must be strict or permissive");
        }
    }
    if (root.contains("model")) {
        const json& m = root.at("model");
        reject_unknown(m, "model", {"d_model", "n_heads", "n_layers", "d_ff", "max_seq_len"});
        read(m, "d_model", cfg.model.d_model, "model");
        read(m, "n_heads", cfg.model.n_heads, "model");
        read(m, "n_layers", cfg.model.n_layers, "model");
        read(m, "d_ff", cfg.model.d_ff, "model");
        read(m, "max_seq_len", cfg.model.max_seq_len, "model");
    }
    if (root.contains("train")) {
        const json& t = root.at("train");
        reject_unknown(t, "train",
                       {"steps", "batch_size", "learning_rate", "adam_beta1", "adam_beta2", "adam_eps", "weight_decay",
                        "grad_clip_norm", "eval_every", "optimizer"});
        read(t, "steps", cfg.train.steps, "train");
        read(t, "batch_size", cfg.train.batch_size, "train");
        read(t, "learning_rate", cfg.train.learning_rate, "train");
        read(t, "adam_beta1", cfg.train.adam_beta1, "train");
        read(t, "adam_beta2", cfg.train.adam_beta2, "train");
        read(t, "adam_eps", cfg.train.adam_eps, "train");
        read(t, "weight_decay", cfg.train.weight_decay, "train");
        read(t, "eval_every", cfg.train.eval_every, "train");
        if (t.contains("grad_clip_norm")) {
            const json& g = t.at("grad_clip_norm");
            if (g.is_null()) {
                cfg.train.grad_clip_norm.reset();
            } else if (g.is_number()) {
                cfg.train.grad_clip_norm = g.get<double>();
            } else {
                throw ConfigError("train.grad_clip_norm must be a number or null");
            }
        }
        if (t.contains("optimizer")) {
            std::string name;
            read(t, "optimizer", name, "train");
            try {
                cfg.train.optimizer = parse_optimizer(name);
            } catch (const std::invalid_argument& e) {
                throw ConfigError(e.what());
            }
        }
    }
    if (root.contains("output")) {
        const json& o = root.at("output");
        reject_unknown(o, "output", {"checkpoint", "history"});
        std::string p;
        read(o, "checkpoint", p, "output");
        if (!p.empty()) {
            cfg.checkpoint_path = resolve(base_dir, p);
        }
        p.clear();
        read(o, "history", p, "output");
        if (!p.empty()) {
            cfg.history_path = resolve(base_dir, p);
        }
    }
    cfg.model.seed = cfg.seed;
    cfg.train.seed = cfg.seed;
    cfg.validate();
    return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigError("cannot open config " + path.string());
    }
    std::ostringstream text;
    text << in.rdbuf();
    return parse_run_config(text.str(), path.parent_path());
}

void apply_overrides(RunConfig& cfg, const RunOverrides& o) {
    try {
        if (o.weights) cfg.train.weighting = parse_weighting(*o.weights);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    if (o.seed) cfg.seed = *o.seed;
    if (o.steps) cfg.train.steps = *o.steps;
    if (o.batch_size) cfg.train.batch_size = *o.batch_size;
    if (o.eval_every) cfg.train.eval_every = *o.eval_every;
    if (o.learning_rate) cfg.train.learning_rate = *o.learning_rate;
    if (o.data) cfg.data_path = *o.data;
    if (o.checkpoint) cfg.checkpoint_path = *o.checkpoint;
    if (o.history) cfg.history_path = *o.history;
    cfg.model.seed = cfg.seed;
    cfg.train.seed = cfg.seed;
    cfg.validate();
}

std::string describe_run_config(const RunConfig& cfg) {
    json j;
    j["seed"] = cfg.seed;
    json w;
    w["name"] = cfg.train.weighting.describe();
    if (const auto& wc = cfg.train.weighting.config()) {
        w["alpha"] = wc->alpha;
        w["beta"] = wc->beta;
        w["gamma"] = wc->gamma;
    } else {
        w["alpha"] = 1.0;
        w["beta"] = 1.0;
        w["gamma"] = 1.0;
    }
    j["weights"] = w;
    j["data"] = {{"path", cfg.data_path.string()},
                 {"split", cfg.split},
                 {"mode", cfg.load_mode == LoadMode::Strict ? "strict" : "permissive"}};
    j["model"] = {{"d_model", cfg.model.d_model},
                  {"n_heads", cfg.model.n_heads},
                  {"n_layers", cfg.model.n_layers},
                  {"d_ff", cfg.model.d_ff},
                  {"max_seq_len", cfg.model.max_seq_len}};
    json t = {{"steps", cfg.train.steps},
              {"batch_size", cfg.train.batch_size},
              {"learning_rate", cfg.train.learning_rate},
              {"adam_beta1", cfg.train.adam_beta1},
              {"adam_beta2", cfg.train.adam_beta2},
              {"adam_eps", cfg.train.adam_eps},
              {"weight_decay", cfg.train.weight_decay},
              {"eval_every", cfg.train.eval_every},
              {"optimizer", std::string(optimizer_name(cfg.train.optimizer))}};
    t["grad_clip_norm"] = cfg.train.grad_clip_norm ? json(*cfg.train.grad_clip_norm) : json(nullptr);
    j["train"] = std::move(t);
    j["output"] = {{"checkpoint", cfg.checkpoint_path.string()}, {"history", cfg.history_path.string()}};
    return j.dump(2);
}

}  // namespace sevlm
