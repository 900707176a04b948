#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "sevlm/dataset.hpp"
#include "sevlm/model.hpp"
#include "sevlm/trainer.hpp"

namespace sevlm {

class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Everything a training run needs. One seed drives initialization, the data split and
/// batch order.
struct RunConfig {
    std::filesystem::path data_path;
    std::array<double, 3> split = kDefaultSplit;
    LoadMode load_mode = LoadMode::Strict;
    ModelConfig model;  // vocab_size is filled in from the data
    TrainConfig train;
    std::uint64_t seed = 0;
    std::filesystem::path checkpoint_path = "model.ckpt";
    std::filesystem::path history_path = "history.jsonl";

    void validate() const;
};

/// Command-line values that take precedence over the configuration file.
struct RunOverrides {
    std::optional<std::string> weights;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> steps;
    std::optional<std::size_t> batch_size;
    std::optional<std::size_t> eval_every;
    std::optional<double> learning_rate;
    std::optional<std::filesystem::path> data;
    std::optional<std::filesystem::path> checkpoint;
    std::optional<std::filesystem::path> history;
};

/// Parses a JSON run configuration. Unknown keys are rejected; relative paths are resolved
/// against `base_dir`.
RunConfig parse_run_config(std::string_view text, const std::filesystem::path& base_dir);
RunConfig load_run_config(const std::filesystem::path& path);
void apply_overrides(RunConfig& cfg, const RunOverrides& overrides);

/// The resolved configuration as pretty-printed JSON, weights spelled out as a triple.
std::string describe_run_config(const RunConfig& cfg);

}  // namespace sevlm
