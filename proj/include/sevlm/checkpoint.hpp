#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>

#include "sevlm/model.hpp"
#include "sevlm/optimizer.hpp"
#include "sevlm/tokenizer.hpp"

namespace sevlm {

inline constexpr std::uint32_t kCheckpointVersion = 1;

class CheckpointError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Binary layout, little-endian:
///   "SVLMCKPT" | u32 version | u64 seed | u64 header_len | header JSON
///   | parameter values as f64, in parameter order
///   | u8 optimizer tag: 0 none, 1 step + moments, 2 step only
///   [ | u64 step [ | m and v per parameter as f64 ] ]
/// The header holds the model config, the tokenizer symbol table and every parameter's name
/// and shape.
void save_checkpoint(const std::filesystem::path& path, const TransformerLM& model, const Tokenizer& tokenizer,
                     const OptimizerState* optimizer = nullptr);

struct Checkpoint {
    TransformerLM model;
    Tokenizer tokenizer;
    std::optional<OptimizerState> optimizer;
};

Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace sevlm
