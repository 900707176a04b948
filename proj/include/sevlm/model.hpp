#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sevlm/autograd.hpp"
#include "sevlm/tensor.hpp"
#include "sevlm/tokenizer.hpp"

namespace sevlm {

struct ModelConfig {
    std::size_t vocab_size = 0;
    std::size_t d_model = 32;
    std::size_t n_heads = 4;
    std::size_t n_layers = 2;
    std::size_t d_ff = 64;
    std::size_t max_seq_len = 64;
    std::uint64_t seed = 0;

    /// Throws std::invalid_argument naming the first violated constraint.
    void validate() const;

    friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

/// Standard deviation of the Gaussian used for every weight matrix and embedding table.
inline constexpr double kInitStd = 0.02;

/// Decoder-only transformer: learned token and position embeddings, pre-norm blocks of
/// causal multi-head attention and a ReLU feed-forward layer, final layer norm and an
/// untied output projection.
///
/// Initialization depends only on the config: weights ~ N(0, 0.02^2) drawn in parameter
/// order from `Rng(config.seed)`, layer-norm gains 1, all biases 0.
class TransformerLM {
public:
    explicit TransformerLM(ModelConfig config);

    const ModelConfig& config() const noexcept { return config_; }

    /// Logits [ids.size(), vocab_size] recorded on `tape`, with parameters bound as
    /// gradient-receiving leaves.
    Var forward(Tape& tape, std::span<const TokenId> ids);

    /// Logits without gradient bookkeeping; safe to call concurrently.
    Tensor logits(std::span<const TokenId> ids) const;

    std::span<Tensor> parameters() noexcept { return params_; }
    std::span<const Tensor> parameters() const noexcept { return params_; }
    const std::vector<std::string>& parameter_names() const noexcept { return names_; }
    std::size_t parameter_count() const noexcept;

    void zero_grad();

private:
    template <typename Bind>
    Var run(std::span<const TokenId> ids, Bind bind) const;

    void check_input(std::span<const TokenId> ids) const;

    ModelConfig config_;
    std::vector<Tensor> params_;
    std::vector<std::string> names_;
};

/// Greedy decoding after the prompt layout BOS + prompt + SEP. Ties go to the lowest id.
/// Stops at EOS, after `max_new` tokens, or when the context is full.
std::string generate(const TransformerLM& model, const Tokenizer& tokenizer, std::string_view prompt,
                     std::size_t max_new);

}  // namespace sevlm
