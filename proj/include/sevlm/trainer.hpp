#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "sevlm/dataset.hpp"
#include "sevlm/model.hpp"
#include "sevlm/optimizer.hpp"
#include "sevlm/severity_loss.hpp"

namespace sevlm {

struct TrainConfig {
    std::size_t steps = 1;
    std::size_t batch_size = 8;
    double learning_rate = 3e-4;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    double weight_decay = 0.01;
    std::optional<double> grad_clip_norm = 1.0;
    std::size_t eval_every = 0;  // 0 disables periodic evaluation
    std::uint64_t seed = 0;
    Weighting weighting = Weighting::uniform();
    OptimizerKind optimizer = OptimizerKind::AdamW;

    void validate() const;
    OptimizerConfig optimizer_config() const;
};

/// Unweighted next-token metrics over masked (answer) tokens.
struct TokenMetrics {
    double mean_nll = 0.0;
    double perplexity = 1.0;
    double accuracy = 0.0;
    std::size_t tokens = 0;
    std::size_t records = 0;

    bool empty() const noexcept { return tokens == 0; }
};

struct EvalReport {
    TokenMetrics overall;
    std::array<TokenMetrics, 3> per_class;  // indexed by label_index
    std::size_t skipped = 0;                // records with no answer token inside the context
};

struct StepRecord {
    std::size_t step = 0;  // 1-based
    std::size_t batch = 0;
    double loss = 0.0;
    double mean_weight = 0.0;
    double grad_norm = 0.0;
    std::vector<double> weights;
    std::vector<SeverityLabel> labels;
    std::optional<EvalReport> eval;
};

struct TrainResult {
    std::vector<StepRecord> history;
    OptimizerState optimizer;
};

class TrainingError : public std::runtime_error {
public:
    TrainingError(std::size_t step, std::size_t batch, const std::string& what);
    std::size_t step() const noexcept { return step_; }
    std::size_t batch() const noexcept { return batch_; }

private:
    std::size_t step_;
    std::size_t batch_;
};

/// Rows are split into model input (all but the last token) and targets (all but the first).
struct RowView {
    std::span<const TokenId> inputs;
    std::span<const TokenId> targets;
    std::span<const std::uint8_t> mask;
};
RowView row_view(const TokenBatch& batch, std::size_t row);

/// Weighted batch loss with gradients accumulated into the model's parameters.
/// Parameter gradients are cleared first.
LossBreakdown accumulate_batch_gradients(TransformerLM& model, const TokenBatch& batch, const Weighting& weighting);

/// Runs `cfg.steps` optimizer steps, visiting `batches` in order and wrapping around.
/// Validation happens every `eval_every` steps when `valid` is non-empty.
TrainResult train(TransformerLM& model, std::span<const TokenBatch> batches, std::span<const ComplaintRecord> valid,
                  const Tokenizer& tokenizer, const TrainConfig& cfg,
                  const std::function<void(const StepRecord&)>& on_step = {});

/// Severity never enters evaluation; records are only grouped by their label.
EvalReport evaluate(const TransformerLM& model, std::span<const ComplaintRecord> records, const Tokenizer& tokenizer);

std::string format_eval_report(const EvalReport& report);

/// One JSON object per step: step, batch, loss, mean_weight, grad_norm, weights, labels and,
/// when present, eval.
void write_history(const std::filesystem::path& path, std::span<const StepRecord> history);
std::string history_line(const StepRecord& record);

}  // namespace sevlm
