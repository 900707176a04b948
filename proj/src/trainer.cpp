#include "sevlm/trainer.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include "json.hpp"

namespace sevlm {

using nlohmann::json;

void TrainConfig::validate() const {
    auto fail = [](const std::string& what) { throw std::invalid_argument("invalid training config: " + what); };
    if (steps == 0) fail("steps must be at least 1");
    if (batch_size == 0) fail("batch_size must be at least 1");
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) fail("learning_rate must be positive");
    if (!(adam_beta1 > 0.0 && adam_beta1 < 1.0)) fail("adam_beta1 must lie in (0, 1)");
    if (!(adam_beta2 > 0.0 && adam_beta2 < 1.0)) fail("adam_beta2 must lie in (0, 1)");
    if (!(adam_eps > 0.0)) fail("adam_eps must be positive");
    if (!(weight_decay >= 0.0)) fail("weight_decay must be non-negative");
    if (grad_clip_norm && !(*grad_clip_norm > 0.0)) fail("grad_clip_norm must be positive");
}

OptimizerConfig TrainConfig::optimizer_config() const {
    return OptimizerConfig{optimizer, learning_rate, adam_beta1, adam_beta2, adam_eps, weight_decay};
}

TrainingError::TrainingError(std::size_t step, std::size_t batch, const std::string& what)
    : std::runtime_error("step " + std::to_string(step) + ", batch " + std::to_string(batch) + ": " + what),
      step_(step),
      batch_(batch) {}

RowView row_view(const TokenBatch& batch, std::size_t row) {
    const std::size_t len = batch.lengths.at(row);
    const auto tokens = batch.row_tokens(row);
    const auto mask = batch.row_mask(row);
    return RowView{tokens.first(len - 1), tokens.subspan(1, len - 1), mask.subspan(1, len - 1)};
}

LossBreakdown accumulate_batch_gradients(TransformerLM& model, const TokenBatch& batch, const Weighting& weighting) {
    model.zero_grad();
    Tape tape;
    std::vector<LossInstance> instances;
    instances.reserve(batch.rows);
    for (std::size_t r = 0; r < batch.rows; ++r) {
        const RowView view = row_view(batch, r);
        instances.push_back(LossInstance{model.forward(tape, view.inputs), view.targets, view.mask,
                                         batch.severities[r]});
    }
    BatchLoss loss = batch_loss(instances, weighting);
    tape.backward(loss.total);
    return std::move(loss.breakdown);
}

namespace {

bool all_finite(std::span<const std::vector<double>> grads) {
    for (const auto& g : grads) {
        for (double x : g) {
            if (!std::isfinite(x)) {
                return false;
            }
        }
    }
    return true;
}

}  // namespace

TrainResult train(TransformerLM& model, std::span<const TokenBatch> batches, std::span<const ComplaintRecord> valid,
                  const Tokenizer& tokenizer, const TrainConfig& cfg,
                  const std::function<void(const StepRecord&)>& on_step) {
    cfg.validate();
    if (batches.empty()) {
        throw std::invalid_argument("train needs at least one batch");
    }
    const OptimizerConfig opt = cfg.optimizer_config();
    TrainResult result;
    result.history.reserve(cfg.steps);
    for (std::size_t step = 1; step <= cfg.steps; ++step) {
        const std::size_t b = (step - 1) % batches.size();
        const TokenBatch& batch = batches[b];

        StepRecord rec;
        rec.step = step;
        rec.batch = b;
        LossBreakdown breakdown;
        try {
            breakdown = accumulate_batch_gradients(model, batch, cfg.weighting);
        } catch (const TensorError& e) {
            throw TrainingError(step, b, e.what());
        }
        if (!std::isfinite(breakdown.total)) {
            throw TrainingError(step, b, "non-finite loss");
        }
        auto grads = collect_grads(model.parameters());
        if (!all_finite(grads)) {
            throw TrainingError(step, b, "non-finite gradient");
        }
        rec.grad_norm = cfg.grad_clip_norm ? clip_grad_norm(grads, *cfg.grad_clip_norm) : global_grad_norm(grads);
        if (cfg.optimizer == OptimizerKind::AdamW) {
            adamw_step(model.parameters(), grads, result.optimizer, opt);
        } else {
            sgd_step(model.parameters(), grads, opt);
            result.optimizer.step += 1;
        }
        model.zero_grad();

        rec.loss = breakdown.total;
        double wsum = 0.0;
        for (double w : breakdown.per_instance_weights) {
            wsum += w;
        }
        rec.mean_weight = wsum / static_cast<double>(breakdown.per_instance_weights.size());
        rec.weights = std::move(breakdown.per_instance_weights);
        rec.labels = batch.labels;
        if (cfg.eval_every != 0 && !valid.empty() && (step % cfg.eval_every == 0 || step == cfg.steps)) {
            rec.eval = evaluate(model, valid, tokenizer);
        }
        if (on_step) {
            on_step(rec);
        }
        result.history.push_back(std::move(rec));
    }
    return result;
}

namespace {

void finish(TokenMetrics& m, double nll_sum, std::size_t hits) {
    if (m.tokens == 0) {
        m.mean_nll = std::numeric_limits<double>::quiet_NaN();
        m.perplexity = std::numeric_limits<double>::quiet_NaN();
        m.accuracy = std::numeric_limits<double>::quiet_NaN();
        return;
    }
    m.mean_nll = nll_sum / static_cast<double>(m.tokens);
    m.perplexity = std::exp(m.mean_nll);
    m.accuracy = static_cast<double>(hits) / static_cast<double>(m.tokens);
}

}  // namespace

EvalReport evaluate(const TransformerLM& model, std::span<const ComplaintRecord> records, const Tokenizer& tokenizer) {
    if (records.empty()) {
        throw std::invalid_argument("evaluate needs at least one record");
    }
    EvalReport report;
    std::array<double, 3> class_nll{};
    std::array<std::size_t, 3> class_hits{};
    double nll_sum = 0.0;
    std::size_t hits = 0;
    std::vector<double> logp;
    for (const auto& rec : records) {
        auto enc = encode_pair(tokenizer, rec.question, rec.answer, model.config().max_seq_len + 1);
        if (!enc) {
            ++report.skipped;
            continue;
        }
        const std::size_t k = label_index(rec.severity);
        const std::span<const TokenId> ids(enc->ids);
        const Tensor logits = model.logits(ids.first(ids.size() - 1));
        const std::size_t vocab = logits.dim(1);
        logp.resize(vocab);
        for (std::size_t t = 0; t + 1 < ids.size(); ++t) {
            if (enc->mask[t + 1] == 0) {
                continue;
            }
            const auto row = logits.data().subspan(t * vocab, vocab);
            kernels::log_softmax_row(row, logp);
            const auto target = static_cast<std::size_t>(ids[t + 1]);
            std::size_t best = 0;
            for (std::size_t j = 1; j < vocab; ++j) {
                if (row[j] > row[best]) {
                    best = j;
                }
            }
            const double nll = -logp[target];
            const std::size_t hit = best == target ? 1 : 0;
            nll_sum += nll;
            hits += hit;
            report.overall.tokens += 1;
            class_nll[k] += nll;
            class_hits[k] += hit;
            report.per_class[k].tokens += 1;
        }
        report.overall.records += 1;
        report.per_class[k].records += 1;
    }
    finish(report.overall, nll_sum, hits);
    for (std::size_t k = 0; k < 3; ++k) {
        finish(report.per_class[k], class_nll[k], class_hits[k]);
    }
    return report;
}

std::string format_eval_report(const EvalReport& report) {
    std::ostringstream os;
    auto line = [&](std::string_view name, const TokenMetrics& m) {
        os << std::left << std::setw(14) << name << std::right;
        if (m.empty()) {
            os << "  (no tokens)\n";
            return;
        }
        os << std::fixed << std::setprecision(6) << "  nll " << m.mean_nll << "  ppl " << m.perplexity << "  acc "
           << m.accuracy << "  tokens " << m.tokens << "  records " << m.records << '\n';
    };
    line("overall", report.overall);
    for (SeverityLabel label : kAllSeverityLabels) {
        line(label_name(label), report.per_class[label_index(label)]);
    }
    if (report.skipped != 0) {
        os << "skipped " << report.skipped << " record(s) that do not fit the context\n";
    }
    return os.str();
}

namespace {

json metrics_json(const TokenMetrics& m) {
    json j;
    j["tokens"] = m.tokens;
    j["records"] = m.records;
    if (m.empty()) {
        j["mean_nll"] = nullptr;
        j["perplexity"] = nullptr;
        j["accuracy"] = nullptr;
    } else {
        j["mean_nll"] = m.mean_nll;
        j["perplexity"] = m.perplexity;
        j["accuracy"] = m.accuracy;
    }
    return j;
}

}  // namespace

std::string history_line(const StepRecord& record) {
    json j;
    j["step"] = record.step;
    j["batch"] = record.batch;
    j["loss"] = record.loss;
    j["mean_weight"] = record.mean_weight;
    j["grad_norm"] = record.grad_norm;
    j["weights"] = record.weights;
    json labels = json::array();
    for (SeverityLabel l : record.labels) {
        labels.push_back(std::string(label_name(l)));
    }
    j["labels"] = std::move(labels);
    if (record.eval) {
        json e;
        e["overall"] = metrics_json(record.eval->overall);
        for (SeverityLabel l : kAllSeverityLabels) {
            e[std::string(label_name(l))] = metrics_json(record.eval->per_class[label_index(l)]);
        }
        e["skipped"] = record.eval->skipped;
        j["eval"] = std::move(e);
    }
    return j.dump();
}

void write_history(const std::filesystem::path& path, std::span<const StepRecord> history) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw std::runtime_error("cannot write history file " + path.string());
    }
    for (const auto& rec : history) {
        out << history_line(rec) << '\n';
    }
    if (!out) {
        throw std::runtime_error("write failed for " + path.string());
    }
}

}  // namespace sevlm
