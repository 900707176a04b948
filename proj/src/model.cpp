#include "sevlm/model.hpp"

#include <cmath>
#include <stdexcept>

#include "sevlm/rng.hpp"

namespace sevlm {

void ModelConfig::validate() const {
    auto fail = [](const std::string& what) { throw std::invalid_argument("invalid model config: " + what); };
    if (vocab_size == 0) fail("vocab_size must be positive");
    if (d_model == 0) fail("d_model must be positive");
    if (n_heads == 0) fail("n_heads must be positive");
    if (d_model % n_heads != 0) {
        fail("d_model (" + std::to_string(d_model) + ") must be divisible by n_heads (" + std::to_string(n_heads) +
             ")");
    }
    if (n_layers == 0) fail("n_layers must be positive");
    if (d_ff == 0) fail("d_ff must be positive");
    if (max_seq_len < 2) fail("max_seq_len must be at least 2");
}

namespace {

constexpr std::size_t kTokEmb = 0;
constexpr std::size_t kPosEmb = 1;
constexpr std::size_t kLayerBase = 2;
constexpr std::size_t kPerLayer = 12;

enum LayerParam : std::size_t { Ln1G, Ln1B, Wq, Wk, Wv, Wo, Ln2G, Ln2B, W1, B1, W2, B2 };

}  // namespace

TransformerLM::TransformerLM(ModelConfig config) : config_(config) {
    config_.validate();
    const std::size_t d = config_.d_model;
    const std::size_t v = config_.vocab_size;
    Rng rng(config_.seed);
    auto gaussian = [&](Shape shape, std::string name) {
        Tensor t(std::move(shape));
        for (double& x : t.data()) {
            x = kInitStd * rng.normal();
        }
        params_.push_back(std::move(t));
        names_.push_back(std::move(name));
    };
    auto constant = [&](Shape shape, double fill, std::string name) {
        params_.emplace_back(std::move(shape), fill);
        names_.push_back(std::move(name));
    };

    gaussian({v, d}, "tok_emb");
    gaussian({config_.max_seq_len, d}, "pos_emb");
    for (std::size_t l = 0; l < config_.n_layers; ++l) {
        const std::string p = "layer" + std::to_string(l) + ".";
        constant({d}, 1.0, p + "ln1.gain");
        constant({d}, 0.0, p + "ln1.bias");
        gaussian({d, d}, p + "attn.wq");
        gaussian({d, d}, p + "attn.wk");
        gaussian({d, d}, p + "attn.wv");
        gaussian({d, d}, p + "attn.wo");
        constant({d}, 1.0, p + "ln2.gain");
        constant({d}, 0.0, p + "ln2.bias");
        gaussian({d, config_.d_ff}, p + "ffn.w1");
        constant({config_.d_ff}, 0.0, p + "ffn.b1");
        gaussian({config_.d_ff, d}, p + "ffn.w2");
        constant({d}, 0.0, p + "ffn.b2");
    }
    constant({d}, 1.0, "ln_f.gain");
    constant({d}, 0.0, "ln_f.bias");
    gaussian({d, v}, "out_proj");
    for (Tensor& t : params_) {
        t.set_requires_grad(true);
    }
}

std::size_t TransformerLM::parameter_count() const noexcept {
    std::size_t n = 0;
    for (const Tensor& t : params_) {
        n += t.numel();
    }
    return n;
}

void TransformerLM::zero_grad() {
    for (Tensor& t : params_) {
        t.zero_grad();
    }
}

void TransformerLM::check_input(std::span<const TokenId> ids) const {
    if (ids.empty()) {
        throw std::invalid_argument("forward needs at least one token");
    }
    if (ids.size() > config_.max_seq_len) {
        throw std::invalid_argument("sequence of length " + std::to_string(ids.size()) + " exceeds max_seq_len " +
                                    std::to_string(config_.max_seq_len));
    }
    for (std::size_t i = 0; i < ids.size(); ++i) {
        if (ids[i] < 0 || static_cast<std::size_t>(ids[i]) >= config_.vocab_size) {
            throw std::invalid_argument("token id " + std::to_string(ids[i]) + " at position " + std::to_string(i) +
                                        " outside vocabulary of " + std::to_string(config_.vocab_size));
        }
    }
}

template <typename Bind>
Var TransformerLM::run(std::span<const TokenId> ids, Bind bind) const {
    check_input(ids);
    const std::size_t len = ids.size();
    const std::size_t head_dim = config_.d_model / config_.n_heads;
    const double score_scale = 1.0 / std::sqrt(static_cast<double>(head_dim));

    std::vector<TokenId> positions(len);
    for (std::size_t i = 0; i < len; ++i) {
        positions[i] = static_cast<TokenId>(i);
    }
    Var x = ops::add(ops::gather_rows(bind(kTokEmb), ids), ops::gather_rows(bind(kPosEmb), positions));

    std::vector<Var> heads(config_.n_heads);
    for (std::size_t l = 0; l < config_.n_layers; ++l) {
        const std::size_t base = kLayerBase + l * kPerLayer;
        auto p = [&](LayerParam which) { return bind(base + which); };

        Var h = ops::layer_norm(x, p(Ln1G), p(Ln1B));
        Var q = ops::matmul(h, p(Wq));
        Var k = ops::matmul(h, p(Wk));
        Var v = ops::matmul(h, p(Wv));
        for (std::size_t hd = 0; hd < config_.n_heads; ++hd) {
            const std::size_t start = hd * head_dim;
            Var qh = ops::slice_cols(q, start, head_dim);
            Var kh = ops::slice_cols(k, start, head_dim);
            Var vh = ops::slice_cols(v, start, head_dim);
            Var scores = ops::scale(ops::matmul(qh, ops::transpose(kh)), score_scale);
            heads[hd] = ops::matmul(ops::causal_softmax(scores), vh);
        }
        Var attn = config_.n_heads == 1 ? heads[0] : ops::concat_cols(heads);
        x = ops::add(x, ops::matmul(attn, p(Wo)));

        Var h2 = ops::layer_norm(x, p(Ln2G), p(Ln2B));
        Var hidden = ops::relu(ops::add(ops::matmul(h2, p(W1)), p(B1)));
        x = ops::add(x, ops::add(ops::matmul(hidden, p(W2)), p(B2)));
    }
    const std::size_t tail = kLayerBase + config_.n_layers * kPerLayer;
    Var normed = ops::layer_norm(x, bind(tail), bind(tail + 1));
    return ops::matmul(normed, bind(tail + 2));
}

Var TransformerLM::forward(Tape& tape, std::span<const TokenId> ids) {
    return run(ids, [&](std::size_t i) { return tape.param(params_[i]); });
}

Tensor TransformerLM::logits(std::span<const TokenId> ids) const {
    Tape tape;
    Var out = run(ids, [&](std::size_t i) { return tape.constant(params_[i]); });
    return out.value();
}

std::string generate(const TransformerLM& model, const Tokenizer& tokenizer, std::string_view prompt,
                     std::size_t max_new) {
    if (max_new == 0) {
        throw std::invalid_argument("max_new must be at least 1");
    }
    std::vector<TokenId> ids{Tokenizer::kBos};
    for (TokenId id : tokenizer.encode(prompt)) {
        ids.push_back(id);
    }
    ids.push_back(Tokenizer::kSep);
    const std::size_t limit = model.config().max_seq_len;
    if (ids.size() > limit) {
        throw std::invalid_argument("prompt needs " + std::to_string(ids.size()) + " positions but max_seq_len is " +
                                    std::to_string(limit));
    }
    std::vector<TokenId> produced;
    while (produced.size() < max_new && ids.size() <= limit) {
        const Tensor logits = model.logits(ids);
        const std::size_t vocab = logits.dim(1);
        const std::size_t last = (ids.size() - 1) * vocab;
        std::size_t best = 0;
        for (std::size_t j = 1; j < vocab; ++j) {
            if (logits[last + j] > logits[last + best]) {
                best = j;
            }
        }
        const auto next = static_cast<TokenId>(best);
        if (next == Tokenizer::kEos) {
            break;
        }
        produced.push_back(next);
        if (ids.size() == limit) {
            break;
        }
        ids.push_back(next);
    }
    return tokenizer.decode(produced);
}

}  // namespace sevlm
