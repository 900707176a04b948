#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "sevlm/tensor.hpp"

namespace sevlm {

enum class OptimizerKind { AdamW, Sgd };

std::string_view optimizer_name(OptimizerKind kind);
OptimizerKind parse_optimizer(std::string_view text);

struct OptimizerConfig {
    OptimizerKind kind = OptimizerKind::AdamW;
    double learning_rate = 3e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 0.01;
};

/// First and second moment estimates per parameter tensor plus the step counter.
struct OptimizerState {
    std::uint64_t step = 0;
    std::vector<std::vector<double>> m;
    std::vector<std::vector<double>> v;

    friend bool operator==(const OptimizerState&, const OptimizerState&) = default;
};

/// One AdamW update with bias correction and decoupled decay:
///   p <- p * (1 - lr * decay) - lr * m_hat / (sqrt(v_hat) + eps)
/// `grads[i]` must match `params[i]` in size; the state is sized on first use.
void adamw_step(std::span<Tensor> params, std::span<const std::vector<double>> grads, OptimizerState& state,
                const OptimizerConfig& cfg);

/// p <- p * (1 - lr * decay) - lr * g
void sgd_step(std::span<Tensor> params, std::span<const std::vector<double>> grads, const OptimizerConfig& cfg);

/// Gradients held by the parameters themselves; parameters without one contribute zeros.
std::vector<std::vector<double>> collect_grads(std::span<const Tensor> params);

double global_grad_norm(std::span<const std::vector<double>> grads);

/// Rescales all gradients so their joint L2 norm is at most `max_norm`. Returns the norm
/// before clipping.
double clip_grad_norm(std::span<std::vector<double>> grads, double max_norm);

}  // namespace sevlm
