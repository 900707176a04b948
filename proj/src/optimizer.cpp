#include "sevlm/optimizer.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace sevlm {

std::string_view optimizer_name(OptimizerKind kind) { return kind == OptimizerKind::AdamW ? "adamw" : "sgd"; }

OptimizerKind parse_optimizer(std::string_view text) {
    if (text == "adamw") return OptimizerKind::AdamW;
    if (text == "sgd") return OptimizerKind::Sgd;
    throw std::invalid_argument("unknown optimizer '" + std::string(text) + "' (expected adamw or sgd)");
}

namespace {

void check_sizes(std::span<Tensor> params, std::span<const std::vector<double>> grads) {
    if (params.size() != grads.size()) {
        throw std::invalid_argument("optimizer got " + std::to_string(grads.size()) + " gradients for " +
                                    std::to_string(params.size()) + " parameters");
    }
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (grads[i].size() != params[i].numel()) {
            throw std::invalid_argument("gradient " + std::to_string(i) + " has " + std::to_string(grads[i].size()) +
                                        " values for parameter of shape " + shape_to_string(params[i].shape()));
        }
    }
}

}  // namespace

void adamw_step(std::span<Tensor> params, std::span<const std::vector<double>> grads, OptimizerState& state,
                const OptimizerConfig& cfg) {
    check_sizes(params, grads);
    if (state.m.empty()) {
        for (const Tensor& p : params) {
            state.m.emplace_back(p.numel(), 0.0);
            state.v.emplace_back(p.numel(), 0.0);
        }
    }
    if (state.m.size() != params.size()) {
        throw std::invalid_argument("optimizer state does not match the parameter list");
    }
    state.step += 1;
    const double t = static_cast<double>(state.step);
    const double bc1 = 1.0 - std::pow(cfg.beta1, t);
    const double bc2 = 1.0 - std::pow(cfg.beta2, t);
    const double decay = 1.0 - cfg.learning_rate * cfg.weight_decay;
    for (std::size_t i = 0; i < params.size(); ++i) {
        auto p = params[i].data();
        auto& m = state.m[i];
        auto& v = state.v[i];
        const auto& g = grads[i];
        for (std::size_t j = 0; j < p.size(); ++j) {
            m[j] = cfg.beta1 * m[j] + (1.0 - cfg.beta1) * g[j];
            v[j] = cfg.beta2 * v[j] + (1.0 - cfg.beta2) * g[j] * g[j];
            const double m_hat = m[j] / bc1;
            const double v_hat = v[j] / bc2;
            p[j] = p[j] * decay - cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.eps);
        }
    }
}

void sgd_step(std::span<Tensor> params, std::span<const std::vector<double>> grads, const OptimizerConfig& cfg) {
    check_sizes(params, grads);
    const double decay = 1.0 - cfg.learning_rate * cfg.weight_decay;
    for (std::size_t i = 0; i < params.size(); ++i) {
        auto p = params[i].data();
        for (std::size_t j = 0; j < p.size(); ++j) {
            p[j] = p[j] * decay - cfg.learning_rate * grads[i][j];
        }
    }
}

std::vector<std::vector<double>> collect_grads(std::span<const Tensor> params) {
    std::vector<std::vector<double>> out;
    out.reserve(params.size());
    for (const Tensor& p : params) {
        if (p.grad()) {
            out.push_back(*p.grad());
        } else {
            out.emplace_back(p.numel(), 0.0);
        }
    }
    return out;
}

double global_grad_norm(std::span<const std::vector<double>> grads) {
    double sq = 0.0;
    for (const auto& g : grads) {
        for (double x : g) {
            sq += x * x;
        }
    }
    return std::sqrt(sq);
}

double clip_grad_norm(std::span<std::vector<double>> grads, double max_norm) {
    const double norm = global_grad_norm(grads);
    if (norm > max_norm && norm > 0.0) {
        const double factor = max_norm / norm;
        for (auto& g : grads) {
            for (double& x : g) {
                x *= factor;
            }
        }
    }
    return norm;
}

}  // namespace sevlm
