#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "sevlm/autograd.hpp"
#include "sevlm/tokenizer.hpp"

namespace sevlm {

/// Maximum |p_nc + p_n + p_c - 1| accepted for a severity distribution.
inline constexpr double kSimplexTolerance = 1e-6;

class SeverityError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Soft severity distribution over (non-critical, neutral, critical).
struct SeverityDistribution {
    double p_nc = 0.0;
    double p_n = 0.0;
    double p_c = 0.0;

    friend bool operator==(const SeverityDistribution&, const SeverityDistribution&) = default;
};

/// Empty when `dist` is a valid simplex, otherwise a message naming the violated invariant.
std::optional<std::string> simplex_violation(const SeverityDistribution& dist);
void require_simplex(const SeverityDistribution& dist);

/// Coefficients (alpha, beta, gamma) for non-critical, neutral and critical probability mass.
struct WeightConfig {
    double alpha = 1.0;
    double beta = 1.0;
    double gamma = 1.0;
    std::string name;

    static WeightConfig mild() { return {0.75, 1.0, 1.25, "mild"}; }
    static WeightConfig strong() { return {0.25, 1.0, 1.75, "strong"}; }
    static WeightConfig balanced() { return {0.5, 1.0, 1.5, "balanced"}; }

    void validate() const;
};

/// w = alpha * p_nc + beta * p_n + gamma * p_c. Both arguments are validated first.
double compute_weight(const SeverityDistribution& dist, const WeightConfig& cfg);

/// Either plain cross-entropy (every instance weighs 1) or severity weighting by a WeightConfig.
class Weighting {
public:
    static Weighting uniform() { return Weighting(); }
    explicit Weighting(WeightConfig cfg);

    bool is_uniform() const noexcept { return !config_.has_value(); }
    const std::optional<WeightConfig>& config() const noexcept { return config_; }
    double weight(const SeverityDistribution& dist) const;
    /// "uniform-ce", a preset name, or "alpha,beta,gamma".
    std::string describe() const;

private:
    Weighting() = default;
    std::optional<WeightConfig> config_;
};

/// Parses mild | strong | balanced | "a,b,g" into a WeightConfig.
WeightConfig parse_weight_config(std::string_view text);
/// Same as parse_weight_config, plus "uniform-ce".
Weighting parse_weighting(std::string_view text);

using LossMask = std::vector<std::uint8_t>;

/// Negative log-likelihood of each masked-in target, in position order.
///
/// `logits` is [L, V]; `targets` and `mask` have length L. Masked-out positions are not
/// present in the result and receive no gradient. Throws when no position is masked in.
Var token_nll_unreduced(Var logits, std::span<const TokenId> targets, std::span<const std::uint8_t> mask);

/// w times the mean NLL over masked-in tokens.
Var weighted_mean_nll(Var logits, std::span<const TokenId> targets, std::span<const std::uint8_t> mask, double weight);

/// Severity-aware loss of one instance: compute_weight(dist, cfg) times its mean masked token NLL.
Var severity_weighted_loss(Var logits, std::span<const TokenId> targets, std::span<const std::uint8_t> mask,
                           const SeverityDistribution& dist, const WeightConfig& cfg);

struct LossInstance {
    Var logits;
    std::span<const TokenId> targets;
    std::span<const std::uint8_t> mask;
    SeverityDistribution dist;
};

struct LossBreakdown {
    double total = 0.0;
    std::vector<double> per_instance_weights;
    std::vector<double> per_instance_unweighted;
    std::size_t token_count = 0;
};

struct BatchLoss {
    Var total;
    LossBreakdown breakdown;
};

/// Unweighted mean over instances of each instance's weighted loss.
BatchLoss batch_loss(std::span<const LossInstance> instances, const Weighting& weighting);
BatchLoss batch_loss(std::span<const LossInstance> instances, const WeightConfig& cfg);

}  // namespace sevlm
