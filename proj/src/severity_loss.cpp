#include "sevlm/severity_loss.hpp"

#include <cmath>
#include <sstream>

namespace sevlm {

std::optional<std::string> simplex_violation(const SeverityDistribution& dist) {
    const double parts[] = {dist.p_nc, dist.p_n, dist.p_c};
    const char* names[] = {"non_critical", "neutral", "critical"};
    for (int i = 0; i < 3; ++i) {
        if (!std::isfinite(parts[i])) {
            return std::string(names[i]) + " probability is not finite";
        }
        if (parts[i] < 0.0 || parts[i] > 1.0) {
            std::ostringstream os;
            os << names[i] << " probability " << parts[i] << " outside [0, 1]";
            return os.str();
        }
    }
    const double total = dist.p_nc + dist.p_n + dist.p_c;
    if (std::abs(total - 1.0) > kSimplexTolerance) {
        std::ostringstream os;
        os << "probabilities sum to " << total << ", not 1 within " << kSimplexTolerance;
        return os.str();
    }
    return std::nullopt;
}

void require_simplex(const SeverityDistribution& dist) {
    if (auto problem = simplex_violation(dist)) {
        throw SeverityError("invalid severity distribution: " + *problem);
    }
}

void WeightConfig::validate() const {
    if (!(std::isfinite(alpha) && std::isfinite(beta) && std::isfinite(gamma))) {
        throw SeverityError("weight coefficients must be finite");
    }
    if (alpha < 0.0 || beta < 0.0 || gamma < 0.0) {
        std::ostringstream os;
        os << "weight coefficients must be non-negative, got (" << alpha << ", " << beta << ", " << gamma << ")";
        throw SeverityError(os.str());
    }
}

double compute_weight(const SeverityDistribution& dist, const WeightConfig& cfg) {
    require_simplex(dist);
    cfg.validate();
    return cfg.alpha * dist.p_nc + cfg.beta * dist.p_n + cfg.gamma * dist.p_c;
}

Weighting::Weighting(WeightConfig cfg) : config_(std::move(cfg)) { config_->validate(); }

double Weighting::weight(const SeverityDistribution& dist) const {
    if (!config_) {
        require_simplex(dist);
        return 1.0;
    }
    return compute_weight(dist, *config_);
}

std::string Weighting::describe() const {
    if (!config_) {
        return "uniform-ce";
    }
    if (!config_->name.empty()) {
        return config_->name;
    }
    std::ostringstream os;
    os << config_->alpha << ',' << config_->beta << ',' << config_->gamma;
    return os.str();
}

WeightConfig parse_weight_config(std::string_view text) {
    if (text == "mild") return WeightConfig::mild();
    if (text == "strong") return WeightConfig::strong();
    if (text == "balanced") return WeightConfig::balanced();

    std::vector<double> values;
    std::string item;
    std::istringstream in{std::string(text)};
    while (std::getline(in, item, ',')) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(item, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != item.size()) {
            throw SeverityError("cannot parse weight configuration '" + std::string(text) +
                                "': expected mild, strong, balanced or alpha,beta,gamma");
        }
        values.push_back(v);
    }
    if (values.size() != 3) {
        throw SeverityError("weight configuration '" + std::string(text) + "' needs exactly three coefficients");
    }
    WeightConfig cfg{values[0], values[1], values[2], ""};
    cfg.validate();
    return cfg;
}

Weighting parse_weighting(std::string_view text) {
    if (text == "uniform-ce") {
        return Weighting::uniform();
    }
    return Weighting(parse_weight_config(text));
}

Var token_nll_unreduced(Var logits, std::span<const TokenId> targets, std::span<const std::uint8_t> mask) {
    const Tensor& lv = logits.value();
    if (lv.rank() != 2) {
        throw TensorError("token_nll_unreduced expects [L, V] logits, got " + shape_to_string(lv.shape()));
    }
    const std::size_t len = lv.dim(0);
    const std::size_t vocab = lv.dim(1);
    if (targets.size() != len || mask.size() != len) {
        throw TensorError("token_nll_unreduced: logits have " + std::to_string(len) + " positions but targets has " +
                          std::to_string(targets.size()) + " and mask " + std::to_string(mask.size()));
    }
    std::vector<std::size_t> rows;
    std::vector<std::size_t> cols;
    for (std::size_t t = 0; t < len; ++t) {
        if (mask[t] == 0) {
            continue;
        }
        if (targets[t] < 0 || static_cast<std::size_t>(targets[t]) >= vocab) {
            throw TensorError("target id " + std::to_string(targets[t]) + " at position " + std::to_string(t) +
                              " outside vocabulary of " + std::to_string(vocab));
        }
        rows.push_back(t);
        cols.push_back(static_cast<std::size_t>(targets[t]));
    }
    if (rows.empty()) {
        throw TensorError("instance has no masked-in target tokens");
    }
    return ops::scale(ops::gather_entries(ops::log_softmax(logits), rows, cols), -1.0);
}

Var weighted_mean_nll(Var logits, std::span<const TokenId> targets, std::span<const std::uint8_t> mask,
                      double weight) {
    return ops::scale(ops::mean(token_nll_unreduced(logits, targets, mask)), weight);
}

Var severity_weighted_loss(Var logits, std::span<const TokenId> targets, std::span<const std::uint8_t> mask,
                           const SeverityDistribution& dist, const WeightConfig& cfg) {
    return weighted_mean_nll(logits, targets, mask, compute_weight(dist, cfg));
}

BatchLoss batch_loss(std::span<const LossInstance> instances, const Weighting& weighting) {
    if (instances.empty()) {
        throw TensorError("batch_loss needs at least one instance");
    }
    BatchLoss out;
    std::vector<Var> terms;
    for (const LossInstance& inst : instances) {
        const double w = weighting.weight(inst.dist);
        Var nll = token_nll_unreduced(inst.logits, inst.targets, inst.mask);
        Var unweighted = ops::mean(nll);
        terms.push_back(ops::scale(unweighted, w));
        out.breakdown.per_instance_weights.push_back(w);
        out.breakdown.per_instance_unweighted.push_back(unweighted.value().item());
        out.breakdown.token_count += nll.value().numel();
    }
    out.total = ops::mean(ops::stack(terms));
    out.breakdown.total = out.total.value().item();
    return out;
}

BatchLoss batch_loss(std::span<const LossInstance> instances, const WeightConfig& cfg) {
    return batch_loss(instances, Weighting(cfg));
}

}  // namespace sevlm
