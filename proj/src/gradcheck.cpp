#include "sevlm/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include "sevlm/rng.hpp"
#include "sevlm/severity_loss.hpp"

namespace sevlm {

double relative_error(double analytic, double numeric, double floor) {
    const double denom = std::max({std::abs(analytic), std::abs(numeric), floor});
    return std::abs(analytic - numeric) / denom;
}

namespace {

struct Trial {
    std::vector<TokenId> inputs;
    std::vector<TokenId> targets;
    LossMask mask;
    SeverityDistribution dist;
    WeightConfig cfg;
};

Trial draw_trial(Rng& rng, std::size_t vocab, std::size_t len) {
    Trial t;
    for (std::size_t i = 0; i < len; ++i) {
        t.inputs.push_back(static_cast<TokenId>(rng.below(vocab)));
        t.targets.push_back(static_cast<TokenId>(rng.below(vocab)));
        t.mask.push_back(rng.uniform() < 0.6 ? 1 : 0);
    }
    t.mask[rng.below(len)] = 1;
    const double a = rng.uniform(0.05, 1.0);
    const double b = rng.uniform(0.05, 1.0);
    const double c = rng.uniform(0.05, 1.0);
    const double total = a + b + c;
    t.dist = {a / total, b / total, 1.0 - a / total - b / total};
    t.dist.p_c = std::max(0.0, t.dist.p_c);
    t.cfg = WeightConfig{rng.uniform(0.0, 2.0), rng.uniform(0.0, 2.0), rng.uniform(0.0, 2.0), ""};
    return t;
}

double loss_value(TransformerLM& model, const Trial& t) {
    Tape tape;
    Var logits = model.forward(tape, t.inputs);
    return severity_weighted_loss(logits, t.targets, t.mask, t.dist, t.cfg).value().item();
}

}  // namespace

GradcheckReport gradcheck(const GradcheckOptions& options) {
    if (!(options.tolerance > 0.0)) {
        throw std::invalid_argument("gradcheck tolerance must be positive");
    }
    if (options.trials == 0) {
        throw std::invalid_argument("gradcheck needs at least one trial");
    }
    if (options.seq_len == 0 || options.seq_len > options.model.max_seq_len) {
        throw std::invalid_argument("gradcheck seq_len must lie in [1, max_seq_len]");
    }
    GradcheckReport report;
    report.tolerance = options.tolerance;
    Rng rng(options.seed);
    for (std::size_t trial = 0; trial < options.trials; ++trial) {
        ModelConfig mc = options.model;
        mc.seed = rng.next_u64();
        TransformerLM model(mc);
        for (Tensor& p : model.parameters()) {
            for (double& x : p.data()) {
                x += options.parameter_noise * rng.normal();
            }
        }
        const Trial t = draw_trial(rng, mc.vocab_size, options.seq_len);

        {
            Tape tape;
            Var logits = model.forward(tape, t.inputs);
            tape.backward(severity_weighted_loss(logits, t.targets, t.mask, t.dist, t.cfg));
        }
        if (report.tensors.empty()) {
            for (std::size_t i = 0; i < model.parameters().size(); ++i) {
                report.tensors.push_back({model.parameter_names()[i], model.parameters()[i].numel(), 0.0, 0.0});
            }
        }
        for (std::size_t i = 0; i < model.parameters().size(); ++i) {
            Tensor& p = model.parameters()[i];
            const std::vector<double> analytic = p.grad() ? *p.grad() : std::vector<double>(p.numel(), 0.0);
            TensorCheck& check = report.tensors[i];
            for (std::size_t j = 0; j < p.numel(); ++j) {
                const double saved = p[j];
                p[j] = saved + options.step;
                const double up = loss_value(model, t);
                p[j] = saved - options.step;
                const double down = loss_value(model, t);
                p[j] = saved;
                const double numeric = (up - down) / (2.0 * options.step);
                check.max_rel_error =
                    std::max(check.max_rel_error, relative_error(analytic[j], numeric, options.floor));
                check.max_abs_grad = std::max(check.max_abs_grad, std::abs(analytic[j]));
            }
        }
    }
    for (const auto& c : report.tensors) {
        report.worst = std::max(report.worst, c.max_rel_error);
    }
    report.passed = report.worst <= options.tolerance;
    return report;
}

std::string format_gradcheck_report(const GradcheckReport& report) {
    std::ostringstream os;
    for (const auto& c : report.tensors) {
        os << std::left << std::setw(20) << c.name << std::right << std::setw(7) << c.elements
           << "  max rel err " << std::scientific << std::setprecision(3) << c.max_rel_error << "  max |grad| "
           << c.max_abs_grad << (c.max_rel_error <= report.tolerance ? "" : "  FAIL") << '\n';
    }
    os << "worst " << std::scientific << std::setprecision(3) << report.worst << " vs tolerance " << report.tolerance
       << ": " << (report.passed ? "PASS" : "FAIL") << '\n';
    return os.str();
}

}  // namespace sevlm
