#include <cmath>
#include <vector>

#include "doctest.h"
#include "oracle.hpp"
#include "sevlm/severity_loss.hpp"

using namespace sevlm;
using sevlm::testing::random_tensor;

namespace {

// -log(exp(x_t) / sum_j exp(x_j)) computed without any shifting tricks.
double brute_nll(const Tensor& logits, std::size_t row, TokenId target) {
    const std::size_t vocab = logits.dim(1);
    double z = 0.0;
    for (std::size_t j = 0; j < vocab; ++j) {
        z += std::exp(logits.at(row, j));
    }
    return -std::log(std::exp(logits.at(row, static_cast<std::size_t>(target))) / z);
}

double brute_mean_nll(const Tensor& logits, const std::vector<TokenId>& targets, const LossMask& mask) {
    double total = 0.0;
    std::size_t count = 0;
    for (std::size_t t = 0; t < targets.size(); ++t) {
        if (mask[t]) {
            total += brute_nll(logits, t, targets[t]);
            ++count;
        }
    }
    return total / static_cast<double>(count);
}

struct Instance {
    Tensor logits;
    std::vector<TokenId> targets;
    LossMask mask;
    SeverityDistribution dist;
};

SeverityDistribution random_dist(Rng& rng) {
    const double a = rng.uniform(), b = rng.uniform(), c = rng.uniform() + 1e-3;
    const double s = a + b + c;
    return {a / s, b / s, c / s};
}

Instance random_instance(Rng& rng) {
    Instance inst;
    const std::size_t len = 1 + rng.below(9);
    const std::size_t vocab = 2 + rng.below(12);
    inst.logits = random_tensor(rng, {len, vocab}, 2.0);
    for (std::size_t t = 0; t < len; ++t) {
        inst.targets.push_back(static_cast<TokenId>(rng.below(vocab)));
        inst.mask.push_back(rng.uniform() < 0.5);
    }
    inst.mask[rng.below(len)] = 1;
    inst.dist = random_dist(rng);
    return inst;
}

std::vector<double> logit_grad(Instance inst, const WeightConfig& cfg) {
    inst.logits.set_requires_grad(true);
    Tape tape;
    tape.backward(severity_weighted_loss(tape.param(inst.logits), inst.targets, inst.mask, inst.dist, cfg));
    return *inst.logits.grad();
}

const SeverityDistribution kReferenceRows[] = {{0.32, 0.32, 0.36}, {0.37, 0.35, 0.28}, {0.35, 0.36, 0.29}};

}  // namespace

TEST_CASE("simplex validation names the violated invariant") {
    CHECK_FALSE(simplex_violation({0.2, 0.3, 0.5}));
    CHECK_FALSE(simplex_violation({0.2, 0.3, 0.5 + 5e-7}));
    const auto sum = simplex_violation({0.2, 0.3, 0.3});
    REQUIRE(sum);
    CHECK(sum->find("sum to 0.8") != std::string::npos);
    const auto neg = simplex_violation({-0.1, 0.6, 0.5});
    REQUIRE(neg);
    CHECK(neg->find("non_critical") != std::string::npos);
    CHECK(simplex_violation({std::nan(""), 0.5, 0.5}));
    CHECK_THROWS_AS(compute_weight({0.5, 0.5, 0.5}, WeightConfig::balanced()), SeverityError);
}

TEST_CASE("weight presets and arithmetic") {
    CHECK(WeightConfig::mild().alpha == 0.75);
    CHECK(WeightConfig::mild().gamma == 1.25);
    CHECK(WeightConfig::strong().alpha == 0.25);
    CHECK(WeightConfig::strong().gamma == 1.75);
    CHECK(WeightConfig::balanced().alpha == 0.5);
    CHECK(WeightConfig::balanced().gamma == 1.5);
    for (const WeightConfig& p : {WeightConfig::mild(), WeightConfig::strong(), WeightConfig::balanced()}) {
        CHECK(p.beta == 1.0);
    }

    CHECK(std::abs(compute_weight(kReferenceRows[0], WeightConfig::balanced()) - 1.02) < 1e-12);
    CHECK(std::abs(compute_weight({1.0, 0.0, 0.0}, WeightConfig::strong()) - 0.25) < 1e-12);
    Rng rng(3);
    for (int i = 0; i < 100; ++i) {
        const SeverityDistribution d = random_dist(rng);
        CHECK(std::abs(compute_weight(d, WeightConfig{}) - 1.0) < 1e-12);
        const WeightConfig cfg{rng.uniform(0, 3), rng.uniform(0, 3), rng.uniform(0, 3), ""};
        const double w = compute_weight(d, cfg);
        CHECK(w >= std::min({cfg.alpha, cfg.beta, cfg.gamma}) - 1e-12);
        CHECK(w <= std::max({cfg.alpha, cfg.beta, cfg.gamma}) + 1e-12);
    }
    CHECK_THROWS_AS(WeightConfig({-0.1, 1.0, 1.0, ""}).validate(), SeverityError);
    CHECK_THROWS_AS(Weighting(WeightConfig{1.0, std::nan(""), 1.0, ""}), SeverityError);
}

TEST_CASE("weight monotonicity in alpha and gamma") {
    const WeightConfig base{0.5, 1.0, 1.5, ""};
    const WeightConfig more_gamma{0.5, 1.0, 1.6, ""};
    const WeightConfig more_alpha{0.6, 1.0, 1.5, ""};
    for (const auto& d : kReferenceRows) {
        CHECK(compute_weight(d, more_gamma) > compute_weight(d, base));
        CHECK(compute_weight(d, more_alpha) > compute_weight(d, base));
    }
    const SeverityDistribution no_critical{0.5, 0.5, 0.0};
    CHECK(compute_weight(no_critical, more_gamma) == compute_weight(no_critical, base));
    const SeverityDistribution no_noncritical{0.0, 0.5, 0.5};
    CHECK(compute_weight(no_noncritical, more_alpha) == compute_weight(no_noncritical, base));
}

TEST_CASE("weighting parsing") {
    CHECK(parse_weighting("uniform-ce").is_uniform());
    CHECK(parse_weighting("uniform-ce").describe() == "uniform-ce");
    CHECK(parse_weighting("strong").config()->gamma == 1.75);
    const WeightConfig custom = parse_weight_config("0.1,2,3.5");
    CHECK(custom.alpha == 0.1);
    CHECK(custom.beta == 2.0);
    CHECK(custom.gamma == 3.5);
    CHECK_THROWS_AS(parse_weight_config("1,2"), SeverityError);
    CHECK_THROWS_AS(parse_weight_config("1,x,2"), SeverityError);
    CHECK_THROWS_AS(parse_weight_config("1,-2,2"), SeverityError);
    CHECK_THROWS_AS(parse_weighting("heavy"), SeverityError);
    CHECK(Weighting::uniform().weight({0.1, 0.1, 0.8}) == 1.0);
    CHECK_THROWS_AS(Weighting::uniform().weight({0.1, 0.1, 0.1}), SeverityError);
}

TEST_CASE("token NLL values") {
    Tape tape;
    SUBCASE("uniform logits give ln V") {
        const std::vector<TokenId> targets{0, 3, 2};
        const LossMask mask{1, 1, 1};
        const Tensor nll = token_nll_unreduced(tape.constant(Tensor({3, 4}, 0.7)), targets, mask).value();
        REQUIRE(nll.numel() == 3);
        for (double v : nll.data()) {
            CHECK(std::abs(v - std::log(4.0)) < 1e-12);
        }
    }
    SUBCASE("a saturated target costs nothing") {
        Tensor logits({2, 5}, 0.0);
        logits[0 * 5 + 1] = 50.0;
        logits[1 * 5 + 4] = 50.0;
        const std::vector<TokenId> targets{1, 4};
        const LossMask mask{1, 1};
        const Tensor nll = token_nll_unreduced(tape.constant(logits), targets, mask).value();
        CHECK(nll[0] < 1e-9);
        CHECK(nll[1] < 1e-9);
    }
    SUBCASE("random cases agree with the brute-force oracle") {
        Rng rng(17);
        for (int i = 0; i < 100; ++i) {
            const Instance inst = random_instance(rng);
            Tape t;
            const Tensor nll = token_nll_unreduced(t.constant(inst.logits), inst.targets, inst.mask).value();
            std::size_t k = 0;
            for (std::size_t p = 0; p < inst.targets.size(); ++p) {
                if (inst.mask[p]) {
                    CHECK(std::abs(nll[k++] - brute_nll(inst.logits, p, inst.targets[p])) < 1e-12);
                }
            }
            CHECK(k == nll.numel());
        }
    }
    SUBCASE("invalid inputs") {
        const std::vector<TokenId> targets{0, 1};
        CHECK_THROWS(token_nll_unreduced(tape.constant(Tensor({2, 3})), targets, LossMask{0, 0}));
        CHECK_THROWS(token_nll_unreduced(tape.constant(Tensor({2, 3})), targets, LossMask{1}));
        const std::vector<TokenId> bad{0, 3};
        CHECK_THROWS(token_nll_unreduced(tape.constant(Tensor({2, 3})), bad, LossMask{1, 1}));
        CHECK_NOTHROW(token_nll_unreduced(tape.constant(Tensor({2, 3})), bad, LossMask{1, 0}));
    }
}

TEST_CASE("masked-out positions do not influence the loss") {
    Rng rng(23);
    for (int i = 0; i < 50; ++i) {
        Instance inst = random_instance(rng);
        Tape a;
        const double before =
            severity_weighted_loss(a.constant(inst.logits), inst.targets, inst.mask, inst.dist, WeightConfig::strong())
                .value()
                .item();
        const std::size_t vocab = inst.logits.dim(1);
        for (std::size_t t = 0; t < inst.targets.size(); ++t) {
            if (!inst.mask[t]) {
                for (std::size_t j = 0; j < vocab; ++j) {
                    inst.logits[t * vocab + j] = rng.normal() * 10.0;
                }
                inst.targets[t] = static_cast<TokenId>(rng.below(vocab));
            }
        }
        Tape b;
        const double after =
            severity_weighted_loss(b.constant(inst.logits), inst.targets, inst.mask, inst.dist, WeightConfig::strong())
                .value()
                .item();
        CHECK(before == after);
    }
}

TEST_CASE("severity weighted loss is w times the plain mean cross-entropy") {
    Rng rng(29);
    for (int i = 0; i < 100; ++i) {
        const Instance inst = random_instance(rng);
        const WeightConfig cfg{rng.uniform(0, 2), rng.uniform(0, 2), rng.uniform(0, 2), ""};
        const WeightConfig doubled{2 * cfg.alpha, 2 * cfg.beta, 2 * cfg.gamma, ""};
        Tape tape;
        Var logits = tape.constant(inst.logits);
        const double plain = brute_mean_nll(inst.logits, inst.targets, inst.mask);
        const double ones = severity_weighted_loss(logits, inst.targets, inst.mask, inst.dist, {}).value().item();
        const double w = compute_weight(inst.dist, cfg);
        const double weighted = severity_weighted_loss(logits, inst.targets, inst.mask, inst.dist, cfg).value().item();
        const double twice = severity_weighted_loss(logits, inst.targets, inst.mask, inst.dist, doubled).value().item();
        CHECK(std::abs(ones - plain) < 1e-12);
        CHECK(std::abs(weighted - w * plain) < 1e-12);
        CHECK(std::abs(twice - 2.0 * weighted) < 1e-12);
    }
}

TEST_CASE("logit gradient has the closed form (w/k)(softmax - onehot)") {
    Rng rng(31);
    for (int i = 0; i < 100; ++i) {
        const Instance inst = random_instance(rng);
        const WeightConfig cfg = WeightConfig::balanced();
        const double w = compute_weight(inst.dist, cfg);
        const std::vector<double> g = logit_grad(inst, cfg);
        std::size_t k = 0;
        for (auto m : inst.mask) {
            k += m;
        }
        const std::size_t vocab = inst.logits.dim(1);
        for (std::size_t t = 0; t < inst.targets.size(); ++t) {
            double z = 0.0;
            for (std::size_t j = 0; j < vocab; ++j) {
                z += std::exp(inst.logits.at(t, j));
            }
            for (std::size_t j = 0; j < vocab; ++j) {
                double expected = 0.0;
                if (inst.mask[t]) {
                    const double p = std::exp(inst.logits.at(t, j)) / z;
                    expected = w / static_cast<double>(k) * (p - (static_cast<TokenId>(j) == inst.targets[t]));
                }
                CHECK(std::abs(g[t * vocab + j] - expected) < 1e-12);
            }
        }

        const double err = sevlm::testing::max_grad_error(
            {inst.logits},
            [&](Tape& tape, std::span<const Var> v) {
                std::vector<Var> one{severity_weighted_loss(v[0], inst.targets, inst.mask, inst.dist, cfg)};
                (void)tape;
                return ops::stack(one);
            },
            rng);
        CHECK(err < 1e-6);
    }
}

TEST_CASE("gradient scaling and homogeneity") {
    Rng rng(37);
    for (int i = 0; i < 100; ++i) {
        const Instance inst = random_instance(rng);
        const WeightConfig cfg{rng.uniform(0, 2), rng.uniform(0, 2), rng.uniform(0, 2), ""};
        const double w = compute_weight(inst.dist, cfg);
        const double c = rng.uniform(0.1, 5.0);
        const WeightConfig scaled{c * cfg.alpha, c * cfg.beta, c * cfg.gamma, ""};
        const auto g1 = logit_grad(inst, WeightConfig{});
        const auto gw = logit_grad(inst, cfg);
        const auto gc = logit_grad(inst, scaled);
        for (std::size_t j = 0; j < g1.size(); ++j) {
            CHECK(std::abs(gw[j] - w * g1[j]) < 1e-12);
            CHECK(std::abs(gc[j] - c * gw[j]) < 1e-12);
        }
    }
}

TEST_CASE("batch loss aggregation") {
    Rng rng(41);
    std::vector<Instance> insts;
    for (int i = 0; i < 3; ++i) {
        insts.push_back(random_instance(rng));
    }
    Tape tape;
    std::vector<LossInstance> batch;
    for (const auto& inst : insts) {
        batch.push_back({tape.constant(inst.logits), inst.targets, inst.mask, inst.dist});
    }

    SUBCASE("single instance equals the per-instance loss") {
        const BatchLoss one = batch_loss(std::span(batch).first(1), WeightConfig::strong());
        const double direct = severity_weighted_loss(batch[0].logits, insts[0].targets, insts[0].mask, insts[0].dist,
                                                     WeightConfig::strong())
                                  .value()
                                  .item();
        CHECK(std::abs(one.breakdown.total - direct) < 1e-12);
    }
    SUBCASE("three weighted instances match a hand-summed oracle") {
        const BatchLoss bl = batch_loss(batch, WeightConfig::strong());
        double hand = 0.0;
        std::size_t tokens = 0;
        for (std::size_t i = 0; i < 3; ++i) {
            const double w = compute_weight(insts[i].dist, WeightConfig::strong());
            const double nll = brute_mean_nll(insts[i].logits, insts[i].targets, insts[i].mask);
            hand += w * nll / 3.0;
            CHECK(bl.breakdown.per_instance_weights[i] == w);
            CHECK(std::abs(bl.breakdown.per_instance_unweighted[i] - nll) < 1e-12);
            for (auto m : insts[i].mask) {
                tokens += m;
            }
        }
        CHECK(std::abs(bl.breakdown.total - hand) < 1e-12);
        CHECK(bl.total.value().item() == bl.breakdown.total);
        CHECK(bl.breakdown.token_count == tokens);
    }
    SUBCASE("uniform weighting is the mean of plain cross-entropies") {
        const BatchLoss bl = batch_loss(std::span(batch).first(2), Weighting::uniform());
        const double plain = 0.5 * (brute_mean_nll(insts[0].logits, insts[0].targets, insts[0].mask) +
                                    brute_mean_nll(insts[1].logits, insts[1].targets, insts[1].mask));
        CHECK(std::abs(bl.breakdown.total - plain) < 1e-12);
    }
    SUBCASE("empty batch fails") { CHECK_THROWS(batch_loss(std::span<const LossInstance>(), Weighting::uniform())); }
    SUBCASE("identical text, different distributions, loss ratio equals weight ratio") {
        std::vector<LossInstance> pair{batch[0], batch[0]};
        pair[1].dist = {0.05, 0.05, 0.9};
        const BatchLoss bl = batch_loss(pair, WeightConfig::balanced());
        const auto& b = bl.breakdown;
        const double ratio_loss =
            (b.per_instance_weights[1] * b.per_instance_unweighted[1]) / (b.per_instance_weights[0] * b.per_instance_unweighted[0]);
        CHECK(std::abs(ratio_loss - b.per_instance_weights[1] / b.per_instance_weights[0]) < 1e-12);
    }
}
