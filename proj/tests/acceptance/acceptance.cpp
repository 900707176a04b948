// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any fails.
#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "sevlm/dataset.hpp"
#include "sevlm/gradcheck.hpp"
#include "sevlm/rng.hpp"
#include "sevlm/severity_loss.hpp"
#include "sevlm/synth.hpp"
#include "sevlm/trainer.hpp"

using namespace sevlm;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool passed = false;
    std::string detail;
};

double cpu_seconds() { return static_cast<double>(std::clock()) / CLOCKS_PER_SEC; }

std::string fmt(double v, int precision = 6) {
    std::ostringstream os;
    os << std::setprecision(precision) << v;
    return os.str();
}

// -log softmax computed directly, for moderate logits.
double brute_mean_nll(const Tensor& logits, const std::vector<TokenId>& targets, const LossMask& mask) {
    const std::size_t vocab = logits.dim(1);
    double total = 0.0;
    std::size_t count = 0;
    for (std::size_t t = 0; t < targets.size(); ++t) {
        if (!mask[t]) {
            continue;
        }
        double z = 0.0;
        for (std::size_t j = 0; j < vocab; ++j) {
            z += std::exp(logits.at(t, j));
        }
        total += -std::log(std::exp(logits.at(t, static_cast<std::size_t>(targets[t]))) / z);
        ++count;
    }
    return total / static_cast<double>(count);
}

struct RandomInstance {
    Tensor logits;
    std::vector<TokenId> targets;
    LossMask mask;
    SeverityDistribution dist;
};

RandomInstance random_instance(Rng& rng) {
    RandomInstance inst;
    const std::size_t len = 1 + rng.below(10);
    const std::size_t vocab = 2 + rng.below(30);
    inst.logits = Tensor({len, vocab});
    for (double& x : inst.logits.data()) {
        x = 2.0 * rng.normal();
    }
    for (std::size_t t = 0; t < len; ++t) {
        inst.targets.push_back(static_cast<TokenId>(rng.below(vocab)));
        inst.mask.push_back(rng.uniform() < 0.6);
    }
    inst.mask[rng.below(len)] = 1;
    const double a = rng.uniform(), b = rng.uniform(), c = rng.uniform() + 1e-3;
    inst.dist = {a / (a + b + c), b / (a + b + c), c / (a + b + c)};
    return inst;
}

// 1. Weight formula against hand-computed values for the three presets and three reference rows.
Outcome weight_formula() {
    const SeverityDistribution rows[] = {{0.32, 0.32, 0.36}, {0.37, 0.35, 0.28}, {0.35, 0.36, 0.29}};
    struct Case {
        WeightConfig cfg;
        std::array<double, 3> expected;
    };
    const Case cases[] = {
        {WeightConfig::mild(), {1.01, 0.9775, 0.985}},
        {WeightConfig::strong(), {1.03, 0.9325, 0.955}},
        {WeightConfig::balanced(), {1.02, 0.955, 0.97}},
    };
    double worst = 0.0;
    for (const Case& c : cases) {
        for (std::size_t r = 0; r < 3; ++r) {
            worst = std::max(worst, std::abs(compute_weight(rows[r], c.cfg) - c.expected[r]));
        }
    }
    return {worst <= 1e-12, "9 cases, max |error| " + fmt(worst, 3) + ", balanced x row 1 = " +
                                fmt(compute_weight(rows[0], WeightConfig::balanced()), 17)};
}

// 2. (1,1,1) batch loss equals the unweighted mean cross-entropy.
Outcome reduction_property() {
    Rng rng(1001);
    double worst = 0.0;
    for (int b = 0; b < 100; ++b) {
        const std::size_t n = 1 + rng.below(6);
        std::vector<RandomInstance> insts;
        for (std::size_t i = 0; i < n; ++i) {
            insts.push_back(random_instance(rng));
        }
        Tape tape;
        std::vector<LossInstance> batch;
        double oracle = 0.0;
        for (const auto& inst : insts) {
            batch.push_back({tape.constant(inst.logits), inst.targets, inst.mask, inst.dist});
            oracle += brute_mean_nll(inst.logits, inst.targets, inst.mask) / static_cast<double>(n);
        }
        const double total = batch_loss(batch, WeightConfig{1.0, 1.0, 1.0, ""}).breakdown.total;
        worst = std::max(worst, std::abs(total - oracle));
    }
    return {worst <= 1e-12, "100 batches, max |error| " + fmt(worst, 3)};
}

// 3. Logit gradients under weight w are w times those under weight 1.
Outcome gradient_scaling() {
    Rng rng(2002);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
        RandomInstance inst = random_instance(rng);
        const WeightConfig cfg{rng.uniform(0.0, 3.0), rng.uniform(0.0, 3.0), rng.uniform(0.0, 3.0), ""};
        const double w = compute_weight(inst.dist, cfg);
        auto grad = [&](const WeightConfig& c) {
            Tensor logits = inst.logits;
            logits.set_requires_grad(true);
            Tape tape;
            tape.backward(severity_weighted_loss(tape.param(logits), inst.targets, inst.mask, inst.dist, c));
            return *logits.grad();
        };
        const auto g1 = grad(WeightConfig{1.0, 1.0, 1.0, ""});
        const auto gw = grad(cfg);
        for (std::size_t j = 0; j < g1.size(); ++j) {
            worst = std::max(worst, std::abs(gw[j] - w * g1[j]));
        }
    }
    return {worst <= 1e-12, "100 instances, max |g_w - w g_1| " + fmt(worst, 3)};
}

// 4. Every parameter gradient of the reference model against central differences.
Outcome full_gradcheck() {
    GradcheckOptions options;
    options.model = ModelConfig{32, 16, 2, 2, 32, 8, 0};
    options.seq_len = 8;
    options.tolerance = 1e-4;
    options.trials = 1;
    options.seed = 4004;
    const double start = cpu_seconds();
    const GradcheckReport report = gradcheck(options);
    const double elapsed = cpu_seconds() - start;
    std::size_t elements = 0;
    for (const auto& t : report.tensors) {
        elements += t.elements;
    }
    return {report.passed && elapsed < 60.0, std::to_string(report.tensors.size()) + " tensors, " +
                                                  std::to_string(elements) + " elements, worst relative error " +
                                                  fmt(report.worst, 3) + ", cpu " + fmt(elapsed, 3) + " s"};
}

// Settings shared by the comparative experiment and the preset ordering check.
constexpr std::array<std::size_t, 3> kCorpusSizes = {920, 600, 480};
constexpr std::size_t kSteps = 1500;
constexpr std::size_t kBatchSize = 8;
constexpr double kLearningRate = 1e-3;

ModelConfig experiment_model(std::size_t vocab, std::uint64_t seed) { return {vocab, 32, 4, 2, 64, 32, seed}; }

struct Prepared {
    std::vector<ComplaintRecord> records;
    DataSplit parts;
    Tokenizer tokenizer = Tokenizer::from_symbols(U"a");
    std::vector<TokenBatch> batches;
    ModelConfig model;
};

Prepared prepare(std::uint64_t seed) {
    Prepared p;
    SynthSpec spec;
    spec.class_sizes = kCorpusSizes;
    spec.seed = seed;
    p.records = synth_corpus(spec);
    p.parts = split(p.records, kDefaultSplit, seed);
    std::vector<std::string> corpus;
    for (const auto& r : p.records) {
        corpus.push_back(r.question);
        corpus.push_back(r.answer);
    }
    p.tokenizer = Tokenizer::build(corpus);
    p.model = experiment_model(p.tokenizer.size(), seed);
    p.batches = make_batches(p.parts.train, p.tokenizer, kBatchSize, p.model.max_seq_len + 1, seed).batches;
    return p;
}

TrainConfig experiment_train_config(std::uint64_t seed, const Weighting& weighting, std::size_t steps) {
    TrainConfig cfg;
    cfg.steps = steps;
    cfg.batch_size = kBatchSize;
    cfg.learning_rate = kLearningRate;
    cfg.seed = seed;
    cfg.weighting = weighting;
    return cfg;
}

// 5. Balanced weighting lowers critical-class validation NLL without collapsing overall NLL.
Outcome comparative_experiment() {
    const double start = cpu_seconds();
    int wins = 0;
    bool no_collapse = true;
    std::ostringstream rows;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const Prepared p = prepare(seed);
        EvalReport reports[2];
        const Weighting runs[2] = {Weighting::uniform(), Weighting(WeightConfig::balanced())};
        for (int k = 0; k < 2; ++k) {
            TransformerLM model(p.model);
            train(model, p.batches, {}, p.tokenizer, experiment_train_config(seed, runs[k], kSteps));
            reports[k] = evaluate(model, p.parts.validation, p.tokenizer);
        }
        const double crit_u = reports[0].per_class[2].mean_nll;
        const double crit_b = reports[1].per_class[2].mean_nll;
        const double all_u = reports[0].overall.mean_nll;
        const double all_b = reports[1].overall.mean_nll;
        const bool win = crit_b < crit_u;
        const bool close = std::abs(all_b - all_u) <= 0.10 * all_u;
        wins += win;
        no_collapse = no_collapse && close;
        rows << "\n    seed " << seed << ": critical nll uniform " << fmt(crit_u, 5) << " balanced " << fmt(crit_b, 5)
             << (win ? " (lower)" : " (not lower)") << "; overall uniform " << fmt(all_u, 5) << " balanced "
             << fmt(all_b, 5) << " (" << (all_b >= all_u ? "+" : "") << fmt(100.0 * (all_b - all_u) / all_u, 3)
             << "%)";
    }
    const double elapsed = cpu_seconds() - start;
    const bool passed = wins >= 4 && no_collapse && elapsed < 600.0;
    return {passed, std::to_string(wins) + "/5 seeds with lower critical NLL, overall within 10%: " +
                        (no_collapse ? "yes" : "no") + ", cpu " + fmt(elapsed, 4) + " s" + rows.str()};
}

// 6. Mean logged weight of critical-labelled training instances orders mild < balanced < strong.
Outcome preset_ordering() {
    const Prepared p = prepare(1);
    const WeightConfig presets[] = {WeightConfig::mild(), WeightConfig::balanced(), WeightConfig::strong()};
    double means[3] = {};
    std::ostringstream detail;
    for (int k = 0; k < 3; ++k) {
        TransformerLM model(p.model);
        const TrainResult result =
            train(model, p.batches, {}, p.tokenizer, experiment_train_config(1, Weighting(presets[k]), p.batches.size()));
        double sum = 0.0;
        std::size_t n = 0;
        for (const StepRecord& s : result.history) {
            for (std::size_t i = 0; i < s.labels.size(); ++i) {
                if (s.labels[i] == SeverityLabel::Critical) {
                    sum += s.weights[i];
                    ++n;
                }
            }
        }
        means[k] = sum / static_cast<double>(n);
        detail << (k ? ", " : "") << presets[k].name << " " << fmt(means[k], 17) << " (" << n << " instances)";
    }
    // Synthetic critical records carry (0.1, 0.1, 0.8), so the logged means are known exactly.
    const double expected[] = {1.175, 1.35, 1.525};
    bool exact = true;
    for (int k = 0; k < 3; ++k) {
        exact = exact && std::abs(means[k] - expected[k]) <= 1e-12;
    }
    detail << (exact ? "; each matches its analytic value" : "; analytic values NOT matched");
    return {means[0] < means[1] && means[1] < means[2] && exact, detail.str()};
}

// 7. Dataset loading rules and synthetic proportions.
Outcome dataset_invariants() {
    const fs::path data = SEVLM_TEST_DATA_DIR;
    std::ostringstream detail;
    bool ok = true;
    try {
        const auto table = load_records(data / "reference_rows.jsonl");
        ok = ok && table.size() == 6;
        detail << "fixture " << table.size() << " records";
    } catch (const std::exception& e) {
        ok = false;
        detail << "fixture failed: " << e.what();
    }
    auto expect_issue = [&](const char* file, std::size_t line, const char* fragment) {
        const LoadResult r = read_records(data / file);
        const bool hit = r.issues.size() == 1 && r.issues[0].line == line &&
                         r.issues[0].message.find(fragment) != std::string::npos;
        detail << "; " << file << (hit ? " rejected at line " + std::to_string(line) : " NOT rejected as expected");
        ok = ok && hit;
    };
    expect_issue("bad_sum.jsonl", 2, "sum to 0.8");
    expect_issue("bad_label.jsonl", 4, "argmax");
    SynthSpec spec;
    spec.class_sizes = {46, 30, 24};
    const DatasetStats s = compute_stats(synth_corpus(spec), Weighting::uniform());
    const bool exact = s.class_fractions[0] == 0.46 && s.class_fractions[1] == 0.30 && s.class_fractions[2] == 0.24;
    detail << "; synth fractions " << s.class_fractions[0] << "/" << s.class_fractions[1] << "/"
           << s.class_fractions[2];
    return {ok && exact, detail.str()};
}

std::vector<char> file_bytes(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// 8. Two CLI training runs from the committed config give identical outputs.
Outcome reproducible_training() {
    const fs::path config = SEVLM_DESK_CONFIG;
    const fs::path root = fs::temp_directory_path() / ("sevlm_acceptance_" + std::to_string(::getpid()));
    fs::create_directories(root);
    for (const char* run : {"a", "b"}) {
        const fs::path dir = root / run;
        fs::create_directories(dir);
        const std::string cmd = std::string("\"") + SEVLM_CLI_PATH + "\" train \"" + config.string() +
                                "\" --checkpoint \"" + (dir / "model.ckpt").string() + "\" --history \"" +
                                (dir / "history.jsonl").string() + "\" > \"" + (dir / "log.txt").string() + "\" 2>&1";
        if (std::system(cmd.c_str()) != 0) {
            fs::remove_all(root);
            return {false, std::string("train run ") + run + " failed"};
        }
    }
    const auto ha = file_bytes(root / "a/history.jsonl");
    const auto hb = file_bytes(root / "b/history.jsonl");
    const auto ca = file_bytes(root / "a/model.ckpt");
    const auto cb = file_bytes(root / "b/model.ckpt");
    fs::remove_all(root);
    const bool same = !ha.empty() && !ca.empty() && ha == hb && ca == cb;
    return {same, "history " + std::to_string(ha.size()) + " bytes " + (ha == hb ? "identical" : "DIFFER") +
                      ", checkpoint " + std::to_string(ca.size()) + " bytes " + (ca == cb ? "identical" : "DIFFER")};
}

}  // namespace

int main(int argc, char** argv) {
    struct Criterion {
        int id;
        const char* name;
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> criteria = {
        {1, "weight formula fidelity", weight_formula},
        {2, "reduction to plain cross-entropy", reduction_property},
        {3, "gradient scaling law", gradient_scaling},
        {4, "full model gradcheck", full_gradcheck},
        {5, "comparative experiment", comparative_experiment},
        {6, "preset ordering of critical weights", preset_ordering},
        {7, "dataset invariants", dataset_invariants},
        {8, "reproducible CLI training", reproducible_training},
    };
    std::vector<int> only;
    for (int i = 1; i < argc; ++i) {
        only.push_back(std::atoi(argv[i]));
    }
    int failures = 0;
    for (const Criterion& c : criteria) {
        if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) {
            continue;
        }
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failures += !o.passed;
        std::cout << (o.passed ? "PASS" : "FAIL") << "  [" << c.id << "] " << c.name << ": " << o.detail << std::endl;
    }
    std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criterion(s) failed")
              << std::endl;
    return failures == 0 ? 0 : 1;
}
