#include "sevlm/commands.hpp"

#include <exception>
#include <filesystem>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "sevlm/checkpoint.hpp"
#include "sevlm/dataset.hpp"
#include "sevlm/gradcheck.hpp"
#include "sevlm/synth.hpp"
#include "sevlm/trainer.hpp"

namespace sevlm {

namespace {

void ensure_parent(const std::filesystem::path& path) {
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
}

}  // namespace

int cmd_validate_data(const std::filesystem::path& path, std::ostream& out, std::ostream& err) {
    const LoadResult result = read_records(path);
    if (!result.issues.empty()) {
        for (const auto& issue : result.issues) {
            if (issue.line != 0) {
                err << path.string() << ':' << issue.line << ": " << issue.message << '\n';
            } else {
                err << path.string() << ": " << issue.message << '\n';
            }
        }
        err << result.issues.size() << " invalid record(s), " << result.records.size() << " valid\n";
        return kExitFailure;
    }
    out << path.string() << ": " << result.records.size() << " valid record(s)\n";
    return kExitOk;
}

int cmd_stats(const std::filesystem::path& path, std::string_view weights, std::ostream& out, std::ostream& err) {
    try {
        const Weighting weighting = parse_weighting(weights);
        const auto records = load_records(path, LoadMode::Strict);
        out << format_stats(compute_stats(records, weighting));
        return kExitOk;
    } catch (const std::exception& e) {
        err << "stats: " << e.what() << '\n';
        return kExitFailure;
    }
}

int cmd_synth(const std::array<std::size_t, 3>& sizes, std::uint64_t seed, const std::filesystem::path& out_path,
              std::ostream& out, std::ostream& err) {
    try {
        SynthSpec spec;
        spec.class_sizes = sizes;
        spec.seed = seed;
        const auto records = synth_corpus(spec);
        ensure_parent(out_path);
        write_records(out_path, records);
        out << "wrote " << records.size() << " records to " << out_path.string() << '\n';
        return kExitOk;
    } catch (const std::exception& e) {
        err << "synth: " << e.what() << '\n';
        return kExitFailure;
    }
}

int cmd_train(const std::filesystem::path& config, const RunOverrides& overrides, std::ostream& out,
              std::ostream& err) {
    try {
        RunConfig cfg = load_run_config(config);
        apply_overrides(cfg, overrides);
        out << "resolved config:\n" << describe_run_config(cfg) << '\n';

        const auto records = load_records(cfg.data_path, cfg.load_mode, &err);
        const DataSplit parts = split(records, cfg.split, cfg.seed);
        std::vector<std::string> corpus;
        for (const auto& r : records) {
            corpus.push_back(r.question);
            corpus.push_back(r.answer);
        }
        const Tokenizer tokenizer = Tokenizer::build(corpus);
        cfg.model.vocab_size = tokenizer.size();
        TransformerLM model(cfg.model);

        const BatchPlan plan =
            make_batches(parts.train, tokenizer, cfg.train.batch_size, cfg.model.max_seq_len + 1, cfg.seed, &err);
        if (plan.batches.empty()) {
            err << "train: no trainable records after batching\n";
            return kExitFailure;
        }
        out << "train " << parts.train.size() << " / validation " << parts.validation.size() << " / test "
            << parts.test.size() << " records, vocab " << tokenizer.size() << ", " << model.parameter_count()
            << " parameters, " << plan.batches.size() << " batches\n";

        const std::size_t log_every = std::max<std::size_t>(1, cfg.train.steps / 20);
        const TrainResult result =
            train(model, plan.batches, parts.validation, tokenizer, cfg.train, [&](const StepRecord& rec) {
                if (rec.step % log_every == 0 || rec.step == cfg.train.steps) {
                    out << "step " << rec.step << '/' << cfg.train.steps << "  loss " << std::fixed
                        << std::setprecision(5) << rec.loss << "  mean_w " << rec.mean_weight << '\n'
                        << std::defaultfloat;
                }
                if (rec.eval) {
                    out << format_eval_report(*rec.eval);
                }
            });
        ensure_parent(cfg.history_path);
        ensure_parent(cfg.checkpoint_path);
        write_history(cfg.history_path, result.history);
        save_checkpoint(cfg.checkpoint_path, model, tokenizer, &result.optimizer);
        out << "wrote " << cfg.checkpoint_path.string() << " and " << cfg.history_path.string() << '\n';
        return kExitOk;
    } catch (const std::exception& e) {
        err << "train: " << e.what() << '\n';
        return kExitFailure;
    }
}

int cmd_eval(const std::filesystem::path& checkpoint, const std::filesystem::path& data, std::ostream& out,
             std::ostream& err) {
    try {
        const Checkpoint ckpt = load_checkpoint(checkpoint);
        const auto records = load_records(data, LoadMode::Strict);
        out << format_eval_report(evaluate(ckpt.model, records, ckpt.tokenizer));
        return kExitOk;
    } catch (const std::exception& e) {
        err << "eval: " << e.what() << '\n';
        return kExitFailure;
    }
}

int cmd_gradcheck(std::size_t trials, double tolerance, std::uint64_t seed, std::ostream& out, std::ostream& err) {
    try {
        GradcheckOptions options;
        options.trials = trials;
        options.tolerance = tolerance;
        options.seed = seed;
        const GradcheckReport report = gradcheck(options);
        out << format_gradcheck_report(report);
        return report.passed ? kExitOk : kExitFailure;
    } catch (const std::exception& e) {
        err << "gradcheck: " << e.what() << '\n';
        return kExitFailure;
    }
}

int cmd_generate(const std::filesystem::path& checkpoint, std::string_view prompt, std::size_t max_new,
                 std::ostream& out, std::ostream& err) {
    try {
        const Checkpoint ckpt = load_checkpoint(checkpoint);
        out << generate(ckpt.model, ckpt.tokenizer, prompt, max_new) << '\n';
        return kExitOk;
    } catch (const std::exception& e) {
        err << "generate: " << e.what() << '\n';
        return kExitFailure;
    }
}

namespace {

std::array<std::size_t, 3> parse_sizes(const std::string& text) {
    std::array<std::size_t, 3> sizes{};
    std::istringstream in(text);
    std::string item;
    std::size_t n = 0;
    while (std::getline(in, item, ',')) {
        if (n == 3 || item.empty() || item.find_first_not_of("0123456789") != std::string::npos) {
            throw CLI::ValidationError("--sizes", "expected three comma-separated counts nc,n,c");
        }
        sizes[n++] = std::stoull(item);
    }
    if (n != 3) {
        throw CLI::ValidationError("--sizes", "expected three comma-separated counts nc,n,c");
    }
    return sizes;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Severity-aware weighted cross-entropy training for small language models", "sevlm"};
    app.require_subcommand(1);

    std::string data_path;
    auto* validate = app.add_subcommand("validate-data", "Check a record file against the schema");
    validate->add_option("path", data_path, "Line-delimited record file")->required();

    std::string weights = "balanced";
    auto* stats = app.add_subcommand("stats", "Class counts, mean distribution and weight summary");
    stats->add_option("path", data_path, "Line-delimited record file")->required();
    stats->add_option("--weights", weights, "mild|strong|balanced|uniform-ce|a,b,g");

    std::string sizes_text = "46,30,24";
    std::uint64_t seed = 0;
    std::string out_path;
    auto* synth = app.add_subcommand("synth", "Write a synthetic severity-annotated corpus");
    synth->add_option("--sizes", sizes_text, "Records per class as nc,n,c");
    synth->add_option("--seed", seed, "Random seed");
    synth->add_option("--out", out_path, "Output file")->required();

    std::string config_path;
    RunOverrides overrides;
    auto* train_cmd = app.add_subcommand("train", "Train a model from a run configuration");
    train_cmd->add_option("config", config_path, "JSON run configuration")->required();
    train_cmd->add_option("--weights", overrides.weights, "mild|strong|balanced|uniform-ce|a,b,g");
    train_cmd->add_option("--seed", overrides.seed, "Seed for initialization, split and batch order");
    train_cmd->add_option("--steps", overrides.steps, "Optimizer steps");
    train_cmd->add_option("--batch-size", overrides.batch_size, "Instances per batch");
    train_cmd->add_option("--eval-every", overrides.eval_every, "Validation interval in steps (0 = off)");
    train_cmd->add_option("--lr", overrides.learning_rate, "Learning rate");
    train_cmd->add_option("--data", overrides.data, "Record file");
    train_cmd->add_option("--checkpoint", overrides.checkpoint, "Checkpoint output path");
    train_cmd->add_option("--history", overrides.history, "History output path");

    std::string checkpoint_path;
    auto* eval_cmd = app.add_subcommand("eval", "Report NLL, perplexity and accuracy per severity class");
    eval_cmd->add_option("checkpoint", checkpoint_path, "Checkpoint file")->required();
    eval_cmd->add_option("data", data_path, "Record file")->required();

    std::size_t trials = 1;
    double tolerance = 1e-4;
    auto* grad_cmd = app.add_subcommand("gradcheck", "Compare analytic and finite-difference gradients");
    grad_cmd->add_option("--trials", trials, "Random instances to check");
    grad_cmd->add_option("--tol", tolerance, "Maximum relative error");
    grad_cmd->add_option("--seed", seed, "Random seed");

    std::string prompt;
    std::size_t max_new = 64;
    auto* gen_cmd = app.add_subcommand("generate", "Greedy completion of a prompt");
    gen_cmd->add_option("checkpoint", checkpoint_path, "Checkpoint file")->required();
    gen_cmd->add_option("--prompt", prompt, "Question text")->required();
    gen_cmd->add_option("--max-new", max_new, "Maximum generated characters");

    std::array<std::size_t, 3> sizes{};
    try {
        app.parse(argc, argv);
        if (synth->parsed()) {
            sizes = parse_sizes(sizes_text);
        }
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    if (validate->parsed()) return cmd_validate_data(data_path, out, err);
    if (stats->parsed()) return cmd_stats(data_path, weights, out, err);
    if (synth->parsed()) return cmd_synth(sizes, seed, out_path, out, err);
    if (train_cmd->parsed()) return cmd_train(config_path, overrides, out, err);
    if (eval_cmd->parsed()) return cmd_eval(checkpoint_path, data_path, out, err);
    if (grad_cmd->parsed()) return cmd_gradcheck(trials, tolerance, seed, out, err);
    if (gen_cmd->parsed()) return cmd_generate(checkpoint_path, prompt, max_new, out, err);
    return kExitUsage;
}

}  // namespace sevlm
