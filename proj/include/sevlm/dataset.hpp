#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sevlm/severity_loss.hpp"
#include "sevlm/tokenizer.hpp"

namespace sevlm {

enum class SeverityLabel : std::uint8_t { NonCritical = 0, Neutral = 1, Critical = 2 };

inline constexpr std::size_t kNumSeverityClasses = 3;
inline constexpr std::array<SeverityLabel, 3> kAllSeverityLabels = {SeverityLabel::NonCritical,
                                                                    SeverityLabel::Neutral, SeverityLabel::Critical};

/// "non-critical", "neutral" or "critical".
std::string_view label_name(SeverityLabel label);
std::optional<SeverityLabel> parse_label(std::string_view text);
std::size_t label_index(SeverityLabel label);

/// Most probable class; ties resolve toward non-critical, then neutral.
SeverityLabel argmax_label(const SeverityDistribution& dist);

struct ComplaintRecord {
    std::string question;
    std::string answer;
    SeverityLabel severity = SeverityLabel::NonCritical;
    SeverityDistribution distribution;

    friend bool operator==(const ComplaintRecord&, const ComplaintRecord&) = default;
};

/// Builds a record whose label is the argmax of `dist`.
ComplaintRecord make_record(std::string question, std::string answer, const SeverityDistribution& dist);

struct RecordIssue {
    std::size_t line = 0;  // 1-based; 0 for file-level problems
    std::string message;
};

/// Raised by strict loading; carries every problem found in the file.
class DataError : public std::runtime_error {
public:
    explicit DataError(std::vector<RecordIssue> issues);
    const std::vector<RecordIssue>& issues() const noexcept { return issues_; }

private:
    std::vector<RecordIssue> issues_;
};

/// Parses and validates one line of the record file. Distributions within the simplex
/// tolerance are renormalized to sum to 1. Throws std::invalid_argument on any violation.
ComplaintRecord parse_record_line(std::string_view line);
std::string serialize_record(const ComplaintRecord& record);

struct LoadResult {
    std::vector<ComplaintRecord> records;
    std::vector<RecordIssue> issues;
};

/// Reads every line and collects all valid records and all problems; never throws on content.
LoadResult read_records(const std::filesystem::path& path);

enum class LoadMode { Strict, Permissive };

/// Strict mode throws DataError on any problem. Permissive mode drops bad lines and writes a
/// skip report to `report`. Both fail when no valid record remains.
std::vector<ComplaintRecord> load_records(const std::filesystem::path& path, LoadMode mode = LoadMode::Strict,
                                          std::ostream* report = nullptr);
void write_records(const std::filesystem::path& path, std::span<const ComplaintRecord> records);

struct DatasetStats {
    std::size_t count = 0;
    std::array<std::size_t, 3> class_counts{};
    std::array<double, 3> class_fractions{};
    SeverityDistribution mean_distribution;
    std::string weighting;
    double weight_min = 0.0;
    double weight_mean = 0.0;
    double weight_max = 0.0;
};

DatasetStats compute_stats(std::span<const ComplaintRecord> records, const Weighting& weighting);
DatasetStats compute_stats(std::span<const ComplaintRecord> records, const WeightConfig& cfg);
std::string format_stats(const DatasetStats& stats);

struct DataSplit {
    std::vector<ComplaintRecord> train;
    std::vector<ComplaintRecord> validation;
    std::vector<ComplaintRecord> test;
};

inline constexpr std::array<double, 3> kDefaultSplit = {0.8, 0.1, 0.1};

/// Seeded shuffle, then validation and test take floor(n * fraction) records and train
/// takes the rest.
DataSplit split(std::span<const ComplaintRecord> records, const std::array<double, 3>& fractions,
                std::uint64_t seed);

/// One tokenized pair: BOS question SEP answer EOS, with the loss mask set on answer tokens
/// and EOS.
struct EncodedPair {
    std::vector<TokenId> ids;
    LossMask mask;
};

/// Lays out a pair within `max_len` positions. The question is truncated from its head first;
/// the answer is then truncated from its tail. Empty when no answer token fits.
std::optional<EncodedPair> encode_pair(const Tokenizer& tokenizer, std::string_view question,
                                       std::string_view answer, std::size_t max_len);

struct TokenBatch {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<TokenId> tokens;  // rows x cols, PAD filled
    LossMask mask;                // rows x cols
    std::vector<std::size_t> lengths;
    std::vector<SeverityDistribution> severities;
    std::vector<SeverityLabel> labels;
    std::vector<std::size_t> record_indices;

    std::span<const TokenId> row_tokens(std::size_t r) const;
    std::span<const std::uint8_t> row_mask(std::size_t r) const;
};

struct BatchPlan {
    std::vector<TokenBatch> batches;
    std::vector<std::size_t> skipped;  // indices of records whose answer did not fit
};

/// Shuffles record order by `seed` and packs rows of at most `max_seq_len` tokens
/// (BOS and EOS included) into batches of `batch_size`. Skipped records are reported to
/// `warnings` when given.
BatchPlan make_batches(std::span<const ComplaintRecord> records, const Tokenizer& tokenizer, std::size_t batch_size,
                       std::size_t max_seq_len, std::uint64_t seed, std::ostream* warnings = nullptr);

/// Term weights toward (non-critical, neutral, critical) plus the distribution returned when
/// nothing matches.
struct SeverityLexicon {
    std::vector<std::pair<std::string, std::array<double, 3>>> terms;
    SeverityDistribution prior{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
};

/// Heuristic stand-in for a trained severity classifier. Each occurrence of a lexicon term adds
/// its weights to per-class scores that start at log(prior); the scores are softmax-normalized.
/// Not calibrated against any reference classifier.
SeverityDistribution heuristic_severity(std::string_view question, const SeverityLexicon& lexicon);

/// Small English lexicon used by the CLI and examples.
SeverityLexicon default_severity_lexicon();

using SeverityProvider = std::function<SeverityDistribution(std::string_view question)>;

/// Attaches provider-derived distributions (and their argmax labels) to raw pairs.
std::vector<ComplaintRecord> annotate(std::span<const std::pair<std::string, std::string>> pairs,
                                      const SeverityProvider& provider);

}  // namespace sevlm
