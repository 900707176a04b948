#include "sevlm/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

#include "json.hpp"
#include "sevlm/rng.hpp"

namespace sevlm {

using nlohmann::json;

std::string_view label_name(SeverityLabel label) {
    switch (label) {
        case SeverityLabel::NonCritical:
            return "non-critical";
        case SeverityLabel::Neutral:
            return "neutral";
        case SeverityLabel::Critical:
            return "critical";
    }
    return "unknown";
}

std::optional<SeverityLabel> parse_label(std::string_view text) {
    for (SeverityLabel label : kAllSeverityLabels) {
        if (label_name(label) == text) {
            return label;
        }
    }
    return std::nullopt;
}

std::size_t label_index(SeverityLabel label) { return static_cast<std::size_t>(label); }

SeverityLabel argmax_label(const SeverityDistribution& dist) {
    SeverityLabel best = SeverityLabel::NonCritical;
    double best_p = dist.p_nc;
    if (dist.p_n > best_p) {
        best = SeverityLabel::Neutral;
        best_p = dist.p_n;
    }
    if (dist.p_c > best_p) {
        best = SeverityLabel::Critical;
    }
    return best;
}

ComplaintRecord make_record(std::string question, std::string answer, const SeverityDistribution& dist) {
    require_simplex(dist);
    return ComplaintRecord{std::move(question), std::move(answer), argmax_label(dist), dist};
}

namespace {

std::string join_issues(const std::vector<RecordIssue>& issues) {
    std::ostringstream os;
    for (std::size_t i = 0; i < issues.size(); ++i) {
        if (i != 0) {
            os << "; ";
        }
        if (issues[i].line != 0) {
            os << "line " << issues[i].line << ": ";
        }
        os << issues[i].message;
    }
    return os.str();
}

bool blank(std::string_view s) {
    return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c) != 0; });
}

constexpr double kRenormalizeFloor = 1e-12;

constexpr std::array<const char*, 6> kFields = {"question", "answer", "severity", "non_critical", "neutral",
                                                "critical"};

}  // namespace

DataError::DataError(std::vector<RecordIssue> issues)
    : std::runtime_error(join_issues(issues)), issues_(std::move(issues)) {}

ComplaintRecord parse_record_line(std::string_view line) {
    json j;
    try {
        j = json::parse(line);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("malformed JSON: ") + e.what());
    }
    if (!j.is_object()) {
        throw std::invalid_argument("record must be a JSON object");
    }
    for (const auto& [key, _] : j.items()) {
        if (std::find_if(kFields.begin(), kFields.end(), [&](const char* f) { return key == f; }) == kFields.end()) {
            throw std::invalid_argument("unknown field '" + key + "'");
        }
    }
    for (const char* field : kFields) {
        if (!j.contains(field)) {
            throw std::invalid_argument(std::string("missing field '") + field + "'");
        }
    }
    auto text_field = [&](const char* name) {
        const json& v = j.at(name);
        if (!v.is_string()) {
            throw std::invalid_argument(std::string("field '") + name + "' must be a string");
        }
        std::string s = v.get<std::string>();
        if (blank(s)) {
            throw std::invalid_argument(std::string("field '") + name + "' is empty");
        }
        return s;
    };
    auto prob_field = [&](const char* name) {
        const json& v = j.at(name);
        if (!v.is_number()) {
            throw std::invalid_argument(std::string("field '") + name + "' must be a number");
        }
        return v.get<double>();
    };

    ComplaintRecord rec;
    rec.question = text_field("question");
    rec.answer = text_field("answer");
    const std::string label_text = text_field("severity");
    const auto label = parse_label(label_text);
    if (!label) {
        throw std::invalid_argument("unknown severity label '" + label_text +
                                    "' (expected non-critical, neutral or critical)");
    }
    rec.severity = *label;
    rec.distribution = {prob_field("non_critical"), prob_field("neutral"), prob_field("critical")};
    if (auto problem = simplex_violation(rec.distribution)) {
        throw std::invalid_argument(*problem);
    }
    const double total = rec.distribution.p_nc + rec.distribution.p_n + rec.distribution.p_c;
    // Rounding noise below kRenormalizeFloor is left alone so a second load is a no-op.
    if (std::abs(total - 1.0) > kRenormalizeFloor) {
        rec.distribution.p_nc /= total;
        rec.distribution.p_n /= total;
        rec.distribution.p_c /= total;
    }
    const SeverityLabel expected = argmax_label(rec.distribution);
    if (expected != rec.severity) {
        throw std::invalid_argument("severity label '" + label_text + "' does not match argmax of distribution ('" +
                                    std::string(label_name(expected)) + "')");
    }
    return rec;
}

std::string serialize_record(const ComplaintRecord& record) {
    json j;
    j["question"] = record.question;
    j["answer"] = record.answer;
    j["severity"] = std::string(label_name(record.severity));
    j["non_critical"] = record.distribution.p_nc;
    j["neutral"] = record.distribution.p_n;
    j["critical"] = record.distribution.p_c;
    return j.dump();
}

LoadResult read_records(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        return LoadResult{{}, {{0, "cannot open " + path.string()}}};
    }
    LoadResult result;
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
        ++number;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (blank(line)) {
            continue;
        }
        try {
            result.records.push_back(parse_record_line(line));
        } catch (const std::invalid_argument& e) {
            result.issues.push_back({number, e.what()});
        }
    }
    if (result.records.empty() && result.issues.empty()) {
        result.issues.push_back({0, "no records"});
    }
    return result;
}

std::vector<ComplaintRecord> load_records(const std::filesystem::path& path, LoadMode mode, std::ostream* report) {
    LoadResult result = read_records(path);
    if (!result.issues.empty()) {
        if (mode == LoadMode::Strict) {
            throw DataError(std::move(result.issues));
        }
        if (report != nullptr) {
            *report << "skipped " << result.issues.size() << " invalid record(s) in " << path.string() << '\n';
            for (const auto& issue : result.issues) {
                *report << "  line " << issue.line << ": " << issue.message << '\n';
            }
        }
    }
    if (result.records.empty()) {
        throw DataError({{0, "no valid records in " + path.string()}});
    }
    return std::move(result.records);
}

void write_records(const std::filesystem::path& path, std::span<const ComplaintRecord> records) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw std::runtime_error("cannot write " + path.string());
    }
    for (const auto& rec : records) {
        out << serialize_record(rec) << '\n';
    }
    if (!out) {
        throw std::runtime_error("write failed for " + path.string());
    }
}

DatasetStats compute_stats(std::span<const ComplaintRecord> records, const Weighting& weighting) {
    if (records.empty()) {
        throw std::invalid_argument("compute_stats needs at least one record");
    }
    DatasetStats stats;
    stats.count = records.size();
    stats.weighting = weighting.describe();
    stats.weight_min = std::numeric_limits<double>::infinity();
    stats.weight_max = -std::numeric_limits<double>::infinity();
    double weight_sum = 0.0;
    for (const auto& rec : records) {
        ++stats.class_counts[label_index(rec.severity)];
        stats.mean_distribution.p_nc += rec.distribution.p_nc;
        stats.mean_distribution.p_n += rec.distribution.p_n;
        stats.mean_distribution.p_c += rec.distribution.p_c;
        const double w = weighting.weight(rec.distribution);
        stats.weight_min = std::min(stats.weight_min, w);
        stats.weight_max = std::max(stats.weight_max, w);
        weight_sum += w;
    }
    const auto n = static_cast<double>(stats.count);
    for (std::size_t k = 0; k < kNumSeverityClasses; ++k) {
        stats.class_fractions[k] = static_cast<double>(stats.class_counts[k]) / n;
    }
    stats.mean_distribution.p_nc /= n;
    stats.mean_distribution.p_n /= n;
    stats.mean_distribution.p_c /= n;
    stats.weight_mean = weight_sum / n;
    return stats;
}

DatasetStats compute_stats(std::span<const ComplaintRecord> records, const WeightConfig& cfg) {
    return compute_stats(records, Weighting(cfg));
}

std::string format_stats(const DatasetStats& stats) {
    std::ostringstream os;
    os << "records: " << stats.count << '\n';
    os << std::fixed << std::setprecision(4);
    for (SeverityLabel label : kAllSeverityLabels) {
        const std::size_t k = label_index(label);
        os << "  " << std::left << std::setw(13) << label_name(label) << std::right << std::setw(8)
           << stats.class_counts[k] << "  " << stats.class_fractions[k] << '\n';
    }
    os << "mean distribution: (" << stats.mean_distribution.p_nc << ", " << stats.mean_distribution.p_n << ", "
       << stats.mean_distribution.p_c << ")\n";
    os << "weights [" << stats.weighting << "]: min " << stats.weight_min << "  mean " << stats.weight_mean
       << "  max " << stats.weight_max << '\n';
    return os.str();
}

DataSplit split(std::span<const ComplaintRecord> records, const std::array<double, 3>& fractions,
                std::uint64_t seed) {
    double total = 0.0;
    for (double f : fractions) {
        if (!(f > 0.0)) {
            throw std::invalid_argument("split fractions must be positive");
        }
        total += f;
    }
    if (std::abs(total - 1.0) > 1e-9) {
        throw std::invalid_argument("split fractions must sum to 1");
    }
    if (records.size() < fractions.size()) {
        throw std::invalid_argument("cannot split " + std::to_string(records.size()) + " records into 3 parts");
    }
    std::vector<std::size_t> order(records.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        order[i] = i;
    }
    Rng rng(seed);
    rng.shuffle(order);

    const auto n = static_cast<double>(records.size());
    const auto n_valid = static_cast<std::size_t>(std::floor(n * fractions[1]));
    const auto n_test = static_cast<std::size_t>(std::floor(n * fractions[2]));
    const std::size_t n_train = records.size() - n_valid - n_test;

    DataSplit out;
    for (std::size_t i = 0; i < order.size(); ++i) {
        const ComplaintRecord& rec = records[order[i]];
        if (i < n_train) {
            out.train.push_back(rec);
        } else if (i < n_train + n_valid) {
            out.validation.push_back(rec);
        } else {
            out.test.push_back(rec);
        }
    }
    return out;
}

std::optional<EncodedPair> encode_pair(const Tokenizer& tokenizer, std::string_view question,
                                       std::string_view answer, std::size_t max_len) {
    constexpr std::size_t kMarkers = 3;  // BOS, SEP, EOS
    std::vector<TokenId> q = tokenizer.encode(question);
    std::vector<TokenId> a = tokenizer.encode(answer);
    if (a.empty() || max_len <= kMarkers) {
        return std::nullopt;
    }
    const std::size_t answer_room = max_len - kMarkers;
    if (a.size() > answer_room) {
        a.resize(answer_room);
    }
    const std::size_t question_room = answer_room - a.size();
    if (q.size() > question_room) {
        q.erase(q.begin(), q.end() - static_cast<std::ptrdiff_t>(question_room));
    }

    EncodedPair out;
    out.ids.reserve(q.size() + a.size() + kMarkers);
    out.ids.push_back(Tokenizer::kBos);
    out.ids.insert(out.ids.end(), q.begin(), q.end());
    out.ids.push_back(Tokenizer::kSep);
    out.ids.insert(out.ids.end(), a.begin(), a.end());
    out.ids.push_back(Tokenizer::kEos);
    out.mask.assign(out.ids.size(), 0);
    std::fill(out.mask.end() - static_cast<std::ptrdiff_t>(a.size() + 1), out.mask.end(), std::uint8_t{1});
    return out;
}

std::span<const TokenId> TokenBatch::row_tokens(std::size_t r) const {
    return std::span<const TokenId>(tokens).subspan(r * cols, cols);
}

std::span<const std::uint8_t> TokenBatch::row_mask(std::size_t r) const {
    return std::span<const std::uint8_t>(mask).subspan(r * cols, cols);
}

BatchPlan make_batches(std::span<const ComplaintRecord> records, const Tokenizer& tokenizer, std::size_t batch_size,
                       std::size_t max_seq_len, std::uint64_t seed, std::ostream* warnings) {
    if (batch_size == 0) {
        throw std::invalid_argument("batch_size must be positive");
    }
    std::vector<std::size_t> order(records.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        order[i] = i;
    }
    Rng rng(seed);
    rng.shuffle(order);

    BatchPlan plan;
    std::vector<std::pair<std::size_t, EncodedPair>> pending;
    auto flush = [&] {
        if (pending.empty()) {
            return;
        }
        TokenBatch batch;
        batch.rows = pending.size();
        for (const auto& [_, enc] : pending) {
            batch.cols = std::max(batch.cols, enc.ids.size());
        }
        batch.tokens.assign(batch.rows * batch.cols, Tokenizer::kPad);
        batch.mask.assign(batch.rows * batch.cols, 0);
        for (std::size_t r = 0; r < pending.size(); ++r) {
            const auto& [index, enc] = pending[r];
            std::copy(enc.ids.begin(), enc.ids.end(), batch.tokens.begin() + static_cast<std::ptrdiff_t>(r * batch.cols));
            std::copy(enc.mask.begin(), enc.mask.end(), batch.mask.begin() + static_cast<std::ptrdiff_t>(r * batch.cols));
            batch.lengths.push_back(enc.ids.size());
            batch.severities.push_back(records[index].distribution);
            batch.labels.push_back(records[index].severity);
            batch.record_indices.push_back(index);
        }
        plan.batches.push_back(std::move(batch));
        pending.clear();
    };

    for (std::size_t index : order) {
        auto enc = encode_pair(tokenizer, records[index].question, records[index].answer, max_seq_len);
        if (!enc) {
            plan.skipped.push_back(index);
            continue;
        }
        pending.emplace_back(index, std::move(*enc));
        if (pending.size() == batch_size) {
            flush();
        }
    }
    flush();

    if (!plan.skipped.empty()) {
        std::sort(plan.skipped.begin(), plan.skipped.end());
        if (warnings != nullptr) {
            *warnings << "warning: skipped " << plan.skipped.size()
                      << " record(s) with no answer token inside max_seq_len " << max_seq_len << ':';
            for (std::size_t index : plan.skipped) {
                *warnings << ' ' << index;
            }
            *warnings << '\n';
        }
    }
    return plan;
}

SeverityDistribution heuristic_severity(std::string_view question, const SeverityLexicon& lexicon) {
    if (lexicon.terms.empty()) {
        throw std::invalid_argument("severity lexicon is empty");
    }
    require_simplex(lexicon.prior);
    const double prior[] = {lexicon.prior.p_nc, lexicon.prior.p_n, lexicon.prior.p_c};
    std::array<double, 3> score{};
    for (std::size_t k = 0; k < 3; ++k) {
        if (!(prior[k] > 0.0)) {
            throw std::invalid_argument("severity lexicon prior must be strictly positive");
        }
        score[k] = std::log(prior[k]);
    }
    for (const auto& [term, weights] : lexicon.terms) {
        if (term.empty()) {
            continue;
        }
        for (std::size_t pos = question.find(term); pos != std::string_view::npos;
             pos = question.find(term, pos + term.size())) {
            for (std::size_t k = 0; k < 3; ++k) {
                score[k] += weights[k];
            }
        }
    }
    const double mx = *std::max_element(score.begin(), score.end());
    std::array<double, 3> p{};
    double z = 0.0;
    for (std::size_t k = 0; k < 3; ++k) {
        p[k] = std::exp(score[k] - mx);
        z += p[k];
    }
    return {p[0] / z, p[1] / z, p[2] / z};
}

SeverityLexicon default_severity_lexicon() {
    SeverityLexicon lex;
    lex.terms = {
        {"chest pain", {0.0, 0.0, 2.0}}, {"bleeding", {0.0, 0.2, 1.5}},  {"lump", {0.0, 0.3, 1.2}},
        {"tumor", {0.0, 0.2, 1.8}},      {"faint", {0.0, 0.3, 1.5}},     {"seizure", {0.0, 0.0, 2.0}},
        {"pressure", {0.2, 1.0, 0.3}},   {"diet", {0.5, 1.0, 0.0}},      {"vitamin", {0.6, 1.0, 0.0}},
        {"cough", {1.0, 0.4, 0.1}},      {"itch", {1.2, 0.2, 0.0}},      {"tooth", {1.0, 0.5, 0.1}},
        {"rash", {1.0, 0.4, 0.1}},
    };
    return lex;
}

std::vector<ComplaintRecord> annotate(std::span<const std::pair<std::string, std::string>> pairs,
                                      const SeverityProvider& provider) {
    std::vector<ComplaintRecord> out;
    out.reserve(pairs.size());
    for (const auto& [question, answer] : pairs) {
        out.push_back(make_record(question, answer, provider(question)));
    }
    return out;
}

}  // namespace sevlm
