#include "sevlm/synth.hpp"

#include <algorithm>
#include <stdexcept>

#include "sevlm/rng.hpp"

namespace sevlm {

void SynthSpec::validate() const {
    for (std::size_t k = 0; k < 3; ++k) {
        if (class_sizes[k] == 0) {
            throw std::invalid_argument("synthetic class sizes must be positive");
        }
        if (topics[k].empty()) {
            throw std::invalid_argument("every class needs at least one topic");
        }
    }
    if (key_alphabet.empty() || key_length == 0) {
        throw std::invalid_argument("synthetic keys need a non-empty alphabet and positive length");
    }
    for (unsigned char c : key_alphabet) {
        if (c >= 0x80) {
            throw std::invalid_argument("key alphabet must be ASCII");
        }
    }
    if (!(shared_fraction >= 0.0 && shared_fraction <= 1.0)) {
        throw std::invalid_argument("shared topic fraction must lie in [0, 1]");
    }
    if (shared_fraction > 0.0 && shared_topics.empty()) {
        throw std::invalid_argument("a positive shared fraction needs shared topics");
    }
    if (!(peak > 1.0 / 3.0 && peak <= 1.0)) {
        throw std::invalid_argument("peak probability must lie in (1/3, 1]");
    }
}

std::string synth_answer(const SynthSpec& spec, SeverityLabel label, const std::string& key) {
    switch (label) {
        case SeverityLabel::NonCritical:
            return "ok " + key;
        case SeverityLabel::Neutral:
            return "see " + std::string(key.rbegin(), key.rend());
        case SeverityLabel::Critical: {
            std::string shifted = key;
            const std::size_t n = spec.key_alphabet.size();
            for (char& c : shifted) {
                const std::size_t pos = spec.key_alphabet.find(c);
                if (pos == std::string::npos) {
                    throw std::invalid_argument("key character outside key alphabet");
                }
                c = spec.key_alphabet[(pos + spec.critical_shift) % n];
            }
            return "er " + shifted;
        }
    }
    throw std::invalid_argument("unknown severity label");
}

std::vector<ComplaintRecord> synth_corpus(const SynthSpec& spec) {
    spec.validate();
    Rng rng(spec.seed);
    const double off = (1.0 - spec.peak) / 2.0;
    std::vector<ComplaintRecord> out;
    for (SeverityLabel label : kAllSeverityLabels) {
        const std::size_t k = label_index(label);
        SeverityDistribution dist{off, off, off};
        (k == 0 ? dist.p_nc : k == 1 ? dist.p_n : dist.p_c) = spec.peak;
        for (std::size_t i = 0; i < spec.class_sizes[k]; ++i) {
            const bool shared = rng.uniform() < spec.shared_fraction;
            const auto& pool = shared ? spec.shared_topics : spec.topics[k];
            const auto& topic = pool[rng.below(pool.size())];
            std::string key;
            for (std::size_t j = 0; j < spec.key_length; ++j) {
                key.push_back(spec.key_alphabet[rng.below(spec.key_alphabet.size())]);
            }
            out.push_back(make_record(topic + " " + key + "?", synth_answer(spec, label, key), dist));
        }
    }
    rng.shuffle(out);
    return out;
}

}  // namespace sevlm
