#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "sevlm/dataset.hpp"

namespace sevlm {

/// Parameters for a synthetic complaint/response corpus.
///
/// Every question is "<topic> <key>?" and the key is a random string over `key_alphabet`. With
/// probability `shared_fraction` the topic comes from `shared_topics`, which every class uses,
/// so the question alone does not reveal the class; otherwise it comes from the class's own
/// list. Answers are symbolic functions of the key that differ per class:
///   non-critical  "ok " + key
///   neutral       "see " + reverse(key)
///   critical      "er " + key with each letter shifted `critical_shift` places along the
///                 alphabet (wrapping)
/// Distributions put `peak` on the true class and split the rest evenly.
struct SynthSpec {
    std::array<std::size_t, 3> class_sizes{46, 30, 24};
    std::array<std::vector<std::string>, 3> topics{{
        {"itch", "rash", "acne", "cold"},
        {"diet", "iron", "rest", "skin"},
        {"clot", "lump", "pain", "coma"},
    }};
    std::vector<std::string> shared_topics{"ache", "sore", "numb", "pang"};
    double shared_fraction = 0.3;
    std::string key_alphabet = "abcdefgh";
    std::size_t key_length = 4;
    std::size_t critical_shift = 3;
    double peak = 0.8;
    std::uint64_t seed = 0;

    void validate() const;
};

/// Answer a record of the given class receives for `key` under `spec`.
std::string synth_answer(const SynthSpec& spec, SeverityLabel label, const std::string& key);

/// Deterministic corpus in seeded random order; identical specs give identical corpora.
std::vector<ComplaintRecord> synth_corpus(const SynthSpec& spec);

}  // namespace sevlm
