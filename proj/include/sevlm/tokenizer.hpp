#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace sevlm {

using TokenId = std::int32_t;

class TokenizerError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::u32string utf8_decode(std::string_view text);
std::string utf8_encode(std::u32string_view codepoints);

/// Character-level tokenizer over Unicode code points.
///
/// Ids 0..4 are reserved (PAD, BOS, SEP, EOS, UNK); corpus characters follow in code-point order.
class Tokenizer {
public:
    static constexpr TokenId kPad = 0;
    static constexpr TokenId kBos = 1;
    static constexpr TokenId kSep = 2;
    static constexpr TokenId kEos = 3;
    static constexpr TokenId kUnk = 4;
    static constexpr std::size_t kReserved = 5;

    static Tokenizer build(std::span<const std::string> corpus);
    /// Rebuilds from a stored symbol table (as written to checkpoints).
    static Tokenizer from_symbols(std::u32string symbols);

    std::size_t size() const noexcept { return kReserved + symbols_.size(); }
    const std::u32string& symbols() const noexcept { return symbols_; }

    bool contains(char32_t c) const { return index_.contains(c); }
    /// Unknown characters map to UNK.
    std::vector<TokenId> encode(std::string_view text) const;
    /// Reserved ids are dropped from the output.
    std::string decode(std::span<const TokenId> ids) const;

    static bool is_reserved(TokenId id) noexcept { return id >= 0 && id < static_cast<TokenId>(kReserved); }

    friend bool operator==(const Tokenizer& a, const Tokenizer& b) { return a.symbols_ == b.symbols_; }

private:
    explicit Tokenizer(std::u32string symbols);

    std::u32string symbols_;
    std::unordered_map<char32_t, TokenId> index_;
};

}  // namespace sevlm
