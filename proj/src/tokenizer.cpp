#include "sevlm/tokenizer.hpp"

#include <algorithm>
#include <set>

namespace sevlm {

std::u32string utf8_decode(std::string_view text) {
    std::u32string out;
    out.reserve(text.size());
    std::size_t i = 0;
    while (i < text.size()) {
        const auto lead = static_cast<unsigned char>(text[i]);
        std::size_t len = 0;
        char32_t cp = 0;
        if (lead < 0x80) {
            len = 1;
            cp = lead;
        } else if ((lead & 0xE0) == 0xC0) {
            len = 2;
            cp = lead & 0x1F;
        } else if ((lead & 0xF0) == 0xE0) {
            len = 3;
            cp = lead & 0x0F;
        } else if ((lead & 0xF8) == 0xF0) {
            len = 4;
            cp = lead & 0x07;
        } else {
            throw TokenizerError("invalid UTF-8 lead byte at offset " + std::to_string(i));
        }
        if (i + len > text.size()) {
            throw TokenizerError("truncated UTF-8 sequence at offset " + std::to_string(i));
        }
        for (std::size_t k = 1; k < len; ++k) {
            const auto cont = static_cast<unsigned char>(text[i + k]);
            if ((cont & 0xC0) != 0x80) {
                throw TokenizerError("invalid UTF-8 continuation byte at offset " + std::to_string(i + k));
            }
            cp = (cp << 6) | (cont & 0x3F);
        }
        static constexpr char32_t kMinForLen[] = {0, 0, 0x80, 0x800, 0x10000};
        if (cp < kMinForLen[len] || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
            throw TokenizerError("invalid UTF-8 code point at offset " + std::to_string(i));
        }
        out.push_back(cp);
        i += len;
    }
    return out;
}

std::string utf8_encode(std::u32string_view codepoints) {
    std::string out;
    out.reserve(codepoints.size());
    for (char32_t cp : codepoints) {
        if (cp < 0x80) {
            out.push_back(static_cast<char>(cp));
        } else if (cp < 0x800) {
            out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
            out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
        } else if (cp < 0x10000) {
            out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
            out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
            out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
        } else if (cp <= 0x10FFFF) {
            out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
            out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
            out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
            out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
        } else {
            throw TokenizerError("code point out of Unicode range");
        }
    }
    return out;
}

Tokenizer::Tokenizer(std::u32string symbols) : symbols_(std::move(symbols)) {
    for (std::size_t i = 0; i < symbols_.size(); ++i) {
        const auto [it, inserted] = index_.emplace(symbols_[i], static_cast<TokenId>(kReserved + i));
        if (!inserted) {
            throw TokenizerError("duplicate symbol in tokenizer table");
        }
    }
}

Tokenizer Tokenizer::build(std::span<const std::string> corpus) {
    if (corpus.empty()) {
        throw TokenizerError("cannot build a vocabulary from an empty corpus");
    }
    std::set<char32_t> seen;
    for (const auto& text : corpus) {
        for (char32_t c : utf8_decode(text)) {
            seen.insert(c);
        }
    }
    if (seen.empty()) {
        throw TokenizerError("cannot build a vocabulary from a corpus with no characters");
    }
    return Tokenizer(std::u32string(seen.begin(), seen.end()));
}

Tokenizer Tokenizer::from_symbols(std::u32string symbols) {
    if (!std::is_sorted(symbols.begin(), symbols.end())) {
        throw TokenizerError("tokenizer symbol table must be sorted by code point");
    }
    return Tokenizer(std::move(symbols));
}

std::vector<TokenId> Tokenizer::encode(std::string_view text) const {
    std::vector<TokenId> ids;
    for (char32_t c : utf8_decode(text)) {
        const auto it = index_.find(c);
        ids.push_back(it == index_.end() ? kUnk : it->second);
    }
    return ids;
}

std::string Tokenizer::decode(std::span<const TokenId> ids) const {
    std::u32string out;
    for (TokenId id : ids) {
        if (id < 0 || static_cast<std::size_t>(id) >= size()) {
            throw TokenizerError("token id " + std::to_string(id) + " outside vocabulary of " +
                                 std::to_string(size()));
        }
        if (!is_reserved(id)) {
            out.push_back(symbols_[static_cast<std::size_t>(id) - kReserved]);
        }
    }
    return utf8_encode(out);
}

}  // namespace sevlm
