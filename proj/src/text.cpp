#include "perish/text.hpp"

namespace perish {
namespace {

// Length in bytes of a whitespace code point starting at text[i], or 0.
std::size_t whitespace_at(std::string_view text, std::size_t i) {
    const auto c = static_cast<unsigned char>(text[i]);
    if (c == ' ' || (c >= 0x09 && c <= 0x0D)) return 1;
    const auto byte = [&](std::size_t k) -> unsigned {
        return i + k < text.size() ? static_cast<unsigned char>(text[i + k]) : 0u;
    };
    if (c == 0xC2 && (byte(1) == 0x85 || byte(1) == 0xA0)) return 2;
    if (c == 0xE1 && byte(1) == 0x9A && byte(2) == 0x80) return 3;  // U+1680
    if (c == 0xE2 && byte(1) == 0x80) {
        const unsigned b = byte(2);
        if ((b >= 0x80 && b <= 0x8A) || b == 0xA8 || b == 0xA9 || b == 0xAF) return 3;
    }
    if (c == 0xE2 && byte(1) == 0x81 && byte(2) == 0x9F) return 3;  // U+205F
    if (c == 0xE3 && byte(1) == 0x80 && byte(2) == 0x80) return 3;  // U+3000
    return 0;
}

}  // namespace

std::string normalize_whitespace(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    bool pending_space = false;
    std::size_t i = 0;
    while (i < text.size()) {
        if (const auto w = whitespace_at(text, i); w > 0) {
            pending_space = !out.empty();
            i += w;
            continue;
        }
        if (pending_space) {
            out.push_back(' ');
            pending_space = false;
        }
        out.push_back(text[i]);
        ++i;
    }
    return out;
}

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> words;
    const std::string norm = normalize_whitespace(text);
    std::size_t start = 0;
    while (start < norm.size()) {
        auto end = norm.find(' ', start);
        if (end == std::string::npos) end = norm.size();
        words.emplace_back(norm.substr(start, end - start));
        start = end + 1;
    }
    return words;
}

std::size_t word_count(std::string_view text) {
    std::size_t count = 0;
    bool in_word = false;
    std::size_t i = 0;
    while (i < text.size()) {
        if (const auto w = whitespace_at(text, i); w > 0) {
            in_word = false;
            i += w;
            continue;
        }
        if (!in_word) ++count;
        in_word = true;
        ++i;
    }
    return count;
}

}  // namespace perish
