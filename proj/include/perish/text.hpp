#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace perish {

// Collapses every run of Unicode whitespace (ASCII space/control whitespace,
// NEL, NBSP, U+1680, U+2000..U+200A, U+2028/2029, U+202F, U+205F, U+3000)
// into one ASCII space and trims both ends. Input is assumed UTF-8; invalid
// bytes pass through untouched.
std::string normalize_whitespace(std::string_view text);

// Whitespace-delimited words after normalization.
std::vector<std::string> tokenize(std::string_view text);

std::size_t word_count(std::string_view text);

}  // namespace perish
