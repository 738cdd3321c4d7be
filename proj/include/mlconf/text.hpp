#pragma once

// Minimal UTF-8 helpers for normalization and matching. Invalid byte
// sequences decode to U+FFFD.

#include <string>
#include <string_view>
#include <vector>

namespace mlconf::text {

std::u32string decode_utf8(std::string_view bytes);
void append_utf8(std::string& out, char32_t cp);
std::string encode_utf8(std::u32string_view cps);

// Simple case folding for Latin, Latin-1, Latin Extended-A, Greek and
// Cyrillic; other scripts pass through.
char32_t to_lower(char32_t cp);
std::string lowercase(std::string_view s);

bool is_space(char32_t cp);
bool is_punctuation(char32_t cp);
bool is_word_char(char32_t cp);

std::string trim(std::string_view s);
std::vector<std::string> split_lines(std::string_view s);

}  // namespace mlconf::text
