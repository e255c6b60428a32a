#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace topicforge::text {

// UTF-8 helpers used by the corpus normalizer. Invalid byte sequences decode
// to U+FFFD.
std::u32string decode_utf8(std::string_view bytes);
std::string encode_utf8(std::u32string_view codepoints);

bool is_punctuation(char32_t cp);
bool is_whitespace(char32_t cp);
char32_t to_lower(char32_t cp);

// Splits on Unicode White_Space; empty pieces are dropped.
std::vector<std::string> split_whitespace(std::string_view utf8);

}  // namespace topicforge::text
