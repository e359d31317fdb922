#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace datagen {

/// Tokenization shared by BLEU, INGF and the hashing embedder:
///  - input is decoded as UTF-8 (invalid bytes become U+FFFD),
///  - split on Unicode whitespace,
///  - punctuation code points are deleted,
///  - Latin, Greek and Cyrillic letters are lowercased,
///  - tokens left empty are dropped.
std::vector<std::string> tokenize(std::string_view text);

std::vector<char32_t> decode_utf8(std::string_view text);
std::string encode_utf8(std::u32string_view cps);

bool is_unicode_space(char32_t cp);
bool is_punctuation(char32_t cp);
char32_t simple_lower(char32_t cp);

enum class Script { latin, han, kana, hangul, cyrillic, greek, arabic, other };

Script script_of(char32_t cp);

} // namespace datagen
