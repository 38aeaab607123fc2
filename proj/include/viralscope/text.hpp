#pragma once

// Byte-level text helpers shared by ingest, labels and textstats.
//
// Word characters are ASCII letters, digits, underscore, and any non-ASCII
// code point outside the punctuation/symbol/emoji blocks listed in text.cpp.
// Lowercasing is ASCII-only; other code points pass through unchanged.

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace viralscope {

std::string to_lower_ascii(std::string_view s);

/// Case-insensitive (ASCII) substring test.
bool contains_ci(std::string_view haystack, std::string_view needle);

/// Decodes the code point at s[pos]; sets `len` to its byte length.
/// Invalid sequences decode as U+FFFD with length 1.
char32_t decode_utf8(std::string_view s, std::size_t pos, std::size_t& len);

bool is_word_codepoint(char32_t cp);

/// Byte length of the maximal run of word characters starting at pos.
std::size_t word_run_length(std::string_view s, std::size_t pos);

/// Every `<mark><word chars>` occurrence, returned without the mark.
std::vector<std::string> find_marked_tokens(std::string_view text, char mark);

inline std::vector<std::string> find_hashtags(std::string_view text)
{
    return find_marked_tokens(text, '#');
}

/// Removes scheme-prefixed URLs (`scheme://...` up to the next whitespace).
std::string strip_urls(std::string_view text);

} // namespace viralscope
