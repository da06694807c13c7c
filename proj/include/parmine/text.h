#ifndef PARMINE_TEXT_H_
#define PARMINE_TEXT_H_

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace parmine {

// Decodes UTF-8 into code points; nullopt on any ill-formed sequence.
std::optional<std::u32string> decode_utf8(std::string_view bytes);

std::string encode_utf8(std::u32string_view text);

bool is_valid_utf8(std::string_view bytes);

// Number of code points; assumes valid UTF-8.
std::size_t codepoint_length(std::string_view text);

// Unicode full case folding to lower case (root locale).
std::string to_lower(std::string_view text);

// Splits on runs of ASCII whitespace; never yields empty tokens.
std::vector<std::string> split_whitespace(std::string_view text);

std::string_view trim(std::string_view text);

// Joins whitespace-separated tokens with single spaces and trims the ends.
std::string collapse_whitespace(std::string_view text);

bool is_space(char c);

}  // namespace parmine

#endif  // PARMINE_TEXT_H_
