/**
 * @file
 * @brief Minimal strict UTF-8 decoding and encoding.
 * @copyright Apache License v.2 (http://www.apache.org/licenses/LICENSE-2.0)
*/
#pragma once

#include <cstddef>
#include <string>
#include <string_view>

namespace pine::utf8 {

// Decodes the codepoint starting at text[pos]. Returns the number of bytes
// consumed, or 0 if the sequence is invalid (overlong forms, surrogates,
// out-of-range scalars and truncated tails are all invalid).
std::size_t decode(std::string_view text, std::size_t pos, char32_t& out);

void encode(char32_t cp, std::string& out);

}  // namespace pine::utf8
