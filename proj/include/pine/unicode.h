/**
 * @file
 * @brief Unicode word property and lowercase mapping tables.
 * @copyright Apache License v.2 (http://www.apache.org/licenses/LICENSE-2.0)
*/
#pragma once

#include <string>

namespace pine::uni {

// Unicode database version the tables in unicode_data.cpp were generated
// from. Recorded in every model header so that tokenization stays
// reproducible across builds.
extern const char kUnicodeVersion[];

// True if the codepoint carries the word property (alphanumeric or
// connector punctuation, the set matched by \w in the reference regex
// engine).
bool is_word(char32_t cp);

// Appends the lowercase mapping of cp (one or two codepoints).
void append_lower(char32_t cp, std::u32string& out);

}  // namespace pine::uni
