/**
 * @file
 * @brief Binary model persistence and text-format vector export.
 *
 * Layout (all integers and floats little-endian):
 *   magic "PINE", u32 version, u8 kind, u32 D, u32 D', u32 c, u32 minn,
 *   u32 maxn, u32 buckets, u8 window_mode, hash-function id and Unicode
 *   version as length-prefixed strings, u64 seed, u64 token count T;
 *   vocab: u32 word count, then per word u32 byte length, bytes, u64
 *   count; matrices U, O, Dpos as raw row-major f32.
 *
 * @copyright Apache License v.2 (http://www.apache.org/licenses/LICENSE-2.0)
*/
#pragma once

#include <string>

#include "pine/bundle.h"

namespace pine {

inline constexpr std::uint32_t kModelFormatVersion = 1;

// Writes the bundle and fsyncs before returning. Throws DataError with
// path context on I/O failure.
void save_model(const ModelBundle& model, const std::string& path);

// Exact inverse of save_model. Validates magic, version, kind, dimension
// consistency against the file size, and finiteness of a sampled subset
// of entries. Never allocates more than the header-declared sizes.
ModelBundle load_model(const std::string& path);

// Text format of the cited baselines: "V D" header, then one line per
// vocabulary word with its input vector (shortest round-trip decimals).
void export_text_vectors(const ModelBundle& model, const std::string& path);

}  // namespace pine
