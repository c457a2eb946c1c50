/**
 * @file
 * @brief A trained model with everything needed to evaluate it.
 * @copyright Apache License v.2 (http://www.apache.org/licenses/LICENSE-2.0)
*/
#pragma once

#include <cstdint>
#include <string>

#include "pine/corpus.h"
#include "pine/model.h"
#include "pine/subword.h"
#include "pine/unicode.h"

namespace pine {

struct ModelBundle {
    ModelParams params;
    Vocab vocab;
    SubwordIndex subwords;
    WindowMode window_mode = WindowMode::kUniformShrink;
    std::uint64_t seed = 0;
    // Conventions recorded for reproducible out-of-vocabulary lookups.
    std::string hash_id = "fnv1a32";
    std::string unicode_version = uni::kUnicodeVersion;
};

}  // namespace pine
