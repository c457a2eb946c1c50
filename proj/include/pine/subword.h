/**
 * @file
 * @brief Character n-gram extraction and hashing into input-matrix rows.
 *
 * A word is wrapped in "<" and ">" markers and its character n-grams of
 * length minn..maxn are hashed into bucket rows [V, V + B). The n-gram
 * equal to the whole wrapped word is excluded; in-vocabulary words keep a
 * dedicated collision-free row of their own.
 *
 * @copyright Apache License v.2 (http://www.apache.org/licenses/LICENSE-2.0)
*/
#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pine/corpus.h"

namespace pine {

struct SubwordIndex {
    int minn = 3;
    int maxn = 6;
    std::int32_t buckets = 2'000'000;
    bool include_word = true;
};

// FNV-1a over the raw bytes. Fixed as the model file's hash-function id
// "fnv1a32" so out-of-vocabulary lookups reproduce across builds.
std::uint32_t fnv1a32(std::string_view bytes);

// All character n-grams (n in [minn, maxn]) of "<word>", excluding the
// gram equal to the whole wrapped word. n-gram boundaries are Unicode
// character boundaries. Order: shortest length first, then position.
// Duplicates are kept.
std::vector<std::string> extract_ngrams(std::string_view word, int minn, int maxn);

// Bucket row for an n-gram: vocab_size + (fnv1a32(ngram) mod buckets).
std::int32_t hash_ngram(std::string_view ngram, std::int32_t buckets,
                        std::int32_t vocab_size);

// Input rows for a word: its own vocabulary row first (when in vocabulary
// and include_word is set), then the hashed n-gram rows. An empty result
// means the word has no representation (out of vocabulary and too short
// for any n-gram). Throws DataError on an empty word.
std::vector<std::int32_t> subword_ids(std::string_view word, const Vocab& vocab,
                                      const SubwordIndex& index);

// Precomputed subword_ids for every vocabulary word, CSR layout.
class SubwordCache {
 public:
    SubwordCache() = default;
    SubwordCache(const Vocab& vocab, const SubwordIndex& index);

    std::span<const std::int32_t> rows(std::int32_t word_id) const {
        return {flat_.data() + offsets_[word_id],
                static_cast<std::size_t>(offsets_[word_id + 1] - offsets_[word_id])};
    }

 private:
    std::vector<std::int64_t> offsets_;
    std::vector<std::int32_t> flat_;
};

}  // namespace pine
