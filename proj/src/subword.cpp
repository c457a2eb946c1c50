/**
 * @file
 * @copyright Apache License v.2 (http://www.apache.org/licenses/LICENSE-2.0)
*/
#include "pine/subword.h"

#include "pine/error.h"
#include "pine/utf8.h"

namespace pine {

std::uint32_t fnv1a32(std::string_view bytes) {
    std::uint32_t h = 2166136261u;
    for (const char c : bytes) {
        h ^= static_cast<unsigned char>(c);
        h *= 16777619u;
    }
    return h;
}

std::vector<std::string> extract_ngrams(std::string_view word, int minn, int maxn) {
    if (word.empty()) {
        throw DataError("cannot extract n-grams from an empty word");
    }
    // Byte offsets of character boundaries in "<word>".
    std::string wrapped;
    wrapped.reserve(word.size() + 2);
    wrapped.push_back('<');
    wrapped.append(word);
    wrapped.push_back('>');
    std::vector<std::size_t> bounds;
    bounds.push_back(0);
    std::size_t pos = 0;
    while (pos < wrapped.size()) {
        char32_t cp;
        const std::size_t n = utf8::decode(wrapped, pos, cp);
        if (n == 0) {
            throw DataError("invalid UTF-8 in word");
        }
        pos += n;
        bounds.push_back(pos);
    }
    const int chars = static_cast<int>(bounds.size()) - 1;
    std::vector<std::string> grams;
    for (int n = minn; n <= maxn && n <= chars; ++n) {
        if (n == chars) {
            break;  // the whole wrapped word is indexed separately
        }
        for (int i = 0; i + n <= chars; ++i) {
            grams.emplace_back(wrapped.substr(bounds[i], bounds[i + n] - bounds[i]));
        }
    }
    return grams;
}

std::int32_t hash_ngram(std::string_view ngram, std::int32_t buckets,
                        std::int32_t vocab_size) {
    return vocab_size + static_cast<std::int32_t>(fnv1a32(ngram) %
                                                  static_cast<std::uint32_t>(buckets));
}

std::vector<std::int32_t> subword_ids(std::string_view word, const Vocab& vocab,
                                      const SubwordIndex& index) {
    if (word.empty()) {
        throw DataError("cannot compute subword ids for an empty word");
    }
    std::vector<std::int32_t> rows;
    if (index.include_word) {
        const std::int32_t id = vocab.id(word);
        if (id >= 0) {
            rows.push_back(id);
        }
    }
    for (const auto& gram : extract_ngrams(word, index.minn, index.maxn)) {
        rows.push_back(hash_ngram(gram, index.buckets, vocab.size()));
    }
    return rows;
}

SubwordCache::SubwordCache(const Vocab& vocab, const SubwordIndex& index) {
    offsets_.reserve(static_cast<std::size_t>(vocab.size()) + 1);
    offsets_.push_back(0);
    for (std::int32_t id = 0; id < vocab.size(); ++id) {
        const auto rows = subword_ids(vocab.entry(id).word, vocab, index);
        flat_.insert(flat_.end(), rows.begin(), rows.end());
        offsets_.push_back(static_cast<std::int64_t>(flat_.size()));
    }
}

}  // namespace pine
