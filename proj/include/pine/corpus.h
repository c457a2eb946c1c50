/**
 * @file
 * @brief Tokenization, vocabulary construction and frequency subsampling.
 *
 * Text is lower-cased and split into longest runs of characters carrying
 * the Unicode word property. Words occurring fewer than min_count times
 * are pruned from the vocabulary; relative frequencies stay relative to
 * the raw (pre-pruning) corpus length.
 *
 * @copyright Apache License v.2 (http://www.apache.org/licenses/LICENSE-2.0)
*/
#pragma once

#include <cstdint>
#include <istream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace pine {

// Lower-cases valid UTF-8 input. Throws DataError on invalid UTF-8.
std::string lowercase(std::string_view text);

// Lower-cases and splits into maximal runs of word-property characters.
// Throws DataError on invalid UTF-8.
std::vector<std::string> tokenize(std::string_view text);

struct VocabEntry {
    std::string word;
    std::int64_t count = 0;
    double freq = 0.0;  // count / total_tokens of the raw corpus
};

struct StringHash {
    using is_transparent = void;
    std::size_t operator()(std::string_view s) const {
        return std::hash<std::string_view>{}(s);
    }
};

class Vocab {
 public:
    Vocab() = default;

    // Rebuilds a vocabulary from persisted (word, count) pairs, already in
    // count-descending order, and the raw corpus length. Throws DataError
    // on unsorted counts or duplicate words.
    static Vocab restore(std::vector<std::pair<std::string, std::int64_t>> pairs,
                         std::int64_t total_tokens);

    // id of a word, or -1 when absent.
    std::int32_t id(std::string_view word) const;
    const VocabEntry& entry(std::int32_t id) const { return entries_[id]; }
    const std::vector<VocabEntry>& entries() const { return entries_; }
    std::int32_t size() const { return static_cast<std::int32_t>(entries_.size()); }
    std::int64_t total_tokens() const { return total_tokens_; }
    std::int32_t min_count() const { return min_count_; }

 private:
    friend class VocabBuilder;
    std::vector<VocabEntry> entries_;  // sorted by count desc, then first occurrence
    std::unordered_map<std::string, std::int32_t, StringHash, std::equal_to<>> index_;
    std::int64_t total_tokens_ = 0;
    std::int32_t min_count_ = 1;
};

// Streaming counter: feed tokens in corpus order, then call finish().
class VocabBuilder {
 public:
    void add(std::string_view token);
    // min_count >= 1. Entries below the threshold are dropped but still
    // contribute to total_tokens.
    Vocab finish(std::int32_t min_count) &&;

 private:
    struct Slot {
        std::int64_t count = 0;
        std::int64_t first_seen = 0;
    };
    std::unordered_map<std::string, Slot> counts_;
    std::int64_t total_ = 0;
};

// Convenience over VocabBuilder for in-memory token lists.
Vocab build_vocab(const std::vector<std::string>& tokens, std::int32_t min_count);

// Probability of discarding an occurrence of a word with relative
// frequency freq under low-pass threshold r: max(0, 1 - sqrt(r / freq)).
double discard_prob(double freq, double r);

// Independently drops each occurrence with discard_prob(freq, r).
// Deterministic for a fixed seed.
std::vector<std::int32_t> subsampled_stream(const std::vector<std::int32_t>& ids,
                                            const Vocab& vocab, double r,
                                            std::uint64_t seed);

// Streams token sequences out of a UTF-8 byte stream. A sequence ends at a
// newline or after max_tokens tokens, so arbitrarily long lines never
// buffer more than one sequence in memory. Context windows never cross
// sequence boundaries.
class TokenSequenceReader {
 public:
    static constexpr int kDefaultMaxTokens = 1024;

    explicit TokenSequenceReader(std::istream& in, int max_tokens = kDefaultMaxTokens);

    // Byte offset (relative to the stream position at construction) of the
    // next unread byte.
    std::int64_t offset() const { return consumed_; }

    // Reads forward until a '\n' byte has been consumed. Used by training
    // workers to align a shard start to the next sequence boundary.
    void skip_to_next_line();

    // Fills out with the next sequence. Returns false at end of stream when
    // no tokens remain.
    bool next_sequence(std::vector<std::string>& out);

 private:
    int next_byte();
    bool next_codepoint(char32_t& cp);

    std::istream& in_;
    int max_tokens_;
    std::int64_t consumed_ = 0;
    std::vector<char> buf_;
    std::size_t buf_pos_ = 0;
    std::size_t buf_len_ = 0;
};

}  // namespace pine
