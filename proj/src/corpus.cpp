/**
 * @file
 * @copyright Apache License v.2 (http://www.apache.org/licenses/LICENSE-2.0)
*/
#include "pine/corpus.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "pine/error.h"
#include "pine/rng.h"
#include "pine/unicode.h"
#include "pine/utf8.h"

namespace pine {

namespace {

[[noreturn]] void bad_utf8(std::size_t pos) {
    throw DataError("invalid UTF-8 at byte offset " + std::to_string(pos));
}

}  // namespace

std::string lowercase(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    std::u32string mapped;
    std::size_t pos = 0;
    while (pos < text.size()) {
        char32_t cp;
        const std::size_t n = utf8::decode(text, pos, cp);
        if (n == 0) {
            bad_utf8(pos);
        }
        pos += n;
        mapped.clear();
        uni::append_lower(cp, mapped);
        for (char32_t m : mapped) {
            utf8::encode(m, out);
        }
    }
    return out;
}

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> tokens;
    std::string current;
    std::u32string mapped;
    std::size_t pos = 0;
    while (pos < text.size()) {
        char32_t cp;
        const std::size_t n = utf8::decode(text, pos, cp);
        if (n == 0) {
            bad_utf8(pos);
        }
        pos += n;
        mapped.clear();
        uni::append_lower(cp, mapped);
        for (char32_t m : mapped) {
            if (uni::is_word(m)) {
                utf8::encode(m, current);
            } else if (!current.empty()) {
                tokens.push_back(std::move(current));
                current.clear();
            }
        }
    }
    if (!current.empty()) {
        tokens.push_back(std::move(current));
    }
    return tokens;
}

Vocab Vocab::restore(std::vector<std::pair<std::string, std::int64_t>> pairs,
                     std::int64_t total_tokens) {
    Vocab vocab;
    vocab.total_tokens_ = total_tokens;
    vocab.entries_.reserve(pairs.size());
    std::int64_t prev = std::numeric_limits<std::int64_t>::max();
    for (auto& [word, count] : pairs) {
        if (count < 1 || count > prev) {
            throw DataError("vocabulary counts are not in descending order");
        }
        prev = count;
        const auto id = static_cast<std::int32_t>(vocab.entries_.size());
        if (!vocab.index_.emplace(word, id).second) {
            throw DataError("duplicate vocabulary word: " + word);
        }
        vocab.entries_.push_back(
            {std::move(word), count,
             total_tokens > 0
                 ? static_cast<double>(count) / static_cast<double>(total_tokens)
                 : 0.0});
    }
    return vocab;
}

std::int32_t Vocab::id(std::string_view word) const {
    const auto it = index_.find(word);
    return it == index_.end() ? -1 : it->second;
}

void VocabBuilder::add(std::string_view token) {
    auto [it, inserted] = counts_.try_emplace(std::string(token));
    if (inserted) {
        it->second.first_seen = total_;
    }
    ++it->second.count;
    ++total_;
}

Vocab VocabBuilder::finish(std::int32_t min_count) && {
    if (min_count < 1) {
        throw DataError("min_count must be >= 1");
    }
    struct Row {
        std::string word;
        std::int64_t count;
        std::int64_t first_seen;
    };
    std::vector<Row> rows;
    rows.reserve(counts_.size());
    for (auto& [word, slot] : counts_) {
        if (slot.count >= min_count) {
            rows.push_back({word, slot.count, slot.first_seen});
        }
    }
    std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
        if (a.count != b.count) {
            return a.count > b.count;
        }
        return a.first_seen < b.first_seen;
    });
    Vocab vocab;
    vocab.total_tokens_ = total_;
    vocab.min_count_ = min_count;
    vocab.entries_.reserve(rows.size());
    for (auto& row : rows) {
        const auto id = static_cast<std::int32_t>(vocab.entries_.size());
        vocab.index_.emplace(row.word, id);
        vocab.entries_.push_back(
            {std::move(row.word), row.count,
             total_ > 0 ? static_cast<double>(row.count) / static_cast<double>(total_) : 0.0});
    }
    return vocab;
}

Vocab build_vocab(const std::vector<std::string>& tokens, std::int32_t min_count) {
    VocabBuilder builder;
    for (const auto& token : tokens) {
        builder.add(token);
    }
    return std::move(builder).finish(min_count);
}

double discard_prob(double freq, double r) {
    if (freq <= 0.0 || freq > 1.0 || r <= 0.0) {
        throw DataError("discard_prob requires 0 < freq <= 1 and r > 0");
    }
    return std::max(0.0, 1.0 - std::sqrt(r / freq));
}

std::vector<std::int32_t> subsampled_stream(const std::vector<std::int32_t>& ids,
                                            const Vocab& vocab, double r,
                                            std::uint64_t seed) {
    auto rng = make_rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<std::int32_t> kept;
    kept.reserve(ids.size());
    for (const std::int32_t id : ids) {
        const double p = discard_prob(vocab.entry(id).freq, r);
        if (p > 0.0 && unit(rng) < p) {
            continue;
        }
        kept.push_back(id);
    }
    return kept;
}

TokenSequenceReader::TokenSequenceReader(std::istream& in, int max_tokens)
    : in_(in), max_tokens_(max_tokens), buf_(1 << 16) {}

int TokenSequenceReader::next_byte() {
    if (buf_pos_ >= buf_len_) {
        in_.read(buf_.data(), static_cast<std::streamsize>(buf_.size()));
        buf_len_ = static_cast<std::size_t>(in_.gcount());
        buf_pos_ = 0;
        if (buf_len_ == 0) {
            return -1;
        }
    }
    ++consumed_;
    return static_cast<unsigned char>(buf_[buf_pos_++]);
}

bool TokenSequenceReader::next_codepoint(char32_t& cp) {
    const int b0 = next_byte();
    if (b0 < 0) {
        return false;
    }
    char seq[4];
    seq[0] = static_cast<char>(b0);
    std::size_t need;
    if (b0 < 0x80) {
        need = 1;
    } else if ((b0 & 0xE0) == 0xC0) {
        need = 2;
    } else if ((b0 & 0xF0) == 0xE0) {
        need = 3;
    } else if ((b0 & 0xF8) == 0xF0) {
        need = 4;
    } else {
        bad_utf8(static_cast<std::size_t>(consumed_ - 1));
    }
    for (std::size_t i = 1; i < need; ++i) {
        const int b = next_byte();
        if (b < 0) {
            bad_utf8(static_cast<std::size_t>(consumed_));
        }
        seq[i] = static_cast<char>(b);
    }
    if (utf8::decode(std::string_view(seq, need), 0, cp) != need) {
        bad_utf8(static_cast<std::size_t>(consumed_ - need));
    }
    return true;
}

void TokenSequenceReader::skip_to_next_line() {
    int b;
    while ((b = next_byte()) >= 0) {
        if (b == '\n') {
            return;
        }
    }
}

bool TokenSequenceReader::next_sequence(std::vector<std::string>& out) {
    out.clear();
    std::string current;
    std::u32string mapped;
    char32_t cp;
    while (next_codepoint(cp)) {
        mapped.clear();
        uni::append_lower(cp, mapped);
        for (char32_t m : mapped) {
            if (uni::is_word(m)) {
                utf8::encode(m, current);
            } else if (!current.empty()) {
                out.push_back(std::move(current));
                current.clear();
            }
        }
        if (cp == U'\n' && !out.empty()) {
            return true;
        }
        if (static_cast<int>(out.size()) >= max_tokens_ && current.empty()) {
            return true;
        }
    }
    if (!current.empty()) {
        out.push_back(std::move(current));
    }
    return !out.empty();
}

}  // namespace pine
