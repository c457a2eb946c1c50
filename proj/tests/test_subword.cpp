/**
 * @file
 * @brief n-gram extraction and hashing tests.
 * @copyright Apache License v.2 (http://www.apache.org/licenses/LICENSE-2.0)
*/
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "pine/error.h"
#include "pine/subword.h"
#include "pine/utf8.h"
#include "testutil.h"

using namespace pine;

TEST_CASE("extract_ngrams enumerates wrapped grams, whole word excluded") {
    // "<cat>" has length 5; grams of lengths 3 and 4 survive, the length-5
    // gram equals the wrapped word and is excluded.
    const auto grams = extract_ngrams("cat", 3, 6);
    CHECK(grams == std::vector<std::string>{"<ca", "cat", "at>", "<cat", "cat>"});
    CHECK(std::set<std::string>(grams.begin(), grams.end()) ==
          std::set<std::string>{"<ca", "cat", "at>", "<cat", "cat>"});
}

TEST_CASE("extract_ngrams edge cases") {
    // "<a>" has length 3: its only 3-gram is the whole wrapped word.
    CHECK(extract_ngrams("a", 3, 6).empty());
    CHECK(extract_ngrams("ab", 1, 1) ==
          std::vector<std::string>{"<", "a", "b", ">"});
    CHECK_THROWS_AS(extract_ngrams("", 3, 6), DataError);
}

TEST_CASE("extract_ngrams respects character boundaries") {
    // Multibyte characters count as single positions.
    const auto grams = extract_ngrams("κόσμος", 3, 3);
    CHECK(grams.front() == "<κό");
    CHECK(grams.back() == "ος>");
    for (const auto& g : grams) {
        // Each gram decodes to exactly 3 codepoints.
        int chars = 0;
        std::size_t pos = 0;
        while (pos < g.size()) {
            char32_t cp;
            const auto n = utf8::decode(g, pos, cp);
            REQUIRE(n > 0);
            pos += n;
            ++chars;
        }
        CHECK(chars == 3);
    }
}

TEST_CASE("fnv1a32 matches the published constants and a reference") {
    CHECK(fnv1a32("") == 2166136261u);  // offset basis
    CHECK(fnv1a32("a") == 0xE40C292Cu);
    CHECK(fnv1a32("<ca") == testutil::fnv1a_reference("<ca"));
    for (const auto& s : {"cat>", "Δ", "longer n-gram input", "\x01\x02"}) {
        CHECK(fnv1a32(s) == testutil::fnv1a_reference(s));
    }
    CHECK(fnv1a32("stable") == fnv1a32("stable"));
}

TEST_CASE("hash_ngram maps into the bucket range above the vocabulary") {
    const std::int32_t buckets = 1000;
    const std::int32_t vocab_size = 7;
    CHECK(hash_ngram("", buckets, vocab_size) ==
          vocab_size + static_cast<std::int32_t>(2166136261u % 1000u));
    CHECK(hash_ngram("a", buckets, vocab_size) ==
          vocab_size + static_cast<std::int32_t>(0xE40C292Cu % 1000u));
    for (const auto& s : {"ab", "<ca", "xyz>"}) {
        const auto id = hash_ngram(s, buckets, vocab_size);
        CHECK(id >= vocab_size);
        CHECK(id < vocab_size + buckets);
    }
}

namespace {

Vocab tiny_vocab() {
    std::vector<std::string> tokens;
    // Eight words: "cat" gets id by count order.
    const char* words[] = {"w0", "w1", "w2", "w3", "w4", "w5", "w6", "cat"};
    for (int i = 0; i < 8; ++i) {
        for (int j = 0; j < 20 - i; ++j) {
            tokens.push_back(words[i]);
        }
    }
    return build_vocab(tokens, 1);
}

}  // namespace

TEST_CASE("subword_ids composes the word row with hashed gram rows") {
    const Vocab vocab = tiny_vocab();
    const std::int32_t cat = vocab.id("cat");
    REQUIRE(cat == 7);
    const SubwordIndex index{3, 6, 2'000'000, true};
    const auto ids = subword_ids("cat", vocab, index);
    std::vector<std::int32_t> expected{cat};
    for (const auto& gram : {"<ca", "cat", "at>", "<cat", "cat>"}) {
        expected.push_back(
            vocab.size() +
            static_cast<std::int32_t>(testutil::fnv1a_reference(gram) % 2'000'000u));
    }
    CHECK(ids == expected);
}

TEST_CASE("subword_ids for OOV words uses hashed rows only") {
    const Vocab vocab = tiny_vocab();
    const SubwordIndex index;
    const auto ids = subword_ids("dog", vocab, index);
    CHECK(ids.size() == 5);  // no word row
    for (const auto id : ids) {
        CHECK(id >= vocab.size());
        CHECK(id < vocab.size() + index.buckets);
    }
    // Too short for any gram and out of vocabulary: empty result is the
    // "no representation" signal.
    CHECK(subword_ids("a", vocab, index).empty());
    CHECK_THROWS_AS(subword_ids("", vocab, index), DataError);
}

TEST_CASE("all ids lie in [0, V + B) and OOV lookups are pure") {
    const Vocab vocab = tiny_vocab();
    const SubwordIndex index{3, 6, 500, true};
    const char* words[] = {"alpha", "βeta", "gamma", "δδδ", "ww", "cat"};
    for (const auto* w : words) {
        const auto first = subword_ids(w, vocab, index);
        const auto second = subword_ids(w, vocab, index);
        CHECK(first == second);
        for (const auto id : first) {
            CHECK(id >= 0);
            CHECK(id < vocab.size() + index.buckets);
        }
    }
}

TEST_CASE("subword cache matches direct computation") {
    const Vocab vocab = tiny_vocab();
    const SubwordIndex index;
    const SubwordCache cache(vocab, index);
    for (std::int32_t id = 0; id < vocab.size(); ++id) {
        const auto direct = subword_ids(vocab.entry(id).word, vocab, index);
        const auto cached = cache.rows(id);
        CHECK(std::vector<std::int32_t>(cached.begin(), cached.end()) == direct);
    }
}
