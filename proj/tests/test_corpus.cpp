/**
 * @file
 * @brief Tokenization, vocabulary and subsampling tests.
 * @copyright Apache License v.2 (http://www.apache.org/licenses/LICENSE-2.0)
*/
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include "pine/corpus.h"
#include "pine/error.h"
#include "pine/rng.h"
#include "pine/unicode.h"
#include "pine/utf8.h"
#include "testutil.h"

using namespace pine;

TEST_CASE("tokenize lower-cases and splits on non-word characters") {
    CHECK(tokenize("Unlike dogs, cats mew.") ==
          std::vector<std::string>{"unlike", "dogs", "cats", "mew"});
    CHECK(tokenize("").empty());
    CHECK(tokenize("Fruit-flies 2x") == std::vector<std::string>{"fruit", "flies", "2x"});
}

TEST_CASE("tokenize matches the reference Unicode segmentation") {
    // Expected values computed with the reference segmentation (\w runs of
    // the lower-cased text) at Unicode 13.0.0.
    CHECK(tokenize("naïve CAFÉ s'il_vous plaît") ==
          std::vector<std::string>{"naïve", "café", "s", "il_vous", "plaît"});
    CHECK(tokenize("ΣΙΓΜΑ Τέλος") == std::vector<std::string>{"σιγμα", "τέλος"});
    // U+0130 lower-cases to "i" + combining dot above; the combining mark
    // does not carry the word property.
    CHECK(tokenize("İstanbul DON'T x²y") ==
          std::vector<std::string>{"i", "stanbul", "don", "t", "x²y"});
    CHECK(tokenize("漢字かな mixed-01") ==
          std::vector<std::string>{"漢字かな", "mixed", "01"});
}

TEST_CASE("tokenize rejects invalid UTF-8") {
    CHECK_THROWS_AS(tokenize("abc\xC0\xAF"), DataError);   // overlong
    CHECK_THROWS_AS(tokenize("abc\xFFz"), DataError);      // stray byte
    CHECK_THROWS_AS(tokenize("ab\xE2\x82"), DataError);    // truncated
    CHECK_THROWS_AS(tokenize("\xED\xA0\x80"), DataError);  // surrogate
}

TEST_CASE("tokenize reconstructs the word-character subsequence") {
    const std::string inputs[] = {
        "Unlike dogs, cats mew.", "a-b_c 1,2.3", "  spaced\tout\nlines ",
        "Τέλος: the END…", "x²y z"};
    for (const auto& input : inputs) {
        const auto tokens = tokenize(input);
        std::string joined;
        for (const auto& t : tokens) {
            joined += t;
        }
        // Word-character subsequence of the lower-cased input.
        std::string expected;
        const std::string lower = lowercase(input);
        std::size_t pos = 0;
        while (pos < lower.size()) {
            char32_t cp;
            const std::size_t n = utf8::decode(lower, pos, cp);
            REQUIRE(n > 0);
            if (uni::is_word(cp)) {
                expected.append(lower, pos, n);
            }
            pos += n;
        }
        CHECK(joined == expected);
    }
}

TEST_CASE("tokenize is idempotent over re-joined tokens") {
    // Random strings over a mixed alphabet.
    const std::u32string alphabet =
        U"abcXYZ019_-.,!? äöüÉÎŐæßπΣγλМоскваčři語 漢\t\n";
    auto rng = make_rng(42);
    std::uniform_int_distribution<std::size_t> pick(0, alphabet.size() - 1);
    std::uniform_int_distribution<int> len(0, 60);
    for (int iter = 0; iter < 300; ++iter) {
        std::string text;
        const int n = len(rng);
        for (int i = 0; i < n; ++i) {
            utf8::encode(alphabet[pick(rng)], text);
        }
        const auto tokens = tokenize(text);
        std::string joined;
        for (const auto& t : tokens) {
            if (!joined.empty()) {
                joined += ' ';
            }
            joined += t;
        }
        CHECK(tokenize(joined) == tokens);
    }
}

TEST_CASE("build_vocab applies the count threshold") {
    // counts {a:6, b:4, c:1}
    std::vector<std::string> tokens;
    for (int i = 0; i < 6; ++i) tokens.push_back("a");
    for (int i = 0; i < 4; ++i) tokens.push_back("b");
    tokens.push_back("c");
    const Vocab vocab = build_vocab(tokens, 5);
    REQUIRE(vocab.size() == 1);
    CHECK(vocab.entry(0).word == "a");
    CHECK(vocab.entry(0).count == 6);
    CHECK(vocab.entry(0).freq == doctest::Approx(6.0 / 11.0));
    CHECK(vocab.total_tokens() == 11);
    CHECK(vocab.id("b") == -1);
}

TEST_CASE("build_vocab boundary and tie rules") {
    CHECK(build_vocab(std::vector<std::string>(5, "a"), 5).size() == 1);

    std::vector<std::string> tokens{"b", "a", "b", "a", "b", "a"};
    const Vocab vocab = build_vocab(tokens, 1);
    REQUIRE(vocab.size() == 2);
    // Equal counts: first occurrence wins.
    CHECK(vocab.entry(0).word == "b");
    CHECK(vocab.entry(1).word == "a");

    CHECK(build_vocab({}, 1).size() == 0);
}

TEST_CASE("vocab frequencies sum to at most one") {
    std::vector<std::string> tokens;
    auto rng = make_rng(7);
    std::uniform_int_distribution<int> word(0, 30);
    for (int i = 0; i < 2000; ++i) {
        tokens.push_back("w" + std::to_string(word(rng)));
    }
    tokens.push_back("once");  // pruned by min_count=2
    const Vocab vocab = build_vocab(tokens, 2);
    double sum = 0.0;
    for (const auto& e : vocab.entries()) {
        sum += e.freq;
    }
    CHECK(sum <= 1.0);
    CHECK(sum < 1.0);  // pruning occurred
}

TEST_CASE("discard_prob follows the low-pass rule") {
    CHECK(discard_prob(1e-5, 1e-5) == 0.0);                    // freq == r
    CHECK(discard_prob(4e-5, 1e-5) == doctest::Approx(0.5));   // 1 - sqrt(1/4)
    CHECK(discard_prob(0.5e-5, 1e-5) == 0.0);                  // clamped
    CHECK_THROWS_AS(discard_prob(0.0, 1e-5), DataError);
    CHECK_THROWS_AS(discard_prob(0.5, 0.0), DataError);
}

TEST_CASE("subsampled_stream keeps everything when r dominates") {
    std::vector<std::string> tokens{"a", "b", "a", "b", "a"};
    const Vocab vocab = build_vocab(tokens, 1);
    std::vector<std::int32_t> ids{0, 1, 0, 1, 0};
    CHECK(subsampled_stream(ids, vocab, 1.0, 3) == ids);
    CHECK(subsampled_stream({}, vocab, 1e-5, 3).empty());
}

TEST_CASE("subsampled_stream matches the binomial oracle") {
    // One word with freq 4e-5 (discard prob exactly 0.5); the vocabulary is
    // restored directly rather than counted from 25e9 raw tokens.
    constexpr std::int64_t kOccurrences = 1'000'000;
    const std::int64_t total = static_cast<std::int64_t>(kOccurrences / 4e-5);
    const Vocab vocab = Vocab::restore({{"hot", kOccurrences}, {"rest", 6}}, total);
    const std::int32_t hot = vocab.id("hot");
    REQUIRE(vocab.entry(hot).freq == doctest::Approx(4e-5));

    const std::vector<std::int32_t> ids(kOccurrences, hot);
    const auto kept = subsampled_stream(ids, vocab, 1e-5, 12345);
    const double retained =
        static_cast<double>(kept.size()) / static_cast<double>(kOccurrences);
    // Binomial concentration: p = 0.5, 3 sigma ~ 0.0015; the acceptance
    // band is the wider 0.5 +/- 0.005.
    CHECK(retained == doctest::Approx(0.5).epsilon(0.01));
    CHECK(std::abs(retained - 0.5) < 0.005);
}

TEST_CASE("empirical discard rate matches the formula within 3 sigma") {
    const double freqs[] = {2e-5, 9e-5, 1.0 / 3.0};
    const double r = 1e-5;
    std::int32_t word_id = 0;
    for (const double freq : freqs) {
        const std::int64_t count = 1000;
        const auto total = static_cast<std::int64_t>(count / freq);
        const Vocab vocab = Vocab::restore({{"w", count}}, total);
        constexpr std::int64_t kSamples = 200'000;
        const std::vector<std::int32_t> ids(kSamples, word_id);
        const auto kept = subsampled_stream(ids, vocab, r, 99 + word_id);
        const double p = discard_prob(freq, r);
        const double dropped = static_cast<double>(kSamples - kept.size());
        const double sigma = std::sqrt(static_cast<double>(kSamples) * p * (1 - p));
        CHECK(std::abs(dropped - p * kSamples) <= 3.0 * std::max(sigma, 1.0));
    }
}

TEST_CASE("token sequence reader splits at newlines and caps length") {
    std::istringstream in("First Line here\nsecond-line\n\nlast");
    TokenSequenceReader reader(in);
    std::vector<std::string> seq;
    REQUIRE(reader.next_sequence(seq));
    CHECK(seq == std::vector<std::string>{"first", "line", "here"});
    REQUIRE(reader.next_sequence(seq));
    CHECK(seq == std::vector<std::string>{"second", "line"});
    REQUIRE(reader.next_sequence(seq));
    CHECK(seq == std::vector<std::string>{"last"});
    CHECK_FALSE(reader.next_sequence(seq));
}

TEST_CASE("token sequence reader caps runaway lines") {
    std::string line;
    for (int i = 0; i < 2100; ++i) {
        line += "tok ";
    }
    std::istringstream in(line);
    TokenSequenceReader reader(in);
    std::vector<std::string> seq;
    std::size_t total = 0;
    std::size_t sequences = 0;
    while (reader.next_sequence(seq)) {
        CHECK(seq.size() <=
              static_cast<std::size_t>(TokenSequenceReader::kDefaultMaxTokens));
        total += seq.size();
        ++sequences;
    }
    CHECK(total == 2100);
    CHECK(sequences == 3);
}

TEST_CASE("token sequence reader matches tokenize on whole input") {
    const std::string text = "One two THREE\nfour\nfive six seven eight\n";
    std::istringstream in(text);
    TokenSequenceReader reader(in);
    std::vector<std::string> seq;
    std::vector<std::string> streamed;
    while (reader.next_sequence(seq)) {
        streamed.insert(streamed.end(), seq.begin(), seq.end());
    }
    CHECK(streamed == tokenize(text));
    CHECK(reader.offset() == static_cast<std::int64_t>(text.size()));
}
