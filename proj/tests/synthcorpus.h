/**
 * @file
 * @brief Synthetic corpus generators shared by the acceptance suite.
 * @copyright Apache License v.2 (http://www.apache.org/licenses/LICENSE-2.0)
*/
#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "pine/rng.h"
#include "testutil.h"

namespace testutil {

// A >= 10 MB topical corpus of short words. Every 2-letter word plus
// enough 3-letter words form a power-law vocabulary; 20 soft topics give
// the models co-occurrence structure to learn. Lines carry tokens_per_line
// tokens so context windows stay populated after subsampling.
inline std::string build_speed_corpus(const std::string& path,
                                      std::uint64_t seed = 20240606,
                                      int tokens_per_line = 60,
                                      std::size_t min_bytes = 10'500'000) {
    std::vector<std::string> words;
    for (char a = 'a'; a <= 'z'; ++a) {
        for (char b = 'a'; b <= 'z'; ++b) {
            words.push_back({a, b});
        }
    }
    for (char a = 'a'; a <= 'z' && words.size() < 2000; ++a) {
        for (char b = 'a'; b <= 'z' && words.size() < 2000; ++b) {
            for (char c = 'a'; c <= 'z' && words.size() < 2000; ++c) {
                words.push_back({a, b, c});
            }
        }
    }
    const std::size_t v = words.size();
    std::vector<double> weight(v);
    for (std::size_t r = 0; r < v; ++r) {
        weight[r] = 1.0 / std::pow(static_cast<double>(r) + 3.0, 0.95);
    }

    constexpr int kTopics = 20;
    auto rng = pine::make_rng(seed);
    std::vector<int> topic_of(v);
    for (auto& t : topic_of) {
        t = static_cast<int>(rng() % kTopics);
    }
    const auto cumulate = [](const std::vector<double>& w) {
        std::vector<double> cum(w.size());
        double acc = 0.0;
        for (std::size_t i = 0; i < w.size(); ++i) {
            acc += w[i];
            cum[i] = acc;
        }
        return cum;
    };
    const auto global_cum = cumulate(weight);
    std::vector<std::vector<double>> topic_cum(kTopics);
    std::vector<std::vector<std::size_t>> topic_ids(kTopics);
    for (int t = 0; t < kTopics; ++t) {
        std::vector<double> w;
        for (std::size_t i = 0; i < v; ++i) {
            if (topic_of[i] == t) {
                topic_ids[t].push_back(i);
                w.push_back(weight[i]);
            }
        }
        topic_cum[t] = cumulate(w);
    }
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const auto draw = [&](const std::vector<double>& cum) {
        const double x = unit(rng) * cum.back();
        return static_cast<std::size_t>(
            std::upper_bound(cum.begin(), cum.end(), x) - cum.begin());
    };

    std::string text;
    text.reserve(min_bytes + 4096);
    std::uniform_int_distribution<int> topic_pick(0, kTopics - 1);
    while (text.size() < min_bytes) {
        const int topic = topic_pick(rng);
        for (int i = 0; i < tokens_per_line; ++i) {
            const bool topical = unit(rng) < 0.6;
            const std::size_t word =
                topical
                    ? topic_ids[topic][std::min(draw(topic_cum[topic]),
                                                topic_ids[topic].size() - 1)]
                    : std::min(draw(global_cum), v - 1);
            text += words[word];
            text += ' ';
        }
        text.back() = '\n';
    }
    write_file(path, text);
    return path;
}

}  // namespace testutil
