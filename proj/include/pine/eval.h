/**
 * @file
 * @brief Word-analogy evaluation and qualitative model introspection.
 * @copyright Apache License v.2 (http://www.apache.org/licenses/LICENSE-2.0)
*/
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pine/bundle.h"
#include "pine/model.h"

namespace pine {

struct AnalogyQuestion {
    std::string a, b, c, d;
};

// Parses the standard analogy layout: one "a b c d" per line, lines
// starting with ':' are section headers and are skipped. Words are
// lower-cased. Throws DataError when no questions remain.
std::vector<AnalogyQuestion> load_analogy_file(const std::string& path);

struct AnalogyReport {
    std::int64_t total = 0;    // questions with all four words in vocabulary
    std::int64_t skipped = 0;  // questions with any out-of-vocabulary word
    std::int64_t correct = 0;
    double accuracy = 0.0;
};

// 3CosAdd with query-word exclusion: the candidate maximizes the cosine
// between u_b - u_a + u_c and the word input vector, over the
// top_k_vocab most frequent words. Ties go to the lowest word id.
AnalogyReport evaluate_analogies(const ModelBundle& model,
                                 const std::vector<AnalogyQuestion>& questions,
                                 std::int32_t top_k_vocab = 200'000);

struct RankedWord {
    std::int32_t word = -1;
    double score = 0.0;
    double probability = 0.0;  // sigma(score), monotone in the conditional probability
};

// Ranks every vocabulary word as a fill for the masked slot between the
// left and right token sequences (positions -1.. backwards into left,
// +1.. forwards into right, clipped to the model window). Out-of-vocabulary
// context words are embedded through their n-grams; words with no
// representation are dropped. Throws DataError if no context word remains.
std::vector<RankedWord> rank_masked_predictions(const ModelBundle& model,
                                                const std::vector<std::string>& left,
                                                const std::vector<std::string>& right);

struct PositionImportance {
    std::int32_t position = 0;
    double norm = 0.0;    // l2 norm of d_p
    double scaled = 0.0;  // min-max scaled over all positions
};

// Min-max-scaled l2 norms of the positional vectors. When all norms are
// equal the scaled values are defined as 1.0. Throws DataError for the
// subword kind.
std::vector<PositionImportance> position_importance(const ModelParams& params);

struct FeatureClustering {
    std::int32_t k = 0;
    std::vector<std::int32_t> assignment;       // feature j -> cluster id, size D'
    std::vector<std::int64_t> sizes;            // per-cluster |J|
    std::vector<std::vector<double>> curves;    // k x |P| mean |d_{p,j}| over J
    double inertia = 0.0;
};

// Clusters the D' positional features as points (|d_{p,j}|)_p using
// k-means with k-means++ seeding and the given number of restarts.
// Deterministic per seed. Throws DataError for the subword kind or k > D'.
FeatureClustering cluster_positional_features(const ModelParams& params, int k = 3,
                                              std::uint64_t seed = 1,
                                              int restarts = 10);

struct WordImportance {
    std::string word;
    std::vector<double> per_cluster;  // mean |u_{w,j}| over each cluster
    std::int32_t best_cluster = -1;
};

// Importance of each word for every feature cluster; a word is attributed
// to the cluster maximizing its importance. Words with no representation
// are skipped.
std::vector<WordImportance> context_word_importance(
    const ModelBundle& model, const FeatureClustering& clustering,
    const std::vector<std::string>& words);

struct BoundReport {
    std::int64_t trials = 0;
    // |s| <= (1/|P|) sum_p ||u_p (.) d_p|| * ||v||, checked per trial.
    std::int64_t norm_bound_violations = 0;
    // Per-cluster split |s| <= (1/|P|) (sum_{j in J} |u d v| + |rest|),
    // checked for every cluster and position.
    std::int64_t cluster_bound_violations = 0;
    // Expected-difference bound for a word moved between two positions.
    double diff_measured_mean = 0.0;
    double diff_rhs_mean = 0.0;  // exact right-hand side with actual remaining terms
    bool diff_bound_holds = false;
    std::vector<double> diff_loose_bound;  // per cluster, reported only
};

// Numeric verification of the score bounds on random full windows drawn
// from the vocabulary. Throws DataError for the subword kind.
BoundReport check_score_bounds(const ModelBundle& model, std::int64_t n_trials,
                               std::uint64_t seed);

}  // namespace pine
