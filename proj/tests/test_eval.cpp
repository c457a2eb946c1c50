/**
 * @file
 * @brief Evaluation tests: analogies, masked ranking, importance, bounds.
 * @copyright Apache License v.2 (http://www.apache.org/licenses/LICENSE-2.0)
*/
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>

#include "pine/eval.h"
#include "pine/error.h"
#include "pine/rng.h"
#include "testutil.h"

using namespace pine;

namespace {

// A bundle whose word vectors are exactly their vocabulary rows: minn is
// larger than any wrapped word, so no n-gram survives and each word's
// input vector reduces to its own row.
ModelBundle word_level_bundle(std::int32_t n_words, std::int32_t dim,
                              ModelKind kind = ModelKind::kSubword,
                              std::int32_t pos_dim = 0, std::int32_t window = 2) {
    std::vector<std::pair<std::string, std::int64_t>> pairs;
    for (std::int32_t i = 0; i < n_words; ++i) {
        pairs.emplace_back("w" + std::to_string(i), n_words - i);
    }
    std::int64_t total = 0;
    for (const auto& [w, c] : pairs) {
        total += c;
    }
    ModelBundle bundle;
    bundle.vocab = Vocab::restore(std::move(pairs), total);
    bundle.subwords = SubwordIndex{10, 12, 97, true};  // grams longer than words
    bundle.params.kind = kind;
    bundle.params.dim = dim;
    bundle.params.pos_dim = kind == ModelKind::kSubword
                                ? 0
                                : (kind == ModelKind::kPositional ? dim : pos_dim);
    bundle.params.window = window;
    bundle.params.input = MatrixF(n_words + 97, dim);
    bundle.params.output = MatrixF(n_words, dim);
    if (kind != ModelKind::kSubword) {
        bundle.params.positional = MatrixF(2 * window, bundle.params.pos_dim);
    }
    return bundle;
}

void randomize(MatrixF& m, std::uint64_t seed, float scale = 0.5f) {
    auto rng = make_rng(seed);
    std::uniform_real_distribution<float> u(-scale, scale);
    for (std::size_t i = 0; i < m.size(); ++i) {
        m.data()[i] = u(rng);
    }
}

}  // namespace

TEST_CASE("analogy evaluation finds a planted solution") {
    auto bundle = word_level_bundle(10, 4);
    randomize(bundle.params.input, 42);
    auto ua = bundle.params.input.row(0);
    auto ub = bundle.params.input.row(1);
    auto uc = bundle.params.input.row(2);
    auto ud = bundle.params.input.row(3);
    for (int j = 0; j < 4; ++j) {
        ud[j] = ub[j] - ua[j] + uc[j];
    }
    const std::vector<AnalogyQuestion> questions{{"w0", "w1", "w2", "w3"}};
    const auto report = evaluate_analogies(bundle, questions);
    CHECK(report.total == 1);
    CHECK(report.correct == 1);
    CHECK(report.accuracy == doctest::Approx(1.0));
}

TEST_CASE("analogy evaluation skips OOV and breaks ties by lowest id") {
    auto bundle = word_level_bundle(6, 3);
    // All-zero embeddings: every candidate ties at cosine 0; the lowest
    // word id not among {a, b, c} wins.
    const std::vector<AnalogyQuestion> questions{
        {"w1", "w2", "w4", "w0"},   // candidate w0 wins the tie: correct
        {"w1", "w2", "w4", "w3"},   // w0 still wins: incorrect
        {"w1", "nope", "w4", "w0"}  // OOV: skipped
    };
    const auto report = evaluate_analogies(bundle, questions);
    CHECK(report.total == 2);
    CHECK(report.skipped == 1);
    CHECK(report.correct == 1);
}

TEST_CASE("analogy accuracy over random embeddings equals chance") {
    // Permutation oracle: with five words, each distinct (a, b, c) leaves
    // two candidates; enumerating both choices of d makes exactly one of
    // the two questions correct, so accuracy is exactly one half whatever
    // the embeddings are.
    auto bundle = word_level_bundle(5, 16);
    randomize(bundle.params.input, 7);
    std::vector<AnalogyQuestion> questions;
    for (int a = 0; a < 5; ++a) {
        for (int b = 0; b < 5; ++b) {
            for (int c = 0; c < 5; ++c) {
                for (int d = 0; d < 5; ++d) {
                    if (std::set<int>{a, b, c, d}.size() == 4) {
                        questions.push_back({"w" + std::to_string(a),
                                             "w" + std::to_string(b),
                                             "w" + std::to_string(c),
                                             "w" + std::to_string(d)});
                    }
                }
            }
        }
    }
    const auto report = evaluate_analogies(bundle, questions);
    CHECK(report.total == 120);
    CHECK(report.accuracy == doctest::Approx(0.5));
}

TEST_CASE("analogy file parsing skips section headers") {
    testutil::TempDir dir("analogy");
    const auto path = dir.file("questions.txt");
    testutil::write_file(path,
                         ": capital-common-countries\n"
                         "Athens Greece Baghdad Iraq\n"
                         "incomplete line\n"
                         "Paris France Rome Italy\n");
    const auto questions = load_analogy_file(path);
    REQUIRE(questions.size() == 2);
    CHECK(questions[0].a == "athens");
    CHECK(questions[1].d == "italy");
    CHECK_THROWS_AS(load_analogy_file(dir.file("missing.txt")), DataError);
    testutil::write_file(dir.file("empty.txt"), ": header only\n");
    CHECK_THROWS_AS(load_analogy_file(dir.file("empty.txt")), DataError);
}

TEST_CASE("masked prediction ranks by score with sigma column") {
    auto bundle = word_level_bundle(5, 3);
    randomize(bundle.params.input, 3);
    randomize(bundle.params.output, 4);
    // Words w3 and w4 share an output vector: adjacent ranks, equal scores.
    auto v3 = bundle.params.output.row(3);
    auto v4 = bundle.params.output.row(4);
    std::copy(v3.begin(), v3.end(), v4.begin());

    const auto ranking = rank_masked_predictions(bundle, {"w0", "w1"}, {"w2"});
    REQUIRE(ranking.size() == 5);
    for (std::size_t i = 0; i + 1 < ranking.size(); ++i) {
        CHECK(ranking[i].score >= ranking[i + 1].score);
    }
    std::size_t i3 = 0;
    std::size_t i4 = 0;
    for (std::size_t i = 0; i < ranking.size(); ++i) {
        if (ranking[i].word == 3) {
            i3 = i;
        }
        if (ranking[i].word == 4) {
            i4 = i;
        }
    }
    CHECK(i4 == i3 + 1);  // adjacent, tie broken by id
    CHECK(ranking[i3].score == ranking[i4].score);
    for (const auto& r : ranking) {
        CHECK(r.probability == doctest::Approx(1.0 / (1.0 + std::exp(-r.score))));
    }
}

TEST_CASE("subword masked ranking is invariant under context permutation") {
    auto bundle = word_level_bundle(8, 6, ModelKind::kSubword, 0, /*window=*/3);
    randomize(bundle.params.input, 11);
    randomize(bundle.params.output, 12);
    const auto a = rank_masked_predictions(bundle, {"w0", "w1", "w2"}, {});
    const auto b = rank_masked_predictions(bundle, {"w2", "w0", "w1"}, {});
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].word == b[i].word);
        CHECK(a[i].score == b[i].score);  // exact equality
    }
}

TEST_CASE("positional masked ranking depends on context order") {
    auto bundle =
        word_level_bundle(8, 6, ModelKind::kPositional, 6, /*window=*/3);
    randomize(bundle.params.input, 21);
    randomize(bundle.params.output, 22);
    randomize(bundle.params.positional, 23, 1.0f);
    const auto a = rank_masked_predictions(bundle, {"w0", "w1", "w2"}, {});
    const auto b = rank_masked_predictions(bundle, {"w2", "w0", "w1"}, {});
    bool same = true;
    for (std::size_t i = 0; i < a.size(); ++i) {
        same = same && a[i].word == b[i].word && a[i].score == b[i].score;
    }
    CHECK_FALSE(same);

    CHECK_THROWS_AS(rank_masked_predictions(bundle, {}, {}), DataError);
}

TEST_CASE("position importance min-max scales the norms") {
    auto bundle = word_level_bundle(4, 3, ModelKind::kPositional, 3, 2);
    // Norms 1, 3, 5, 2 over the four positions.
    const float norms[] = {1.0f, 3.0f, 5.0f, 2.0f};
    for (int row = 0; row < 4; ++row) {
        auto d = bundle.params.positional.row(row);
        d[0] = norms[row];
        d[1] = 0.0f;
        d[2] = 0.0f;
    }
    const auto imp = position_importance(bundle.params);
    REQUIRE(imp.size() == 4);
    CHECK(imp[0].position == -2);
    CHECK(imp[3].position == 2);
    CHECK(imp[0].norm == doctest::Approx(1.0));
    CHECK(imp[0].scaled == doctest::Approx(0.0));
    CHECK(imp[1].scaled == doctest::Approx(0.5));
    CHECK(imp[2].scaled == doctest::Approx(1.0));
    CHECK(imp[3].scaled == doctest::Approx(0.25));
}

TEST_CASE("position importance degenerates to ones for equal norms") {
    auto bundle = word_level_bundle(4, 3, ModelKind::kPositional, 3, 2);
    for (int row = 0; row < 4; ++row) {
        auto d = bundle.params.positional.row(row);
        d[0] = 1.0f;  // scheme A.1 shape: every d_p identical
        d[1] = 1.0f;
        d[2] = 1.0f;
    }
    for (const auto& imp : position_importance(bundle.params)) {
        CHECK(imp.norm == doctest::Approx(std::sqrt(3.0)));
        CHECK(imp.scaled == doctest::Approx(1.0));
    }

    auto sub = word_level_bundle(4, 3);
    CHECK_THROWS_AS(position_importance(sub.params), DataError);
}

TEST_CASE("position importance is invariant to global rescaling") {
    auto bundle = word_level_bundle(4, 5, ModelKind::kPositional, 5, 3);
    randomize(bundle.params.positional, 31, 1.0f);
    const auto before = position_importance(bundle.params);
    for (std::size_t i = 0; i < bundle.params.positional.size(); ++i) {
        bundle.params.positional.data()[i] *= 7.5f;
    }
    const auto after = position_importance(bundle.params);
    for (std::size_t i = 0; i < before.size(); ++i) {
        CHECK(after[i].scaled == doctest::Approx(before[i].scaled).epsilon(1e-5));
    }
}

TEST_CASE("feature clustering recovers a planted partition") {
    const std::int32_t pos_dim = 30;
    const std::int32_t window = 3;
    auto bundle =
        word_level_bundle(4, pos_dim, ModelKind::kPositional, pos_dim, window);
    // Three position profiles; features get one of them plus small noise.
    const float profiles[3][6] = {
        {2.0f, 1.6f, 0.1f, 0.1f, 0.1f, 0.1f},
        {0.1f, 0.1f, 1.8f, 2.1f, 0.1f, 0.1f},
        {0.1f, 0.1f, 0.1f, 0.1f, 1.7f, 2.2f},
    };
    std::vector<std::int32_t> truth(pos_dim);
    auto rng = make_rng(55);
    std::uniform_real_distribution<float> noise(-0.05f, 0.05f);
    for (std::int32_t j = 0; j < pos_dim; ++j) {
        truth[j] = j % 3;
        for (std::int32_t row = 0; row < 2 * window; ++row) {
            bundle.params.positional.row(row)[j] =
                profiles[truth[j]][row] + noise(rng);
        }
    }
    const auto clustering = cluster_positional_features(bundle.params, 3, 1);
    CHECK(clustering.assignment.size() == 30);
    CHECK(testutil::adjusted_rand_index(truth, clustering.assignment) >= 0.9);
    CHECK(clustering.sizes[0] + clustering.sizes[1] + clustering.sizes[2] == 30);
}

TEST_CASE("k=1 clustering curve is the mean absolute value per position") {
    auto bundle = word_level_bundle(4, 4, ModelKind::kPositional, 4, 1);
    randomize(bundle.params.positional, 71, 1.0f);
    const auto clustering = cluster_positional_features(bundle.params, 1, 2);
    REQUIRE(clustering.curves.size() == 1);
    for (std::int32_t row = 0; row < 2; ++row) {
        double mean = 0.0;
        for (std::int32_t j = 0; j < 4; ++j) {
            mean += std::abs(bundle.params.positional.row(row)[j]);
        }
        mean /= 4.0;
        CHECK(clustering.curves[0][static_cast<std::size_t>(row)] ==
              doctest::Approx(mean));
    }
}

TEST_CASE("duplicated feature columns land in the same cluster") {
    auto bundle = word_level_bundle(4, 6, ModelKind::kPositional, 6, 2);
    randomize(bundle.params.positional, 81, 1.0f);
    for (std::int32_t row = 0; row < 4; ++row) {
        auto d = bundle.params.positional.row(row);
        d[5] = d[2];  // exact duplicate column
    }
    const auto clustering = cluster_positional_features(bundle.params, 3, 5);
    CHECK(clustering.assignment[5] == clustering.assignment[2]);

    CHECK_THROWS_AS(cluster_positional_features(bundle.params, 7, 5), DataError);
}

TEST_CASE("context word importance averages |u| over clusters") {
    auto bundle = word_level_bundle(4, 4, ModelKind::kPositional, 4, 1);
    // Clustering: features {0,1} in cluster 0, {2,3} in cluster 1.
    FeatureClustering clustering;
    clustering.k = 2;
    clustering.assignment = {0, 0, 1, 1};
    clustering.sizes = {2, 2};
    clustering.curves = {{0.0, 0.0}, {0.0, 0.0}};

    auto u = bundle.params.input.row(0);  // word w0
    u[0] = 0.5f;
    u[1] = 1.5f;
    u[2] = -0.1f;
    u[3] = 0.1f;
    const auto imp = context_word_importance(bundle, clustering, {"w0"});
    REQUIRE(imp.size() == 1);
    CHECK(imp[0].per_cluster[0] == doctest::Approx(1.0));
    CHECK(imp[0].per_cluster[1] == doctest::Approx(0.1));
    CHECK(imp[0].best_cluster == 0);
}

TEST_CASE("context word importance scales positively homogeneously") {
    auto bundle = word_level_bundle(6, 6, ModelKind::kPositional, 6, 2);
    randomize(bundle.params.input, 91);
    randomize(bundle.params.positional, 92, 1.0f);
    const auto clustering = cluster_positional_features(bundle.params, 2, 3);
    const std::vector<std::string> words{"w0", "w1", "w2"};
    const auto before = context_word_importance(bundle, clustering, words);
    for (std::size_t i = 0; i < bundle.params.input.size(); ++i) {
        bundle.params.input.data()[i] *= 3.0f;
    }
    const auto after = context_word_importance(bundle, clustering, words);
    for (std::size_t i = 0; i < before.size(); ++i) {
        CHECK(after[i].best_cluster == before[i].best_cluster);
        for (std::size_t c = 0; c < before[i].per_cluster.size(); ++c) {
            CHECK(after[i].per_cluster[c] ==
                  doctest::Approx(3.0 * before[i].per_cluster[c]).epsilon(1e-4));
        }
    }

    auto zero = word_level_bundle(6, 6, ModelKind::kPositional, 6, 2);
    zero.params.positional = bundle.params.positional;
    const auto zimp = context_word_importance(zero, clustering, {"w0"});
    for (const auto x : zimp[0].per_cluster) {
        CHECK(x == 0.0);
    }
}

TEST_CASE("score bounds hold on a single position by hand") {
    // u = (1, 0), d = (1, 1), v = (1, 0): s = 1 <= ||u (.) d|| * ||v|| = 1
    // and the norm form sqrt(2) used in the docstring example bounds it too.
    auto bundle = word_level_bundle(2, 2, ModelKind::kPositional, 2,
                                    /*window=*/1);
    // Window has |P| = 2; occupy both positions with w0 and give the model
    // u_{w0} = (1,0), all d = (1,1), v_{w1} = (1,0).
    auto u = bundle.params.input.row(0);
    u[0] = 1.0f;
    auto d1 = bundle.params.positional.row(0);
    d1[0] = 1.0f;
    d1[1] = 1.0f;
    auto d2 = bundle.params.positional.row(1);
    d2[0] = 1.0f;
    d2[1] = 1.0f;
    auto v = bundle.params.output.row(1);
    v[0] = 1.0f;
    const auto report = check_score_bounds(bundle, 200, 17);
    CHECK(report.trials == 200);
    CHECK(report.norm_bound_violations == 0);
    CHECK(report.cluster_bound_violations == 0);
    CHECK(report.diff_bound_holds);
}

TEST_CASE("score bounds on a zero-output model are 0 <= 0") {
    auto bundle = word_level_bundle(5, 4, ModelKind::kPositional, 4, 2);
    randomize(bundle.params.input, 101);
    randomize(bundle.params.positional, 102, 1.0f);
    const auto report = check_score_bounds(bundle, 100, 3);
    CHECK(report.norm_bound_violations == 0);
    CHECK(report.cluster_bound_violations == 0);
    CHECK(report.diff_measured_mean == doctest::Approx(0.0));
    CHECK(report.diff_bound_holds);
}

TEST_CASE("score bounds stay violation-free on random models") {
    auto bundle = word_level_bundle(12, 8, ModelKind::kConstrained, 3, 3);
    randomize(bundle.params.input, 111);
    randomize(bundle.params.output, 112);
    randomize(bundle.params.positional, 113, 1.5f);
    const auto report = check_score_bounds(bundle, 1000, 29);
    CHECK(report.norm_bound_violations == 0);
    CHECK(report.cluster_bound_violations == 0);
    CHECK(report.diff_bound_holds);
    CHECK(report.diff_rhs_mean >= report.diff_measured_mean);

    auto sub = word_level_bundle(4, 4);
    CHECK_THROWS_AS(check_score_bounds(sub, 10, 1), DataError);
}
