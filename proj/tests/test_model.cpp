/**
 * @file
 * @brief Forward-math tests: context vectors, scoring, probabilities.
 * @copyright Apache License v.2 (http://www.apache.org/licenses/LICENSE-2.0)
*/
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "pine/error.h"
#include "pine/model.h"
#include "pine/rng.h"
#include "testutil.h"

using namespace pine;

namespace {

// A small hand-built model: V rows of output, V+B rows of input.
ModelParams make_params(ModelKind kind, std::int32_t dim, std::int32_t pos_dim,
                        std::int32_t window, std::int32_t input_rows,
                        std::int32_t vocab_size, std::uint64_t seed = 0) {
    ModelParams p;
    p.kind = kind;
    p.dim = dim;
    p.pos_dim = kind == ModelKind::kSubword ? 0 : pos_dim;
    p.window = window;
    p.input = MatrixF(input_rows, dim);
    p.output = MatrixF(vocab_size, dim);
    if (kind != ModelKind::kSubword) {
        p.positional = MatrixF(2 * window, p.pos_dim);
    }
    if (seed != 0) {
        auto rng = make_rng(seed);
        std::uniform_real_distribution<float> u(-0.5f, 0.5f);
        for (auto* m : {&p.input, &p.output, &p.positional}) {
            for (std::size_t i = 0; i < m->size(); ++i) {
                m->data()[i] = u(rng);
            }
        }
    }
    return p;
}

std::vector<float> ctx_of(const ModelParams& p,
                          const std::vector<ResolvedEntry>& entries) {
    std::vector<float> out(static_cast<std::size_t>(p.dim));
    context_vector<float>(p, entries, out);
    return out;
}

}  // namespace

TEST_CASE("word_input_vector sums the selected rows") {
    auto p = make_params(ModelKind::kSubword, 3, 0, 2, 5, 2);
    p.input.row(1)[0] = 1.0f;  // e1
    p.input.row(3)[1] = 1.0f;  // e2
    std::vector<std::int32_t> rows{1, 3};
    std::vector<float> out(3);
    word_input_vector<float>(p, rows, out);
    CHECK(out == std::vector<float>{1.0f, 1.0f, 0.0f});

    rows = {3};
    word_input_vector<float>(p, rows, out);
    CHECK(out == std::vector<float>{0.0f, 1.0f, 0.0f});

    p.input.zero();
    rows = {0, 1, 2};
    word_input_vector<float>(p, rows, out);
    CHECK(out == std::vector<float>{0.0f, 0.0f, 0.0f});

    CHECK_THROWS_AS(word_input_vector<float>(p, {}, out), DataError);
}

TEST_CASE("constrained_hadamard pads with ones") {
    const std::vector<float> u{2.0f, 3.0f, 4.0f};
    std::vector<float> out(3);

    const std::vector<float> d1{0.5f};
    constrained_hadamard<float>(u, d1, out);
    CHECK(out == std::vector<float>{1.0f, 3.0f, 4.0f});

    const std::vector<float> d_full{2.0f, 0.5f, -1.0f};
    constrained_hadamard<float>(u, d_full, out);
    CHECK(out == std::vector<float>{4.0f, 1.5f, -4.0f});

    const std::vector<float> ones{1.0f, 1.0f, 1.0f};
    constrained_hadamard<float>(u, ones, out);
    CHECK(out == u);

    const std::vector<float> too_long{1.0f, 1.0f, 1.0f, 1.0f};
    CHECK_THROWS_AS(constrained_hadamard<float>(u, too_long, out), DataError);
}

TEST_CASE("subword context vector is the mean over context words") {
    auto p = make_params(ModelKind::kSubword, 2, 0, 2, 6, 2);
    p.input.row(0)[0] = 1.0f;  // word A := (1, 0)
    p.input.row(1)[1] = 2.0f;  // word B := (0, 2)
    const std::vector<std::int32_t> ra{0};
    const std::vector<std::int32_t> rb{1};
    const std::vector<ResolvedEntry> entries{{-1, ra}, {1, rb}};
    CHECK(ctx_of(p, entries) == std::vector<float>{0.5f, 1.0f});

    CHECK_THROWS_AS(ctx_of(p, {}), DataError);
}

TEST_CASE("subword context vector is permutation-invariant bit-for-bit") {
    auto p = make_params(ModelKind::kSubword, 8, 0, 3, 40, 4, /*seed=*/11);
    const std::vector<std::int32_t> ra{3, 17, 21};
    const std::vector<std::int32_t> rb{5, 9};
    const std::vector<std::int32_t> rc{30, 2, 14};
    const std::vector<ResolvedEntry> e1{{-2, ra}, {-1, rb}, {1, rc}};
    const std::vector<ResolvedEntry> e2{{-2, rc}, {-1, ra}, {1, rb}};
    CHECK(ctx_of(p, e1) == ctx_of(p, e2));
}

TEST_CASE("positional context vector weights by position") {
    auto p = make_params(ModelKind::kPositional, 2, 2, 1, 4, 2);
    p.input.row(2)[0] = 3.0f;
    p.input.row(2)[1] = -1.0f;
    // d for the single present position set to ones: identity weighting.
    auto d = p.positional.row(p.position_row(-1));
    d[0] = 1.0f;
    d[1] = 1.0f;
    const std::vector<std::int32_t> rows{2};
    const std::vector<ResolvedEntry> entries{{-1, rows}};
    CHECK(ctx_of(p, entries) == std::vector<float>{3.0f, -1.0f});
}

TEST_CASE("positional context vector changes under transposition") {
    auto p = make_params(ModelKind::kPositional, 6, 6, 2, 30, 4, /*seed=*/23);
    const std::vector<std::int32_t> ra{1, 7};
    const std::vector<std::int32_t> rb{12};
    const std::vector<ResolvedEntry> e1{{-2, ra}, {-1, rb}};
    const std::vector<ResolvedEntry> e2{{-2, rb}, {-1, ra}};
    CHECK(ctx_of(p, e1) != ctx_of(p, e2));

    // With equal d rows the transposition no longer matters (up to the
    // identical float sums).
    auto d1 = p.positional.row(p.position_row(-2));
    auto d2 = p.positional.row(p.position_row(-1));
    std::copy(d1.begin(), d1.end(), d2.begin());
    const auto v1 = ctx_of(p, e1);
    const auto v2 = ctx_of(p, e2);
    for (std::size_t j = 0; j < v1.size(); ++j) {
        CHECK(v1[j] == doctest::Approx(v2[j]).epsilon(1e-6));
    }
}

TEST_CASE("constrained context vector passes tail features through") {
    auto p = make_params(ModelKind::kConstrained, 4, 2, 1, 4, 2);
    auto u = p.input.row(1);
    u[0] = 1.0f;
    u[1] = 2.0f;
    u[2] = 3.0f;
    u[3] = 4.0f;
    auto d = p.positional.row(p.position_row(1));
    d[0] = 0.5f;
    d[1] = -1.0f;
    const std::vector<std::int32_t> rows{1};
    const std::vector<ResolvedEntry> entries{{1, rows}};
    CHECK(ctx_of(p, entries) == std::vector<float>{0.5f, -2.0f, 3.0f, 4.0f});
}

TEST_CASE("score is the dot product with the output row") {
    auto p = make_params(ModelKind::kSubword, 3, 0, 2, 4, 3);
    // Zero outputs: score 0 for anything.
    std::vector<float> ctx{0.3f, -0.7f, 2.0f};
    CHECK(score<float>(p, ctx, 0) == 0.0f);
    CHECK(score<float>(p, ctx, 2) == 0.0f);

    p.output.row(1)[0] = 1.0f;
    ctx = {1.0f, 0.0f, 0.0f};
    CHECK(score<float>(p, ctx, 1) == 1.0f);

    p.output.row(2)[1] = 5.0f;  // orthogonal to ctx
    CHECK(score<float>(p, ctx, 2) == 0.0f);
}

TEST_CASE("prediction probability multiplies sigmoids") {
    auto p = make_params(ModelKind::kSubword, 2, 0, 2, 4, 4);
    const std::vector<float> ctx{0.0f, 0.0f};
    const std::vector<std::int32_t> negs{1, 2};
    CHECK(prediction_prob<float>(p, ctx, 0, negs) == doctest::Approx(0.125));

    // Saturated scores push the probability toward 1.
    auto strong = make_params(ModelKind::kSubword, 1, 0, 2, 4, 4);
    strong.output.row(0)[0] = 100.0f;
    strong.output.row(1)[0] = -100.0f;
    strong.output.row(2)[0] = -100.0f;
    const std::vector<float> big_ctx{10.0f};
    CHECK(prediction_prob<float>(strong, big_ctx, 0, negs) ==
          doctest::Approx(1.0));

    CHECK_THROWS_AS(prediction_prob<float>(p, ctx, 0, {}), DataError);
    const std::vector<std::int32_t> with_target{0, 1};
    CHECK_THROWS_AS(prediction_prob<float>(p, ctx, 0, with_target), DataError);
}

TEST_CASE("prediction probability stays in (0,1) and ranks like the score") {
    auto p = make_params(ModelKind::kSubword, 6, 0, 2, 30, 8, /*seed=*/31);
    auto rng = make_rng(77);
    std::uniform_int_distribution<std::int32_t> pick(0, 29);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<std::int32_t> rows{pick(rng), pick(rng)};
        const std::vector<ResolvedEntry> entries{{-1, rows}};
        std::vector<float> ctx(6);
        context_vector<float>(p, entries, ctx);
        const std::vector<std::int32_t> negs{6, 7};
        std::vector<std::pair<double, double>> prob_score;
        for (std::int32_t w = 0; w < 6; ++w) {
            const double prob = prediction_prob<float>(p, ctx, w, negs);
            CHECK(prob > 0.0);
            CHECK(prob < 1.0);
            prob_score.emplace_back(prob, score<float>(p, ctx, w));
        }
        for (std::size_t i = 0; i + 1 < prob_score.size(); ++i) {
            for (std::size_t j = i + 1; j < prob_score.size(); ++j) {
                CHECK(((prob_score[i].first < prob_score[j].first) ==
                       (prob_score[i].second < prob_score[j].second)));
            }
        }
    }
}

TEST_CASE("score obeys Cauchy-Schwarz numerically") {
    auto p = make_params(ModelKind::kPositional, 8, 8, 2, 40, 6, /*seed=*/5);
    auto rng = make_rng(6);
    std::uniform_int_distribution<std::int32_t> pick(0, 39);
    std::uniform_int_distribution<std::int32_t> out(0, 5);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<std::int32_t> ra{pick(rng)};
        std::vector<std::int32_t> rb{pick(rng), pick(rng)};
        const std::vector<ResolvedEntry> entries{{-1, ra}, {1, rb}};
        std::vector<float> ctx(8);
        context_vector<float>(p, entries, ctx);
        const std::int32_t w = out(rng);
        double cn = 0.0;
        double vn = 0.0;
        for (std::size_t j = 0; j < 8; ++j) {
            cn += static_cast<double>(ctx[j]) * ctx[j];
            const auto v = p.output.row(w)[j];
            vn += static_cast<double>(v) * v;
        }
        const double bound = std::sqrt(cn) * std::sqrt(vn);
        CHECK(std::abs(static_cast<double>(score<float>(p, ctx, w))) <=
              bound + 1e-9);
    }
}

TEST_CASE("model validation enforces the kind invariants") {
    auto p = make_params(ModelKind::kConstrained, 4, 2, 2, 10, 3);
    CHECK_NOTHROW(p.validate());
    p.pos_dim = 4;  // constrained requires D' < D
    CHECK_THROWS_AS(p.validate(), DataError);
    p.pos_dim = 2;
    p.positional = MatrixF(3, 2);  // wrong row count
    CHECK_THROWS_AS(p.validate(), DataError);

    auto sub = make_params(ModelKind::kSubword, 4, 0, 2, 10, 3);
    CHECK_NOTHROW(sub.validate());
    sub.positional = MatrixF(1, 1);
    CHECK_THROWS_AS(sub.validate(), DataError);
}

TEST_CASE("position row mapping is a bijection without zero") {
    auto p = make_params(ModelKind::kPositional, 2, 2, 5, 4, 2);
    std::vector<bool> seen(10, false);
    for (std::int32_t pos = -5; pos <= 5; ++pos) {
        if (pos == 0) {
            continue;
        }
        const auto row = p.position_row(pos);
        CHECK(row >= 0);
        CHECK(row < 10);
        CHECK_FALSE(seen[static_cast<std::size_t>(row)]);
        seen[static_cast<std::size_t>(row)] = true;
        CHECK(p.row_position(row) == pos);
    }
}
