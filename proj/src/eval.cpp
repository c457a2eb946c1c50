/**
 * @file
 * @copyright Apache License v.2 (http://www.apache.org/licenses/LICENSE-2.0)
*/
#include "pine/eval.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include "pine/error.h"
#include "pine/rng.h"

namespace pine {

namespace {

// Word input vector in double precision; empty result for words with no
// representation.
std::vector<double> embed_word(const ModelBundle& model, std::string_view word) {
    const auto rows = subword_ids(word, model.vocab, model.subwords);
    std::vector<double> vec;
    if (rows.empty()) {
        return vec;
    }
    vec.assign(static_cast<std::size_t>(model.params.dim), 0.0);
    for (const std::int32_t r : rows) {
        const auto row = model.params.input.row(r);
        for (std::size_t j = 0; j < vec.size(); ++j) {
            vec[j] += static_cast<double>(row[j]);
        }
    }
    return vec;
}

double norm2(std::span<const double> v) {
    return std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0));
}

}  // namespace

std::vector<AnalogyQuestion> load_analogy_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open analogy file: " + path);
    }
    std::vector<AnalogyQuestion> questions;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == ':') {
            continue;
        }
        std::istringstream parts(line);
        AnalogyQuestion q;
        if (!(parts >> q.a >> q.b >> q.c >> q.d)) {
            continue;
        }
        q.a = lowercase(q.a);
        q.b = lowercase(q.b);
        q.c = lowercase(q.c);
        q.d = lowercase(q.d);
        questions.push_back(std::move(q));
    }
    if (questions.empty()) {
        throw DataError("analogy file contains no questions: " + path);
    }
    return questions;
}

AnalogyReport evaluate_analogies(const ModelBundle& model,
                                 const std::vector<AnalogyQuestion>& questions,
                                 std::int32_t top_k_vocab) {
    if (questions.empty()) {
        throw DataError("no analogy questions given");
    }
    const auto& vocab = model.vocab;
    const std::int32_t k = std::min(top_k_vocab, vocab.size());
    const auto dim = static_cast<std::size_t>(model.params.dim);

    // Candidate word vectors, normalized.
    Matrix<double> candidates(k, static_cast<std::int64_t>(dim));
    for (std::int32_t w = 0; w < k; ++w) {
        auto vec = embed_word(model, vocab.entry(w).word);
        auto row = candidates.row(w);
        if (vec.empty()) {
            std::fill(row.begin(), row.end(), 0.0);
            continue;
        }
        const double n = norm2(vec);
        const double inv = n > 0.0 ? 1.0 / n : 0.0;
        for (std::size_t j = 0; j < dim; ++j) {
            row[j] = vec[j] * inv;
        }
    }

    AnalogyReport report;
    for (const auto& q : questions) {
        const std::int32_t ia = vocab.id(q.a);
        const std::int32_t ib = vocab.id(q.b);
        const std::int32_t ic = vocab.id(q.c);
        const std::int32_t id = vocab.id(q.d);
        if (ia < 0 || ib < 0 || ic < 0 || id < 0) {
            ++report.skipped;
            continue;
        }
        const auto va = embed_word(model, q.a);
        const auto vb = embed_word(model, q.b);
        const auto vc = embed_word(model, q.c);
        std::vector<double> query(dim);
        for (std::size_t j = 0; j < dim; ++j) {
            query[j] = vb[j] - va[j] + vc[j];
        }
        const double qn = norm2(query);
        if (qn > 0.0) {
            for (auto& x : query) {
                x /= qn;
            }
        }
        std::int32_t best = -1;
        double best_cos = -std::numeric_limits<double>::infinity();
        for (std::int32_t w = 0; w < k; ++w) {
            if (w == ia || w == ib || w == ic) {
                continue;
            }
            const auto row = candidates.row(w);
            double cos = 0.0;
            for (std::size_t j = 0; j < dim; ++j) {
                cos += query[j] * row[j];
            }
            if (cos > best_cos) {
                best_cos = cos;
                best = w;
            }
        }
        ++report.total;
        if (best == id) {
            ++report.correct;
        }
    }
    report.accuracy = report.total > 0
                          ? static_cast<double>(report.correct) /
                                static_cast<double>(report.total)
                          : 0.0;
    return report;
}

std::vector<RankedWord> rank_masked_predictions(const ModelBundle& model,
                                                const std::vector<std::string>& left,
                                                const std::vector<std::string>& right) {
    const auto& params = model.params;
    const std::int32_t c = params.window;
    const auto dim = static_cast<std::size_t>(params.dim);

    // Resolve the window around the mask; context entries keep their own
    // row storage since out-of-vocabulary words are allowed here.
    std::vector<std::vector<std::int32_t>> storage;
    std::vector<ResolvedEntry> entries;
    const auto add_entry = [&](std::int32_t position, const std::string& word) {
        auto rows = subword_ids(word, model.vocab, model.subwords);
        if (rows.empty()) {
            return;  // no representation
        }
        storage.push_back(std::move(rows));
        entries.push_back({position, storage.back()});
    };
    const auto lsize = static_cast<std::int32_t>(left.size());
    for (std::int32_t p = -std::min(c, lsize); p <= -1; ++p) {
        add_entry(p, left[static_cast<std::size_t>(lsize + p)]);
    }
    const auto rsize = static_cast<std::int32_t>(right.size());
    for (std::int32_t p = 1; p <= std::min(c, rsize); ++p) {
        add_entry(p, right[static_cast<std::size_t>(p - 1)]);
    }
    if (entries.empty()) {
        throw DataError("no representable context word around the mask");
    }
    // storage may have reallocated while growing; refresh the spans.
    for (std::size_t i = 0; i < entries.size(); ++i) {
        entries[i].rows = storage[i];
    }

    std::vector<float> ctx(dim);
    context_vector<float>(params, entries, ctx);
    std::vector<RankedWord> ranking(static_cast<std::size_t>(model.vocab.size()));
    for (std::int32_t w = 0; w < model.vocab.size(); ++w) {
        const auto s = static_cast<double>(
            score<float>(params, std::span<const float>(ctx), w));
        ranking[static_cast<std::size_t>(w)] = {w, s, sigmoid(s)};
    }
    std::stable_sort(ranking.begin(), ranking.end(),
                     [](const RankedWord& a, const RankedWord& b) {
                         if (a.score != b.score) {
                             return a.score > b.score;
                         }
                         return a.word < b.word;
                     });
    return ranking;
}

std::vector<PositionImportance> position_importance(const ModelParams& params) {
    if (!params.has_positions()) {
        throw DataError("position importance is undefined for the subword kind");
    }
    std::vector<PositionImportance> result;
    result.reserve(static_cast<std::size_t>(params.num_positions()));
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (std::int32_t row = 0; row < params.num_positions(); ++row) {
        const auto d = params.positional.row(row);
        double sq = 0.0;
        for (const float x : d) {
            sq += static_cast<double>(x) * static_cast<double>(x);
        }
        const double norm = std::sqrt(sq);
        lo = std::min(lo, norm);
        hi = std::max(hi, norm);
        result.push_back({params.row_position(row), norm, 0.0});
    }
    for (auto& r : result) {
        r.scaled = hi > lo ? (r.norm - lo) / (hi - lo) : 1.0;
    }
    return result;
}

namespace {

// Plain Lloyd iterations over points stored row-major; returns inertia.
double run_kmeans(const Matrix<double>& points, int k, std::mt19937_64& rng,
                  std::vector<std::int32_t>& assignment,
                  Matrix<double>& centroids) {
    const std::int64_t n = points.rows();
    const std::int64_t dim = points.cols();

    // k-means++ seeding.
    std::uniform_int_distribution<std::int64_t> first(0, n - 1);
    std::vector<std::int64_t> seeds;
    seeds.push_back(first(rng));
    std::vector<double> dist2(static_cast<std::size_t>(n),
                              std::numeric_limits<double>::infinity());
    const auto sqdist = [&](std::int64_t a, std::int64_t centre) {
        const auto pa = points.row(a);
        const auto pc = points.row(centre);
        double s = 0.0;
        for (std::int64_t j = 0; j < dim; ++j) {
            const double diff = pa[j] - pc[j];
            s += diff * diff;
        }
        return s;
    };
    while (static_cast<int>(seeds.size()) < k) {
        double total = 0.0;
        for (std::int64_t i = 0; i < n; ++i) {
            dist2[i] = std::min(dist2[i], sqdist(i, seeds.back()));
            total += dist2[i];
        }
        std::int64_t chosen = 0;
        if (total > 0.0) {
            std::uniform_real_distribution<double> pick(0.0, total);
            double target = pick(rng);
            for (std::int64_t i = 0; i < n; ++i) {
                target -= dist2[i];
                if (target <= 0.0) {
                    chosen = i;
                    break;
                }
            }
        } else {
            chosen = first(rng);
        }
        seeds.push_back(chosen);
    }
    for (int j = 0; j < k; ++j) {
        const auto src = points.row(seeds[static_cast<std::size_t>(j)]);
        auto dst = centroids.row(j);
        std::copy(src.begin(), src.end(), dst.begin());
    }

    assignment.assign(static_cast<std::size_t>(n), 0);
    std::vector<std::int64_t> sizes(static_cast<std::size_t>(k), 0);
    double inertia = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
        bool moved = false;
        inertia = 0.0;
        for (std::int64_t i = 0; i < n; ++i) {
            const auto p = points.row(i);
            double best = std::numeric_limits<double>::infinity();
            std::int32_t best_c = 0;
            for (int cidx = 0; cidx < k; ++cidx) {
                const auto centre = centroids.row(cidx);
                double s = 0.0;
                for (std::int64_t j = 0; j < dim; ++j) {
                    const double diff = p[j] - centre[j];
                    s += diff * diff;
                }
                if (s < best) {
                    best = s;
                    best_c = cidx;
                }
            }
            if (assignment[static_cast<std::size_t>(i)] != best_c) {
                assignment[static_cast<std::size_t>(i)] = best_c;
                moved = true;
            }
            inertia += best;
        }
        // Recompute centroids; an emptied cluster keeps its previous centre.
        Matrix<double> sums(k, dim);
        std::fill(sizes.begin(), sizes.end(), 0);
        for (std::int64_t i = 0; i < n; ++i) {
            const auto c = assignment[static_cast<std::size_t>(i)];
            ++sizes[static_cast<std::size_t>(c)];
            const auto p = points.row(i);
            auto s = sums.row(c);
            for (std::int64_t j = 0; j < dim; ++j) {
                s[j] += p[j];
            }
        }
        for (int cidx = 0; cidx < k; ++cidx) {
            if (sizes[static_cast<std::size_t>(cidx)] == 0) {
                continue;
            }
            const auto s = sums.row(cidx);
            auto centre = centroids.row(cidx);
            for (std::int64_t j = 0; j < dim; ++j) {
                centre[j] = s[j] / static_cast<double>(sizes[static_cast<std::size_t>(cidx)]);
            }
        }
        if (!moved && iter > 0) {
            break;
        }
    }
    return inertia;
}

}  // namespace

FeatureClustering cluster_positional_features(const ModelParams& params, int k,
                                              std::uint64_t seed, int restarts) {
    if (!params.has_positions()) {
        throw DataError("feature clustering is undefined for the subword kind");
    }
    if (k < 1 || k > params.pos_dim) {
        throw DataError("cluster count must satisfy 1 <= k <= D'");
    }
    const std::int64_t n = params.pos_dim;       // points: features
    const std::int64_t dim = params.num_positions();
    Matrix<double> points(n, dim);
    for (std::int64_t j = 0; j < n; ++j) {
        auto p = points.row(j);
        for (std::int64_t row = 0; row < dim; ++row) {
            p[row] = std::abs(static_cast<double>(params.positional.row(row)[j]));
        }
    }

    FeatureClustering best;
    best.inertia = std::numeric_limits<double>::infinity();
    for (int r = 0; r < restarts; ++r) {
        auto rng = make_rng(seed, 0x6B6D0000u + static_cast<std::uint64_t>(r));
        std::vector<std::int32_t> assignment;
        Matrix<double> centroids(k, dim);
        const double inertia = run_kmeans(points, k, rng, assignment, centroids);
        if (inertia < best.inertia) {
            best.inertia = inertia;
            best.assignment = std::move(assignment);
        }
    }

    best.k = k;
    best.sizes.assign(static_cast<std::size_t>(k), 0);
    for (const auto c : best.assignment) {
        ++best.sizes[static_cast<std::size_t>(c)];
    }
    best.curves.assign(static_cast<std::size_t>(k),
                       std::vector<double>(static_cast<std::size_t>(dim), 0.0));
    for (std::int64_t j = 0; j < n; ++j) {
        const auto c = static_cast<std::size_t>(best.assignment[static_cast<std::size_t>(j)]);
        for (std::int64_t row = 0; row < dim; ++row) {
            best.curves[c][static_cast<std::size_t>(row)] +=
                points.row(j)[row];
        }
    }
    for (std::size_t c = 0; c < best.curves.size(); ++c) {
        if (best.sizes[c] == 0) {
            continue;
        }
        for (auto& x : best.curves[c]) {
            x /= static_cast<double>(best.sizes[c]);
        }
    }
    return best;
}

std::vector<WordImportance> context_word_importance(
    const ModelBundle& model, const FeatureClustering& clustering,
    const std::vector<std::string>& words) {
    if (!model.params.has_positions()) {
        throw DataError("context word importance is undefined for the subword kind");
    }
    if (static_cast<std::int32_t>(clustering.assignment.size()) != model.params.pos_dim) {
        throw DataError("clustering does not cover the model's positional features");
    }
    std::vector<WordImportance> result;
    for (const auto& word : words) {
        const auto vec = embed_word(model, word);
        if (vec.empty()) {
            continue;
        }
        WordImportance wi;
        wi.word = word;
        wi.per_cluster.assign(static_cast<std::size_t>(clustering.k), 0.0);
        for (std::size_t j = 0; j < clustering.assignment.size(); ++j) {
            wi.per_cluster[static_cast<std::size_t>(clustering.assignment[j])] +=
                std::abs(vec[j]);
        }
        double best = -1.0;
        for (std::size_t c = 0; c < wi.per_cluster.size(); ++c) {
            if (clustering.sizes[c] > 0) {
                wi.per_cluster[c] /= static_cast<double>(clustering.sizes[c]);
            }
            if (wi.per_cluster[c] > best) {
                best = wi.per_cluster[c];
                wi.best_cluster = static_cast<std::int32_t>(c);
            }
        }
        result.push_back(std::move(wi));
    }
    return result;
}

BoundReport check_score_bounds(const ModelBundle& model, std::int64_t n_trials,
                               std::uint64_t seed) {
    const auto& params = model.params;
    if (!params.has_positions()) {
        throw DataError("score bounds are defined for the positional kinds");
    }
    const auto dim = static_cast<std::size_t>(params.dim);
    const auto pos_dim = static_cast<std::size_t>(params.pos_dim);
    const std::int32_t n_pos = params.num_positions();
    const auto inv_p = 1.0 / static_cast<double>(n_pos);
    const auto& vocab = model.vocab;
    const SubwordCache cache(vocab, model.subwords);

    const auto clustering =
        cluster_positional_features(params, std::min<int>(3, params.pos_dim), seed);

    auto rng = make_rng(seed, 0xB071D5u);
    std::uniform_int_distribution<std::int32_t> pick_word(0, vocab.size() - 1);
    std::uniform_int_distribution<std::int32_t> pick_pos(0, n_pos - 1);

    // Padded positional weight for feature j at a position row.
    const auto d_at = [&](std::int32_t row, std::size_t j) {
        return j < pos_dim
                   ? static_cast<double>(params.positional.row(row)[j])
                   : 1.0;
    };

    // max_w ||v_w||_inf for the loose reported bound.
    double v_inf = 0.0;
    for (std::int32_t w = 0; w < vocab.size(); ++w) {
        for (const float x : params.output.row(w)) {
            v_inf = std::max(v_inf, std::abs(static_cast<double>(x)));
        }
    }
    // max_{p1,p2} |d_{p1,j} - d_{p2,j}| per feature, padding included.
    std::vector<double> d_spread(pos_dim, 0.0);
    for (std::size_t j = 0; j < pos_dim; ++j) {
        double lo = std::numeric_limits<double>::infinity();
        double hi = -lo;
        for (std::int32_t row = 0; row < n_pos; ++row) {
            const auto x = static_cast<double>(params.positional.row(row)[j]);
            lo = std::min(lo, x);
            hi = std::max(hi, x);
        }
        d_spread[j] = hi - lo;
    }

    BoundReport report;
    report.trials = n_trials;
    std::vector<std::vector<double>> word_vecs(static_cast<std::size_t>(n_pos));
    std::vector<double> diff_rhs_sums(clustering.curves.size(), 0.0);
    std::vector<double> diff_loose_sums(clustering.curves.size(), 0.0);
    double diff_measured_sum = 0.0;
    // Slack for float->double roundoff; the bounds are exact inequalities
    // in real arithmetic.
    constexpr double kTol = 1e-9;

    for (std::int64_t trial = 0; trial < n_trials; ++trial) {
        // A full window: every position occupied by a random vocab word.
        for (std::int32_t row = 0; row < n_pos; ++row) {
            const std::int32_t w = pick_word(rng);
            auto& vec = word_vecs[static_cast<std::size_t>(row)];
            vec.assign(dim, 0.0);
            for (const std::int32_t r : cache.rows(w)) {
                const auto in_row = params.input.row(r);
                for (std::size_t j = 0; j < dim; ++j) {
                    vec[j] += static_cast<double>(in_row[j]);
                }
            }
        }
        const std::int32_t target = pick_word(rng);
        const auto v = params.output.row(target);
        double v_norm_sq = 0.0;
        for (const float x : v) {
            v_norm_sq += static_cast<double>(x) * static_cast<double>(x);
        }
        const double v_norm = std::sqrt(v_norm_sq);

        double s = 0.0;
        double rhs_norm = 0.0;
        for (std::int32_t row = 0; row < n_pos; ++row) {
            const auto& u = word_vecs[static_cast<std::size_t>(row)];
            double w_norm_sq = 0.0;
            double contrib = 0.0;
            for (std::size_t j = 0; j < dim; ++j) {
                const double x = u[j] * d_at(row, j);
                w_norm_sq += x * x;
                contrib += x * static_cast<double>(v[j]);
            }
            s += contrib;
            rhs_norm += std::sqrt(w_norm_sq) * v_norm;
        }
        s *= inv_p;
        rhs_norm *= inv_p;
        if (std::abs(s) > rhs_norm + kTol) {
            ++report.norm_bound_violations;
        }

        // Cluster split: for every cluster J and position p, the score
        // decomposes as the J-at-p terms plus everything else.
        for (std::int32_t row = 0; row < n_pos; ++row) {
            const auto& u = word_vecs[static_cast<std::size_t>(row)];
            for (std::size_t c = 0; c < clustering.curves.size(); ++c) {
                double abs_sum = 0.0;
                double signed_sum = 0.0;
                for (std::size_t j = 0; j < pos_dim; ++j) {
                    if (clustering.assignment[j] != static_cast<std::int32_t>(c)) {
                        continue;
                    }
                    const double term =
                        u[j] * d_at(row, j) * static_cast<double>(v[j]);
                    abs_sum += std::abs(term);
                    signed_sum += term;
                }
                const double rest = std::abs(s / inv_p - signed_sum);
                if (std::abs(s) > inv_p * (abs_sum + rest) + kTol) {
                    ++report.cluster_bound_violations;
                }
            }
        }

        // Expected-difference bound: swap the words at two positions.
        std::int32_t p1 = pick_pos(rng);
        std::int32_t p2 = pick_pos(rng);
        while (p2 == p1) {
            p2 = pick_pos(rng);
        }
        const auto& u1 = word_vecs[static_cast<std::size_t>(p1)];
        const auto& u2 = word_vecs[static_cast<std::size_t>(p2)];
        double delta = 0.0;
        for (std::size_t j = 0; j < dim; ++j) {
            const double before = u1[j] * d_at(p1, j) + u2[j] * d_at(p2, j);
            const double after = u1[j] * d_at(p2, j) + u2[j] * d_at(p1, j);
            delta += (before - after) * static_cast<double>(v[j]);
        }
        delta *= inv_p;
        diff_measured_sum += std::abs(delta);
        for (std::size_t c = 0; c < diff_rhs_sums.size(); ++c) {
            double abs_sum = 0.0;
            double signed_sum = 0.0;
            double loose_sum = 0.0;
            for (std::size_t j = 0; j < pos_dim; ++j) {
                if (clustering.assignment[j] != static_cast<std::int32_t>(c)) {
                    continue;
                }
                const double term = u1[j] * (d_at(p1, j) - d_at(p2, j)) *
                                    static_cast<double>(v[j]);
                abs_sum += std::abs(term);
                signed_sum += term;
                loose_sum += std::abs(u1[j]) * d_spread[j];
            }
            const double rest = std::abs(delta / inv_p - signed_sum);
            diff_rhs_sums[c] += inv_p * (abs_sum + rest);
            diff_loose_sums[c] += inv_p * loose_sum * v_inf * static_cast<double>(dim);
        }
    }

    report.diff_measured_mean = diff_measured_sum / static_cast<double>(n_trials);
    double min_rhs = std::numeric_limits<double>::infinity();
    for (const double sum : diff_rhs_sums) {
        min_rhs = std::min(min_rhs, sum / static_cast<double>(n_trials));
    }
    report.diff_rhs_mean = min_rhs;
    report.diff_bound_holds = report.diff_measured_mean <= report.diff_rhs_mean + kTol;

    report.diff_loose_bound.assign(clustering.curves.size(), 0.0);
    for (std::size_t c = 0; c < clustering.curves.size(); ++c) {
        report.diff_loose_bound[c] =
            diff_loose_sums[c] / static_cast<double>(n_trials);
    }
    return report;
}

}  // namespace pine
