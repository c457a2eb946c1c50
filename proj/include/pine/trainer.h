/**
 * @file
 * @brief Negative-sampling SGD with linear learning-rate decay and
 *        lock-free parallel updates.
 *
 * Worker threads train on disjoint byte shards of the corpus and share
 * the parameter matrices without synchronization; lost updates are
 * tolerated. The only synchronized datum is the progress counter driving
 * the learning-rate schedule, which counts raw corpus tokens
 * (pre-subsampling) so the schedule is corpus-length-deterministic.
 * Updates of the dense positional vectors can optionally be serialized
 * (positional_lock), since they are written on almost every step.
 *
 * @copyright Apache License v.2 (http://www.apache.org/licenses/LICENSE-2.0)
*/
#pragma once

#include <cmath>
#include <cstdint>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pine/bundle.h"
#include "pine/error.h"
#include "pine/init.h"
#include "pine/model.h"

namespace pine {

struct TrainConfig {
    ModelKind kind = ModelKind::kSubword;
    std::int32_t window = 0;    // c; 0 = kind default (5 subword, 15 positional)
    std::int32_t dim = 300;     // D
    std::int32_t pos_dim = 60;  // D', constrained kind only
    std::int32_t epochs = 1;
    double lr0 = 0.05;
    std::int32_t negatives = 10;
    std::int32_t min_count = 5;
    double sample = 1e-5;  // low-pass threshold r
    std::int32_t buckets = 2'000'000;
    std::int32_t minn = 3;
    std::int32_t maxn = 6;
    std::int32_t threads = 1;
    std::uint64_t seed = 1;
    std::optional<WindowMode> window_mode;  // unset = kind default
    InitScheme init_scheme = InitScheme::kSqrtNormal;
    bool positional_lock = false;

    std::int32_t resolved_window() const {
        if (window > 0) {
            return window;
        }
        return kind == ModelKind::kSubword ? 5 : 15;
    }
    WindowMode resolved_window_mode() const {
        return window_mode.value_or(default_window_mode(kind));
    }
    void validate() const;
};

// Unigram sampling table with probability proportional to count^0.75.
class NegativeTable {
 public:
    static NegativeTable build(const Vocab& vocab);

    std::int32_t sample(std::mt19937_64& rng) const;
    double prob(std::int32_t id) const;
    std::int32_t size() const { return static_cast<std::int32_t>(cumulative_.size()); }

 private:
    std::vector<double> cumulative_;
};

// Linear decay from lr0 at t = 0 to zero at t = total.
inline double lr_at(std::int64_t t, std::int64_t total, double lr0) {
    return lr0 * (1.0 - static_cast<double>(t) / static_cast<double>(total));
}

template <typename T>
struct TrainScratch {
    std::vector<T> ctx;
    std::vector<T> grad;
    std::vector<T> update;
    std::vector<T> word_sums;  // per-entry input sums, positional kinds only
};

// One SGD update of -log Pr(target | context). All gradient reads use
// pre-update values, so with lr = 1 the parameter delta equals the exact
// gradient; with lr = 0 the call is a pure forward pass. Returns the
// pre-update loss. Throws NumericError on a non-finite loss or gradient.
template <typename T>
double train_step(ModelParamsT<T>& params, std::span<const ResolvedEntry> entries,
                  std::int32_t target, std::span<const std::int32_t> negatives,
                  T lr, TrainScratch<T>& scratch,
                  std::mutex* positional_lock = nullptr) {
    if (entries.empty()) {
        throw DataError("empty context window");
    }
    const auto dim = static_cast<std::size_t>(params.dim);
    const auto pos_dim = static_cast<std::size_t>(params.pos_dim);
    const std::size_t n = entries.size();
    scratch.ctx.assign(dim, T{0});
    auto* ctx = scratch.ctx.data();

    if (!params.has_positions()) {
        for (const auto& e : entries) {
            for (const std::int32_t r : e.rows) {
                const auto row = params.input.row(r);
                for (std::size_t j = 0; j < dim; ++j) {
                    ctx[j] += row[j];
                }
            }
        }
    } else {
        scratch.word_sums.assign(n * dim, T{0});
        for (std::size_t i = 0; i < n; ++i) {
            T* ws = scratch.word_sums.data() + i * dim;
            for (const std::int32_t r : entries[i].rows) {
                const auto row = params.input.row(r);
                for (std::size_t j = 0; j < dim; ++j) {
                    ws[j] += row[j];
                }
            }
            const auto d = params.positional.row(params.position_row(entries[i].position));
            for (std::size_t j = 0; j < pos_dim; ++j) {
                ctx[j] += ws[j] * d[j];
            }
            for (std::size_t j = pos_dim; j < dim; ++j) {
                ctx[j] += ws[j];
            }
        }
    }
    const T alpha = T{1} / static_cast<T>(n);
    for (std::size_t j = 0; j < dim; ++j) {
        ctx[j] *= alpha;
    }

    // Output vectors: accumulate the context gradient with pre-update
    // rows while updating them in place.
    scratch.grad.assign(dim, T{0});
    auto* grad = scratch.grad.data();
    double loss = 0.0;
    const auto process = [&](std::int32_t word, bool is_target) {
        auto v = params.output.row(word);
        T s{0};
        for (std::size_t j = 0; j < dim; ++j) {
            s += ctx[j] * v[j];
        }
        const double sig = sigmoid(static_cast<double>(s));
        loss -= std::log(is_target ? sig : 1.0 - sig);
        const T g = static_cast<T>(sig - (is_target ? 1.0 : 0.0));
        const T gl = g * lr;
        for (std::size_t j = 0; j < dim; ++j) {
            grad[j] += g * v[j];
            v[j] -= gl * ctx[j];
        }
    };
    process(target, true);
    for (const std::int32_t neg : negatives) {
        process(neg, false);
    }
    if (!std::isfinite(loss)) {
        throw NumericError("non-finite loss; parameters diverged");
    }
    for (std::size_t j = 0; j < dim; ++j) {
        if (!std::isfinite(static_cast<double>(grad[j]))) {
            throw NumericError("non-finite context gradient; parameters diverged");
        }
    }

    // Input and positional vectors.
    const T scale = lr * alpha;
    scratch.update.assign(dim, T{0});
    auto* update = scratch.update.data();
    if (!params.has_positions()) {
        for (std::size_t j = 0; j < dim; ++j) {
            update[j] = scale * grad[j];
        }
        for (const auto& e : entries) {
            for (const std::int32_t r : e.rows) {
                const auto row = params.input.row(r);
                for (std::size_t j = 0; j < dim; ++j) {
                    row[j] -= update[j];
                }
            }
        }
    } else {
        for (std::size_t j = pos_dim; j < dim; ++j) {
            update[j] = scale * grad[j];  // pass-through features, shared
        }
        for (std::size_t i = 0; i < n; ++i) {
            const T* ws = scratch.word_sums.data() + i * dim;
            const auto d = params.positional.row(params.position_row(entries[i].position));
            for (std::size_t j = 0; j < pos_dim; ++j) {
                update[j] = scale * grad[j] * d[j];
            }
            for (const std::int32_t r : entries[i].rows) {
                const auto row = params.input.row(r);
                for (std::size_t j = 0; j < dim; ++j) {
                    row[j] -= update[j];
                }
            }
            if (positional_lock != nullptr) {
                const std::lock_guard<std::mutex> hold(*positional_lock);
                for (std::size_t j = 0; j < pos_dim; ++j) {
                    d[j] -= scale * grad[j] * ws[j];
                }
            } else {
                for (std::size_t j = 0; j < pos_dim; ++j) {
                    d[j] -= scale * grad[j] * ws[j];
                }
            }
        }
    }
    return loss;
}

struct TrainingLog {
    std::vector<double> loss_per_percent;       // mean pre-update loss per 1% bin
    std::vector<std::int64_t> steps_per_percent;
    double vocab_seconds = 0.0;
    double train_seconds = 0.0;
    std::int64_t raw_tokens = 0;    // per epoch
    std::int64_t trained_steps = 0;
    std::int32_t threads = 1;

    double mean_loss(std::size_t first_bin, std::size_t last_bin) const;
};

struct TrainResult {
    ModelBundle model;
    TrainingLog log;
};

// Trains a model of cfg.kind over the corpus file. Deterministic
// (bit-identical parameters) for threads = 1 and a fixed seed.
TrainResult train(const std::string& corpus_path, const TrainConfig& cfg);

}  // namespace pine
