/**
 * @file
 * @copyright Apache License v.2 (http://www.apache.org/licenses/LICENSE-2.0)
*/
#include "pine/trainer.h"

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <thread>

#include "pine/rng.h"

namespace pine {

namespace {

constexpr int kNegativeRedraws = 32;
constexpr std::uint64_t kWorkerStream = 0x7A000000;

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
        .count();
}

}  // namespace

void TrainConfig::validate() const {
    if (dim < 1 || resolved_window() < 1 || epochs < 1 || negatives < 1 ||
        min_count < 1 || buckets < 1 || minn < 1 || maxn < minn || threads < 1) {
        throw DataError("train config fields must be positive (and maxn >= minn)");
    }
    if (lr0 <= 0.0 || sample <= 0.0) {
        throw DataError("lr0 and sample threshold must be positive");
    }
    if (kind == ModelKind::kConstrained && (pos_dim < 1 || pos_dim >= dim)) {
        throw DataError("constrained model requires 0 < D' < D");
    }
}

NegativeTable NegativeTable::build(const Vocab& vocab) {
    if (vocab.size() == 0) {
        throw DataError("cannot build a negative table from an empty vocabulary");
    }
    NegativeTable table;
    table.cumulative_.reserve(vocab.size());
    double acc = 0.0;
    for (const auto& entry : vocab.entries()) {
        acc += std::pow(static_cast<double>(entry.count), 0.75);
        table.cumulative_.push_back(acc);
    }
    return table;
}

std::int32_t NegativeTable::sample(std::mt19937_64& rng) const {
    std::uniform_real_distribution<double> dist(0.0, cumulative_.back());
    const auto it =
        std::upper_bound(cumulative_.begin(), cumulative_.end(), dist(rng));
    const auto idx = std::distance(cumulative_.begin(), it);
    return static_cast<std::int32_t>(
        std::min<std::ptrdiff_t>(idx, cumulative_.size() - 1));
}

double NegativeTable::prob(std::int32_t id) const {
    const double lo = id > 0 ? cumulative_[id - 1] : 0.0;
    return (cumulative_[id] - lo) / cumulative_.back();
}

double TrainingLog::mean_loss(std::size_t first_bin, std::size_t last_bin) const {
    double sum = 0.0;
    std::int64_t steps = 0;
    for (std::size_t b = first_bin; b <= last_bin && b < loss_per_percent.size(); ++b) {
        sum += loss_per_percent[b] * static_cast<double>(steps_per_percent[b]);
        steps += steps_per_percent[b];
    }
    return steps > 0 ? sum / static_cast<double>(steps) : 0.0;
}

namespace {

struct WorkerBins {
    std::array<double, 100> sum{};
    std::array<std::int64_t, 100> count{};
};

class Worker {
 public:
    Worker(const TrainConfig& cfg, const Vocab& vocab, const SubwordCache& cache,
           const NegativeTable& negatives, ModelParams& params,
           std::atomic<std::int64_t>& progress, std::int64_t total_tokens,
           std::mutex* positional_lock)
        : cfg_(cfg),
          vocab_(vocab),
          cache_(cache),
          negatives_(negatives),
          params_(params),
          progress_(progress),
          total_tokens_(total_tokens),
          positional_lock_(positional_lock),
          window_(cfg.resolved_window()),
          mode_(cfg.resolved_window_mode()) {
        discard_.reserve(vocab.size());
        for (const auto& entry : vocab.entries()) {
            discard_.push_back(discard_prob(entry.freq, cfg.sample));
        }
    }

    void run(const std::string& path, std::int64_t lo, std::int64_t hi,
             std::uint64_t stream, WorkerBins& bins) {
        auto rng = make_rng(cfg_.seed, kWorkerStream + stream);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        std::uniform_int_distribution<std::int32_t> shrink(1, window_);

        std::ifstream in(path, std::ios::binary);
        if (!in) {
            throw DataError("cannot open corpus file: " + path);
        }
        // Starting one byte early makes a shard boundary that falls exactly
        // on a line start belong to this shard, not the previous one.
        const std::int64_t start = lo > 0 ? lo - 1 : 0;
        in.seekg(start);
        TokenSequenceReader reader(in);
        if (lo > 0) {
            reader.skip_to_next_line();
        }

        TrainScratch<float> scratch;
        std::vector<std::string> tokens;
        std::vector<std::int32_t> ids;
        std::vector<ResolvedEntry> entries;
        std::vector<std::int32_t> negs;
        while (start + reader.offset() < hi) {
            if (!reader.next_sequence(tokens)) {
                break;
            }
            const auto raw = static_cast<std::int64_t>(tokens.size());
            const std::int64_t done =
                std::min(progress_.load(std::memory_order_relaxed), total_tokens_);
            const auto lr = static_cast<float>(lr_at(done, total_tokens_, cfg_.lr0));
            const auto bin = static_cast<std::size_t>(
                std::min<std::int64_t>(99, 100 * done / total_tokens_));

            ids.clear();
            for (const auto& token : tokens) {
                const std::int32_t id = vocab_.id(token);
                if (id < 0) {
                    continue;
                }
                if (discard_[id] > 0.0 && unit(rng) < discard_[id]) {
                    continue;
                }
                ids.push_back(id);
            }
            const auto len = static_cast<std::int64_t>(ids.size());
            for (std::int64_t t = 0; t < len; ++t) {
                const std::int32_t reach =
                    mode_ == WindowMode::kUniformShrink ? shrink(rng) : window_;
                entries.clear();
                for (std::int32_t p = -reach; p <= reach; ++p) {
                    const std::int64_t idx = t + p;
                    if (p == 0 || idx < 0 || idx >= len) {
                        continue;
                    }
                    entries.push_back({p, cache_.rows(ids[idx])});
                }
                if (entries.empty()) {
                    continue;
                }
                const std::int32_t target = ids[t];
                negs.clear();
                for (std::int32_t s = 0; s < cfg_.negatives; ++s) {
                    for (int attempt = 0; attempt < kNegativeRedraws; ++attempt) {
                        const std::int32_t n = negatives_.sample(rng);
                        if (n != target) {
                            negs.push_back(n);
                            break;
                        }
                    }
                }
                const double loss = train_step<float>(params_, entries, target, negs,
                                                      lr, scratch, positional_lock_);
                bins.sum[bin] += loss;
                ++bins.count[bin];
            }
            progress_.fetch_add(raw, std::memory_order_relaxed);
        }
    }

 private:
    const TrainConfig& cfg_;
    const Vocab& vocab_;
    const SubwordCache& cache_;
    const NegativeTable& negatives_;
    ModelParams& params_;
    std::atomic<std::int64_t>& progress_;
    std::int64_t total_tokens_;
    std::mutex* positional_lock_;
    std::int32_t window_;
    WindowMode mode_;
    std::vector<double> discard_;
};

}  // namespace

TrainResult train(const std::string& corpus_path, const TrainConfig& cfg) {
    cfg.validate();
    std::error_code ec;
    const auto file_size =
        static_cast<std::int64_t>(std::filesystem::file_size(corpus_path, ec));
    if (ec) {
        throw DataError("cannot stat corpus file: " + corpus_path);
    }

    const auto vocab_start = std::chrono::steady_clock::now();
    VocabBuilder builder;
    {
        std::ifstream in(corpus_path, std::ios::binary);
        if (!in) {
            throw DataError("cannot open corpus file: " + corpus_path);
        }
        TokenSequenceReader reader(in);
        std::vector<std::string> tokens;
        while (reader.next_sequence(tokens)) {
            for (const auto& token : tokens) {
                builder.add(token);
            }
        }
    }
    Vocab vocab = std::move(builder).finish(cfg.min_count);
    if (vocab.size() == 0) {
        throw DataError("vocabulary is empty after min-count pruning");
    }

    TrainResult result;
    result.model.vocab = std::move(vocab);
    result.model.subwords =
        SubwordIndex{cfg.minn, cfg.maxn, cfg.buckets, /*include_word=*/true};
    result.model.window_mode = cfg.resolved_window_mode();
    result.model.seed = cfg.seed;
    const Vocab& v = result.model.vocab;

    const SubwordCache cache(v, result.model.subwords);
    const NegativeTable negatives = NegativeTable::build(v);
    const ModelDims dims{v.size(), cfg.buckets, cfg.dim,
                         cfg.kind == ModelKind::kConstrained ? cfg.pos_dim : cfg.dim,
                         cfg.resolved_window()};
    result.model.params = init_model(cfg.kind, cfg.init_scheme, dims, cfg.seed);
    result.log.vocab_seconds = seconds_since(vocab_start);

    const std::int64_t total_tokens =
        v.total_tokens() * static_cast<std::int64_t>(cfg.epochs);
    if (total_tokens == 0) {
        throw DataError("corpus contains no tokens");
    }

    std::atomic<std::int64_t> progress{0};
    std::mutex positional_mutex;
    std::mutex* lock_ptr = cfg.positional_lock ? &positional_mutex : nullptr;
    const int n_workers = cfg.threads;
    std::vector<WorkerBins> bins(static_cast<std::size_t>(n_workers));

    const auto train_start = std::chrono::steady_clock::now();
    for (std::int32_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        auto run_one = [&](int w) {
            Worker worker(cfg, v, cache, negatives, result.model.params, progress,
                          total_tokens, lock_ptr);
            const std::int64_t lo = file_size * w / n_workers;
            const std::int64_t hi = file_size * (w + 1) / n_workers;
            worker.run(corpus_path, lo, hi,
                       static_cast<std::uint64_t>(epoch) * 1024 +
                           static_cast<std::uint64_t>(w),
                       bins[static_cast<std::size_t>(w)]);
        };
        if (n_workers == 1) {
            run_one(0);
        } else {
            std::vector<std::thread> threads;
            threads.reserve(static_cast<std::size_t>(n_workers));
            std::exception_ptr failure;
            std::mutex failure_mutex;
            for (int w = 0; w < n_workers; ++w) {
                threads.emplace_back([&, w] {
                    try {
                        run_one(w);
                    } catch (...) {
                        const std::lock_guard<std::mutex> hold(failure_mutex);
                        if (!failure) {
                            failure = std::current_exception();
                        }
                    }
                });
            }
            for (auto& t : threads) {
                t.join();
            }
            if (failure) {
                std::rethrow_exception(failure);
            }
        }
    }
    result.log.train_seconds = seconds_since(train_start);

    result.log.loss_per_percent.assign(100, 0.0);
    result.log.steps_per_percent.assign(100, 0);
    for (const auto& b : bins) {
        for (std::size_t i = 0; i < 100; ++i) {
            result.log.loss_per_percent[i] += b.sum[i];
            result.log.steps_per_percent[i] += b.count[i];
        }
    }
    for (std::size_t i = 0; i < 100; ++i) {
        if (result.log.steps_per_percent[i] > 0) {
            result.log.loss_per_percent[i] /=
                static_cast<double>(result.log.steps_per_percent[i]);
        }
    }
    result.log.raw_tokens = v.total_tokens();
    result.log.trained_steps = 0;
    for (const auto s : result.log.steps_per_percent) {
        result.log.trained_steps += s;
    }
    result.log.threads = cfg.threads;
    return result;
}

}  // namespace pine
