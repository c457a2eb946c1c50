/**
 * @file
 * @copyright Apache License v.2 (http://www.apache.org/licenses/LICENSE-2.0)
*/
#include "pine/init.h"

#include <cmath>
#include <thread>
#include <vector>

#include "pine/error.h"
#include "pine/rng.h"

namespace pine {

namespace {

constexpr std::uint64_t kInputStream = 0x1000000;
constexpr std::uint64_t kPositionalStream = 0x2000000;

inline double uniform_signed(std::mt19937_64& rng, double scale) {
    std::uniform_real_distribution<double> dist(-scale, scale);
    return dist(rng);
}

}  // namespace

const char* to_string(InitScheme scheme) {
    switch (scheme) {
        case InitScheme::kUniformInputsOnesPositions:
            return "uniform-ones";
        case InitScheme::kUniformBoth:
            return "uniform-both";
        case InitScheme::kSqrtNormal:
            return "sqrt-normal";
    }
    return "unknown";
}

InitScheme init_scheme_from_string(const std::string& name) {
    if (name == "uniform-ones" || name == "uniform_inputs_ones_positions") {
        return InitScheme::kUniformInputsOnesPositions;
    }
    if (name == "uniform-both" || name == "uniform_both") {
        return InitScheme::kUniformBoth;
    }
    if (name == "sqrt-normal" || name == "sqrt_normal") {
        return InitScheme::kSqrtNormal;
    }
    throw DataError("unknown init scheme: " + name);
}

MatrixF init_uniform(std::int64_t rows, std::int32_t dim, std::uint64_t seed) {
    if (rows < 1 || dim < 1) {
        throw DataError("init_uniform requires positive dimensions");
    }
    MatrixF m(rows, dim);
    const double scale = 1.0 / static_cast<double>(dim);
    for (std::int64_t i = 0; i < rows; ++i) {
        auto rng = make_rng(seed, kInputStream + static_cast<std::uint64_t>(i));
        auto row = m.row(i);
        for (auto& v : row) {
            v = static_cast<float>(uniform_signed(rng, scale));
        }
    }
    return m;
}

SqrtNormalSampler::SqrtNormalSampler(double mu, double sigma2, int k)
    : sqrt_sigma_(std::sqrt(std::sqrt(sigma2))),
      sqrt_mu_(std::sqrt(mu)),
      k_(k),
      log_const_(0.0),
      gamma_(0.5, 1.0) {
    if (sigma2 <= 0.0 || mu < 0.0 || k < 0) {
        throw DataError("sample_sqrt_normal requires sigma2 > 0, mu >= 0, k >= 0");
    }
    for (int n = 0; n <= k_; ++n) {
        log_const_ += 0.25 * std::log1p(1.0 / std::max(1, n));
    }
}

double SqrtNormalSampler::operator()(std::mt19937_64& rng) {
    double log_sum = log_const_;
    for (int n = 0; n <= k_; ++n) {
        log_sum -= gamma_(rng) / static_cast<double>(2 * n + 1);
    }
    const double sign = (rng() & 1u) ? 1.0 : -1.0;
    return sign * std::exp(log_sum) * sqrt_sigma_ + sqrt_mu_;
}

double sample_sqrt_normal(double mu, double sigma2, int k, std::uint64_t seed) {
    SqrtNormalSampler sampler(mu, sigma2, k);
    auto rng = make_rng(seed);
    return sampler(rng);
}

ModelParams init_model(ModelKind kind, InitScheme scheme, const ModelDims& dims,
                       std::uint64_t seed, int k) {
    if (dims.vocab_size < 1 || dims.buckets < 1 || dims.dim < 1 || dims.window < 1) {
        throw DataError("init_model requires positive dimensions");
    }
    ModelParams params;
    params.kind = kind;
    params.dim = dims.dim;
    params.window = dims.window;
    params.pos_dim = kind == ModelKind::kSubword
                         ? 0
                         : (kind == ModelKind::kPositional ? dims.dim : dims.pos_dim);
    const std::int64_t input_rows =
        static_cast<std::int64_t>(dims.vocab_size) + dims.buckets;
    const double scale = 1.0 / static_cast<double>(dims.dim);
    const double sigma2 = scale * scale / 3.0;  // Var of U(-1/D, 1/D)

    params.output = MatrixF(dims.vocab_size, dims.dim);
    params.output.zero();

    if (kind == ModelKind::kSubword) {
        params.input = init_uniform(input_rows, dims.dim, seed);
        params.validate();
        return params;
    }

    params.input = MatrixF(input_rows, dims.dim);
    params.positional = MatrixF(params.num_positions(), params.pos_dim);
    const std::int32_t sqrt_cols =
        scheme == InitScheme::kSqrtNormal ? params.pos_dim : 0;
    SqrtNormalSampler sampler(0.0, sigma2, k);
    for (std::int64_t i = 0; i < input_rows; ++i) {
        auto rng = make_rng(seed, kInputStream + static_cast<std::uint64_t>(i));
        auto row = params.input.row(i);
        for (std::int32_t j = 0; j < params.dim; ++j) {
            row[j] = static_cast<float>(j < sqrt_cols ? sampler(rng)
                                                      : uniform_signed(rng, scale));
        }
    }
    for (std::int64_t p = 0; p < params.positional.rows(); ++p) {
        auto rng = make_rng(seed, kPositionalStream + static_cast<std::uint64_t>(p));
        auto row = params.positional.row(p);
        for (auto& v : row) {
            switch (scheme) {
                case InitScheme::kUniformInputsOnesPositions:
                    v = 1.0f;
                    break;
                case InitScheme::kUniformBoth:
                    v = static_cast<float>(uniform_signed(rng, scale));
                    break;
                case InitScheme::kSqrtNormal:
                    v = static_cast<float>(sampler(rng));
                    break;
            }
        }
    }
    params.validate();
    return params;
}

MomentReport estimate_product_moments(InitScheme scheme, std::int32_t dim, int k,
                                      std::int64_t n_samples, std::uint64_t seed,
                                      int threads) {
    if (dim < 1 || n_samples < 1) {
        throw DataError("estimate_product_moments requires dim >= 1, n_samples >= 1");
    }
    const double scale = 1.0 / static_cast<double>(dim);
    const double sigma2 = scale * scale / 3.0;

    constexpr std::int64_t kChunk = 1 << 20;
    const std::int64_t n_chunks = (n_samples + kChunk - 1) / kChunk;
    std::vector<double> sums(n_chunks, 0.0);
    std::vector<double> sumsqs(n_chunks, 0.0);

    const auto run_chunk = [&](std::int64_t chunk) {
        const std::int64_t lo = chunk * kChunk;
        const std::int64_t hi = std::min(n_samples, lo + kChunk);
        auto rng = make_rng(seed, static_cast<std::uint64_t>(chunk));
        SqrtNormalSampler sampler(0.0, sigma2, k);
        double sum = 0.0;
        double sumsq = 0.0;
        for (std::int64_t i = lo; i < hi; ++i) {
            double u;
            double d;
            switch (scheme) {
                case InitScheme::kUniformInputsOnesPositions:
                    u = uniform_signed(rng, scale);
                    d = 1.0;
                    break;
                case InitScheme::kUniformBoth:
                    u = uniform_signed(rng, scale);
                    d = uniform_signed(rng, scale);
                    break;
                case InitScheme::kSqrtNormal:
                default:
                    u = sampler(rng);
                    d = sampler(rng);
                    break;
            }
            const double x = u * d;
            sum += x;
            sumsq += x * x;
        }
        sums[chunk] = sum;
        sumsqs[chunk] = sumsq;
    };

    int n_threads = threads > 0 ? threads
                                : static_cast<int>(std::thread::hardware_concurrency());
    n_threads = std::max(1, std::min<int>(n_threads, static_cast<int>(n_chunks)));
    if (n_threads == 1) {
        for (std::int64_t c = 0; c < n_chunks; ++c) {
            run_chunk(c);
        }
    } else {
        std::vector<std::thread> workers;
        workers.reserve(n_threads);
        for (int t = 0; t < n_threads; ++t) {
            workers.emplace_back([&, t] {
                for (std::int64_t c = t; c < n_chunks; c += n_threads) {
                    run_chunk(c);
                }
            });
        }
        for (auto& w : workers) {
            w.join();
        }
    }

    double sum = 0.0;
    double sumsq = 0.0;
    for (std::int64_t c = 0; c < n_chunks; ++c) {
        sum += sums[c];
        sumsq += sumsqs[c];
    }
    MomentReport report;
    report.samples = n_samples;
    report.mean = sum / static_cast<double>(n_samples);
    const double n = static_cast<double>(n_samples);
    report.variance =
        n > 1 ? (sumsq - n * report.mean * report.mean) / (n - 1) : 0.0;
    report.mean_stderr = std::sqrt(report.variance / n);
    report.variance_ratio = report.variance / sigma2;
    return report;
}

}  // namespace pine
