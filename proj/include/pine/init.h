/**
 * @file
 * @brief Weight initialization schemes, including the truncated
 *        square-root normal sampler.
 *
 * Three schemes are supported for the positional kinds:
 *   - kUniformInputsOnesPositions: uniform inputs, d_p = 1. Documented
 *     failure mode: the gradient explodes for large D soon after training
 *     starts.
 *   - kUniformBoth: inputs and d_p both uniform. Shrinks the context
 *     vector variance to 1/(9 D^4) and with it the effective learning
 *     rate.
 *   - kSqrtNormal (default): inputs and d_p drawn from N^0.5(0, 1/(3 D^2)),
 *     whose pairwise products reproduce the subword model's context
 *     vector distribution.
 *
 * @copyright Apache License v.2 (http://www.apache.org/licenses/LICENSE-2.0)
*/
#pragma once

#include <cstdint>
#include <random>
#include <string>

#include "pine/matrix.h"
#include "pine/model.h"

namespace pine {

enum class InitScheme : std::uint8_t {
    kUniformInputsOnesPositions = 0,  // Appendix option 1
    kUniformBoth = 1,                 // Appendix option 2
    kSqrtNormal = 2,                  // Appendix option 3, default
};

const char* to_string(InitScheme scheme);
InitScheme init_scheme_from_string(const std::string& name);

inline constexpr int kDefaultSqrtNormalDepth = 9;  // truncation k

// rows x dim matrix with i.i.d. U(-1/dim, +1/dim) entries. Rows are
// seeded independently, so the result is identical however the fill is
// parallelized.
MatrixF init_uniform(std::int64_t rows, std::int32_t dim, std::uint64_t seed);

// One draw of the truncated square-root normal N^0.5(mu, sigma2):
//   eps * exp(sum_{n=0}^{k} a_n) * sqrt(sigma) + sqrt(mu),
//   a_n = ln(1 + 1/max(1, n))/4 - G_n/(2n + 1),
// with G_n i.i.d. Gamma(1/2, 1) and eps an independent Rademacher sign.
class SqrtNormalSampler {
 public:
    SqrtNormalSampler(double mu, double sigma2, int k);
    double operator()(std::mt19937_64& rng);

 private:
    double sqrt_sigma_;
    double sqrt_mu_;
    int k_;
    double log_const_;  // sum of the deterministic ln terms
    std::gamma_distribution<double> gamma_;
};

double sample_sqrt_normal(double mu, double sigma2, int k, std::uint64_t seed);

struct ModelDims {
    std::int32_t vocab_size = 0;
    std::int32_t buckets = 0;
    std::int32_t dim = 0;
    std::int32_t pos_dim = 0;  // ignored for the subword kind
    std::int32_t window = 0;
};

// Builds the parameter matrices for a model kind. Output vectors are
// always zero. The subword kind always uses uniform inputs; the
// positional kinds follow the scheme (the constrained kind keeps uniform
// input features beyond D' under kSqrtNormal).
ModelParams init_model(ModelKind kind, InitScheme scheme, const ModelDims& dims,
                       std::uint64_t seed, int k = kDefaultSqrtNormalDepth);

struct MomentReport {
    double mean = 0.0;
    double mean_stderr = 0.0;
    double variance = 0.0;
    double variance_ratio = 0.0;  // variance / (1 / (3 D^2))
    std::int64_t samples = 0;
};

// Monte-Carlo moments of the product u * d for independent u, d drawn per
// scheme at width D. Deterministic for a fixed seed regardless of the
// number of worker threads.
MomentReport estimate_product_moments(InitScheme scheme, std::int32_t dim, int k,
                                      std::int64_t n_samples, std::uint64_t seed,
                                      int threads = 0);

}  // namespace pine
