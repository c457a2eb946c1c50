/**
 * @file
 * @brief Parameter storage and forward math for the three model kinds.
 *
 * The subword model averages summed subword vectors over the context
 * words. The positional kinds weight each context word's vector by a
 * learned positional vector d_p before averaging; the constrained kind
 * weights only the first D' features and passes the rest through
 * unchanged (d padded with ones).
 *
 * @copyright Apache License v.2 (http://www.apache.org/licenses/LICENSE-2.0)
*/
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "pine/error.h"
#include "pine/matrix.h"

namespace pine {

enum class ModelKind : std::uint8_t {
    kSubword = 0,
    kPositional = 1,
    kConstrained = 2,
};

enum class WindowMode : std::uint8_t {
    kFixed = 0,
    kUniformShrink = 1,
};

const char* to_string(ModelKind kind);
const char* to_string(WindowMode mode);
ModelKind model_kind_from_string(const std::string& name);
WindowMode window_mode_from_string(const std::string& name);

// Default window behaviour per kind: positions are meaningful for the
// positional kinds, so their windows stay fixed; the subword model keeps
// the usual randomly shrunk windows.
inline WindowMode default_window_mode(ModelKind kind) {
    return kind == ModelKind::kSubword ? WindowMode::kUniformShrink
                                       : WindowMode::kFixed;
}

template <typename T>
struct ModelParamsT {
    ModelKind kind = ModelKind::kSubword;
    std::int32_t dim = 0;      // D
    std::int32_t pos_dim = 0;  // D', 0 for the subword kind
    std::int32_t window = 0;   // c
    Matrix<T> input;           // (V + B) x D
    Matrix<T> output;          // V x D
    Matrix<T> positional;      // 2c x D', empty for the subword kind

    bool has_positions() const { return kind != ModelKind::kSubword; }
    std::int32_t num_positions() const { return 2 * window; }

    // Row of d_p for position p in [-c..-1] u [1..c].
    std::int32_t position_row(std::int32_t p) const {
        return p < 0 ? p + window : window + p - 1;
    }
    // Inverse of position_row.
    std::int32_t row_position(std::int32_t row) const {
        return row < window ? row - window : row - window + 1;
    }

    void validate() const;
};

using ModelParams = ModelParamsT<float>;

// One context slot: relative position p != 0 and the input rows of the
// word occupying it.
struct ResolvedEntry {
    std::int32_t position = 0;
    std::span<const std::int32_t> rows;
};

// A training/evaluation window around a masked word.
struct WindowEntry {
    std::int32_t position = 0;
    std::int32_t word = -1;
};
struct ContextWindow {
    std::int32_t target = -1;
    std::vector<WindowEntry> entries;
};

// out = sum of the given input rows. Throws DataError when rows is empty
// (a word with no representation cannot be embedded).
template <typename T>
void word_input_vector(const ModelParamsT<T>& params,
                       std::span<const std::int32_t> rows, std::span<T> out) {
    if (rows.empty()) {
        throw DataError("unrepresentable word: no input rows");
    }
    std::fill(out.begin(), out.end(), T{0});
    for (const std::int32_t r : rows) {
        const auto row = params.input.row(r);
        for (std::size_t j = 0; j < out.size(); ++j) {
            out[j] += row[j];
        }
    }
}

// out = u weighted by d on the first |d| coordinates, identity on the
// rest (d conceptually padded with ones up to |u|).
template <typename T>
void constrained_hadamard(std::span<const T> u, std::span<const T> d,
                          std::span<T> out) {
    if (d.size() > u.size()) {
        throw DataError("positional vector longer than input vector");
    }
    for (std::size_t j = 0; j < d.size(); ++j) {
        out[j] = u[j] * d[j];
    }
    for (std::size_t j = d.size(); j < u.size(); ++j) {
        out[j] = u[j];
    }
}

// Context vector over the present entries; the divisor is the number of
// present entries. For the subword kind the accumulation order is
// canonicalized (rows sorted), so any permutation of the context yields a
// bit-identical result.
template <typename T>
void context_vector(const ModelParamsT<T>& params,
                    std::span<const ResolvedEntry> entries, std::span<T> out) {
    if (entries.empty()) {
        throw DataError("empty context window");
    }
    const auto dim = static_cast<std::size_t>(params.dim);
    std::fill(out.begin(), out.end(), T{0});
    if (!params.has_positions()) {
        std::vector<std::int32_t> rows;
        for (const auto& e : entries) {
            rows.insert(rows.end(), e.rows.begin(), e.rows.end());
        }
        std::sort(rows.begin(), rows.end());
        for (const std::int32_t r : rows) {
            const auto row = params.input.row(r);
            for (std::size_t j = 0; j < dim; ++j) {
                out[j] += row[j];
            }
        }
    } else {
        std::vector<T> word(dim);
        for (const auto& e : entries) {
            word_input_vector(params, e.rows, std::span<T>(word));
            const auto d = params.positional.row(params.position_row(e.position));
            for (std::size_t j = 0; j < d.size(); ++j) {
                out[j] += word[j] * d[j];
            }
            for (std::size_t j = d.size(); j < dim; ++j) {
                out[j] += word[j];
            }
        }
    }
    const T alpha = T{1} / static_cast<T>(entries.size());
    for (std::size_t j = 0; j < dim; ++j) {
        out[j] *= alpha;
    }
}

template <typename T>
T dot(std::span<const T> a, std::span<const T> b) {
    T s{0};
    for (std::size_t j = 0; j < a.size(); ++j) {
        s += a[j] * b[j];
    }
    return s;
}

// s(w, C) with a precomputed context vector.
template <typename T>
T score(const ModelParamsT<T>& params, std::span<const T> context,
        std::int32_t word) {
    return dot(context, std::span<const T>(params.output.row(word)));
}

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Negative-sampling probability: sigma(s(target)) * prod sigma(-s(n)).
template <typename T>
double prediction_prob(const ModelParamsT<T>& params, std::span<const T> context,
                       std::int32_t target, std::span<const std::int32_t> negatives) {
    if (negatives.empty()) {
        throw DataError("prediction_prob requires at least one negative");
    }
    double p = sigmoid(static_cast<double>(score(params, context, target)));
    for (const std::int32_t n : negatives) {
        if (n == target) {
            throw DataError("target must not appear among the negatives");
        }
        p *= sigmoid(-static_cast<double>(score(params, context, n)));
    }
    return p;
}

}  // namespace pine
