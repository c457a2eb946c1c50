/**
 * @file
 * @brief Finite-difference gradient oracle for train_step, double width.
 * @copyright Apache License v.2 (http://www.apache.org/licenses/LICENSE-2.0)
*/
#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <vector>

#include "pine/rng.h"
#include "pine/trainer.h"

namespace testutil {

struct GradCheckConfig {
    std::int32_t vocab = 20;
    std::int32_t buckets = 50;
    std::int32_t dim = 8;
    std::int32_t pos_dim = 3;  // used by the constrained kind
    std::int32_t window = 2;
    std::int32_t negatives = 3;
    double fd_step = 1e-5;
};

// Builds a random tiny model of the given kind, draws one window with a
// deliberately shared input row, and compares the analytic gradient of
// -log Pr (recovered from a train_step with lr = 1) against central
// finite differences of the loss (train_step with lr = 0 is a pure
// forward pass). Returns the maximum relative error over every touched
// coordinate.
inline double gradient_check(pine::ModelKind kind, std::uint64_t seed,
                             const GradCheckConfig& cfg = {}) {
    using pine::ModelKind;
    using pine::ModelParamsT;
    using pine::ResolvedEntry;

    ModelParamsT<double> params;
    params.kind = kind;
    params.dim = cfg.dim;
    params.pos_dim = kind == ModelKind::kSubword
                         ? 0
                         : (kind == ModelKind::kPositional ? cfg.dim : cfg.pos_dim);
    params.window = cfg.window;
    params.input = pine::Matrix<double>(cfg.vocab + cfg.buckets, cfg.dim);
    params.output = pine::Matrix<double>(cfg.vocab, cfg.dim);
    if (kind != ModelKind::kSubword) {
        params.positional = pine::Matrix<double>(2 * cfg.window, params.pos_dim);
    }
    auto rng = pine::make_rng(seed);
    std::uniform_real_distribution<double> u(-0.5, 0.5);
    for (auto* m : {&params.input, &params.output, &params.positional}) {
        for (std::size_t i = 0; i < m->size(); ++i) {
            m->data()[i] = u(rng);
        }
    }

    // A window over every position; one input row is shared between two
    // entries so accumulated gradients are exercised.
    std::uniform_int_distribution<std::int32_t> any_row(0, cfg.vocab + cfg.buckets - 1);
    std::vector<std::vector<std::int32_t>> row_storage;
    for (std::int32_t p = -cfg.window; p <= cfg.window; ++p) {
        if (p == 0) {
            continue;
        }
        std::vector<std::int32_t> rows;
        const int n_rows = 1 + static_cast<int>(rng() % 3);
        for (int i = 0; i < n_rows; ++i) {
            rows.push_back(any_row(rng));
        }
        row_storage.push_back(std::move(rows));
    }
    row_storage.back().push_back(row_storage.front().front());
    std::vector<ResolvedEntry> entries;
    std::size_t slot = 0;
    for (std::int32_t p = -cfg.window; p <= cfg.window; ++p) {
        if (p == 0) {
            continue;
        }
        entries.push_back({p, row_storage[slot++]});
    }

    std::uniform_int_distribution<std::int32_t> any_word(0, cfg.vocab - 1);
    const std::int32_t target = any_word(rng);
    std::set<std::int32_t> neg_set;
    while (static_cast<std::int32_t>(neg_set.size()) < cfg.negatives) {
        const auto n = any_word(rng);
        if (n != target) {
            neg_set.insert(n);
        }
    }
    const std::vector<std::int32_t> negatives(neg_set.begin(), neg_set.end());

    // Analytic gradient: with lr = 1 the parameter delta equals the
    // gradient coordinatewise.
    ModelParamsT<double> stepped = params;
    pine::TrainScratch<double> scratch;
    pine::train_step<double>(stepped, entries, target, negatives, 1.0, scratch);

    // Coordinates touched by this step.
    struct Coord {
        pine::Matrix<double> ModelParamsT<double>::* matrix;
        std::int64_t row;
    };
    std::vector<Coord> rows_to_check;
    rows_to_check.push_back({&ModelParamsT<double>::output, target});
    for (const auto n : negatives) {
        rows_to_check.push_back({&ModelParamsT<double>::output, n});
    }
    std::set<std::int32_t> input_rows;
    for (const auto& e : entries) {
        input_rows.insert(e.rows.begin(), e.rows.end());
    }
    for (const auto r : input_rows) {
        rows_to_check.push_back({&ModelParamsT<double>::input, r});
    }
    if (kind != ModelKind::kSubword) {
        for (const auto& e : entries) {
            rows_to_check.push_back(
                {&ModelParamsT<double>::positional, params.position_row(e.position)});
        }
    }

    const double h = cfg.fd_step;
    double max_rel_err = 0.0;
    for (const auto& coord : rows_to_check) {
        const auto cols = (params.*(coord.matrix)).cols();
        for (std::int64_t j = 0; j < cols; ++j) {
            double& cell = (params.*(coord.matrix)).row(coord.row)[j];
            const double saved = cell;
            const double analytic =
                saved - (stepped.*(coord.matrix)).row(coord.row)[j];

            cell = saved + h;
            const double loss_plus = pine::train_step<double>(
                params, entries, target, negatives, 0.0, scratch);
            cell = saved - h;
            const double loss_minus = pine::train_step<double>(
                params, entries, target, negatives, 0.0, scratch);
            cell = saved;
            const double fd = (loss_plus - loss_minus) / (2.0 * h);

            const double scale =
                std::max({std::abs(analytic), std::abs(fd), 1e-10});
            max_rel_err = std::max(max_rel_err, std::abs(analytic - fd) / scale);
        }
    }
    return max_rel_err;
}

}  // namespace testutil
