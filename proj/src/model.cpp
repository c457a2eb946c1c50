/**
 * @file
 * @copyright Apache License v.2 (http://www.apache.org/licenses/LICENSE-2.0)
*/
#include "pine/model.h"

namespace pine {

const char* to_string(ModelKind kind) {
    switch (kind) {
        case ModelKind::kSubword:
            return "subword";
        case ModelKind::kPositional:
            return "positional";
        case ModelKind::kConstrained:
            return "constrained";
    }
    return "unknown";
}

const char* to_string(WindowMode mode) {
    return mode == WindowMode::kFixed ? "fixed" : "uniform_shrink";
}

ModelKind model_kind_from_string(const std::string& name) {
    if (name == "subword") {
        return ModelKind::kSubword;
    }
    if (name == "positional") {
        return ModelKind::kPositional;
    }
    if (name == "constrained") {
        return ModelKind::kConstrained;
    }
    throw DataError("unknown model kind: " + name);
}

WindowMode window_mode_from_string(const std::string& name) {
    if (name == "fixed") {
        return WindowMode::kFixed;
    }
    if (name == "uniform_shrink" || name == "uniform-shrink") {
        return WindowMode::kUniformShrink;
    }
    throw DataError("unknown window mode: " + name);
}

template <typename T>
void ModelParamsT<T>::validate() const {
    if (dim <= 0 || window <= 0) {
        throw DataError("model dimensions must be positive");
    }
    switch (kind) {
        case ModelKind::kSubword:
            if (pos_dim != 0 || positional.rows() != 0) {
                throw DataError("subword model must not carry positional vectors");
            }
            break;
        case ModelKind::kPositional:
            if (pos_dim != dim) {
                throw DataError("positional model requires D' == D");
            }
            break;
        case ModelKind::kConstrained:
            if (pos_dim <= 0 || pos_dim >= dim) {
                throw DataError("constrained model requires 0 < D' < D");
            }
            break;
    }
    if (has_positions()) {
        if (positional.rows() != num_positions() || positional.cols() != pos_dim) {
            throw DataError("positional matrix shape does not match 2c x D'");
        }
    }
    if (input.cols() != dim || output.cols() != dim) {
        throw DataError("matrix width does not match D");
    }
}

template struct ModelParamsT<float>;
template struct ModelParamsT<double>;

}  // namespace pine
