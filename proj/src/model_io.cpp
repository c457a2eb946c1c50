/**
 * @file
 * @copyright Apache License v.2 (http://www.apache.org/licenses/LICENSE-2.0)
*/
#include "pine/model_io.h"

#include <unistd.h>

#include <bit>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <memory>
#include <vector>

#include "pine/error.h"

static_assert(std::endian::native == std::endian::little,
              "model files are little-endian; add byte swapping for this target");

namespace pine {

namespace {

constexpr char kMagic[4] = {'P', 'I', 'N', 'E'};

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f != nullptr) {
            std::fclose(f);
        }
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

class Writer {
 public:
    Writer(std::FILE* f, const std::string& path) : f_(f), path_(path) {}

    void bytes(const void* data, std::size_t n) {
        if (std::fwrite(data, 1, n, f_) != n) {
            throw DataError("write failed: " + path_);
        }
    }
    template <typename T>
    void scalar(T value) {
        bytes(&value, sizeof(value));
    }
    void string(const std::string& s) {
        scalar(static_cast<std::uint32_t>(s.size()));
        bytes(s.data(), s.size());
    }

 private:
    std::FILE* f_;
    const std::string& path_;
};

class Reader {
 public:
    Reader(std::FILE* f, const std::string& path, std::int64_t size)
        : f_(f), path_(path), remaining_(size) {}

    std::int64_t remaining() const { return remaining_; }

    void bytes(void* data, std::size_t n) {
        if (static_cast<std::int64_t>(n) > remaining_ ||
            std::fread(data, 1, n, f_) != n) {
            throw DataError("model file truncated: " + path_);
        }
        remaining_ -= static_cast<std::int64_t>(n);
    }
    template <typename T>
    T scalar() {
        T value;
        bytes(&value, sizeof(value));
        return value;
    }
    std::string string(const char* field) {
        const auto len = scalar<std::uint32_t>();
        if (static_cast<std::int64_t>(len) > remaining_) {
            throw DataError(std::string("model file field too long: ") + field);
        }
        std::string s(len, '\0');
        bytes(s.data(), len);
        return s;
    }

 private:
    std::FILE* f_;
    const std::string& path_;
    std::int64_t remaining_;
};

void write_matrix(Writer& w, const MatrixF& m) {
    w.bytes(m.data(), m.size() * sizeof(float));
}

[[noreturn]] void reject(const std::string& field) {
    throw DataError("model file rejected: bad " + field);
}

}  // namespace

void save_model(const ModelBundle& model, const std::string& path) {
    model.params.validate();
    FilePtr file(std::fopen(path.c_str(), "wb"));
    if (!file) {
        throw DataError("cannot open for writing: " + path);
    }
    Writer w(file.get(), path);
    w.bytes(kMagic, sizeof(kMagic));
    w.scalar(kModelFormatVersion);
    w.scalar(static_cast<std::uint8_t>(model.params.kind));
    w.scalar(static_cast<std::uint32_t>(model.params.dim));
    w.scalar(static_cast<std::uint32_t>(model.params.pos_dim));
    w.scalar(static_cast<std::uint32_t>(model.params.window));
    w.scalar(static_cast<std::uint32_t>(model.subwords.minn));
    w.scalar(static_cast<std::uint32_t>(model.subwords.maxn));
    w.scalar(static_cast<std::uint32_t>(model.subwords.buckets));
    w.scalar(static_cast<std::uint8_t>(model.window_mode));
    w.string(model.hash_id);
    w.string(model.unicode_version);
    w.scalar(model.seed);
    w.scalar(static_cast<std::uint64_t>(model.vocab.total_tokens()));
    w.scalar(static_cast<std::uint32_t>(model.vocab.size()));
    for (const auto& entry : model.vocab.entries()) {
        w.string(entry.word);
        w.scalar(static_cast<std::uint64_t>(entry.count));
    }
    write_matrix(w, model.params.input);
    write_matrix(w, model.params.output);
    if (model.params.has_positions()) {
        write_matrix(w, model.params.positional);
    }
    if (std::fflush(file.get()) != 0 || ::fsync(fileno(file.get())) != 0) {
        throw DataError("flush failed: " + path);
    }
}

ModelBundle load_model(const std::string& path) {
    std::error_code ec;
    const auto file_size =
        static_cast<std::int64_t>(std::filesystem::file_size(path, ec));
    if (ec) {
        throw DataError("cannot stat model file: " + path);
    }
    FilePtr file(std::fopen(path.c_str(), "rb"));
    if (!file) {
        throw DataError("cannot open model file: " + path);
    }
    Reader r(file.get(), path, file_size);

    char magic[4];
    r.bytes(magic, sizeof(magic));
    if (std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
        reject("magic");
    }
    if (r.scalar<std::uint32_t>() != kModelFormatVersion) {
        reject("format version");
    }
    const auto kind_byte = r.scalar<std::uint8_t>();
    if (kind_byte > 2) {
        reject("model kind");
    }
    ModelBundle model;
    model.params.kind = static_cast<ModelKind>(kind_byte);
    const auto dim = r.scalar<std::uint32_t>();
    const auto pos_dim = r.scalar<std::uint32_t>();
    const auto window = r.scalar<std::uint32_t>();
    const auto minn = r.scalar<std::uint32_t>();
    const auto maxn = r.scalar<std::uint32_t>();
    const auto buckets = r.scalar<std::uint32_t>();
    // Generous sanity caps keep the size arithmetic below in range.
    if (dim < 1 || dim > (1u << 20) || window < 1 || window > (1u << 20)) {
        reject("dimensions");
    }
    if (minn < 1 || maxn < minn || buckets < 1 || buckets > (1u << 31) - 1) {
        reject("subword parameters");
    }
    const auto mode_byte = r.scalar<std::uint8_t>();
    if (mode_byte > 1) {
        reject("window mode");
    }
    model.window_mode = static_cast<WindowMode>(mode_byte);
    model.hash_id = r.string("hash id");
    model.unicode_version = r.string("unicode version");
    model.seed = r.scalar<std::uint64_t>();
    const auto total_tokens = r.scalar<std::uint64_t>();
    const auto word_count = r.scalar<std::uint32_t>();
    if (word_count > (1u << 31) - 1) {
        reject("vocabulary size");
    }

    std::vector<std::pair<std::string, std::int64_t>> pairs;
    pairs.reserve(word_count);
    for (std::uint32_t i = 0; i < word_count; ++i) {
        auto word = r.string("vocabulary word");
        const auto count = r.scalar<std::uint64_t>();
        pairs.emplace_back(std::move(word), static_cast<std::int64_t>(count));
    }
    model.vocab = Vocab::restore(std::move(pairs),
                                 static_cast<std::int64_t>(total_tokens));
    model.subwords = SubwordIndex{static_cast<int>(minn), static_cast<int>(maxn),
                                  static_cast<std::int32_t>(buckets), true};

    model.params.dim = static_cast<std::int32_t>(dim);
    model.params.pos_dim = static_cast<std::int32_t>(pos_dim);
    model.params.window = static_cast<std::int32_t>(window);
    const std::int64_t input_rows =
        static_cast<std::int64_t>(model.vocab.size()) + buckets;
    const std::int64_t pos_rows =
        model.params.has_positions() ? 2 * static_cast<std::int64_t>(window) : 0;
    const std::int64_t expected_floats =
        (input_rows + model.vocab.size()) * dim + pos_rows * pos_dim;
    if (r.remaining() != expected_floats * static_cast<std::int64_t>(sizeof(float))) {
        reject("matrix sizes (header dimensions do not match file length)");
    }

    model.params.input = MatrixF(input_rows, dim);
    r.bytes(model.params.input.data(), model.params.input.size() * sizeof(float));
    model.params.output = MatrixF(model.vocab.size(), dim);
    r.bytes(model.params.output.data(), model.params.output.size() * sizeof(float));
    if (model.params.has_positions()) {
        model.params.positional = MatrixF(pos_rows, pos_dim);
        r.bytes(model.params.positional.data(),
                model.params.positional.size() * sizeof(float));
    }
    model.params.validate();

    // Spot-check finiteness on a deterministic sample of entries.
    const auto check = [&](const MatrixF& m, const char* name) {
        if (m.size() == 0) {
            return;
        }
        const std::size_t stride = std::max<std::size_t>(1, m.size() / 1024);
        for (std::size_t i = 0; i < m.size(); i += stride) {
            if (!std::isfinite(m.data()[i])) {
                throw NumericError(std::string("non-finite parameters in ") + name);
            }
        }
    };
    check(model.params.input, "input matrix");
    check(model.params.output, "output matrix");
    check(model.params.positional, "positional matrix");
    return model;
}

void export_text_vectors(const ModelBundle& model, const std::string& path) {
    FilePtr file(std::fopen(path.c_str(), "wb"));
    if (!file) {
        throw DataError("cannot open for writing: " + path);
    }
    std::string line;
    line.reserve(64);
    line = std::to_string(model.vocab.size());
    line += ' ';
    line += std::to_string(model.params.dim);
    line += '\n';
    if (std::fwrite(line.data(), 1, line.size(), file.get()) != line.size()) {
        throw DataError("write failed: " + path);
    }
    const SubwordCache cache(model.vocab, model.subwords);
    std::vector<float> vec(static_cast<std::size_t>(model.params.dim));
    char buf[64];
    for (std::int32_t w = 0; w < model.vocab.size(); ++w) {
        word_input_vector<float>(model.params, cache.rows(w), vec);
        line = model.vocab.entry(w).word;
        for (const float x : vec) {
            line += ' ';
            const auto [end, err] = std::to_chars(buf, buf + sizeof(buf), x);
            if (err != std::errc()) {
                throw DataError("float formatting failed");
            }
            line.append(buf, end);
        }
        line += '\n';
        if (std::fwrite(line.data(), 1, line.size(), file.get()) != line.size()) {
            throw DataError("write failed: " + path);
        }
    }
    if (std::fflush(file.get()) != 0 || ::fsync(fileno(file.get())) != 0) {
        throw DataError("flush failed: " + path);
    }
}

}  // namespace pine
