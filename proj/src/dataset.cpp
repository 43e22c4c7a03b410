#include "wn/dataset.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>

#include "wn/errors.hpp"

namespace wn {
namespace {

std::vector<uint8_t> read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw FormatError("cannot open " + path);
    return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

uint32_t be32(const std::vector<uint8_t>& b, size_t off, const std::string& path) {
    if (off + 4 > b.size())
        throw FormatError(path + ": truncated at offset " + std::to_string(off));
    return (uint32_t(b[off]) << 24) | (uint32_t(b[off + 1]) << 16) | (uint32_t(b[off + 2]) << 8) |
           uint32_t(b[off + 3]);
}

}  // namespace

RawImages load_idx(const std::string& images_path, const std::string& labels_path) {
    auto img = read_file(images_path);
    uint32_t magic = be32(img, 0, images_path);
    if (magic != 0x00000803u)
        throw FormatError(images_path + ": bad magic 0x" + std::to_string(magic) + " at offset 0, expected 2051");
    uint32_t count = be32(img, 4, images_path);
    uint32_t rows = be32(img, 8, images_path);
    uint32_t cols = be32(img, 12, images_path);
    size_t expect = 16 + static_cast<size_t>(count) * rows * cols;
    if (img.size() != expect)
        throw FormatError(images_path + ": file is " + std::to_string(img.size()) + " bytes, header implies " +
                          std::to_string(expect) + " (mismatch from offset 16)");

    auto lab = read_file(labels_path);
    uint32_t lmagic = be32(lab, 0, labels_path);
    if (lmagic != 0x00000801u)
        throw FormatError(labels_path + ": bad magic 0x" + std::to_string(lmagic) + " at offset 0, expected 2049");
    uint32_t lcount = be32(lab, 4, labels_path);
    if (lab.size() != 8 + static_cast<size_t>(lcount))
        throw FormatError(labels_path + ": file is " + std::to_string(lab.size()) + " bytes, header implies " +
                          std::to_string(8 + lcount));
    if (lcount != count)
        throw FormatError(labels_path + ": " + std::to_string(lcount) + " labels for " + std::to_string(count) +
                          " images");

    RawImages out;
    out.count = static_cast<int>(count);
    out.dim = static_cast<int>(rows * cols);
    out.pixels.assign(img.begin() + 16, img.end());
    out.labels.assign(lab.begin() + 8, lab.end());
    return out;
}

RawImages load_cifar_binary(const std::string& path) {
    auto bytes = read_file(path);
    constexpr size_t record = 3073;  // 1 label byte + 3 * 1024 pixels
    if (bytes.empty() || bytes.size() % record != 0)
        throw FormatError(path + ": file is " + std::to_string(bytes.size()) +
                          " bytes, not a multiple of 3073 (stray data from offset " +
                          std::to_string(bytes.size() - bytes.size() % record) + ")");
    RawImages out;
    out.count = static_cast<int>(bytes.size() / record);
    out.dim = 3072;
    out.pixels.reserve(static_cast<size_t>(out.count) * out.dim);
    out.labels.reserve(out.count);
    for (int i = 0; i < out.count; ++i) {
        size_t off = static_cast<size_t>(i) * record;
        uint8_t label = bytes[off];
        if (label > 9)
            throw FormatError(path + ": label byte " + std::to_string(int(label)) + " at offset " +
                              std::to_string(off) + " exceeds 9");
        out.labels.push_back(label);
        out.pixels.insert(out.pixels.end(), bytes.begin() + off + 1, bytes.begin() + off + record);
    }
    return out;
}

double label_to_target(int label) { return (label - 4.5) / 4.5; }

Dataset preprocess(const RawImages& raw, const std::string& source_tag) {
    if (raw.count == 0) throw PreconditionError("preprocess: empty raw data");
    Dataset ds;
    ds.source = source_tag;
    ds.inputs = Matrix(raw.count, raw.dim);
    ds.targets.reserve(raw.count);
    int kept = 0;
    for (int i = 0; i < raw.count; ++i) {
        auto row = ds.inputs.row(kept);
        double sq = 0.0;
        for (int j = 0; j < raw.dim; ++j) {
            double px = raw.pixels[static_cast<size_t>(i) * raw.dim + j];
            row[j] = px;
            sq += px * px;
        }
        if (sq == 0.0) {
            ++ds.skipped;
            continue;
        }
        scale(1.0 / std::sqrt(sq), row);
        ds.targets.push_back(label_to_target(raw.labels[i]));
        ++kept;
    }
    ds.inputs.rows = kept;
    ds.inputs.data.resize(static_cast<size_t>(kept) * raw.dim);
    if (kept == 0) throw PreconditionError("preprocess: every image had zero norm");
    return ds;
}

Dataset make_teacher_dataset(int n, const NetworkParams& teacher, uint64_t seed) {
    Dataset ds;
    ds.source = "synthetic-teacher";
    ds.inputs = Matrix(n, teacher.d());
    ds.targets.resize(n);
    Rng rng(seed);
    for (int i = 0; i < n; ++i) {
        auto x = random_unit_vector(teacher.d(), rng);
        std::copy(x.begin(), x.end(), ds.inputs.row(i).begin());
        ds.targets[i] = forward(teacher, ds.inputs.row(i)).output;
        if (std::fabs(ds.targets[i]) > 1.0)
            throw PreconditionError("make_teacher_dataset: teacher emits |y| > 1; use a unit output layer and phi(0)=0");
    }
    return ds;
}

Dataset make_random_dataset(int n, int d, uint64_t seed) {
    Dataset ds;
    ds.source = "synthetic-random";
    ds.inputs = Matrix(n, d);
    ds.targets.resize(n);
    Rng rng(seed);
    for (int i = 0; i < n; ++i) {
        auto x = random_unit_vector(d, rng);
        std::copy(x.begin(), x.end(), ds.inputs.row(i).begin());
        ds.targets[i] = rng.uniform(-1.0, 1.0);
    }
    return ds;
}

Dataset slice(const Dataset& data, int begin, int end) {
    if (begin < 0 || end > data.n() || begin >= end)
        throw DimensionError("slice: bad range");
    Dataset ds;
    ds.source = data.source;
    ds.inputs = Matrix(end - begin, data.d());
    std::copy(data.inputs.data.begin() + static_cast<size_t>(begin) * data.d(),
              data.inputs.data.begin() + static_cast<size_t>(end) * data.d(), ds.inputs.data.begin());
    ds.targets.assign(data.targets.begin() + begin, data.targets.begin() + end);
    return ds;
}

void validate_dataset(const Dataset& data) {
    if (data.n() == 0) throw PreconditionError("dataset is empty");
    for (int i = 0; i < data.n(); ++i) {
        double nrm = norm2(data.inputs.row(i));
        if (std::fabs(nrm - 1.0) > kUnitInputTol)
            throw NormalizationError("dataset row " + std::to_string(i) + " has norm " + std::to_string(nrm));
        if (std::fabs(data.targets[i]) > 1.0 + 1e-12)
            throw PreconditionError("dataset target " + std::to_string(i) + " exceeds [-1, 1]");
    }
}

}  // namespace wn
