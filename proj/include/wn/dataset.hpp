#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "wn/network.hpp"

namespace wn {

/// Raw image tensor as parsed from disk, before any scaling.
struct RawImages {
    int count = 0;
    int dim = 0;  // pixels per image, flattened
    std::vector<uint8_t> pixels;  // count * dim
    std::vector<uint8_t> labels;  // count, values 0..9
};

/// Unit-norm inputs with scalar targets in [-1, 1].
struct Dataset {
    Matrix inputs;               // n x d, each row unit L2 norm
    std::vector<double> targets; // n values in [-1, 1]
    std::string source;          // mnist | cifar10 | synthetic-teacher | synthetic-random
    int skipped = 0;             // zero-norm images dropped during preprocessing

    int n() const { return inputs.rows; }
    int d() const { return inputs.cols; }
};

/// IDX parser (big-endian magic 2051 for images, 2049 for labels).
/// Byte-exact; any magic or length mismatch throws FormatError naming the
/// offending offset.
RawImages load_idx(const std::string& images_path, const std::string& labels_path);

/// CIFAR-10 binary batches: 3073-byte records, label byte first.
RawImages load_cifar_binary(const std::string& path);

/// Flatten, divide each image by its L2 norm (zero-norm images are skipped
/// and counted), and map label k in {0..9} to y = (k - 4.5) / 4.5.
Dataset preprocess(const RawImages& raw, const std::string& source_tag);

double label_to_target(int label);

/// Inputs uniform on the unit sphere, targets from a fixed teacher network
/// with unit output layer (so |y| <= 1 for any phi(0)=0 activation).
Dataset make_teacher_dataset(int n, const NetworkParams& teacher, uint64_t seed);

/// Inputs uniform on the unit sphere, targets uniform in [-1, 1].
Dataset make_random_dataset(int n, int d, uint64_t seed);

/// Rows [begin, end) as a view-copy for mini-batching.
Dataset slice(const Dataset& data, int begin, int end);

void validate_dataset(const Dataset& data);

}  // namespace wn
