#pragma once

#include <stdexcept>
#include <string>

namespace wn {

struct DimensionError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct NormalizationError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// A hidden row whose norm is below the minimum makes the normalized
// direction meaningless; callers must resample or reject.
struct DegenerateRowError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct PreconditionError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct FormatError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct StepRejectedError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace wn
