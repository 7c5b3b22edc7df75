#pragma once

#include <stdexcept>
#include <string>

namespace lsrl {

// Malformed or shape-incompatible tensor arguments.
struct ShapeError : std::runtime_error {
    explicit ShapeError(const std::string& msg) : std::runtime_error(msg) {}
};

// An operand contained NaN or Inf.
struct NonFiniteError : std::runtime_error {
    explicit NonFiniteError(const std::string& msg) : std::runtime_error(msg) {}
};

// Bad input files: MNIST parsing, checkpoints, config files.
struct DataError : std::runtime_error {
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

// Training left its sane regime (NaN losses, runaway discriminator) or a
// quality gate failed.
struct DivergenceError : std::runtime_error {
    explicit DivergenceError(const std::string& msg) : std::runtime_error(msg) {}
};

// API misuse: stepping a closed episode, backward on a non-scalar, ...
struct StateError : std::runtime_error {
    explicit StateError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace lsrl
