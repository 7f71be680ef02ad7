#pragma once

#include <stdexcept>

namespace hddc {

// Malformed arguments: shape mismatches, out-of-range values, bad model names.
struct InvalidInputError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// A mixture component lost (nearly) all of its weight during fitting.
struct DegenerateClusterError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Non-finite values appeared where finite ones are required.
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Every restart of an EM run ended degenerate.
struct FitFailedError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Every cell of a selection grid failed to fit.
struct SelectionFailedError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A file could not be opened for reading or writing.
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace hddc
