#pragma once

#include <stdexcept>
#include <string>

namespace lda {

// Invalid configuration: bad layer sizes, malformed specs, missing classes.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Caller broke an operation's precondition (shape mismatch, out-of-range label).
struct ContractViolation : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Input is numerically degenerate (e.g. zero-mean embedding set).
struct DegenerateInput : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A rate is undefined on this set (e.g. single-class scored set).
struct UndefinedRate : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Training produced a non-finite loss; message names the epoch and step.
struct TrainingDiverged : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace lda
