#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace vsd {

// Base class for library errors other than plain std::invalid_argument.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed text input: annotation files, sidecar CSV, JSONL rows.
// Carries the 1-based line number of the offending line.
struct ParseError : Error {
    ParseError(const std::string& source, std::size_t line, const std::string& message)
        : Error(source + ":" + std::to_string(line) + ": " + message), line_number(line) {}
    std::size_t line_number;
};

// Structurally invalid file contents: bad magic, unknown header, inconsistent dims.
struct FormatError : Error {
    using Error::Error;
};

// Well-formed but unusable data: missing features, sample shortages,
// single-label metric inputs, incomplete channel scores.
struct DataError : Error {
    using Error::Error;
};

// Training or calibration cannot proceed: single-class data, constant decision values.
struct DegenerateTrainingError : Error {
    using Error::Error;
};

// Non-fatal diagnostics go to stderr.
void warn(const std::string& message);

}  // namespace vsd
