#pragma once

#include <stdexcept>
#include <string>

namespace polarity {

// Base for every failure caused by bad input data or configuration.
// The CLI maps these to exit code 2.
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct MalformedRow : DataError {
    explicit MalformedRow(std::size_t line, const std::string& what)
        : DataError("line " + std::to_string(line) + ": " + what), line_no(line) {}
    std::size_t line_no;
};

struct UnknownLabel : DataError {
    UnknownLabel(std::size_t line, const std::string& label)
        : DataError("line " + std::to_string(line) + ": unknown label '" + label + "'"),
          line_no(line) {}
    std::size_t line_no;
};

struct DuplicateId : DataError {
    explicit DuplicateId(const std::string& dup)
        : DataError("duplicate sentence id '" + dup + "'"), id(dup) {}
    std::string id;
};

struct TooFewRecords : DataError {
    using DataError::DataError;
};

struct EmptyVotes : DataError {
    EmptyVotes() : DataError("empty vote list") {}
};

struct LengthMismatch : DataError {
    using DataError::DataError;
};

struct EmptySeedSet : DataError {
    explicit EmptySeedSet(int agreement)
        : DataError("no sentence reached agreement level " + std::to_string(agreement)) {}
};

struct DegenerateTraining : DataError {
    explicit DegenerateTraining(int only_class)
        : DataError("training set contains a single class"), single_class(only_class) {}
    int single_class;
};

struct ShapeMismatch : DataError {
    using DataError::DataError;
};

struct EmptyMatrix : DataError {
    EmptyMatrix() : DataError("confusion matrix has no entries") {}
};

struct RaggedTable : DataError {
    using DataError::DataError;
};

struct ConfigError : DataError {
    using DataError::DataError;
};

}  // namespace polarity
