#pragma once

#include <stdexcept>
#include <string>

namespace ifmeta {

enum class ErrorKind {
    EmptyTrainingSet,
    DimensionMismatch,
    LengthMismatch,
    OutOfRange,
    MissingClassInValidation,
    SchemaMismatch,
    UnsupportedVersion,
    CorruptDocument,
    DuplicateClass,
    MissingColumn,
    NonNumericValue,
    MissingValue,
    UnknownLabel,
    TooFewClasses,
    MissingBenign,
    ClassTooSmall,
    InvalidConfig,
    EmptyTestSet,
    IoFailure,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void raise(ErrorKind kind, const std::string& message) {
    throw Error(kind, message);
}

} // namespace ifmeta
