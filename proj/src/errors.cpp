#include "ifmeta/errors.hpp"

namespace ifmeta {

const char* to_string(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::EmptyTrainingSet: return "EmptyTrainingSet";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::OutOfRange: return "OutOfRange";
    case ErrorKind::MissingClassInValidation: return "MissingClassInValidation";
    case ErrorKind::SchemaMismatch: return "SchemaMismatch";
    case ErrorKind::UnsupportedVersion: return "UnsupportedVersion";
    case ErrorKind::CorruptDocument: return "CorruptDocument";
    case ErrorKind::DuplicateClass: return "DuplicateClass";
    case ErrorKind::MissingColumn: return "MissingColumn";
    case ErrorKind::NonNumericValue: return "NonNumericValue";
    case ErrorKind::MissingValue: return "MissingValue";
    case ErrorKind::UnknownLabel: return "UnknownLabel";
    case ErrorKind::TooFewClasses: return "TooFewClasses";
    case ErrorKind::MissingBenign: return "MissingBenign";
    case ErrorKind::ClassTooSmall: return "ClassTooSmall";
    case ErrorKind::InvalidConfig: return "InvalidConfig";
    case ErrorKind::EmptyTestSet: return "EmptyTestSet";
    case ErrorKind::IoFailure: return "IoFailure";
    }
    return "UnknownError";
}

} // namespace ifmeta
