#pragma once

#include <filesystem>
#include <string>

#include "ifmeta/meta_classifier.hpp"

namespace ifmeta::meta {

inline constexpr int kModelFormatVersion = 1;

/// Serializes the classifier to a self-describing versioned JSON document.
/// Reals use shortest round-trip decimals, so export/import preserves every
/// tree split bit-exactly.
std::string export_model(const MetaClassifier& meta);
void export_model_file(const MetaClassifier& meta, const std::filesystem::path& path);

/// Parses and validates a model document. Raises UnsupportedVersion for a
/// foreign format_version, SchemaMismatch for internally inconsistent
/// schema/forest references, CorruptDocument for anything unparsable.
MetaClassifier import_model(const std::string& document);
MetaClassifier import_model_file(const std::filesystem::path& path);

/// Current time as ISO-8601 UTC; honors SOURCE_DATE_EPOCH so builds and tests
/// can pin provenance timestamps.
std::string iso8601_utc_now();

} // namespace ifmeta::meta
