#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ifmeta/dataset.hpp"
#include "ifmeta/iforest.hpp"

namespace ifmeta::meta {

/// Preprocessing contract a model is only valid under: feature order plus the
/// min-max parameters inputs must be normalized with.
struct Schema {
    std::vector<std::string> feature_names;
    data::NormalizationParams normalization;

    bool operator==(const Schema&) const = default;
    std::size_t dim() const { return feature_names.size(); }
};

struct ClassifierEntry {
    std::string class_name;
    iforest::IsolationForest forest;
    double threshold = 0.5; // accept when score <= threshold
    double weight = 1.0;    // performance weight, used for tie-breaks and reporting
};

struct Provenance {
    std::uint64_t training_seed = 0;
    std::string created_at;  // ISO-8601 UTC, empty if unset
    std::string source_node; // producing node id, free-form
    bool needs_reoptimization = false;
    std::size_t requested_trees = 0;
    std::size_t requested_sample_size = 0;
};

struct Prediction {
    bool known = false;
    std::size_t entry_index = SIZE_MAX; // valid when known
    std::string class_name;             // empty when unknown
    double score = 0.0;                 // winning score when known
};

/// The decision rule over precomputed scores: candidates are entries with
/// score <= threshold; empty set means unknown; otherwise the smallest score
/// wins, ties broken by larger weight, then lower index.
std::optional<std::size_t> decide(std::span<const double> scores,
                                  std::span<const double> thresholds,
                                  std::span<const double> weights);

/// Immutable per-class ensemble. Inputs to classify must already be
/// normalized per schema(); mutating operations return a new classifier.
class MetaClassifier {
public:
    MetaClassifier(Schema schema, std::vector<ClassifierEntry> entries, Provenance provenance);

    const Schema& schema() const { return schema_; }
    const std::vector<ClassifierEntry>& entries() const { return entries_; }
    const Provenance& provenance() const { return provenance_; }
    std::size_t dim() const { return schema_.dim(); }
    std::size_t size() const { return entries_.size(); }

    std::vector<double> thresholds() const;
    std::vector<double> weights() const;

    /// Per-entry anomaly scores for x.
    std::vector<double> scores(const iforest::FeatureVector& x) const;

    Prediction classify(const iforest::FeatureVector& x) const;
    std::vector<Prediction> classify_batch(const std::vector<iforest::FeatureVector>& xs,
                                           unsigned threads = 0) const;

    MetaClassifier with_thresholds(const std::vector<double>& thresholds) const;
    MetaClassifier with_weights(const std::vector<double>& weights) const;
    MetaClassifier with_provenance(Provenance provenance) const;

    /// Extends the ensemble with externally trained entries sharing the same
    /// schema. Existing thresholds are untouched; the result is flagged as
    /// needing threshold re-optimization.
    MetaClassifier merged_with(const Schema& external_schema,
                               const std::vector<ClassifierEntry>& external_entries) const;

private:
    Schema schema_;
    std::vector<ClassifierEntry> entries_;
    Provenance provenance_;
};

struct TrainParams {
    std::size_t num_trees = 100;
    std::size_t sample_size = 256;
    std::uint64_t seed = 0;
    unsigned threads = 0;
    /// Off by default: benign traffic gets no forest and is expected to land
    /// on the unknown side of every threshold.
    bool include_benign = false;
};

/// One forest per attack class present in `train` (first-appearance order),
/// each trained only on that class's records. Entry thresholds start at the
/// naive default 0.5 and weights at 1.
std::vector<ClassifierEntry> train_per_class(const std::vector<data::LabeledRecord>& train,
                                             const TrainParams& params);

/// Per-class F1 of the current classifier on a validation set that must
/// contain at least one record of every entry class.
std::vector<double> compute_weights(const MetaClassifier& meta,
                                    const std::vector<data::LabeledRecord>& validation,
                                    unsigned threads = 0);

} // namespace ifmeta::meta
