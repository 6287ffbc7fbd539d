#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ifmeta/iforest.hpp"

namespace ifmeta::data {

inline constexpr std::string_view kBenignLabel = "benign";

struct LabeledRecord {
    iforest::FeatureVector features;
    std::string label;
};

struct Dataset {
    std::vector<std::string> feature_names;
    std::vector<LabeledRecord> records;

    std::size_t dim() const { return feature_names.size(); }
    /// Distinct labels in first-appearance order.
    std::vector<std::string> class_names() const;
    /// class_names() minus "benign".
    std::vector<std::string> attack_classes() const;
};

struct DatasetSchema {
    std::vector<std::string> feature_names;
    std::string label_column = "label";
    std::vector<std::string> class_names; // empty = accept any label
};

struct CsvOptions {
    bool drop_bad_rows = false; // drop rows with missing/non-numeric cells instead of rejecting
};

/// Parses a headered CSV into records. Columns are matched by name when a
/// schema is given (any column order); otherwise the header defines the
/// schema, with the label in the column named "label".
Dataset load_csv(const std::filesystem::path& path,
                 const std::optional<DatasetSchema>& schema = std::nullopt,
                 const CsvOptions& options = {});

/// Feature matrix variant for unlabeled inputs: the label column is optional
/// and, when present, returned alongside. Column order per `feature_names`.
struct FeatureTable {
    std::vector<iforest::FeatureVector> rows;
    std::vector<std::string> labels; // empty when the file has no label column
};
FeatureTable load_feature_csv(const std::filesystem::path& path,
                              const std::vector<std::string>& feature_names,
                              const CsvOptions& options = {});

void write_csv(const Dataset& dataset, const std::filesystem::path& path);

struct NormalizationParams {
    // min/max per feature, fitted on training data
    std::vector<std::pair<double, double>> ranges;

    bool operator==(const NormalizationParams&) const = default;
    std::size_t dim() const { return ranges.size(); }
};

NormalizationParams normalize_fit(const std::vector<LabeledRecord>& train);
/// Min-max to [0,1] with clamping; constant features map to 0.
iforest::FeatureVector normalize_apply(const NormalizationParams& params,
                                       const iforest::FeatureVector& x);
std::vector<LabeledRecord> normalize_apply(const NormalizationParams& params,
                                           const std::vector<LabeledRecord>& records);

struct SplitRatios {
    double train = 0.70;
    double validation = 0.15;
    double test = 0.15;
};

/// One leave-one-attack-out evaluation unit. The zero-day class appears only
/// in test; benign never appears in train.
struct ScenarioSplit {
    std::string zero_day_class;
    std::vector<LabeledRecord> train;             // remaining attack classes
    std::vector<LabeledRecord> attack_validation; // remaining attack classes
    std::vector<LabeledRecord> benign_validation;
    std::vector<LabeledRecord> test; // all classes, incl. zero-day and benign
};

/// One scenario per attack class. Within a scenario, each remaining attack
/// class splits train/validation/test by `ratios`; benign splits between
/// validation and test in the validation:test proportion.
std::vector<ScenarioSplit> make_scenarios(const Dataset& dataset,
                                          const std::vector<std::string>& attack_classes,
                                          const SplitRatios& ratios = {},
                                          std::uint64_t seed = 0);

/// Stratified k-fold assignment: returns k disjoint row-index lists covering
/// the dataset, per-class counts differing by at most 1 across folds.
std::vector<std::vector<std::size_t>> kfold_split(const Dataset& dataset, std::size_t k,
                                                  std::uint64_t seed);

/// Builds the scenario split for one (zero-day class, test fold) cell:
/// test = fold `test_fold` plus every zero-day record; the fold complement
/// provides benign_validation (benign part) and train/attack_validation
/// (remaining attack classes, `validation_fraction` to validation).
ScenarioSplit scenario_from_folds(const Dataset& dataset,
                                  const std::vector<std::vector<std::size_t>>& folds,
                                  std::size_t test_fold, const std::string& zero_day_class,
                                  double validation_fraction, std::uint64_t seed);

} // namespace ifmeta::data
