#include "ifmeta/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <unordered_map>

#include "ifmeta/errors.hpp"
#include "ifmeta/rng.hpp"

namespace ifmeta::data {

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    for (char c : line) {
        if (c == ',') {
            cells.push_back(cell);
            cell.clear();
        } else if (c != '\r') {
            cell.push_back(c);
        }
    }
    cells.push_back(cell);
    return cells;
}

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t");
    return s.substr(begin, end - begin + 1);
}

// Strict numeric parse: the whole cell must be a finite decimal or scientific
// literal. "NaN"/"inf" and friends are rejected as non-numeric.
std::optional<double> parse_number(const std::string& cell) {
    const std::string t = trim(cell);
    if (t.empty()) return std::nullopt;
    double value = 0.0;
    const char* first = t.data();
    const char* last = t.data() + t.size();
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last) return std::nullopt;
    if (!std::isfinite(value)) return std::nullopt;
    return value;
}

std::string format_number(double value) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, ptr);
}

void shuffle_indices(std::vector<std::size_t>& idx, Rng& rng) {
    for (std::size_t i = idx.size(); i > 1; --i) {
        const std::size_t j = rng.uniform_index(i);
        std::swap(idx[i - 1], idx[j]);
    }
}

// Per-class row indices in first-appearance class order.
std::vector<std::pair<std::string, std::vector<std::size_t>>> group_by_class(
    const Dataset& dataset) {
    std::vector<std::pair<std::string, std::vector<std::size_t>>> groups;
    std::unordered_map<std::string, std::size_t> at;
    for (std::size_t i = 0; i < dataset.records.size(); ++i) {
        const std::string& label = dataset.records[i].label;
        auto it = at.find(label);
        if (it == at.end()) {
            at.emplace(label, groups.size());
            groups.emplace_back(label, std::vector<std::size_t>{});
        }
        groups[at[label]].second.push_back(i);
    }
    return groups;
}

std::uint64_t stable_hash(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

} // namespace

std::vector<std::string> Dataset::class_names() const {
    std::vector<std::string> names;
    for (const LabeledRecord& r : records) {
        if (std::find(names.begin(), names.end(), r.label) == names.end())
            names.push_back(r.label);
    }
    return names;
}

std::vector<std::string> Dataset::attack_classes() const {
    std::vector<std::string> names = class_names();
    std::erase(names, std::string(kBenignLabel));
    return names;
}

Dataset load_csv(const std::filesystem::path& path, const std::optional<DatasetSchema>& schema,
                 const CsvOptions& options) {
    std::ifstream in(path);
    if (!in) raise(ErrorKind::IoFailure, "cannot open " + path.string());

    std::string line;
    if (!std::getline(in, line)) raise(ErrorKind::MissingColumn, "empty file: " + path.string());
    const std::vector<std::string> header = split_line(line);

    const std::string label_column = schema ? schema->label_column : "label";
    std::vector<std::string> feature_names;
    if (schema) {
        feature_names = schema->feature_names;
    } else {
        for (const std::string& name : header) {
            if (name != label_column) feature_names.push_back(name);
        }
        if (feature_names.size() == header.size())
            raise(ErrorKind::MissingColumn, "no '" + label_column + "' column in " + path.string());
    }

    // Column projection by name, so reordered files parse identically.
    std::vector<std::size_t> feature_cols(feature_names.size());
    for (std::size_t f = 0; f < feature_names.size(); ++f) {
        const auto it = std::find(header.begin(), header.end(), feature_names[f]);
        if (it == header.end())
            raise(ErrorKind::MissingColumn, "column '" + feature_names[f] + "' not in header");
        feature_cols[f] = static_cast<std::size_t>(it - header.begin());
    }
    const auto label_it = std::find(header.begin(), header.end(), label_column);
    if (label_it == header.end())
        raise(ErrorKind::MissingColumn, "column '" + label_column + "' not in header");
    const std::size_t label_col = static_cast<std::size_t>(label_it - header.begin());

    Dataset dataset;
    dataset.feature_names = feature_names;
    std::size_t row_number = 1;
    while (std::getline(in, line)) {
        ++row_number;
        if (line.empty() || line == "\r") continue;
        const std::vector<std::string> cells = split_line(line);
        if (cells.size() != header.size()) {
            if (options.drop_bad_rows) continue;
            raise(ErrorKind::MissingValue,
                  "row " + std::to_string(row_number) + " has " + std::to_string(cells.size()) +
                      " cells, expected " + std::to_string(header.size()));
        }
        LabeledRecord record;
        record.features.resize(feature_names.size());
        bool bad = false;
        for (std::size_t f = 0; f < feature_names.size() && !bad; ++f) {
            const std::string& cell = cells[feature_cols[f]];
            if (trim(cell).empty()) {
                if (options.drop_bad_rows) {
                    bad = true;
                    break;
                }
                raise(ErrorKind::MissingValue, "row " + std::to_string(row_number) + ", column '" +
                                                   feature_names[f] + "' is empty");
            }
            const std::optional<double> value = parse_number(cell);
            if (!value) {
                if (options.drop_bad_rows) {
                    bad = true;
                    break;
                }
                raise(ErrorKind::NonNumericValue, "row " + std::to_string(row_number) +
                                                      ", column '" + feature_names[f] + "': '" +
                                                      trim(cell) + "'");
            }
            record.features[f] = *value;
        }
        if (bad) continue;
        record.label = trim(cells[label_col]);
        if (record.label.empty())
            raise(ErrorKind::MissingValue, "row " + std::to_string(row_number) + " has no label");
        if (schema && !schema->class_names.empty() &&
            std::find(schema->class_names.begin(), schema->class_names.end(), record.label) ==
                schema->class_names.end()) {
            raise(ErrorKind::UnknownLabel,
                  "row " + std::to_string(row_number) + ": label '" + record.label + "'");
        }
        dataset.records.push_back(std::move(record));
    }
    return dataset;
}

FeatureTable load_feature_csv(const std::filesystem::path& path,
                              const std::vector<std::string>& feature_names,
                              const CsvOptions& options) {
    std::ifstream in(path);
    if (!in) raise(ErrorKind::IoFailure, "cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line)) raise(ErrorKind::MissingColumn, "empty file: " + path.string());
    const std::vector<std::string> header = split_line(line);

    std::vector<std::size_t> feature_cols(feature_names.size());
    for (std::size_t f = 0; f < feature_names.size(); ++f) {
        const auto it = std::find(header.begin(), header.end(), feature_names[f]);
        if (it == header.end())
            raise(ErrorKind::MissingColumn, "column '" + feature_names[f] + "' not in header");
        feature_cols[f] = static_cast<std::size_t>(it - header.begin());
    }
    const auto label_it = std::find(header.begin(), header.end(), "label");
    const bool has_label = label_it != header.end();
    const std::size_t label_col =
        has_label ? static_cast<std::size_t>(label_it - header.begin()) : 0;

    FeatureTable table;
    std::size_t row_number = 1;
    while (std::getline(in, line)) {
        ++row_number;
        if (line.empty() || line == "\r") continue;
        const std::vector<std::string> cells = split_line(line);
        if (cells.size() != header.size()) {
            if (options.drop_bad_rows) continue;
            raise(ErrorKind::MissingValue, "row " + std::to_string(row_number) + " is ragged");
        }
        iforest::FeatureVector row(feature_names.size());
        bool bad = false;
        for (std::size_t f = 0; f < feature_names.size(); ++f) {
            const std::optional<double> value = parse_number(cells[feature_cols[f]]);
            if (!value) {
                if (options.drop_bad_rows) {
                    bad = true;
                    break;
                }
                raise(ErrorKind::NonNumericValue, "row " + std::to_string(row_number) +
                                                      ", column '" + feature_names[f] + "'");
            }
            row[f] = *value;
        }
        if (bad) continue;
        table.rows.push_back(std::move(row));
        if (has_label) table.labels.push_back(trim(cells[label_col]));
    }
    return table;
}

void write_csv(const Dataset& dataset, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) raise(ErrorKind::IoFailure, "cannot write " + path.string());
    for (std::size_t f = 0; f < dataset.feature_names.size(); ++f)
        out << dataset.feature_names[f] << ',';
    out << "label\n";
    for (const LabeledRecord& r : dataset.records) {
        for (double v : r.features) out << format_number(v) << ',';
        out << r.label << '\n';
    }
    if (!out) raise(ErrorKind::IoFailure, "write failed: " + path.string());
}

NormalizationParams normalize_fit(const std::vector<LabeledRecord>& train) {
    if (train.empty()) raise(ErrorKind::EmptyTrainingSet, "normalize_fit on empty training set");
    const std::size_t dim = train.front().features.size();
    NormalizationParams params;
    params.ranges.assign(dim, {std::numeric_limits<double>::infinity(),
                               -std::numeric_limits<double>::infinity()});
    for (const LabeledRecord& r : train) {
        if (r.features.size() != dim)
            raise(ErrorKind::DimensionMismatch, "inconsistent feature counts in training set");
        for (std::size_t f = 0; f < dim; ++f) {
            params.ranges[f].first = std::min(params.ranges[f].first, r.features[f]);
            params.ranges[f].second = std::max(params.ranges[f].second, r.features[f]);
        }
    }
    return params;
}

iforest::FeatureVector normalize_apply(const NormalizationParams& params,
                                       const iforest::FeatureVector& x) {
    if (x.size() != params.dim())
        raise(ErrorKind::DimensionMismatch, "vector size does not match normalization params");
    iforest::FeatureVector out(x.size());
    for (std::size_t f = 0; f < x.size(); ++f) {
        const auto [lo, hi] = params.ranges[f];
        if (hi <= lo) {
            out[f] = 0.0; // constant feature
        } else {
            out[f] = std::clamp((x[f] - lo) / (hi - lo), 0.0, 1.0);
        }
    }
    return out;
}

std::vector<LabeledRecord> normalize_apply(const NormalizationParams& params,
                                           const std::vector<LabeledRecord>& records) {
    std::vector<LabeledRecord> out;
    out.reserve(records.size());
    for (const LabeledRecord& r : records)
        out.push_back(LabeledRecord{normalize_apply(params, r.features), r.label});
    return out;
}

std::vector<ScenarioSplit> make_scenarios(const Dataset& dataset,
                                          const std::vector<std::string>& attack_classes,
                                          const SplitRatios& ratios, std::uint64_t seed) {
    if (attack_classes.size() < 2)
        raise(ErrorKind::TooFewClasses, "need at least 2 attack classes, got " +
                                            std::to_string(attack_classes.size()));
    const auto groups = group_by_class(dataset);
    const auto find_group = [&](const std::string& name) -> const std::vector<std::size_t>* {
        for (const auto& [label, rows] : groups)
            if (label == name) return &rows;
        return nullptr;
    };
    if (find_group(std::string(kBenignLabel)) == nullptr)
        raise(ErrorKind::MissingBenign, "dataset has no benign records");
    for (const std::string& name : attack_classes) {
        if (find_group(name) == nullptr)
            raise(ErrorKind::UnknownLabel, "attack class '" + name + "' not in dataset");
    }

    const Rng master(seed);
    const double val_of_holdout = ratios.validation / (ratios.validation + ratios.test);
    std::vector<ScenarioSplit> scenarios;
    for (std::size_t s = 0; s < attack_classes.size(); ++s) {
        const std::string& zero_day = attack_classes[s];
        ScenarioSplit split;
        split.zero_day_class = zero_day;
        for (const auto& [label, rows] : groups) {
            std::vector<std::size_t> shuffled = rows;
            Rng rng = master.fork(stable_hash(label) ^ (s * 0x9e37ull + 1));
            shuffle_indices(shuffled, rng);
            const auto take = [&](std::size_t begin, std::size_t end,
                                  std::vector<LabeledRecord>& dst) {
                for (std::size_t i = begin; i < end && i < shuffled.size(); ++i)
                    dst.push_back(dataset.records[shuffled[i]]);
            };
            if (label == zero_day) {
                take(0, shuffled.size(), split.test);
            } else if (label == kBenignLabel) {
                const std::size_t n_val = static_cast<std::size_t>(
                    std::llround(static_cast<double>(shuffled.size()) * val_of_holdout));
                take(0, n_val, split.benign_validation);
                take(n_val, shuffled.size(), split.test);
            } else if (std::find(attack_classes.begin(), attack_classes.end(), label) !=
                       attack_classes.end()) {
                const std::size_t n = shuffled.size();
                const std::size_t n_train =
                    static_cast<std::size_t>(std::llround(static_cast<double>(n) * ratios.train));
                const std::size_t n_val = static_cast<std::size_t>(
                    std::llround(static_cast<double>(n) * ratios.validation));
                take(0, n_train, split.train);
                take(n_train, n_train + n_val, split.attack_validation);
                take(n_train + n_val, n, split.test);
            }
            // labels outside attack_classes and benign are ignored
        }
        scenarios.push_back(std::move(split));
    }
    return scenarios;
}

std::vector<std::vector<std::size_t>> kfold_split(const Dataset& dataset, std::size_t k,
                                                  std::uint64_t seed) {
    if (k < 2) raise(ErrorKind::InvalidConfig, "k must be >= 2");
    const auto groups = group_by_class(dataset);
    for (const auto& [label, rows] : groups) {
        if (rows.size() < k)
            raise(ErrorKind::ClassTooSmall, "class '" + label + "' has " +
                                                std::to_string(rows.size()) + " records, need >= " +
                                                std::to_string(k) + " for " + std::to_string(k) +
                                                "-fold split");
    }
    const Rng master(seed);
    std::vector<std::vector<std::size_t>> folds(k);
    for (const auto& [label, rows] : groups) {
        std::vector<std::size_t> shuffled = rows;
        Rng rng = master.fork(stable_hash(label));
        shuffle_indices(shuffled, rng);
        for (std::size_t i = 0; i < shuffled.size(); ++i)
            folds[i % k].push_back(shuffled[i]);
    }
    for (auto& fold : folds) std::sort(fold.begin(), fold.end());
    return folds;
}

ScenarioSplit scenario_from_folds(const Dataset& dataset,
                                  const std::vector<std::vector<std::size_t>>& folds,
                                  std::size_t test_fold, const std::string& zero_day_class,
                                  double validation_fraction, std::uint64_t seed) {
    if (test_fold >= folds.size())
        raise(ErrorKind::InvalidConfig, "test_fold out of range");

    ScenarioSplit split;
    split.zero_day_class = zero_day_class;

    std::vector<bool> in_test_fold(dataset.records.size(), false);
    for (std::size_t row : folds[test_fold]) in_test_fold[row] = true;

    // Complement rows per attack class, for the train/validation carve-out.
    std::map<std::string, std::vector<std::size_t>> holdout_by_class;

    for (std::size_t row = 0; row < dataset.records.size(); ++row) {
        const LabeledRecord& r = dataset.records[row];
        if (r.label == zero_day_class) {
            split.test.push_back(r); // every zero-day record is test, in every fold
        } else if (in_test_fold[row]) {
            split.test.push_back(r);
        } else if (r.label == kBenignLabel) {
            split.benign_validation.push_back(r);
        } else {
            holdout_by_class[r.label].push_back(row);
        }
    }

    const Rng master(seed);
    for (auto& [label, rows] : holdout_by_class) {
        Rng rng = master.fork(stable_hash(label) ^ test_fold);
        shuffle_indices(rows, rng);
        const std::size_t n_val = static_cast<std::size_t>(
            std::llround(static_cast<double>(rows.size()) * validation_fraction));
        for (std::size_t i = 0; i < rows.size(); ++i) {
            (i < n_val ? split.attack_validation : split.train)
                .push_back(dataset.records[rows[i]]);
        }
    }
    return split;
}

} // namespace ifmeta::data
