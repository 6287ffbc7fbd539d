#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ifmeta/dataset.hpp"
#include "ifmeta/meta_classifier.hpp"

namespace ifmeta::eval {

/// Zero-denominator convention: 0.
double precision(std::uint64_t tp, std::uint64_t fp);
double recall(std::uint64_t tp, std::uint64_t fn);
double f1(double precision, double recall);

struct ClassCounts {
    std::uint64_t tp = 0;
    std::uint64_t fp = 0;
    std::uint64_t fn = 0;
    std::uint64_t tn = 0;
};

/// Confusion over one test set. Known-attack records feed the per-class
/// table (an Unknown prediction of a known-class record is a FN of that
/// class); zero-day records count only toward the unknown/known tally;
/// benign records count only toward the rejection tally.
struct ConfusionCounts {
    std::vector<std::string> classes; // ensemble entry order
    std::vector<ClassCounts> counts;
    std::uint64_t zero_day_unknown = 0;
    std::uint64_t zero_day_known = 0;
    std::uint64_t benign_rejected = 0;
    std::uint64_t benign_accepted = 0;
};

ConfusionCounts tabulate(const meta::MetaClassifier& meta,
                         const std::vector<data::LabeledRecord>& test,
                         const std::string& zero_day_class, unsigned threads = 0);

struct ClassMetrics {
    std::string class_name;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

struct MetricsReport {
    std::vector<ClassMetrics> per_class;
    double macro_precision = 0.0;
    double macro_recall = 0.0;
    double macro_f1 = 0.0;
    double accuracy = 0.0; // over known-attack test records
    double zero_day_detection_rate = 0.0;
    double benign_rejection_rate = 0.0;
};

MetricsReport summarize(const ConfusionCounts& counts);

/// Fraction of the held-out class's predictions that came back Unknown.
double zero_day_detection_rate(const std::vector<meta::Prediction>& held_out_predictions);

/// The comparison baseline: same forests, one fixed threshold everywhere.
meta::MetaClassifier naive_baseline(const meta::MetaClassifier& meta,
                                    double fixed_threshold = 0.5);

} // namespace ifmeta::eval
