#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>

#include "ifmeta/errors.hpp"
#include "ifmeta/metrics.hpp"
#include "ifmeta/synthetic.hpp"

using namespace ifmeta;
using namespace ifmeta::eval;

namespace {

ErrorKind kind_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("expected an Error");
    return ErrorKind::IoFailure;
}

meta::MetaClassifier tiny_classifier(std::vector<data::LabeledRecord>* test_out) {
    data::SyntheticConfig config = data::uniform_synthetic_config(3, 100, 5, 13);
    for (data::ClassSpec& spec : config.classes) spec.spread = 0.02;
    const data::Dataset d = data::gen_synthetic(config);
    std::vector<data::LabeledRecord> train, test;
    std::map<std::string, int> seen;
    for (const data::LabeledRecord& r : d.records) {
        if (r.label != data::kBenignLabel && seen[r.label]++ < 70) train.push_back(r);
        else test.push_back(r);
    }
    const data::NormalizationParams norm = data::normalize_fit(train);
    meta::TrainParams params;
    params.num_trees = 40;
    params.sample_size = 64;
    params.seed = 2;
    meta::MetaClassifier m(meta::Schema{d.feature_names, norm},
                           meta::train_per_class(data::normalize_apply(norm, train), params),
                           meta::Provenance{});
    if (test_out) *test_out = data::normalize_apply(norm, test);
    return m;
}

} // namespace

TEST_CASE("precision, recall, f1 formulas and conventions") {
    CHECK(precision(3, 1) == 0.75);
    CHECK(precision(0, 0) == 0.0);
    CHECK(recall(3, 1) == 0.75);
    CHECK(recall(0, 0) == 0.0);
    CHECK(std::abs(f1(1.0, 0.5) - 0.6667) < 1e-4);
    CHECK(f1(0.0, 0.0) == 0.0);
    CHECK(f1(1.0, 1.0) == 1.0);
}

TEST_CASE("metric ranges and f1 bound on random counts") {
    Rng rng(6);
    for (int i = 0; i < 2000; ++i) {
        const auto tp = rng.uniform_index(50);
        const auto fp = rng.uniform_index(50);
        const auto fn = rng.uniform_index(50);
        const double p = precision(tp, fp);
        const double r = recall(tp, fn);
        const double f = f1(p, r);
        CHECK(p >= 0.0);
        CHECK(p <= 1.0);
        CHECK(r >= 0.0);
        CHECK(r <= 1.0);
        CHECK(f >= 0.0);
        CHECK(f <= std::max(p, r) + 1e-15);
    }
}

TEST_CASE("zero_day_detection_rate counts unknowns") {
    std::vector<meta::Prediction> preds(10);
    for (std::size_t i = 0; i < 8; ++i) preds[i].known = false;
    preds[8].known = true;
    preds[9].known = true;
    CHECK(zero_day_detection_rate(preds) == 0.8);

    for (auto& p : preds) p.known = true;
    CHECK(zero_day_detection_rate(preds) == 0.0);
    for (auto& p : preds) p.known = false;
    CHECK(zero_day_detection_rate(preds) == 1.0);
    CHECK(kind_of([&] { zero_day_detection_rate({}); }) == ErrorKind::EmptyTestSet);
}

TEST_CASE("naive_baseline sets one threshold everywhere") {
    const meta::MetaClassifier m = tiny_classifier(nullptr);
    const meta::MetaClassifier naive = naive_baseline(m, 0.5);
    for (double t : naive.thresholds()) CHECK(t == 0.5);
    CHECK(kind_of([&] { naive_baseline(m, 1.5); }) == ErrorKind::OutOfRange);

    // threshold 1.0 rejects nothing, so the zero-day rate must be 0
    std::vector<data::LabeledRecord> test;
    const meta::MetaClassifier m2 = tiny_classifier(&test);
    const meta::MetaClassifier open = naive_baseline(m2, 1.0);
    const ConfusionCounts counts = tabulate(open, test, "wsmp_flood");
    CHECK(counts.zero_day_unknown == 0);
}

TEST_CASE("tabulate splits records into attack confusion, zero-day, benign tallies") {
    std::vector<data::LabeledRecord> test;
    const meta::MetaClassifier m = tiny_classifier(&test);
    const std::string zero_day = "wsmp_flood"; // pretend it was withheld
    const ConfusionCounts counts = tabulate(m, test, zero_day);

    std::size_t zero_day_total = 0, benign_total = 0, attack_total = 0;
    for (const data::LabeledRecord& r : test) {
        if (r.label == zero_day) ++zero_day_total;
        else if (r.label == data::kBenignLabel) ++benign_total;
        else ++attack_total;
    }
    CHECK(counts.zero_day_unknown + counts.zero_day_known == zero_day_total);
    CHECK(counts.benign_rejected + counts.benign_accepted == benign_total);

    // TP+FN per class equals the class's test count; totals add up
    for (std::size_t c = 0; c < counts.classes.size(); ++c) {
        const std::size_t class_total = static_cast<std::size_t>(
            std::count_if(test.begin(), test.end(), [&](const data::LabeledRecord& r) {
                return r.label == counts.classes[c];
            }));
        if (counts.classes[c] == zero_day) continue;
        CHECK(counts.counts[c].tp + counts.counts[c].fn == class_total);
        CHECK(counts.counts[c].tp + counts.counts[c].fn + counts.counts[c].fp +
                  counts.counts[c].tn ==
              attack_total);
    }
}

TEST_CASE("summarize computes per-class and macro metrics") {
    ConfusionCounts counts;
    counts.classes = {"a", "b"};
    counts.counts = {ClassCounts{3, 1, 1, 5}, ClassCounts{4, 0, 2, 4}};
    counts.zero_day_unknown = 8;
    counts.zero_day_known = 2;
    counts.benign_rejected = 9;
    counts.benign_accepted = 1;
    const MetricsReport r = summarize(counts);

    CHECK(r.per_class[0].precision == 0.75);
    CHECK(r.per_class[0].recall == 0.75);
    CHECK(r.per_class[1].precision == 1.0);
    CHECK(std::abs(r.per_class[1].recall - 4.0 / 6.0) < 1e-12);
    CHECK(std::abs(r.macro_precision - (0.75 + 1.0) / 2.0) < 1e-12);
    CHECK(std::abs(r.accuracy - 7.0 / 10.0) < 1e-12);
    CHECK(r.zero_day_detection_rate == 0.8);
    CHECK(r.benign_rejection_rate == 0.9);
    for (const ClassMetrics& m : r.per_class) {
        CHECK(m.f1 >= 0.0);
        CHECK(m.f1 <= std::max(m.precision, m.recall) + 1e-15);
    }
}

TEST_CASE("unknown prediction of a known-class record counts as FN") {
    std::vector<data::LabeledRecord> test;
    meta::MetaClassifier m = tiny_classifier(&test);
    // close every threshold: all predictions Unknown
    m = m.with_thresholds(std::vector<double>(m.size(), 0.0));
    const ConfusionCounts counts = tabulate(m, test, "nonexistent_zero_day");
    for (std::size_t c = 0; c < counts.classes.size(); ++c) {
        CHECK(counts.counts[c].tp == 0);
        CHECK(counts.counts[c].fp == 0);
        const std::size_t class_total = static_cast<std::size_t>(
            std::count_if(test.begin(), test.end(), [&](const data::LabeledRecord& r) {
                return r.label == counts.classes[c];
            }));
        CHECK(counts.counts[c].fn == class_total);
    }
    CHECK(counts.benign_rejected + counts.benign_accepted > 0);
    CHECK(counts.benign_accepted == 0); // everything rejected
    const MetricsReport r = summarize(counts);
    CHECK(r.accuracy == 0.0);
    CHECK(r.benign_rejection_rate == 1.0);
}
