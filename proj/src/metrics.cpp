#include "ifmeta/metrics.hpp"

#include <unordered_map>

#include "ifmeta/errors.hpp"

namespace ifmeta::eval {

double precision(std::uint64_t tp, std::uint64_t fp) {
    const std::uint64_t denom = tp + fp;
    return denom == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(denom);
}

double recall(std::uint64_t tp, std::uint64_t fn) {
    const std::uint64_t denom = tp + fn;
    return denom == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(denom);
}

double f1(double precision, double recall) {
    const double denom = precision + recall;
    return denom == 0.0 ? 0.0 : 2.0 * precision * recall / denom;
}

ConfusionCounts tabulate(const meta::MetaClassifier& meta,
                         const std::vector<data::LabeledRecord>& test,
                         const std::string& zero_day_class, unsigned threads) {
    ConfusionCounts confusion;
    confusion.counts.resize(meta.size());
    std::unordered_map<std::string, std::size_t> entry_of;
    for (std::size_t i = 0; i < meta.size(); ++i) {
        confusion.classes.push_back(meta.entries()[i].class_name);
        entry_of.emplace(meta.entries()[i].class_name, i);
    }

    std::vector<iforest::FeatureVector> xs;
    xs.reserve(test.size());
    for (const data::LabeledRecord& r : test) xs.push_back(r.features);
    const std::vector<meta::Prediction> predictions = meta.classify_batch(xs, threads);

    for (std::size_t i = 0; i < test.size(); ++i) {
        const std::string& label = test[i].label;
        const meta::Prediction& p = predictions[i];
        if (label == zero_day_class) {
            ++(p.known ? confusion.zero_day_known : confusion.zero_day_unknown);
            continue;
        }
        if (label == data::kBenignLabel && !entry_of.contains(label)) {
            ++(p.known ? confusion.benign_accepted : confusion.benign_rejected);
            continue;
        }
        const auto truth = entry_of.find(label);
        if (truth == entry_of.end())
            raise(ErrorKind::UnknownLabel,
                  "test record labeled '" + label + "' has no ensemble entry");
        for (std::size_t c = 0; c < meta.size(); ++c) {
            const bool is_truth = c == truth->second;
            const bool predicted = p.known && p.entry_index == c;
            if (is_truth && predicted) ++confusion.counts[c].tp;
            else if (is_truth) ++confusion.counts[c].fn;
            else if (predicted) ++confusion.counts[c].fp;
            else ++confusion.counts[c].tn;
        }
    }
    return confusion;
}

MetricsReport summarize(const ConfusionCounts& counts) {
    MetricsReport report;
    std::uint64_t total = 0, correct = 0;
    for (std::size_t c = 0; c < counts.counts.size(); ++c) {
        const ClassCounts& k = counts.counts[c];
        ClassMetrics m;
        m.class_name = counts.classes[c];
        m.precision = precision(k.tp, k.fp);
        m.recall = recall(k.tp, k.fn);
        m.f1 = f1(m.precision, m.recall);
        report.per_class.push_back(m);
        report.macro_precision += m.precision;
        report.macro_recall += m.recall;
        report.macro_f1 += m.f1;
        total += k.tp + k.fn;
        correct += k.tp;
    }
    const double n_classes = static_cast<double>(counts.counts.size());
    if (n_classes > 0) {
        report.macro_precision /= n_classes;
        report.macro_recall /= n_classes;
        report.macro_f1 /= n_classes;
    }
    report.accuracy = total == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(total);
    const std::uint64_t zd_total = counts.zero_day_unknown + counts.zero_day_known;
    report.zero_day_detection_rate =
        zd_total == 0 ? 0.0
                      : static_cast<double>(counts.zero_day_unknown) / static_cast<double>(zd_total);
    const std::uint64_t benign_total = counts.benign_rejected + counts.benign_accepted;
    report.benign_rejection_rate =
        benign_total == 0
            ? 0.0
            : static_cast<double>(counts.benign_rejected) / static_cast<double>(benign_total);
    return report;
}

double zero_day_detection_rate(const std::vector<meta::Prediction>& held_out_predictions) {
    if (held_out_predictions.empty())
        raise(ErrorKind::EmptyTestSet, "no held-out instances to measure");
    std::size_t unknown = 0;
    for (const meta::Prediction& p : held_out_predictions) {
        if (!p.known) ++unknown;
    }
    return static_cast<double>(unknown) / static_cast<double>(held_out_predictions.size());
}

meta::MetaClassifier naive_baseline(const meta::MetaClassifier& meta, double fixed_threshold) {
    if (!(fixed_threshold >= 0.0 && fixed_threshold <= 1.0))
        raise(ErrorKind::OutOfRange, "fixed threshold outside [0,1]");
    return meta.with_thresholds(std::vector<double>(meta.size(), fixed_threshold));
}

} // namespace ifmeta::eval
