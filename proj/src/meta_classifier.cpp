#include "ifmeta/meta_classifier.hpp"

#include <algorithm>
#include <unordered_map>
#include <unordered_set>

#include "ifmeta/errors.hpp"
#include "ifmeta/parallel.hpp"

namespace ifmeta::meta {

std::optional<std::size_t> decide(std::span<const double> scores,
                                  std::span<const double> thresholds,
                                  std::span<const double> weights) {
    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (scores[i] > thresholds[i]) continue;
        if (!best) {
            best = i;
            continue;
        }
        if (scores[i] < scores[*best]) {
            best = i;
        } else if (scores[i] == scores[*best] && weights[i] > weights[*best]) {
            best = i;
        }
    }
    return best;
}

MetaClassifier::MetaClassifier(Schema schema, std::vector<ClassifierEntry> entries,
                               Provenance provenance)
    : schema_(std::move(schema)), entries_(std::move(entries)),
      provenance_(std::move(provenance)) {
    if (entries_.empty())
        raise(ErrorKind::EmptyTrainingSet, "a meta-classifier needs at least one entry");
    if (schema_.normalization.dim() != schema_.feature_names.size())
        raise(ErrorKind::SchemaMismatch, "normalization params do not cover the feature list");
    std::unordered_set<std::string> seen;
    for (const ClassifierEntry& e : entries_) {
        if (!seen.insert(e.class_name).second)
            raise(ErrorKind::DuplicateClass, "duplicate entry for class '" + e.class_name + "'");
        if (e.forest.num_features != schema_.dim())
            raise(ErrorKind::SchemaMismatch, "forest for '" + e.class_name +
                                                 "' was trained on a different feature count");
        if (e.threshold < 0.0 || e.threshold > 1.0)
            raise(ErrorKind::OutOfRange, "threshold outside [0,1] for '" + e.class_name + "'");
        if (e.weight < 0.0 || e.weight > 1.0)
            raise(ErrorKind::OutOfRange, "weight outside [0,1] for '" + e.class_name + "'");
    }
}

std::vector<double> MetaClassifier::thresholds() const {
    std::vector<double> out;
    out.reserve(entries_.size());
    for (const ClassifierEntry& e : entries_) out.push_back(e.threshold);
    return out;
}

std::vector<double> MetaClassifier::weights() const {
    std::vector<double> out;
    out.reserve(entries_.size());
    for (const ClassifierEntry& e : entries_) out.push_back(e.weight);
    return out;
}

std::vector<double> MetaClassifier::scores(const iforest::FeatureVector& x) const {
    if (x.size() != dim())
        raise(ErrorKind::DimensionMismatch, "probe has " + std::to_string(x.size()) +
                                                " features, model expects " +
                                                std::to_string(dim()));
    std::vector<double> out;
    out.reserve(entries_.size());
    for (const ClassifierEntry& e : entries_) out.push_back(iforest::anomaly_score(e.forest, x));
    return out;
}

Prediction MetaClassifier::classify(const iforest::FeatureVector& x) const {
    const std::vector<double> s = scores(x);
    const std::vector<double> t = thresholds();
    const std::vector<double> w = weights();
    const std::optional<std::size_t> winner = decide(s, t, w);
    Prediction p;
    if (winner) {
        p.known = true;
        p.entry_index = *winner;
        p.class_name = entries_[*winner].class_name;
        p.score = s[*winner];
    }
    return p;
}

std::vector<Prediction> MetaClassifier::classify_batch(
    const std::vector<iforest::FeatureVector>& xs, unsigned threads) const {
    for (const iforest::FeatureVector& x : xs) {
        if (x.size() != dim())
            raise(ErrorKind::DimensionMismatch, "batch row has wrong feature count");
    }
    std::vector<Prediction> out(xs.size());
    parallel_chunks(xs.size(), threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) out[i] = classify(xs[i]);
    });
    return out;
}

MetaClassifier MetaClassifier::with_thresholds(const std::vector<double>& thresholds) const {
    if (thresholds.size() != entries_.size())
        raise(ErrorKind::LengthMismatch, "got " + std::to_string(thresholds.size()) +
                                             " thresholds for " + std::to_string(entries_.size()) +
                                             " entries");
    for (double t : thresholds) {
        if (!(t >= 0.0 && t <= 1.0))
            raise(ErrorKind::OutOfRange, "threshold " + std::to_string(t) + " outside [0,1]");
    }
    std::vector<ClassifierEntry> entries = entries_;
    for (std::size_t i = 0; i < entries.size(); ++i) entries[i].threshold = thresholds[i];
    return MetaClassifier(schema_, std::move(entries), provenance_);
}

MetaClassifier MetaClassifier::with_weights(const std::vector<double>& weights) const {
    if (weights.size() != entries_.size())
        raise(ErrorKind::LengthMismatch, "got " + std::to_string(weights.size()) +
                                             " weights for " + std::to_string(entries_.size()) +
                                             " entries");
    for (double w : weights) {
        if (!(w >= 0.0 && w <= 1.0))
            raise(ErrorKind::OutOfRange, "weight " + std::to_string(w) + " outside [0,1]");
    }
    std::vector<ClassifierEntry> entries = entries_;
    for (std::size_t i = 0; i < entries.size(); ++i) entries[i].weight = weights[i];
    return MetaClassifier(schema_, std::move(entries), provenance_);
}

MetaClassifier MetaClassifier::with_provenance(Provenance provenance) const {
    return MetaClassifier(schema_, entries_, std::move(provenance));
}

MetaClassifier MetaClassifier::merged_with(
    const Schema& external_schema, const std::vector<ClassifierEntry>& external_entries) const {
    if (!(external_schema == schema_))
        raise(ErrorKind::SchemaMismatch,
              "external model uses different features or normalization parameters");
    std::vector<ClassifierEntry> entries = entries_;
    for (const ClassifierEntry& e : external_entries) {
        const auto clash = std::find_if(entries.begin(), entries.end(), [&](const auto& mine) {
            return mine.class_name == e.class_name;
        });
        if (clash != entries.end())
            raise(ErrorKind::DuplicateClass, "class '" + e.class_name + "' exists in both models");
        entries.push_back(e);
    }
    Provenance provenance = provenance_;
    provenance.needs_reoptimization = true;
    return MetaClassifier(schema_, std::move(entries), std::move(provenance));
}

std::vector<ClassifierEntry> train_per_class(const std::vector<data::LabeledRecord>& train,
                                             const TrainParams& params) {
    // Group rows per class, first-appearance order.
    std::vector<std::string> order;
    std::unordered_map<std::string, std::vector<iforest::FeatureVector>> by_class;
    for (const data::LabeledRecord& r : train) {
        if (r.label == data::kBenignLabel && !params.include_benign) continue;
        if (by_class.find(r.label) == by_class.end()) order.push_back(r.label);
        by_class[r.label].push_back(r.features);
    }
    if (order.empty())
        raise(ErrorKind::EmptyTrainingSet, "no attack-class records in the training set");

    const Rng master(params.seed);
    std::vector<ClassifierEntry> entries;
    entries.reserve(order.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        const std::vector<iforest::FeatureVector>& rows = by_class[order[i]];
        if (rows.empty())
            raise(ErrorKind::EmptyTrainingSet, "class '" + order[i] + "' has no records");
        iforest::ForestParams fp;
        fp.num_trees = params.num_trees;
        fp.sample_size = params.sample_size;
        fp.seed = master.fork(i).seed();
        fp.threads = params.threads;
        entries.push_back(ClassifierEntry{order[i], iforest::build_forest(rows, fp), 0.5, 1.0});
    }
    return entries;
}

std::vector<double> compute_weights(const MetaClassifier& meta,
                                    const std::vector<data::LabeledRecord>& validation,
                                    unsigned threads) {
    std::unordered_map<std::string, std::size_t> entry_of;
    for (std::size_t i = 0; i < meta.size(); ++i)
        entry_of.emplace(meta.entries()[i].class_name, i);
    std::unordered_set<std::string> present;
    for (const data::LabeledRecord& r : validation) present.insert(r.label);
    for (const ClassifierEntry& e : meta.entries()) {
        if (!present.contains(e.class_name))
            raise(ErrorKind::MissingClassInValidation,
                  "validation set has no records of class '" + e.class_name + "'");
    }

    std::vector<iforest::FeatureVector> xs;
    xs.reserve(validation.size());
    for (const data::LabeledRecord& r : validation) xs.push_back(r.features);
    const std::vector<Prediction> predictions = meta.classify_batch(xs, threads);

    const std::size_t n = meta.size();
    std::vector<std::uint64_t> tp(n, 0), fp(n, 0), fn(n, 0);
    for (std::size_t i = 0; i < validation.size(); ++i) {
        const auto truth = entry_of.find(validation[i].label);
        const Prediction& p = predictions[i];
        if (p.known) {
            if (truth != entry_of.end() && truth->second == p.entry_index) {
                ++tp[p.entry_index];
            } else {
                ++fp[p.entry_index];
                if (truth != entry_of.end()) ++fn[truth->second];
            }
        } else if (truth != entry_of.end()) {
            ++fn[truth->second];
        }
    }

    std::vector<double> f1(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double denom_p = static_cast<double>(tp[i] + fp[i]);
        const double denom_r = static_cast<double>(tp[i] + fn[i]);
        const double precision = denom_p > 0 ? static_cast<double>(tp[i]) / denom_p : 0.0;
        const double recall = denom_r > 0 ? static_cast<double>(tp[i]) / denom_r : 0.0;
        f1[i] = (precision + recall) > 0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
    }
    return f1;
}

} // namespace ifmeta::meta
