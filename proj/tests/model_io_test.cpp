#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <functional>

#include <json.hpp>

#include "ifmeta/errors.hpp"
#include "ifmeta/meta_classifier.hpp"
#include "ifmeta/model_io.hpp"
#include "ifmeta/synthetic.hpp"

using namespace ifmeta;
using namespace ifmeta::meta;

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

MetaClassifier sample_model(std::uint64_t seed = 5) {
    data::SyntheticConfig config = data::uniform_synthetic_config(3, 80, 5, seed);
    const data::Dataset d = data::gen_synthetic(config);
    std::vector<data::LabeledRecord> train;
    for (const data::LabeledRecord& r : d.records)
        if (r.label != data::kBenignLabel) train.push_back(r);
    const data::NormalizationParams norm = data::normalize_fit(train);
    TrainParams params;
    params.num_trees = 25;
    params.sample_size = 48;
    params.seed = seed;
    Provenance prov;
    prov.training_seed = seed;
    prov.created_at = "2024-05-01T00:00:00Z";
    prov.source_node = "node-a";
    prov.requested_trees = params.num_trees;
    prov.requested_sample_size = params.sample_size;
    return MetaClassifier(Schema{d.feature_names, norm},
                          train_per_class(data::normalize_apply(norm, train), params), prov);
}

bool same_forest(const iforest::IsolationForest& a, const iforest::IsolationForest& b) {
    if (a.trees.size() != b.trees.size() || a.sample_size != b.sample_size) return false;
    for (std::size_t t = 0; t < a.trees.size(); ++t) {
        if (a.trees[t].nodes.size() != b.trees[t].nodes.size()) return false;
        for (std::size_t n = 0; n < a.trees[t].nodes.size(); ++n) {
            const iforest::Node& x = a.trees[t].nodes[n];
            const iforest::Node& y = b.trees[t].nodes[n];
            if (x.feature != y.feature || x.split != y.split || x.left != y.left ||
                x.right != y.right || x.size != y.size)
                return false;
        }
    }
    return true;
}

} // namespace

TEST_CASE("export -> import preserves trees bit-exactly and predictions verbatim") {
    const MetaClassifier model = sample_model();
    const std::string doc = export_model(model);
    const MetaClassifier back = import_model(doc);

    REQUIRE(back.size() == model.size());
    CHECK(back.schema() == model.schema());
    CHECK(back.thresholds() == model.thresholds());
    CHECK(back.weights() == model.weights());
    CHECK(back.provenance().created_at == model.provenance().created_at);
    CHECK(back.provenance().source_node == model.provenance().source_node);
    for (std::size_t i = 0; i < model.size(); ++i)
        CHECK(same_forest(model.entries()[i].forest, back.entries()[i].forest));

    Rng rng(9);
    for (int i = 0; i < 100; ++i) {
        iforest::FeatureVector x(model.dim());
        for (double& v : x) v = rng.uniform();
        const Prediction a = model.classify(x);
        const Prediction b = back.classify(x);
        CHECK(a.known == b.known);
        CHECK(a.class_name == b.class_name);
        CHECK(a.score == b.score);
    }

    // canonical: exporting the imported model reproduces the document
    CHECK(export_model(back) == doc);
}

TEST_CASE("file round trip") {
    const MetaClassifier model = sample_model(11);
    const auto path = std::filesystem::temp_directory_path() / "ifmeta_model_io_test.json";
    export_model_file(model, path);
    const MetaClassifier back = import_model_file(path);
    CHECK(back.size() == model.size());
    CHECK(export_model(back) == export_model(model));
    std::filesystem::remove(path);
}

TEST_CASE("truncated document is corrupt") {
    const std::string doc = export_model(sample_model());
    const std::string truncated = doc.substr(0, doc.size() / 2);
    CHECK(kind_of([&] { import_model(truncated); }) == ErrorKind::CorruptDocument);
    CHECK(kind_of([&] { import_model(""); }) == ErrorKind::CorruptDocument);
    CHECK(kind_of([&] { import_model("[]"); }) == ErrorKind::CorruptDocument);
}

TEST_CASE("foreign format version is rejected") {
    nlohmann::json doc = nlohmann::json::parse(export_model(sample_model()));
    doc["format_version"] = 999;
    CHECK(kind_of([&] { import_model(doc.dump()); }) == ErrorKind::UnsupportedVersion);
}

TEST_CASE("schema inconsistencies are rejected") {
    const std::string base = export_model(sample_model());

    nlohmann::json missing_norm = nlohmann::json::parse(base);
    missing_norm["schema"]["normalization"].erase(0);
    CHECK(kind_of([&] { import_model(missing_norm.dump()); }) == ErrorKind::SchemaMismatch);

    nlohmann::json bad_feature = nlohmann::json::parse(base);
    bad_feature["entries"][0]["forest"]["trees"][0]["split_feature"] = 99;
    CHECK(kind_of([&] { import_model(bad_feature.dump()); }) == ErrorKind::SchemaMismatch);

    nlohmann::json dup_names = nlohmann::json::parse(base);
    dup_names["schema"]["feature_names"][1] = dup_names["schema"]["feature_names"][0];
    CHECK(kind_of([&] { import_model(dup_names.dump()); }) == ErrorKind::SchemaMismatch);
}

TEST_CASE("malformed entries are corrupt") {
    const std::string base = export_model(sample_model());

    nlohmann::json bad_threshold = nlohmann::json::parse(base);
    bad_threshold["entries"][0]["threshold"] = 1.5;
    CHECK(kind_of([&] { import_model(bad_threshold.dump()); }) == ErrorKind::CorruptDocument);

    nlohmann::json dup_class = nlohmann::json::parse(base);
    dup_class["entries"][1]["class"] = dup_class["entries"][0]["class"];
    CHECK(kind_of([&] { import_model(dup_class.dump()); }) == ErrorKind::CorruptDocument);

    nlohmann::json no_entries = nlohmann::json::parse(base);
    no_entries["entries"] = nlohmann::json::array();
    CHECK(kind_of([&] { import_model(no_entries.dump()); }) == ErrorKind::CorruptDocument);

    nlohmann::json bad_tree_count = nlohmann::json::parse(base);
    bad_tree_count["entries"][0]["forest"]["num_trees"] = 7777;
    CHECK(kind_of([&] { import_model(bad_tree_count.dump()); }) == ErrorKind::CorruptDocument);
}

TEST_CASE("smaller-dimension model raises DimensionMismatch on larger probes") {
    // 5-feature model (sample_model) probed with 12 features
    const MetaClassifier model = import_model(export_model(sample_model()));
    CHECK(kind_of([&] { model.classify(iforest::FeatureVector(12, 0.5)); }) ==
          ErrorKind::DimensionMismatch);
}

TEST_CASE("missing model file raises IoFailure") {
    CHECK(kind_of([&] { import_model_file("/nonexistent/model.json"); }) ==
          ErrorKind::IoFailure);
}
