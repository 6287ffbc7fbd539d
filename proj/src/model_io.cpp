#include "ifmeta/model_io.hpp"

#include <cstdlib>
#include <ctime>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "ifmeta/errors.hpp"

namespace ifmeta::meta {

namespace {

using nlohmann::json;

json node_to_json(const iforest::IsolationTree& tree, std::uint32_t index) {
    const iforest::Node& node = tree.nodes[index];
    if (node.is_external()) return json{{"size", node.size}};
    return json{{"split_feature", node.feature},
                {"split_value", node.split},
                {"left", node_to_json(tree, node.left)},
                {"right", node_to_json(tree, node.right)}};
}

const json& require(const json& j, const char* key) {
    const auto it = j.find(key);
    if (it == j.end()) raise(ErrorKind::CorruptDocument, std::string("missing key '") + key + "'");
    return *it;
}

double require_number(const json& j, const char* key) {
    const json& v = require(j, key);
    if (!v.is_number()) raise(ErrorKind::CorruptDocument, std::string(key) + " is not a number");
    return v.get<double>();
}

std::uint64_t require_count(const json& j, const char* key) {
    const json& v = require(j, key);
    if (!v.is_number_unsigned())
        raise(ErrorKind::CorruptDocument, std::string(key) + " is not a non-negative integer");
    return v.get<std::uint64_t>();
}

std::string require_string(const json& j, const char* key) {
    const json& v = require(j, key);
    if (!v.is_string()) raise(ErrorKind::CorruptDocument, std::string(key) + " is not a string");
    return v.get<std::string>();
}

std::uint32_t node_from_json(const json& j, iforest::IsolationTree& tree, std::size_t dim,
                             int depth) {
    if (depth > 64) raise(ErrorKind::CorruptDocument, "tree nesting too deep");
    if (!j.is_object()) raise(ErrorKind::CorruptDocument, "tree node is not an object");
    const std::uint32_t index = static_cast<std::uint32_t>(tree.nodes.size());
    if (j.contains("size")) {
        tree.nodes.push_back(iforest::Node{-1, 0.0, 0, 0, require_count(j, "size")});
        return index;
    }
    const double split_feature = require_number(j, "split_feature");
    const double split_value = require_number(j, "split_value");
    if (split_feature < 0 || split_feature >= static_cast<double>(dim) ||
        split_feature != static_cast<double>(static_cast<std::int32_t>(split_feature)))
        raise(ErrorKind::SchemaMismatch, "split_feature outside the schema's feature range");
    tree.nodes.push_back(
        iforest::Node{static_cast<std::int32_t>(split_feature), split_value, 0, 0, 0});
    const std::uint32_t left = node_from_json(require(j, "left"), tree, dim, depth + 1);
    const std::uint32_t right = node_from_json(require(j, "right"), tree, dim, depth + 1);
    tree.nodes[index].left = left;
    tree.nodes[index].right = right;
    return index;
}

json forest_to_json(const iforest::IsolationForest& forest) {
    json trees = json::array();
    for (const iforest::IsolationTree& tree : forest.trees)
        trees.push_back(node_to_json(tree, 0));
    return json{{"num_trees", forest.trees.size()},
                {"sample_size", forest.sample_size},
                {"seed", forest.seed},
                {"trees", std::move(trees)}};
}

iforest::IsolationForest forest_from_json(const json& j, std::size_t dim) {
    iforest::IsolationForest forest;
    forest.sample_size = require_count(j, "sample_size");
    forest.seed = require_count(j, "seed");
    forest.num_features = dim;
    const json& trees = require(j, "trees");
    if (!trees.is_array() || trees.empty())
        raise(ErrorKind::CorruptDocument, "forest has no trees");
    if (require_count(j, "num_trees") != trees.size())
        raise(ErrorKind::CorruptDocument, "num_trees disagrees with the tree list");
    const std::uint32_t height_limit = iforest::height_limit_for(forest.sample_size);
    for (const json& t : trees) {
        iforest::IsolationTree tree;
        tree.height_limit = height_limit;
        tree.sample_size = forest.sample_size;
        tree.num_features = dim;
        node_from_json(t, tree, dim, 0);
        forest.trees.push_back(std::move(tree));
    }
    return forest;
}

} // namespace

std::string export_model(const MetaClassifier& meta) {
    json normalization = json::array();
    for (const auto& [lo, hi] : meta.schema().normalization.ranges)
        normalization.push_back(json{{"min", lo}, {"max", hi}});

    json entries = json::array();
    for (const ClassifierEntry& e : meta.entries()) {
        entries.push_back(json{{"class", e.class_name},
                               {"threshold", e.threshold},
                               {"weight", e.weight},
                               {"forest", forest_to_json(e.forest)}});
    }

    const Provenance& prov = meta.provenance();
    json doc{{"format_version", kModelFormatVersion},
             {"schema",
              {{"feature_names", meta.schema().feature_names},
               {"normalization", std::move(normalization)}}},
             {"entries", std::move(entries)},
             {"provenance",
              {{"training_seed", prov.training_seed},
               {"created_at", prov.created_at},
               {"source_node", prov.source_node},
               {"needs_reoptimization", prov.needs_reoptimization},
               {"requested_trees", prov.requested_trees},
               {"requested_sample_size", prov.requested_sample_size}}}};
    return doc.dump(2);
}

void export_model_file(const MetaClassifier& meta, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) raise(ErrorKind::IoFailure, "cannot write " + path.string());
    out << export_model(meta) << '\n';
    if (!out) raise(ErrorKind::IoFailure, "write failed: " + path.string());
}

MetaClassifier import_model(const std::string& document) {
    json doc;
    try {
        doc = json::parse(document);
    } catch (const json::exception& e) {
        raise(ErrorKind::CorruptDocument, e.what());
    }
    try {
        if (!doc.is_object()) raise(ErrorKind::CorruptDocument, "top level is not an object");
        const json& version = require(doc, "format_version");
        if (!version.is_number_integer() || version.get<int>() != kModelFormatVersion)
            raise(ErrorKind::UnsupportedVersion,
                  "format_version " + version.dump() + ", supported: " +
                      std::to_string(kModelFormatVersion));

        const json& schema_json = require(doc, "schema");
        Schema schema;
        const json& names = require(schema_json, "feature_names");
        if (!names.is_array()) raise(ErrorKind::CorruptDocument, "feature_names is not an array");
        for (const json& n : names) {
            if (!n.is_string()) raise(ErrorKind::CorruptDocument, "feature name is not a string");
            schema.feature_names.push_back(n.get<std::string>());
        }
        for (std::size_t i = 0; i < schema.feature_names.size(); ++i) {
            for (std::size_t k = i + 1; k < schema.feature_names.size(); ++k) {
                if (schema.feature_names[i] == schema.feature_names[k])
                    raise(ErrorKind::SchemaMismatch,
                          "duplicate feature name '" + schema.feature_names[i] + "'");
            }
        }
        const json& normalization = require(schema_json, "normalization");
        if (!normalization.is_array())
            raise(ErrorKind::CorruptDocument, "normalization is not an array");
        for (const json& r : normalization) {
            const double lo = require_number(r, "min");
            const double hi = require_number(r, "max");
            if (hi < lo) raise(ErrorKind::SchemaMismatch, "normalization range has max < min");
            schema.normalization.ranges.emplace_back(lo, hi);
        }
        if (schema.normalization.dim() != schema.feature_names.size())
            raise(ErrorKind::SchemaMismatch,
                  "normalization does not cover every feature");

        const json& entries_json = require(doc, "entries");
        if (!entries_json.is_array() || entries_json.empty())
            raise(ErrorKind::CorruptDocument, "entries missing or empty");
        std::vector<ClassifierEntry> entries;
        for (const json& e : entries_json) {
            ClassifierEntry entry;
            entry.class_name = require_string(e, "class");
            entry.threshold = require_number(e, "threshold");
            entry.weight = require_number(e, "weight");
            entry.forest = forest_from_json(require(e, "forest"), schema.dim());
            entries.push_back(std::move(entry));
        }

        Provenance prov;
        const json& prov_json = require(doc, "provenance");
        prov.training_seed = require_count(prov_json, "training_seed");
        prov.created_at = require_string(prov_json, "created_at");
        prov.source_node = require_string(prov_json, "source_node");
        const json& flag = require(prov_json, "needs_reoptimization");
        if (!flag.is_boolean())
            raise(ErrorKind::CorruptDocument, "needs_reoptimization is not a boolean");
        prov.needs_reoptimization = flag.get<bool>();
        prov.requested_trees = require_count(prov_json, "requested_trees");
        prov.requested_sample_size = require_count(prov_json, "requested_sample_size");

        try {
            return MetaClassifier(std::move(schema), std::move(entries), std::move(prov));
        } catch (const Error& e) {
            // Constructor violations coming from a document are corruption,
            // not caller errors.
            if (e.kind() == ErrorKind::OutOfRange || e.kind() == ErrorKind::DuplicateClass ||
                e.kind() == ErrorKind::EmptyTrainingSet)
                raise(ErrorKind::CorruptDocument, e.what());
            throw;
        }
    } catch (const Error&) {
        throw;
    } catch (const json::exception& e) {
        raise(ErrorKind::CorruptDocument, e.what());
    }
}

MetaClassifier import_model_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) raise(ErrorKind::IoFailure, "cannot open " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return import_model(buffer.str());
}

std::string iso8601_utc_now() {
    std::time_t now = std::time(nullptr);
    if (const char* pinned = std::getenv("SOURCE_DATE_EPOCH")) {
        char* end = nullptr;
        const long long v = std::strtoll(pinned, &end, 10);
        if (end && *end == '\0') now = static_cast<std::time_t>(v);
    }
    std::tm tm_utc{};
    gmtime_r(&now, &tm_utc);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
    return buf;
}

} // namespace ifmeta::meta
