#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ifmeta/dataset.hpp"
#include "ifmeta/errors.hpp"
#include "ifmeta/experiment.hpp"
#include "ifmeta/meta_classifier.hpp"
#include "ifmeta/metrics.hpp"
#include "ifmeta/model_io.hpp"
#include "ifmeta/pso.hpp"
#include "ifmeta/synthetic.hpp"

namespace {

using namespace ifmeta;
using nlohmann::json;

int exit_code_for(const Error& e) {
    switch (e.kind()) {
    case ErrorKind::InvalidConfig: return 2;
    case ErrorKind::IoFailure: return 4;
    default: return 3; // data or model problem
    }
}

// Defaults overridable by a JSON config file; command-line flags override
// both (flags > config file > built-in defaults).
struct Defaults {
    std::size_t trees = 100;
    std::size_t sample_size = 256;
    std::size_t population = 30;
    std::size_t generations = 50;
    double inertia = 0.729;
    double c1 = 1.49445;
    double c2 = 1.49445;
    double v_max = 0.5;
    std::size_t folds = 5;
    double naive_threshold = 0.5;
    std::size_t attack_classes = 4;
    std::size_t per_class = 200;
    std::size_t dim = 10;
    double overlap = 0.0;
    std::uint64_t seed = 0;
    unsigned threads = 0;

    void load(const std::filesystem::path& path) {
        std::ifstream in(path);
        if (!in) raise(ErrorKind::IoFailure, "cannot open config " + path.string());
        json doc;
        try {
            doc = json::parse(in);
        } catch (const json::exception& e) {
            raise(ErrorKind::CorruptDocument, std::string("config file: ") + e.what());
        }
        const auto get = [&doc](const char* key, auto& into) {
            if (doc.contains(key)) into = doc.at(key).get<std::decay_t<decltype(into)>>();
        };
        get("trees", trees);
        get("sample_size", sample_size);
        get("population", population);
        get("generations", generations);
        get("inertia", inertia);
        get("c1", c1);
        get("c2", c2);
        get("v_max", v_max);
        get("folds", folds);
        get("naive_threshold", naive_threshold);
        get("attack_classes", attack_classes);
        get("per_class", per_class);
        get("dim", dim);
        get("overlap", overlap);
        get("seed", seed);
        get("threads", threads);
    }
};

std::vector<std::string> split_csv_list(const std::string& list) {
    std::vector<std::string> out;
    std::stringstream ss(list);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

data::Dataset load_for_model(const std::filesystem::path& path,
                             const meta::MetaClassifier& model) {
    data::DatasetSchema schema;
    schema.feature_names = model.schema().feature_names;
    return data::load_csv(path, schema);
}

void write_history_csv(const std::vector<double>& history, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) raise(ErrorKind::IoFailure, "cannot write " + path.string());
    out << "generation,best_fitness\n";
    for (std::size_t g = 0; g < history.size(); ++g) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%.17g", history[g]);
        out << g << ',' << buf << '\n';
    }
}

struct GenDataOpts {
    std::size_t classes, per_class, dim;
    double overlap;
    double spread = 0.0; // 0 keeps the per-class pattern
    std::uint64_t seed;
    std::string profile = "uniform";
    std::string output;
};

void cmd_gen_data(const GenDataOpts& o) {
    if (o.per_class < 1) raise(ErrorKind::InvalidConfig, "--per-class must be >= 1");
    if (o.classes < 1) raise(ErrorKind::InvalidConfig, "--classes must be >= 1");
    data::SyntheticConfig config;
    if (o.profile == "imbalanced") {
        config = data::default_synthetic_config(o.seed);
        config.dim = o.dim;
    } else if (o.profile == "uniform") {
        config = data::uniform_synthetic_config(o.classes, o.per_class, o.dim, o.seed);
    } else {
        raise(ErrorKind::InvalidConfig, "unknown profile '" + o.profile + "'");
    }
    config.overlap = o.overlap;
    if (o.spread > 0.0) {
        for (data::ClassSpec& spec : config.classes) spec.spread = o.spread;
    }
    const data::Dataset dataset = data::gen_synthetic(config);
    data::write_csv(dataset, o.output);
    std::cout << "wrote " << dataset.records.size() << " records to " << o.output << " (seed "
              << o.seed << ")\n";
    for (const data::ClassSpec& spec : config.classes)
        std::cout << "  " << spec.name << ": " << spec.count << "\n";
}

struct TrainOpts {
    std::string data_path;
    std::size_t trees, sample_size;
    std::uint64_t seed;
    unsigned threads;
    bool include_benign = false;
    std::string source_node = "local";
    std::string schema_from; // reuse another model's preprocessing contract
    std::string output;
};

void cmd_train(const TrainOpts& o) {
    std::optional<meta::Schema> fixed_schema;
    if (!o.schema_from.empty())
        fixed_schema = meta::import_model_file(o.schema_from).schema();

    data::Dataset dataset;
    if (fixed_schema) {
        data::DatasetSchema csv_schema;
        csv_schema.feature_names = fixed_schema->feature_names;
        dataset = data::load_csv(o.data_path, csv_schema);
    } else {
        dataset = data::load_csv(o.data_path);
    }
    std::vector<data::LabeledRecord> training;
    for (const data::LabeledRecord& r : dataset.records) {
        if (r.label != data::kBenignLabel || o.include_benign) training.push_back(r);
    }
    if (training.empty())
        raise(ErrorKind::EmptyTrainingSet, "no attack-class records in " + o.data_path);
    const data::NormalizationParams norm =
        fixed_schema ? fixed_schema->normalization : data::normalize_fit(training);
    const std::vector<data::LabeledRecord> normalized = data::normalize_apply(norm, training);

    meta::TrainParams params;
    params.num_trees = o.trees;
    params.sample_size = o.sample_size;
    params.seed = o.seed;
    params.threads = o.threads;
    params.include_benign = o.include_benign;

    meta::Provenance prov;
    prov.training_seed = o.seed;
    prov.created_at = meta::iso8601_utc_now();
    prov.source_node = o.source_node;
    prov.requested_trees = o.trees;
    prov.requested_sample_size = o.sample_size;

    const meta::MetaClassifier model(meta::Schema{dataset.feature_names, norm},
                                     meta::train_per_class(normalized, params), prov);
    meta::export_model_file(model, o.output);
    std::cout << "trained " << model.size() << " per-class forests (trees " << o.trees
              << ", sample size " << o.sample_size << ", seed " << o.seed << ") -> " << o.output
              << "\n";
    for (const meta::ClassifierEntry& e : model.entries())
        std::cout << "  " << e.class_name << ": threshold " << e.threshold << "\n";
}

struct OptimizeOpts {
    std::string model_path, data_path;
    pso::PsoConfig pso;
    std::string output;
    std::string history_path;
};

void cmd_optimize(const OptimizeOpts& o) {
    meta::MetaClassifier model = meta::import_model_file(o.model_path);
    const data::Dataset dataset = load_for_model(o.data_path, model);
    const std::vector<data::LabeledRecord> normalized =
        data::normalize_apply(model.schema().normalization, dataset.records);
    std::vector<data::LabeledRecord> attack_validation, benign_validation;
    for (const data::LabeledRecord& r : normalized) {
        (r.label == data::kBenignLabel ? benign_validation : attack_validation).push_back(r);
    }

    const pso::FitnessContext ctx(model, attack_validation, benign_validation, o.pso.threads);
    const pso::OptimizeResult result = pso::optimize(o.pso, ctx);
    model = model.with_thresholds(result.best_position);
    model = model.with_weights(meta::compute_weights(model, attack_validation, o.pso.threads));

    meta::Provenance prov = model.provenance();
    prov.needs_reoptimization = false;
    prov.created_at = meta::iso8601_utc_now();
    model = model.with_provenance(prov);
    meta::export_model_file(model, o.output);
    if (!o.history_path.empty()) write_history_csv(result.history, o.history_path);

    std::cout << "optimized thresholds over " << result.history.size() - 1 << " generations (seed "
              << o.pso.seed << "), fitness " << result.best_fitness << " -> " << o.output << "\n";
    for (std::size_t i = 0; i < model.size(); ++i)
        std::cout << "  " << model.entries()[i].class_name << ": threshold "
                  << model.entries()[i].threshold << ", weight " << model.entries()[i].weight
                  << "\n";
}

struct ClassifyOpts {
    std::string model_path, input_path, output;
    bool verbose_scores = false;
    unsigned threads = 0;
};

void cmd_classify(const ClassifyOpts& o) {
    const meta::MetaClassifier model = meta::import_model_file(o.model_path);
    const data::FeatureTable table =
        data::load_feature_csv(o.input_path, model.schema().feature_names);

    std::ofstream out(o.output);
    if (!out) raise(ErrorKind::IoFailure, "cannot write " + o.output);
    out << "predicted,score";
    if (o.verbose_scores) {
        for (const meta::ClassifierEntry& e : model.entries()) out << ",score_" << e.class_name;
    }
    out << '\n';

    std::vector<iforest::FeatureVector> normalized;
    normalized.reserve(table.rows.size());
    for (const iforest::FeatureVector& row : table.rows)
        normalized.push_back(data::normalize_apply(model.schema().normalization, row));

    const std::vector<meta::Prediction> predictions =
        model.classify_batch(normalized, o.threads);
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        const meta::Prediction& p = predictions[i];
        char buf[64];
        if (p.known) {
            std::snprintf(buf, sizeof(buf), "%.17g", p.score);
            out << p.class_name << ',' << buf;
        } else {
            out << "unknown,";
        }
        if (o.verbose_scores) {
            for (double s : model.scores(normalized[i])) {
                std::snprintf(buf, sizeof(buf), "%.17g", s);
                out << ',' << buf;
            }
        }
        out << '\n';
    }
    if (!out) raise(ErrorKind::IoFailure, "write failed: " + o.output);
    std::cout << "classified " << predictions.size() << " rows -> " << o.output << "\n";
}

struct EvaluateOpts {
    std::string data_path;
    eval::ExperimentConfig config;
    std::string scenario_list;
    std::string json_path, table_path, csv_path;
};

void cmd_evaluate(EvaluateOpts& o) {
    const data::Dataset dataset = data::load_csv(o.data_path);
    o.config.dataset_path = o.data_path;
    if (!o.scenario_list.empty()) o.config.scenarios = split_csv_list(o.scenario_list);
    const eval::ExperimentReport report = eval::run_experiment(dataset, o.config);

    bool wrote = false;
    if (!o.json_path.empty()) {
        eval::emit_report(report, eval::ReportFormat::Json, o.json_path);
        wrote = true;
    }
    if (!o.table_path.empty()) {
        eval::emit_report(report, eval::ReportFormat::Table, o.table_path);
        wrote = true;
    }
    if (!o.csv_path.empty()) {
        eval::emit_report(report, eval::ReportFormat::Csv, o.csv_path);
        wrote = true;
    }
    if (!wrote) std::cout << eval::render_table(report);
    std::fprintf(stderr, "evaluate: %zu scenarios x %zu folds in %.2f s\n",
                 report.scenarios.size(), o.config.folds, report.wall_seconds);
}

struct MergeOpts {
    std::string base_path, extra_path, output;
};

void cmd_merge(const MergeOpts& o) {
    const meta::MetaClassifier base = meta::import_model_file(o.base_path);
    const meta::MetaClassifier extra = meta::import_model_file(o.extra_path);
    const meta::MetaClassifier merged = base.merged_with(extra.schema(), extra.entries());
    meta::export_model_file(merged, o.output);
    std::cout << "merged " << base.size() << " + " << extra.size() << " entries -> " << o.output
              << "\n";
    std::cerr << "warning: merged thresholds are stale; re-optimize before deploying\n";
}

struct CopyOpts {
    std::string input, output;
};

void cmd_model_copy(const CopyOpts& o) {
    // Validate + canonical re-emit; `export` and `import` are aliases.
    meta::export_model_file(meta::import_model_file(o.input), o.output);
    std::cout << "validated model " << o.input << " -> " << o.output << "\n";
}

} // namespace

int main(int argc, char** argv) {
    Defaults defaults;
    try {
        for (int i = 1; i < argc; ++i) {
            const std::string arg = argv[i];
            if (arg == "--config" && i + 1 < argc) {
                defaults.load(argv[i + 1]);
            } else if (arg.rfind("--config=", 0) == 0) {
                defaults.load(arg.substr(9));
            }
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code_for(e);
    }

    CLI::App app{"per-attack-class isolation forests with PSO-tuned thresholds and "
                 "zero-day rejection"};
    app.require_subcommand(1);
    std::string config_dummy;

    GenDataOpts gen{};
    gen.classes = defaults.attack_classes;
    gen.per_class = defaults.per_class;
    gen.dim = defaults.dim;
    gen.overlap = defaults.overlap;
    gen.seed = defaults.seed == 0 ? 1 : defaults.seed;
    CLI::App* gen_cmd = app.add_subcommand("gen-data", "generate a synthetic flow-feature CSV");
    gen_cmd->add_option("--classes", gen.classes, "number of attack classes");
    gen_cmd->add_option("--per-class", gen.per_class, "records per class (uniform profile)");
    gen_cmd->add_option("--dim", gen.dim, "feature dimension");
    gen_cmd->add_option("--overlap", gen.overlap, "0 = well separated, 1 = coincident");
    gen_cmd->add_option("--spread", gen.spread, "override every class's cluster spread");
    gen_cmd->add_option("--profile", gen.profile, "uniform | imbalanced");
    gen_cmd->add_option("--seed", gen.seed, "generator seed");
    gen_cmd->add_option("--config", config_dummy, "JSON config file");
    gen_cmd->add_option("-o,--output", gen.output, "output CSV")->required();
    gen_cmd->callback([&] { cmd_gen_data(gen); });

    TrainOpts train{};
    train.trees = defaults.trees;
    train.sample_size = defaults.sample_size;
    train.seed = defaults.seed;
    train.threads = defaults.threads;
    CLI::App* train_cmd = app.add_subcommand("train", "train one isolation forest per attack class");
    train_cmd->add_option("--data", train.data_path, "training CSV")->required();
    train_cmd->add_option("--trees", train.trees, "trees per forest");
    train_cmd->add_option("--sample-size", train.sample_size, "subsample size per tree");
    train_cmd->add_option("--seed", train.seed, "training seed");
    train_cmd->add_option("--threads", train.threads, "worker threads (0 = all)");
    train_cmd->add_flag("--include-benign", train.include_benign,
                        "also train a forest on benign records");
    train_cmd->add_option("--source-node", train.source_node, "provenance node id");
    train_cmd->add_option("--schema-from", train.schema_from,
                          "reuse an existing model's feature schema and normalization");
    train_cmd->add_option("--config", config_dummy, "JSON config file");
    train_cmd->add_option("-o,--output", train.output, "output model JSON")->required();
    train_cmd->callback([&] { cmd_train(train); });

    OptimizeOpts opt{};
    opt.pso.population = defaults.population;
    opt.pso.generations = defaults.generations;
    opt.pso.inertia = defaults.inertia;
    opt.pso.c1 = defaults.c1;
    opt.pso.c2 = defaults.c2;
    opt.pso.v_max = defaults.v_max;
    opt.pso.seed = defaults.seed;
    opt.pso.threads = defaults.threads;
    CLI::App* opt_cmd =
        app.add_subcommand("optimize", "PSO-optimize per-class thresholds on a validation CSV");
    opt_cmd->add_option("--model", opt.model_path, "input model JSON")->required();
    opt_cmd->add_option("--data", opt.data_path, "validation CSV (attack + benign records)")
        ->required();
    opt_cmd->add_option("--population", opt.pso.population, "particles");
    opt_cmd->add_option("--generations", opt.pso.generations, "generations");
    opt_cmd->add_option("--inertia", opt.pso.inertia, "inertia weight w");
    opt_cmd->add_option("--c1", opt.pso.c1, "cognitive acceleration");
    opt_cmd->add_option("--c2", opt.pso.c2, "social acceleration");
    opt_cmd->add_option("--v-max", opt.pso.v_max, "velocity clamp");
    opt_cmd->add_option("--seed", opt.pso.seed, "swarm seed");
    opt_cmd->add_option("--threads", opt.pso.threads, "worker threads (0 = all)");
    opt_cmd->add_option("--history", opt.history_path, "fitness history CSV");
    opt_cmd->add_option("--config", config_dummy, "JSON config file");
    opt_cmd->add_option("-o,--output", opt.output, "output model JSON")->required();
    opt_cmd->callback([&] { cmd_optimize(opt); });

    ClassifyOpts cls{};
    cls.threads = defaults.threads;
    CLI::App* cls_cmd = app.add_subcommand("classify", "label a CSV of flow features");
    cls_cmd->add_option("--model", cls.model_path, "model JSON")->required();
    cls_cmd->add_option("--input", cls.input_path, "input CSV (label column optional)")
        ->required();
    cls_cmd->add_flag("--verbose-scores", cls.verbose_scores, "emit per-class scores");
    cls_cmd->add_option("--threads", cls.threads, "worker threads (0 = all)");
    cls_cmd->add_option("--config", config_dummy, "JSON config file");
    cls_cmd->add_option("-o,--output", cls.output, "predictions CSV")->required();
    cls_cmd->callback([&] { cmd_classify(cls); });

    EvaluateOpts ev{};
    ev.config.trees = defaults.trees;
    ev.config.sample_size = defaults.sample_size;
    ev.config.pso.population = defaults.population;
    ev.config.pso.generations = defaults.generations;
    ev.config.pso.inertia = defaults.inertia;
    ev.config.pso.c1 = defaults.c1;
    ev.config.pso.c2 = defaults.c2;
    ev.config.pso.v_max = defaults.v_max;
    ev.config.folds = defaults.folds;
    ev.config.naive_threshold = defaults.naive_threshold;
    ev.config.master_seed = defaults.seed;
    ev.config.threads = defaults.threads;
    CLI::App* ev_cmd = app.add_subcommand(
        "evaluate", "leave-one-attack-out x k-fold experiment with the naive baseline");
    ev_cmd->add_option("--data", ev.data_path, "dataset CSV")->required();
    ev_cmd->add_option("--folds", ev.config.folds, "cross-validation folds");
    ev_cmd->add_option("--scenarios", ev.scenario_list,
                       "comma-separated zero-day classes (default: all)");
    ev_cmd->add_option("--trees", ev.config.trees, "trees per forest");
    ev_cmd->add_option("--sample-size", ev.config.sample_size, "subsample size per tree");
    ev_cmd->add_option("--population", ev.config.pso.population, "PSO particles");
    ev_cmd->add_option("--generations", ev.config.pso.generations, "PSO generations");
    ev_cmd->add_option("--inertia", ev.config.pso.inertia, "PSO inertia");
    ev_cmd->add_option("--c1", ev.config.pso.c1, "PSO cognitive acceleration");
    ev_cmd->add_option("--c2", ev.config.pso.c2, "PSO social acceleration");
    ev_cmd->add_option("--v-max", ev.config.pso.v_max, "PSO velocity clamp");
    ev_cmd->add_option("--naive-threshold", ev.config.naive_threshold,
                       "fixed threshold for the baseline");
    ev_cmd->add_option("--seed", ev.config.master_seed, "master seed");
    ev_cmd->add_option("--threads", ev.config.threads, "worker threads (0 = all)");
    ev_cmd->add_option("--json", ev.json_path, "structured report path");
    ev_cmd->add_option("--table", ev.table_path, "aligned table path");
    ev_cmd->add_option("--csv", ev.csv_path, "CSV report path");
    ev_cmd->add_option("--config", config_dummy, "JSON config file");
    ev_cmd->callback([&] { cmd_evaluate(ev); });

    MergeOpts merge{};
    CLI::App* merge_cmd =
        app.add_subcommand("merge", "extend a model with another node's entries");
    merge_cmd->add_option("--base", merge.base_path, "base model JSON")->required();
    merge_cmd->add_option("--extra", merge.extra_path, "model whose entries to add")->required();
    merge_cmd->add_option("--config", config_dummy, "JSON config file");
    merge_cmd->add_option("-o,--output", merge.output, "merged model JSON")->required();
    merge_cmd->callback([&] { cmd_merge(merge); });

    CopyOpts exp{};
    CLI::App* exp_cmd = app.add_subcommand("export", "validate and canonically re-emit a model");
    exp_cmd->add_option("--model", exp.input, "model JSON")->required();
    exp_cmd->add_option("-o,--output", exp.output, "output path")->required();
    exp_cmd->add_option("--config", config_dummy, "JSON config file");
    exp_cmd->callback([&] { cmd_model_copy(exp); });

    CopyOpts imp{};
    CLI::App* imp_cmd = app.add_subcommand("import", "validate a received model document");
    imp_cmd->add_option("--doc", imp.input, "model document")->required();
    imp_cmd->add_option("-o,--output", imp.output, "output path")->required();
    imp_cmd->add_option("--config", config_dummy, "JSON config file");
    imp_cmd->callback([&] { cmd_model_copy(imp); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code_for(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
