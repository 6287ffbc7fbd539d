#include "ifmeta/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <charconv>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "ifmeta/errors.hpp"
#include "ifmeta/rng.hpp"

namespace ifmeta::eval {

namespace {

using nlohmann::json;

MetricsReport average_metrics(const std::vector<const MetricsReport*>& reports) {
    MetricsReport avg;
    if (reports.empty()) return avg;
    const double k = static_cast<double>(reports.size());
    avg.per_class.resize(reports.front()->per_class.size());
    for (std::size_t c = 0; c < avg.per_class.size(); ++c)
        avg.per_class[c].class_name = reports.front()->per_class[c].class_name;
    for (const MetricsReport* r : reports) {
        for (std::size_t c = 0; c < avg.per_class.size(); ++c) {
            avg.per_class[c].precision += r->per_class[c].precision;
            avg.per_class[c].recall += r->per_class[c].recall;
            avg.per_class[c].f1 += r->per_class[c].f1;
        }
        avg.macro_precision += r->macro_precision;
        avg.macro_recall += r->macro_recall;
        avg.macro_f1 += r->macro_f1;
        avg.accuracy += r->accuracy;
        avg.zero_day_detection_rate += r->zero_day_detection_rate;
        avg.benign_rejection_rate += r->benign_rejection_rate;
    }
    for (ClassMetrics& m : avg.per_class) {
        m.precision /= k;
        m.recall /= k;
        m.f1 /= k;
    }
    avg.macro_precision /= k;
    avg.macro_recall /= k;
    avg.macro_f1 /= k;
    avg.accuracy /= k;
    avg.zero_day_detection_rate /= k;
    avg.benign_rejection_rate /= k;
    return avg;
}

void accumulate_totals(ApproachTotals& totals, const ApproachAverages& avg, double n_scenarios) {
    totals.macro_precision += avg.metrics.macro_precision / n_scenarios;
    totals.macro_recall += avg.metrics.macro_recall / n_scenarios;
    totals.macro_f1 += avg.metrics.macro_f1 / n_scenarios;
    totals.accuracy += avg.metrics.accuracy / n_scenarios;
    totals.zero_day_detection_rate += avg.metrics.zero_day_detection_rate / n_scenarios;
    totals.benign_rejection_rate += avg.metrics.benign_rejection_rate / n_scenarios;
    totals.fitness += avg.fitness / n_scenarios;
}

json metrics_to_json(const MetricsReport& m) {
    json per_class = json::array();
    for (const ClassMetrics& c : m.per_class) {
        per_class.push_back(json{{"class", c.class_name},
                                 {"precision", c.precision},
                                 {"recall", c.recall},
                                 {"f1", c.f1}});
    }
    return json{{"per_class", std::move(per_class)},
                {"macro_precision", m.macro_precision},
                {"macro_recall", m.macro_recall},
                {"macro_f1", m.macro_f1},
                {"accuracy", m.accuracy},
                {"zero_day_detection_rate", m.zero_day_detection_rate},
                {"benign_rejection_rate", m.benign_rejection_rate}};
}

MetricsReport metrics_from_json(const json& j) {
    MetricsReport m;
    for (const json& c : j.at("per_class")) {
        m.per_class.push_back(ClassMetrics{c.at("class").get<std::string>(),
                                           c.at("precision").get<double>(),
                                           c.at("recall").get<double>(), c.at("f1").get<double>()});
    }
    m.macro_precision = j.at("macro_precision").get<double>();
    m.macro_recall = j.at("macro_recall").get<double>();
    m.macro_f1 = j.at("macro_f1").get<double>();
    m.accuracy = j.at("accuracy").get<double>();
    m.zero_day_detection_rate = j.at("zero_day_detection_rate").get<double>();
    m.benign_rejection_rate = j.at("benign_rejection_rate").get<double>();
    return m;
}

json totals_to_json(const ApproachTotals& t) {
    return json{{"macro_precision", t.macro_precision},
                {"macro_recall", t.macro_recall},
                {"macro_f1", t.macro_f1},
                {"accuracy", t.accuracy},
                {"zero_day_detection_rate", t.zero_day_detection_rate},
                {"benign_rejection_rate", t.benign_rejection_rate},
                {"fitness", t.fitness}};
}

ApproachTotals totals_from_json(const json& j) {
    ApproachTotals t;
    t.macro_precision = j.at("macro_precision").get<double>();
    t.macro_recall = j.at("macro_recall").get<double>();
    t.macro_f1 = j.at("macro_f1").get<double>();
    t.accuracy = j.at("accuracy").get<double>();
    t.zero_day_detection_rate = j.at("zero_day_detection_rate").get<double>();
    t.benign_rejection_rate = j.at("benign_rejection_rate").get<double>();
    t.fitness = j.at("fitness").get<double>();
    return t;
}

std::string format_full(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

std::string format_percent(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v * 100.0);
    return buf;
}

} // namespace

ExperimentReport run_experiment(const data::Dataset& dataset, const ExperimentConfig& config) {
    const auto start = std::chrono::steady_clock::now();

    std::vector<std::string> scenario_classes =
        config.scenarios.empty() ? dataset.attack_classes() : config.scenarios;
    if (scenario_classes.size() < 2)
        raise(ErrorKind::TooFewClasses,
              "leave-one-attack-out needs >= 2 attack classes, got " +
                  std::to_string(scenario_classes.size()));
    const std::vector<std::string> present = dataset.class_names();
    if (std::find(present.begin(), present.end(), std::string(data::kBenignLabel)) ==
        present.end())
        raise(ErrorKind::MissingBenign, "dataset has no benign records");
    for (const std::string& name : scenario_classes) {
        if (std::find(present.begin(), present.end(), name) == present.end())
            raise(ErrorKind::UnknownLabel, "scenario class '" + name + "' not in dataset");
    }

    const Rng master(config.master_seed);
    const auto folds = data::kfold_split(dataset, config.folds, master.fork(1).seed());
    const double validation_fraction =
        config.ratios.validation / (config.ratios.train + config.ratios.validation);

    ExperimentReport report;
    report.config = config;
    report.config.scenarios = scenario_classes;

    for (std::size_t s = 0; s < scenario_classes.size(); ++s) {
        const std::string& zero_day = scenario_classes[s];
        ScenarioResult scenario;
        scenario.zero_day_class = zero_day;

        for (std::size_t f = 0; f < config.folds; ++f) {
            const Rng cell = master.fork(1000 + s * config.folds + f);
            const data::ScenarioSplit split = data::scenario_from_folds(
                dataset, folds, f, zero_day, validation_fraction, cell.fork(0).seed());

            const data::NormalizationParams norm = data::normalize_fit(split.train);
            const auto train_n = data::normalize_apply(norm, split.train);
            const auto attack_val_n = data::normalize_apply(norm, split.attack_validation);
            const auto benign_val_n = data::normalize_apply(norm, split.benign_validation);
            const auto test_n = data::normalize_apply(norm, split.test);

            meta::TrainParams tp;
            tp.num_trees = config.trees;
            tp.sample_size = config.sample_size;
            tp.seed = cell.fork(1).seed();
            tp.threads = config.threads;

            meta::Schema schema{dataset.feature_names, norm};
            meta::Provenance prov;
            prov.training_seed = config.master_seed;
            prov.requested_trees = config.trees;
            prov.requested_sample_size = config.sample_size;
            const meta::MetaClassifier base(schema, meta::train_per_class(train_n, tp), prov);

            const pso::FitnessContext ctx(base, attack_val_n, benign_val_n, config.threads);
            pso::PsoConfig pso_config = config.pso;
            pso_config.seed = cell.fork(2).seed();
            pso_config.threads = config.threads;
            const pso::OptimizeResult opt = pso::optimize(pso_config, ctx);

            meta::MetaClassifier tuned = base.with_thresholds(opt.best_position);
            tuned = tuned.with_weights(meta::compute_weights(tuned, attack_val_n, config.threads));
            meta::MetaClassifier naive = naive_baseline(base, config.naive_threshold);
            naive = naive.with_weights(meta::compute_weights(naive, attack_val_n, config.threads));

            CellResult cell_result;
            cell_result.pso = summarize(tabulate(tuned, test_n, zero_day, config.threads));
            cell_result.naive = summarize(tabulate(naive, test_n, zero_day, config.threads));
            cell_result.pso_fitness = opt.best_fitness;
            cell_result.naive_fitness =
                ctx(std::vector<double>(base.size(), config.naive_threshold));
            cell_result.pso_thresholds = opt.best_position;
            scenario.folds.push_back(std::move(cell_result));
        }

        std::vector<const MetricsReport*> pso_cells, naive_cells;
        for (const CellResult& c : scenario.folds) {
            pso_cells.push_back(&c.pso);
            naive_cells.push_back(&c.naive);
        }
        scenario.pso_average.metrics = average_metrics(pso_cells);
        scenario.naive_average.metrics = average_metrics(naive_cells);
        for (const CellResult& c : scenario.folds) {
            scenario.pso_average.fitness += c.pso_fitness / scenario.folds.size();
            scenario.naive_average.fitness += c.naive_fitness / scenario.folds.size();
        }
        report.scenarios.push_back(std::move(scenario));
    }

    const double n_scenarios = static_cast<double>(report.scenarios.size());
    for (const ScenarioResult& s : report.scenarios) {
        accumulate_totals(report.pso_totals, s.pso_average, n_scenarios);
        accumulate_totals(report.naive_totals, s.naive_average, n_scenarios);
    }

    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

std::string report_to_json(const ExperimentReport& report) {
    const ExperimentConfig& c = report.config;
    json config{{"forest", {{"trees", c.trees}, {"sample_size", c.sample_size}}},
                {"pso",
                 {{"population", c.pso.population},
                  {"generations", c.pso.generations},
                  {"inertia", c.pso.inertia},
                  {"c1", c.pso.c1},
                  {"c2", c.pso.c2},
                  {"v_max", c.pso.v_max}}},
                {"protocol",
                 {{"folds", c.folds},
                  {"scenarios", c.scenarios},
                  {"naive_threshold", c.naive_threshold},
                  {"ratios",
                   {{"train", c.ratios.train},
                    {"validation", c.ratios.validation},
                    {"test", c.ratios.test}}}}},
                {"seed", c.master_seed},
                {"dataset", c.dataset_path}};

    json scenarios = json::array();
    for (const ScenarioResult& s : report.scenarios) {
        json cells = json::array();
        for (const CellResult& cell : s.folds) {
            cells.push_back(json{{"pso", metrics_to_json(cell.pso)},
                                 {"naive", metrics_to_json(cell.naive)},
                                 {"pso_fitness", cell.pso_fitness},
                                 {"naive_fitness", cell.naive_fitness},
                                 {"pso_thresholds", cell.pso_thresholds}});
        }
        scenarios.push_back(
            json{{"zero_day_class", s.zero_day_class},
                 {"folds", std::move(cells)},
                 {"averages",
                  {{"pso", metrics_to_json(s.pso_average.metrics)},
                   {"naive", metrics_to_json(s.naive_average.metrics)},
                   {"pso_fitness", s.pso_average.fitness},
                   {"naive_fitness", s.naive_average.fitness}}}});
    }

    json doc{{"config", std::move(config)},
             {"scenarios", std::move(scenarios)},
             {"totals",
              {{"pso", totals_to_json(report.pso_totals)},
               {"naive", totals_to_json(report.naive_totals)}}}};
    return doc.dump(2);
}

ExperimentReport report_from_json(const std::string& document) {
    json doc;
    try {
        doc = json::parse(document);
        ExperimentReport report;
        const json& config = doc.at("config");
        report.config.trees = config.at("forest").at("trees").get<std::size_t>();
        report.config.sample_size = config.at("forest").at("sample_size").get<std::size_t>();
        const json& pso = config.at("pso");
        report.config.pso.population = pso.at("population").get<std::size_t>();
        report.config.pso.generations = pso.at("generations").get<std::size_t>();
        report.config.pso.inertia = pso.at("inertia").get<double>();
        report.config.pso.c1 = pso.at("c1").get<double>();
        report.config.pso.c2 = pso.at("c2").get<double>();
        report.config.pso.v_max = pso.at("v_max").get<double>();
        const json& protocol = config.at("protocol");
        report.config.folds = protocol.at("folds").get<std::size_t>();
        report.config.scenarios = protocol.at("scenarios").get<std::vector<std::string>>();
        report.config.naive_threshold = protocol.at("naive_threshold").get<double>();
        report.config.ratios.train = protocol.at("ratios").at("train").get<double>();
        report.config.ratios.validation = protocol.at("ratios").at("validation").get<double>();
        report.config.ratios.test = protocol.at("ratios").at("test").get<double>();
        report.config.master_seed = config.at("seed").get<std::uint64_t>();
        report.config.dataset_path = config.at("dataset").get<std::string>();

        for (const json& s : doc.at("scenarios")) {
            ScenarioResult scenario;
            scenario.zero_day_class = s.at("zero_day_class").get<std::string>();
            for (const json& cell : s.at("folds")) {
                CellResult c;
                c.pso = metrics_from_json(cell.at("pso"));
                c.naive = metrics_from_json(cell.at("naive"));
                c.pso_fitness = cell.at("pso_fitness").get<double>();
                c.naive_fitness = cell.at("naive_fitness").get<double>();
                c.pso_thresholds = cell.at("pso_thresholds").get<std::vector<double>>();
                scenario.folds.push_back(std::move(c));
            }
            const json& avg = s.at("averages");
            scenario.pso_average.metrics = metrics_from_json(avg.at("pso"));
            scenario.naive_average.metrics = metrics_from_json(avg.at("naive"));
            scenario.pso_average.fitness = avg.at("pso_fitness").get<double>();
            scenario.naive_average.fitness = avg.at("naive_fitness").get<double>();
            report.scenarios.push_back(std::move(scenario));
        }
        report.pso_totals = totals_from_json(doc.at("totals").at("pso"));
        report.naive_totals = totals_from_json(doc.at("totals").at("naive"));
        return report;
    } catch (const json::exception& e) {
        raise(ErrorKind::CorruptDocument, e.what());
    }
}

namespace {

struct TableRow {
    std::string scenario;
    std::string approach;
    const MetricsReport* metrics;
    double fitness;
};

std::vector<TableRow> collect_rows(const ExperimentReport& report) {
    std::vector<TableRow> rows;
    for (const ScenarioResult& s : report.scenarios) {
        rows.push_back({s.zero_day_class, "naive", &s.naive_average.metrics,
                        s.naive_average.fitness});
        rows.push_back({s.zero_day_class, "pso", &s.pso_average.metrics, s.pso_average.fitness});
    }
    return rows;
}

} // namespace

std::string render_table(const ExperimentReport& report) {
    const std::vector<TableRow> rows = collect_rows(report);
    const std::vector<std::string> headers = {"zero-day scenario", "approach",   "precision",
                                              "recall",            "f1",         "0-day rate",
                                              "benign rej",        "fitness"};
    std::vector<std::vector<std::string>> cells;
    for (const TableRow& r : rows) {
        cells.push_back({r.scenario, r.approach, format_percent(r.metrics->macro_precision),
                         format_percent(r.metrics->macro_recall),
                         format_percent(r.metrics->macro_f1),
                         format_percent(r.metrics->zero_day_detection_rate),
                         format_percent(r.metrics->benign_rejection_rate),
                         format_percent(r.fitness)});
    }
    cells.push_back({"mean", "naive", format_percent(report.naive_totals.macro_precision),
                     format_percent(report.naive_totals.macro_recall),
                     format_percent(report.naive_totals.macro_f1),
                     format_percent(report.naive_totals.zero_day_detection_rate),
                     format_percent(report.naive_totals.benign_rejection_rate),
                     format_percent(report.naive_totals.fitness)});
    cells.push_back({"mean", "pso", format_percent(report.pso_totals.macro_precision),
                     format_percent(report.pso_totals.macro_recall),
                     format_percent(report.pso_totals.macro_f1),
                     format_percent(report.pso_totals.zero_day_detection_rate),
                     format_percent(report.pso_totals.benign_rejection_rate),
                     format_percent(report.pso_totals.fitness)});

    std::vector<std::size_t> widths(headers.size());
    for (std::size_t i = 0; i < headers.size(); ++i) widths[i] = headers[i].size();
    for (const auto& row : cells)
        for (std::size_t i = 0; i < row.size(); ++i) widths[i] = std::max(widths[i], row[i].size());

    std::ostringstream out;
    const auto emit_row = [&](const std::vector<std::string>& row) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            out << row[i];
            if (i + 1 < row.size()) out << std::string(widths[i] - row[i].size() + 2, ' ');
        }
        out << '\n';
    };
    emit_row(headers);
    std::size_t total_width = 0;
    for (std::size_t i = 0; i < widths.size(); ++i)
        total_width += widths[i] + (i + 1 < widths.size() ? 2 : 0);
    out << std::string(total_width, '-') << '\n';
    for (const auto& row : cells) emit_row(row);
    out << "(values are percentages; N-day metrics are macro over the known attack classes)\n";
    return out.str();
}

std::string render_csv(const ExperimentReport& report) {
    std::ostringstream out;
    out << "scenario,approach,precision,recall,f1,zero_day_detection_rate,benign_rejection_rate,"
           "fitness\n";
    const std::vector<TableRow> rows = collect_rows(report);
    for (const TableRow& r : rows) {
        out << r.scenario << ',' << r.approach << ',' << format_full(r.metrics->macro_precision)
            << ',' << format_full(r.metrics->macro_recall) << ','
            << format_full(r.metrics->macro_f1) << ','
            << format_full(r.metrics->zero_day_detection_rate) << ','
            << format_full(r.metrics->benign_rejection_rate) << ',' << format_full(r.fitness)
            << '\n';
    }
    out << "mean,naive," << format_full(report.naive_totals.macro_precision) << ','
        << format_full(report.naive_totals.macro_recall) << ','
        << format_full(report.naive_totals.macro_f1) << ','
        << format_full(report.naive_totals.zero_day_detection_rate) << ','
        << format_full(report.naive_totals.benign_rejection_rate) << ','
        << format_full(report.naive_totals.fitness) << '\n';
    out << "mean,pso," << format_full(report.pso_totals.macro_precision) << ','
        << format_full(report.pso_totals.macro_recall) << ','
        << format_full(report.pso_totals.macro_f1) << ','
        << format_full(report.pso_totals.zero_day_detection_rate) << ','
        << format_full(report.pso_totals.benign_rejection_rate) << ','
        << format_full(report.pso_totals.fitness) << '\n';
    return out.str();
}

void emit_report(const ExperimentReport& report, ReportFormat format,
                 const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) raise(ErrorKind::IoFailure, "cannot write " + path.string());
    switch (format) {
    case ReportFormat::Json: out << report_to_json(report) << '\n'; break;
    case ReportFormat::Table: out << render_table(report); break;
    case ReportFormat::Csv: out << render_csv(report); break;
    }
    if (!out) raise(ErrorKind::IoFailure, "write failed: " + path.string());
}

} // namespace ifmeta::eval
