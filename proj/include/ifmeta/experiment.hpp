#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "ifmeta/dataset.hpp"
#include "ifmeta/metrics.hpp"
#include "ifmeta/pso.hpp"

namespace ifmeta::eval {

struct ExperimentConfig {
    std::size_t trees = 100;
    std::size_t sample_size = 256;
    pso::PsoConfig pso; // seed ignored; per-cell streams derive from master_seed
    std::size_t folds = 5;
    std::vector<std::string> scenarios; // empty = every attack class in the dataset
    double naive_threshold = 0.5;
    data::SplitRatios ratios;
    std::uint64_t master_seed = 0;
    unsigned threads = 0;
    std::string dataset_path; // echoed into reports, not used for I/O
};

struct CellResult {
    MetricsReport pso;
    MetricsReport naive;
    double pso_fitness = 0.0;
    double naive_fitness = 0.0;
    std::vector<double> pso_thresholds;
};

struct ApproachAverages {
    MetricsReport metrics;
    double fitness = 0.0;
};

struct ScenarioResult {
    std::string zero_day_class;
    std::vector<CellResult> folds;
    ApproachAverages pso_average;
    ApproachAverages naive_average;
};

struct ApproachTotals {
    double macro_precision = 0.0;
    double macro_recall = 0.0;
    double macro_f1 = 0.0;
    double accuracy = 0.0;
    double zero_day_detection_rate = 0.0;
    double benign_rejection_rate = 0.0;
    double fitness = 0.0;
};

struct ExperimentReport {
    ExperimentConfig config;
    std::vector<ScenarioResult> scenarios;
    ApproachTotals pso_totals;
    ApproachTotals naive_totals;
    double wall_seconds = 0.0; // in-memory only; never serialized
};

/// The leave-one-attack-out x k-fold protocol: per cell, train per-class
/// forests on the fold complement, PSO-optimize thresholds on the held-out
/// validation sets, then evaluate both the optimized and the fixed-threshold
/// classifier on the identical test fold. Deterministic under master_seed for
/// any thread count.
ExperimentReport run_experiment(const data::Dataset& dataset, const ExperimentConfig& config);

enum class ReportFormat { Json, Table, Csv };

std::string report_to_json(const ExperimentReport& report);
ExperimentReport report_from_json(const std::string& document);
/// Percentages at two decimals, one row per (scenario, approach).
std::string render_table(const ExperimentReport& report);
/// Same rows, full-precision machine-readable values.
std::string render_csv(const ExperimentReport& report);
void emit_report(const ExperimentReport& report, ReportFormat format,
                 const std::filesystem::path& path);

} // namespace ifmeta::eval
