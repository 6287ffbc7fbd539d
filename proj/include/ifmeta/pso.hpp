#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "ifmeta/dataset.hpp"
#include "ifmeta/meta_classifier.hpp"
#include "ifmeta/rng.hpp"

namespace ifmeta::pso {

struct PsoConfig {
    std::size_t population = 30;
    std::size_t generations = 50;
    double inertia = 0.729;
    double c1 = 1.49445;
    double c2 = 1.49445;
    double v_max = 0.5;
    std::uint64_t seed = 0;
    unsigned threads = 0;

    void validate() const;
};

struct Particle {
    std::vector<double> position; // components stay in [0,1]
    std::vector<double> velocity; // components stay in [-v_max, v_max]
    std::vector<double> best_position;
    double best_fitness = 0.0;
    double fitness = 0.0;
};

struct Swarm {
    std::vector<Particle> particles;
    std::vector<double> best_position;
    double best_fitness = 0.0;
    std::size_t generation = 0;
};

using Objective = std::function<double(std::span<const double>)>;

/// P particles with positions uniform in [0,1]^dim and velocities uniform in
/// [-v_max, v_max]; personal bests come from one evaluation each.
Swarm init_swarm(const PsoConfig& config, std::size_t dim, const Objective& objective, Rng& rng);

/// One synchronous generation: velocities and positions move under the
/// previous bests (fresh r1, r2 per particle per dimension, velocity clamped
/// to +-v_max, position clamped to [0,1] with the clamped component's
/// velocity zeroed), then all fitnesses are re-evaluated (possibly in
/// parallel) and bests updated on strict improvement.
void step(Swarm& swarm, const PsoConfig& config, const Objective& objective, Rng& rng);

struct OptimizeResult {
    std::vector<double> best_position;
    double best_fitness = 0.0;
    std::vector<double> history; // best-so-far per generation, init included (length G+1)
};

/// Generic maximizer over [0,1]^dim using the same kernel as the threshold
/// optimization.
OptimizeResult optimize_function(const PsoConfig& config, std::size_t dim,
                                 const Objective& objective);

/// Fixed forests plus the two held-out tuning sets. Anomaly scores do not
/// depend on thresholds, so they are computed once here; evaluating a
/// threshold vector is then a pass over the cached score matrix with the
/// same decision rule classify uses.
class FitnessContext {
public:
    FitnessContext(const meta::MetaClassifier& meta,
                   const std::vector<data::LabeledRecord>& attack_validation,
                   const std::vector<data::LabeledRecord>& benign_validation,
                   unsigned threads = 0);

    std::size_t dim() const { return num_entries_; }

    /// (accuracy over attack validation + benign rejection rate) / 2.
    double operator()(std::span<const double> thresholds) const;

private:
    std::size_t num_entries_;
    std::vector<double> attack_scores_; // row-major [record][entry]
    std::vector<std::size_t> attack_truth_;
    std::vector<double> benign_scores_;
    std::vector<double> weights_;
};

/// The joint accuracy + unknown-detection objective for a threshold vector.
double fitness(std::span<const double> position, const FitnessContext& context);

/// PSO over the per-class threshold vector: init plus G generations.
OptimizeResult optimize(const PsoConfig& config, const FitnessContext& context);

} // namespace ifmeta::pso
