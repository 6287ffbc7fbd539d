#include "ifmeta/pso.hpp"

#include <algorithm>
#include <limits>
#include <unordered_map>

#include "ifmeta/errors.hpp"
#include "ifmeta/parallel.hpp"

namespace ifmeta::pso {

void PsoConfig::validate() const {
    if (population < 1) raise(ErrorKind::InvalidConfig, "population must be >= 1");
    if (inertia < 0.0) raise(ErrorKind::InvalidConfig, "inertia must be >= 0");
    if (c1 < 0.0 || c2 < 0.0) raise(ErrorKind::InvalidConfig, "c1 and c2 must be >= 0");
    if (v_max <= 0.0) raise(ErrorKind::InvalidConfig, "v_max must be > 0");
}

namespace {

void evaluate_all(Swarm& swarm, const Objective& objective, unsigned threads) {
    parallel_chunks(swarm.particles.size(), threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            Particle& p = swarm.particles[i];
            p.fitness = objective(p.position);
        }
    });
}

// Deterministic regardless of evaluation parallelism: particles are visited
// in index order and only strict improvements move the bests.
void update_bests(Swarm& swarm) {
    for (Particle& p : swarm.particles) {
        if (p.fitness > p.best_fitness) {
            p.best_fitness = p.fitness;
            p.best_position = p.position;
        }
        if (p.best_fitness > swarm.best_fitness) {
            swarm.best_fitness = p.best_fitness;
            swarm.best_position = p.best_position;
        }
    }
}

} // namespace

Swarm init_swarm(const PsoConfig& config, std::size_t dim, const Objective& objective, Rng& rng) {
    config.validate();
    if (dim < 1) raise(ErrorKind::InvalidConfig, "dimension must be >= 1");

    Swarm swarm;
    swarm.particles.resize(config.population);
    for (Particle& p : swarm.particles) {
        p.position.resize(dim);
        p.velocity.resize(dim);
        for (std::size_t d = 0; d < dim; ++d) {
            p.position[d] = rng.uniform();
            p.velocity[d] = rng.uniform(-config.v_max, config.v_max);
        }
    }
    evaluate_all(swarm, objective, config.threads);
    swarm.best_fitness = -std::numeric_limits<double>::infinity();
    for (Particle& p : swarm.particles) {
        p.best_position = p.position;
        p.best_fitness = p.fitness;
    }
    for (const Particle& p : swarm.particles) {
        if (p.best_fitness > swarm.best_fitness) {
            swarm.best_fitness = p.best_fitness;
            swarm.best_position = p.best_position;
        }
    }
    return swarm;
}

void step(Swarm& swarm, const PsoConfig& config, const Objective& objective, Rng& rng) {
    // All random draws happen up front on the master stream; the parallel
    // part below is purely functional.
    for (Particle& p : swarm.particles) {
        for (std::size_t d = 0; d < p.position.size(); ++d) {
            const double r1 = rng.uniform();
            const double r2 = rng.uniform();
            double v = config.inertia * p.velocity[d] +
                       config.c1 * r1 * (p.best_position[d] - p.position[d]) +
                       config.c2 * r2 * (swarm.best_position[d] - p.position[d]);
            v = std::clamp(v, -config.v_max, config.v_max);
            double x = p.position[d] + v;
            if (x < 0.0) {
                x = 0.0;
                v = 0.0;
            } else if (x > 1.0) {
                x = 1.0;
                v = 0.0;
            }
            p.velocity[d] = v;
            p.position[d] = x;
        }
    }
    evaluate_all(swarm, objective, config.threads);
    update_bests(swarm);
    ++swarm.generation;
}

OptimizeResult optimize_function(const PsoConfig& config, std::size_t dim,
                                 const Objective& objective) {
    Rng rng(config.seed);
    Swarm swarm = init_swarm(config, dim, objective, rng);
    OptimizeResult result;
    result.history.reserve(config.generations + 1);
    result.history.push_back(swarm.best_fitness);
    for (std::size_t g = 0; g < config.generations; ++g) {
        step(swarm, config, objective, rng);
        result.history.push_back(swarm.best_fitness);
    }
    result.best_position = swarm.best_position;
    result.best_fitness = swarm.best_fitness;
    return result;
}

FitnessContext::FitnessContext(const meta::MetaClassifier& meta,
                               const std::vector<data::LabeledRecord>& attack_validation,
                               const std::vector<data::LabeledRecord>& benign_validation,
                               unsigned threads)
    : num_entries_(meta.size()), weights_(meta.weights()) {
    if (attack_validation.empty())
        raise(ErrorKind::InvalidConfig, "attack validation set is empty");
    if (benign_validation.empty())
        raise(ErrorKind::InvalidConfig, "benign validation set is empty");

    std::unordered_map<std::string, std::size_t> entry_of;
    for (std::size_t i = 0; i < meta.size(); ++i)
        entry_of.emplace(meta.entries()[i].class_name, i);

    attack_truth_.resize(attack_validation.size());
    for (std::size_t i = 0; i < attack_validation.size(); ++i) {
        const auto it = entry_of.find(attack_validation[i].label);
        if (it == entry_of.end())
            raise(ErrorKind::UnknownLabel, "attack validation record labeled '" +
                                               attack_validation[i].label +
                                               "' has no ensemble entry");
        attack_truth_[i] = it->second;
    }
    std::vector<bool> covered(meta.size(), false);
    for (std::size_t t : attack_truth_) covered[t] = true;
    for (std::size_t i = 0; i < covered.size(); ++i) {
        if (!covered[i])
            raise(ErrorKind::MissingClassInValidation,
                  "validation set has no records of class '" + meta.entries()[i].class_name + "'");
    }

    attack_scores_.resize(attack_validation.size() * num_entries_);
    parallel_chunks(attack_validation.size(), threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            const std::vector<double> s = meta.scores(attack_validation[i].features);
            std::copy(s.begin(), s.end(), attack_scores_.begin() + i * num_entries_);
        }
    });
    benign_scores_.resize(benign_validation.size() * num_entries_);
    parallel_chunks(benign_validation.size(), threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            const std::vector<double> s = meta.scores(benign_validation[i].features);
            std::copy(s.begin(), s.end(), benign_scores_.begin() + i * num_entries_);
        }
    });
}

double FitnessContext::operator()(std::span<const double> thresholds) const {
    if (thresholds.size() != num_entries_)
        raise(ErrorKind::LengthMismatch, "threshold vector length " +
                                             std::to_string(thresholds.size()) + ", expected " +
                                             std::to_string(num_entries_));
    const std::size_t n_attack = attack_truth_.size();
    std::size_t correct = 0;
    for (std::size_t i = 0; i < n_attack; ++i) {
        const std::span<const double> row(attack_scores_.data() + i * num_entries_, num_entries_);
        const auto winner = meta::decide(row, thresholds, weights_);
        if (winner && *winner == attack_truth_[i]) ++correct;
    }
    const std::size_t n_benign = benign_scores_.size() / num_entries_;
    std::size_t rejected = 0;
    for (std::size_t i = 0; i < n_benign; ++i) {
        const std::span<const double> row(benign_scores_.data() + i * num_entries_, num_entries_);
        if (!meta::decide(row, thresholds, weights_)) ++rejected;
    }
    const double accuracy = static_cast<double>(correct) / static_cast<double>(n_attack);
    const double detection = static_cast<double>(rejected) / static_cast<double>(n_benign);
    return (accuracy + detection) / 2.0;
}

double fitness(std::span<const double> position, const FitnessContext& context) {
    return context(position);
}

OptimizeResult optimize(const PsoConfig& config, const FitnessContext& context) {
    return optimize_function(config, context.dim(),
                             [&context](std::span<const double> x) { return context(x); });
}

} // namespace ifmeta::pso
