#include "ifmeta/synthetic.hpp"

#include <algorithm>
#include <cmath>

#include "ifmeta/errors.hpp"
#include "ifmeta/rng.hpp"

namespace ifmeta::data {

namespace {

// Attack-class naming, spreads, and center layout shared by both stock
// profiles. Eavesdropping is the stealthy class: a wider cluster sitting at
// the middle of the feature box, with benign and the other attacks offset
// from it along two coordinates each. Foreign traffic then lands in the
// eavesdropping forest's mid-score band, right around the fixed-threshold
// midpoint, while every class stays cleanly separable from its own forest's
// point of view; one shared threshold cannot serve all classes at once.
const std::vector<std::string> kAttackNames = {"gps_tracking", "eavesdropping", "wsmp_flood",
                                               "geo_wsmp_flood"};
const std::vector<double> kAttackSpreads = {0.030, 0.050, 0.015, 0.035};
constexpr double kBenignSpread = 0.040;
constexpr double kBenignOffset = 0.17;
constexpr double kAttackOffset = 0.19;

std::string attack_name(std::size_t i) {
    if (i < kAttackNames.size()) return kAttackNames[i];
    return "attack" + std::to_string(i + 1);
}

double attack_spread(std::size_t i) { return kAttackSpreads[i % kAttackSpreads.size()]; }

// Stock geometry (needs dim >= 4). Each non-central class takes one
// dimension pair; when pairs run out the second lap reuses them with the
// opposite sign. Classes beyond the four named ones are auto-placed.
void apply_stock_layout(SyntheticConfig& config) {
    if (config.dim < 4) return;
    const std::size_t pairs = config.dim / 2;
    const auto slot_center = [&](std::size_t slot, double magnitude) {
        std::vector<double> c(config.dim, 0.5);
        const std::size_t pair = slot % pairs;
        const double sign = slot < pairs ? 1.0 : -1.0;
        c[2 * pair] += sign * magnitude;
        c[2 * pair + 1] += sign * magnitude;
        return c;
    };
    for (ClassSpec& spec : config.classes) {
        if (spec.name == kBenignLabel) {
            spec.center = slot_center(0, kBenignOffset);
        } else if (spec.name == kAttackNames[0]) {
            spec.center = slot_center(1, kAttackOffset);
        } else if (spec.name == kAttackNames[1]) {
            spec.center = std::vector<double>(config.dim, 0.5);
        } else if (spec.name == kAttackNames[2]) {
            spec.center = slot_center(2, kAttackOffset);
        } else if (spec.name == kAttackNames[3]) {
            spec.center = slot_center(3, kAttackOffset);
        }
    }
}

double distance(const std::vector<double>& a, const std::vector<double>& b) {
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        sum += d * d;
    }
    return std::sqrt(sum);
}

// Fills in centers for classes without an explicit one, keeping a minimum
// separation from every center already chosen.
std::vector<std::vector<double>> place_centers(const SyntheticConfig& config, Rng& rng) {
    const double box_lo = 0.18, box_hi = 0.82;
    double min_sep = 0.45;
    std::vector<std::vector<double>> centers(config.classes.size());
    std::vector<std::size_t> pending;
    for (std::size_t i = 0; i < config.classes.size(); ++i) {
        if (config.classes[i].center.empty()) {
            pending.push_back(i);
        } else {
            if (config.classes[i].center.size() != config.dim)
                raise(ErrorKind::InvalidConfig, "center for class '" + config.classes[i].name +
                                                    "' has the wrong dimension");
            centers[i] = config.classes[i].center;
        }
    }
    std::vector<std::size_t> placed;
    for (std::size_t i = 0; i < centers.size(); ++i)
        if (!centers[i].empty()) placed.push_back(i);

    for (std::size_t i : pending) {
        bool done = false;
        while (!done) {
            for (int attempt = 0; attempt < 2000 && !done; ++attempt) {
                std::vector<double> c(config.dim);
                for (double& v : c) v = rng.uniform(box_lo, box_hi);
                bool ok = true;
                for (std::size_t other : placed) {
                    if (distance(c, centers[other]) < min_sep) {
                        ok = false;
                        break;
                    }
                }
                if (ok) {
                    centers[i] = std::move(c);
                    placed.push_back(i);
                    done = true;
                }
            }
            if (!done) min_sep *= 0.9; // crowded low-dimensional box; relax and retry
        }
    }
    return centers;
}

} // namespace

SyntheticConfig default_synthetic_config(std::uint64_t seed) {
    SyntheticConfig config;
    config.seed = seed;
    config.dim = 10;
    config.classes = {
        {std::string(kBenignLabel), 1514, kBenignSpread, {}},
        {attack_name(0), 429, attack_spread(0), {}},
        {attack_name(1), 320, attack_spread(1), {}},
        {attack_name(2), 143, attack_spread(2), {}},
        {attack_name(3), 24, attack_spread(3), {}},
    };
    apply_stock_layout(config);
    return config;
}

SyntheticConfig uniform_synthetic_config(std::size_t attack_classes, std::size_t per_class,
                                         std::size_t dim, std::uint64_t seed) {
    SyntheticConfig config;
    config.seed = seed;
    config.dim = dim;
    config.classes.push_back({std::string(kBenignLabel), per_class, kBenignSpread, {}});
    for (std::size_t i = 0; i < attack_classes; ++i)
        config.classes.push_back({attack_name(i), per_class, attack_spread(i), {}});
    apply_stock_layout(config);
    return config;
}

Dataset gen_synthetic(const SyntheticConfig& config) {
    if (config.classes.empty()) raise(ErrorKind::InvalidConfig, "no classes configured");
    if (config.dim < 1) raise(ErrorKind::InvalidConfig, "dimension must be >= 1");
    if (config.overlap < 0.0 || config.overlap > 1.0)
        raise(ErrorKind::InvalidConfig, "overlap must be in [0,1]");
    for (const ClassSpec& spec : config.classes) {
        if (spec.count < 1)
            raise(ErrorKind::InvalidConfig, "class '" + spec.name + "' has count 0");
        if (spec.name.empty()) raise(ErrorKind::InvalidConfig, "empty class name");
        if (spec.spread < 0.0)
            raise(ErrorKind::InvalidConfig, "class '" + spec.name + "' has negative spread");
        for (double v : spec.center) {
            if (v < 0.0 || v > 1.0)
                raise(ErrorKind::InvalidConfig,
                      "center for class '" + spec.name + "' outside [0,1]");
        }
    }
    for (std::size_t i = 0; i < config.classes.size(); ++i) {
        for (std::size_t j = i + 1; j < config.classes.size(); ++j) {
            if (config.classes[i].name == config.classes[j].name)
                raise(ErrorKind::InvalidConfig,
                      "duplicate class name '" + config.classes[i].name + "'");
        }
    }

    const Rng master(config.seed);
    Rng center_rng = master.fork(0);
    std::vector<std::vector<double>> centers = place_centers(config, center_rng);

    std::vector<double> mean(config.dim, 0.0);
    for (const auto& c : centers)
        for (std::size_t f = 0; f < config.dim; ++f) mean[f] += c[f] / centers.size();
    for (auto& c : centers)
        for (std::size_t f = 0; f < config.dim; ++f)
            c[f] = mean[f] + (c[f] - mean[f]) * (1.0 - config.overlap);

    Dataset dataset;
    dataset.feature_names.reserve(config.dim);
    for (std::size_t f = 0; f < config.dim; ++f)
        dataset.feature_names.push_back("f" + std::to_string(f));

    for (std::size_t i = 0; i < config.classes.size(); ++i) {
        const ClassSpec& spec = config.classes[i];
        Rng rng = master.fork(100 + i);
        for (std::size_t n = 0; n < spec.count; ++n) {
            LabeledRecord record;
            record.label = spec.name;
            record.features.resize(config.dim);
            for (std::size_t f = 0; f < config.dim; ++f) {
                record.features[f] =
                    std::clamp(centers[i][f] + spec.spread * rng.normal(), 0.0, 1.0);
            }
            dataset.records.push_back(std::move(record));
        }
    }
    return dataset;
}

} // namespace ifmeta::data
