#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ifmeta/dataset.hpp"

namespace ifmeta::data {

struct ClassSpec {
    std::string name;
    std::size_t count = 0;
    double spread = 0.02;       // per-coordinate Gaussian sigma
    std::vector<double> center; // empty: placed automatically with min separation
};

struct SyntheticConfig {
    std::vector<ClassSpec> classes; // must include "benign"
    std::size_t dim = 10;
    /// 0 keeps centers at full separation, 1 collapses them onto their mean.
    double overlap = 0.0;
    std::uint64_t seed = 1;
};

/// Imbalanced profile: class proportions follow the flow counts of a
/// real vehicular botnet capture (benign dominating, geo flood rare), with
/// per-class spreads making eavesdropping diffuse and the floods tight.
SyntheticConfig default_synthetic_config(std::uint64_t seed = 1);

/// Uniform profile: `attack_classes` attack clusters plus benign, `per_class`
/// records each. Class names follow the default attack naming; spreads and
/// centers follow the default per-class pattern.
SyntheticConfig uniform_synthetic_config(std::size_t attack_classes, std::size_t per_class,
                                         std::size_t dim, std::uint64_t seed);

/// Gaussian cluster per class in [0,1]^dim (clipped). Classes without an
/// explicit center are placed randomly with a minimum pairwise separation;
/// all centers are then shrunk toward their mean by `overlap`. Deterministic
/// under seed; records are grouped by class in config order.
Dataset gen_synthetic(const SyntheticConfig& config);

} // namespace ifmeta::data
