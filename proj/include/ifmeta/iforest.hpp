#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "ifmeta/rng.hpp"

namespace ifmeta::iforest {

using FeatureVector = std::vector<double>;

/// Tree node in flat storage. External (leaf) nodes have feature == -1 and
/// carry the count of training points that reached them; internal nodes carry
/// a split and child indices into the owning tree's node vector.
struct Node {
    std::int32_t feature = -1;
    double split = 0.0;
    std::uint32_t left = 0;
    std::uint32_t right = 0;
    std::uint64_t size = 0;

    bool is_external() const { return feature < 0; }
};

struct IsolationTree {
    std::vector<Node> nodes; // nodes[0] is the root; empty only before build
    std::uint32_t height_limit = 0;
    std::uint64_t sample_size = 0;
    std::size_t num_features = 0;
};

struct IsolationForest {
    std::vector<IsolationTree> trees;
    std::uint64_t sample_size = 0; // effective subsample size, after clamping
    std::size_t num_features = 0;
    std::uint64_t seed = 0;

    std::size_t num_trees() const { return trees.size(); }
};

struct ForestParams {
    std::size_t num_trees = 100;
    std::size_t sample_size = 256;
    std::uint64_t seed = 0;
    unsigned threads = 0; // 0 = all cores
};

/// Expected path length of an unsuccessful BST search over n points,
/// 2(H(n-1) - (n-1)/n) with H(i) ~ ln(i) + gamma. Zero for n <= 1: a leaf
/// holding at most one point needs no further splits.
double c_factor(std::uint64_t n);

/// ceil(log2(sample_size)); 0 for sample_size <= 1.
std::uint32_t height_limit_for(std::uint64_t sample_size);

/// 2^(-mean_path / c(n)). Fixed points: mean_path == c(n) gives 0.5,
/// mean_path == 0 gives 1.0.
double score_from_mean_path(double mean_path, std::uint64_t n);

/// Builds one isolation tree on the given sample (recursion starts at depth
/// 0). Splits pick a uniformly random feature among those with non-zero range
/// and a uniform value strictly inside (min, max); partitions with no
/// splittable feature, a single point, or the height limit reached become
/// external nodes. An empty sample yields External{size=0}.
IsolationTree build_tree(const std::vector<FeatureVector>& sample, std::uint32_t height_limit,
                         Rng& rng);

/// Builds a forest of params.num_trees trees, each on an independent uniform
/// subsample (without replacement) of size min(params.sample_size, |data|).
/// Tree i draws its sample and splits from sub-stream fork(seed, i), so the
/// result is identical across thread counts.
IsolationForest build_forest(const std::vector<FeatureVector>& data, const ForestParams& params);

/// Edges traversed from the root to the external node reached by x, plus
/// c_factor of that node's size.
double path_length(const IsolationTree& tree, const FeatureVector& x);

/// Anomaly score 2^(-E(h(x)) / c(n)) with E(h(x)) the mean path_length over
/// all trees and n the forest's effective sample size. In (0, 1]; 1.0 only
/// when every tree isolates x at the root.
double anomaly_score(const IsolationForest& forest, const FeatureVector& x);

} // namespace ifmeta::iforest
