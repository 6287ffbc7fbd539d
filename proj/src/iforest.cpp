#include "ifmeta/iforest.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>

#include "ifmeta/errors.hpp"
#include "ifmeta/parallel.hpp"

namespace ifmeta::iforest {

namespace {

constexpr double kEulerGamma = 0.5772156649;

struct Builder {
    const std::vector<FeatureVector>& data;
    std::vector<Node>& nodes;
    std::uint32_t height_limit;
    Rng& rng;

    // Returns the index of the subtree root built over data rows `rows`.
    std::uint32_t build(std::vector<std::size_t>& rows, std::uint32_t depth) {
        if (depth >= height_limit || rows.size() <= 1) return make_external(rows.size());

        const std::size_t dim = data[rows.front()].size();
        std::vector<double> lo(dim), hi(dim);
        for (std::size_t f = 0; f < dim; ++f) {
            lo[f] = hi[f] = data[rows.front()][f];
        }
        for (std::size_t i = 1; i < rows.size(); ++i) {
            const FeatureVector& v = data[rows[i]];
            for (std::size_t f = 0; f < dim; ++f) {
                lo[f] = std::min(lo[f], v[f]);
                hi[f] = std::max(hi[f], v[f]);
            }
        }
        std::vector<std::size_t> splittable;
        splittable.reserve(dim);
        for (std::size_t f = 0; f < dim; ++f) {
            if (hi[f] > lo[f]) splittable.push_back(f);
        }
        if (splittable.empty()) return make_external(rows.size()); // all points identical

        const std::size_t feature = splittable[rng.uniform_index(splittable.size())];
        // Strictly inside (min, max): both partitions stay non-empty.
        double split;
        do {
            split = rng.uniform(lo[feature], hi[feature]);
        } while (split <= lo[feature]);

        std::vector<std::size_t> left_rows, right_rows;
        left_rows.reserve(rows.size());
        right_rows.reserve(rows.size());
        for (std::size_t r : rows) {
            (data[r][feature] < split ? left_rows : right_rows).push_back(r);
        }
        rows.clear();
        rows.shrink_to_fit();

        const std::uint32_t index = static_cast<std::uint32_t>(nodes.size());
        nodes.push_back(Node{static_cast<std::int32_t>(feature), split, 0, 0, 0});
        const std::uint32_t left = build(left_rows, depth + 1);
        const std::uint32_t right = build(right_rows, depth + 1);
        nodes[index].left = left;
        nodes[index].right = right;
        return index;
    }

    std::uint32_t make_external(std::size_t size) {
        const std::uint32_t index = static_cast<std::uint32_t>(nodes.size());
        nodes.push_back(Node{-1, 0.0, 0, 0, size});
        return index;
    }
};

std::vector<std::size_t> draw_sample(std::size_t population, std::size_t count, Rng& rng) {
    std::vector<std::size_t> idx(population);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    for (std::size_t i = 0; i < count; ++i) {
        const std::size_t j = i + rng.uniform_index(population - i);
        std::swap(idx[i], idx[j]);
    }
    idx.resize(count);
    return idx;
}

IsolationTree build_tree_rows(const std::vector<FeatureVector>& data,
                              std::vector<std::size_t> rows, std::uint32_t height_limit,
                              std::size_t num_features, Rng& rng) {
    IsolationTree tree;
    tree.height_limit = height_limit;
    tree.sample_size = rows.size();
    tree.num_features = num_features;
    Builder builder{data, tree.nodes, height_limit, rng};
    builder.build(rows, 0);
    return tree;
}

} // namespace

double c_factor(std::uint64_t n) {
    if (n <= 1) return 0.0;
    const double m = static_cast<double>(n - 1);
    return 2.0 * (std::log(m) + kEulerGamma) - 2.0 * m / static_cast<double>(n);
}

std::uint32_t height_limit_for(std::uint64_t sample_size) {
    if (sample_size <= 1) return 0;
    return static_cast<std::uint32_t>(std::bit_width(sample_size - 1));
}

double score_from_mean_path(double mean_path, std::uint64_t n) {
    const double c = c_factor(n);
    if (c <= 0.0) return mean_path <= 0.0 ? 1.0 : 0.0;
    return std::exp2(-mean_path / c);
}

IsolationTree build_tree(const std::vector<FeatureVector>& sample, std::uint32_t height_limit,
                         Rng& rng) {
    std::vector<std::size_t> rows(sample.size());
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    const std::size_t dim = sample.empty() ? 0 : sample.front().size();
    return build_tree_rows(sample, std::move(rows), height_limit, dim, rng);
}

IsolationForest build_forest(const std::vector<FeatureVector>& data, const ForestParams& params) {
    if (data.empty()) raise(ErrorKind::EmptyTrainingSet, "cannot build a forest on no data");
    if (params.num_trees < 1) raise(ErrorKind::InvalidConfig, "num_trees must be >= 1");
    if (params.sample_size < 1) raise(ErrorKind::InvalidConfig, "sample_size must be >= 1");
    const std::size_t dim = data.front().size();
    for (const FeatureVector& v : data) {
        if (v.size() != dim)
            raise(ErrorKind::DimensionMismatch, "training rows have inconsistent feature counts");
    }

    IsolationForest forest;
    forest.sample_size = std::min<std::uint64_t>(params.sample_size, data.size());
    forest.num_features = dim;
    forest.seed = params.seed;
    forest.trees.resize(params.num_trees);

    const std::uint32_t height_limit = height_limit_for(forest.sample_size);
    const Rng master(params.seed);
    parallel_chunks(params.num_trees, params.threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t t = begin; t < end; ++t) {
            Rng tree_rng = master.fork(t);
            std::vector<std::size_t> rows =
                draw_sample(data.size(), static_cast<std::size_t>(forest.sample_size), tree_rng);
            forest.trees[t] =
                build_tree_rows(data, std::move(rows), height_limit, dim, tree_rng);
        }
    });
    return forest;
}

double path_length(const IsolationTree& tree, const FeatureVector& x) {
    if (x.size() != tree.num_features)
        raise(ErrorKind::DimensionMismatch, "probe has " + std::to_string(x.size()) +
                                                " features, tree was built on " +
                                                std::to_string(tree.num_features));
    double edges = 0.0;
    std::uint32_t at = 0;
    while (!tree.nodes[at].is_external()) {
        const Node& node = tree.nodes[at];
        at = x[static_cast<std::size_t>(node.feature)] < node.split ? node.left : node.right;
        edges += 1.0;
    }
    return edges + c_factor(tree.nodes[at].size);
}

double anomaly_score(const IsolationForest& forest, const FeatureVector& x) {
    double total = 0.0;
    for (const IsolationTree& tree : forest.trees) total += path_length(tree, x);
    const double mean = total / static_cast<double>(forest.trees.size());
    return score_from_mean_path(mean, forest.sample_size);
}

} // namespace ifmeta::iforest
