#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "nestedot/distribution.hpp"

namespace nestedot {

using NodeId = std::size_t;
inline constexpr NodeId kRootNode = 0;

/// Tolerance on children probability sums before exact renormalisation.
inline constexpr double kProbabilityTolerance = 1e-9;

/// One path of a finitely supported law on R^N with its probability.
struct WeightedPath {
    std::vector<double> values;
    double weight = 0.0;
};

/// Flat view of a process law: a list of distinct paths with weights summing to one.
struct PathDistribution {
    std::vector<WeightedPath> paths;

    std::size_t depth() const { return paths.empty() ? 0 : paths.front().values.size(); }
    void validate() const;
};

/// Raw node description used to assemble a tree (from JSON or by hand).
/// The root has no parent; its value and probability are ignored.
struct NodeSpec {
    long long id = 0;
    std::optional<long long> parent;
    double value = 0.0;
    double prob = 1.0;
};

struct Node {
    std::optional<NodeId> parent;
    int stage = 0;
    double value = 0.0;
    double cond_prob = 1.0;
    std::vector<NodeId> children;  // ascending by value
};

/// Law of an R^N-valued process with its canonical filtration, stored as a
/// rooted tree: node = history (x_1..x_t), edge weight = conditional
/// probability of the next coordinate. The root is virtual (stage 0).
///
/// Trees are kept in canonical form: node ids are assigned breadth first with
/// siblings ordered by value, so two trees with the same law compare equal.
/// Immutable after construction.
class ScenarioTree {
public:
    /// Assembles and validates a tree. Accepts nodes in any order; exactly one
    /// node must lack a parent. Children probabilities are checked to sum to
    /// one within 1e-9 and then renormalised.
    static ScenarioTree from_specs(int depth, std::span<const NodeSpec> specs);

    /// Single chain carrying one path with probability one.
    static ScenarioTree dirac(std::span<const double> path);

    int depth() const { return depth_; }
    std::size_t size() const { return nodes_.size(); }
    const Node& node(NodeId id) const { return nodes_.at(id); }
    std::span<const NodeId> children(NodeId id) const { return nodes_.at(id).children; }
    std::span<const NodeId> stage_nodes(int stage) const { return stages_.at(static_cast<std::size_t>(stage)); }
    std::span<const NodeId> leaves() const { return stages_.back(); }
    bool is_leaf(NodeId id) const { return nodes_.at(id).stage == depth_; }

    /// Position of a node inside stage_nodes(stage of node).
    std::size_t stage_index(NodeId id) const { return stage_index_.at(id); }
    /// Unconditional probability of reaching the node.
    double path_prob(NodeId id) const { return path_prob_.at(id); }
    /// Ancestor of `id` at the given stage (0 = root, stage(id) = id itself).
    NodeId ancestor(NodeId id, int stage) const;
    /// Values x_1..x_t along the path to `id`.
    std::vector<double> history(NodeId id) const;

    friend bool operator==(const ScenarioTree& a, const ScenarioTree& b);
    /// Same shape, values and conditional probabilities within `tol`.
    friend bool approx_equal(const ScenarioTree& a, const ScenarioTree& b, double tol);

private:
    ScenarioTree() = default;
    void index();

    int depth_ = 0;
    std::vector<Node> nodes_;
    std::vector<std::vector<NodeId>> stages_;
    std::vector<std::size_t> stage_index_;
    std::vector<double> path_prob_;
};

/// Builds the canonical tree of a path law. Two partial histories share a node
/// iff all coordinates agree within merge_tol; the merged value is the
/// mass-weighted mean. Paths are sorted first so the result does not depend on
/// input order. Duplicate paths are merged with summed weight.
ScenarioTree build_tree(const PathDistribution& paths, double merge_tol = 0.0);

/// Leaf paths with unconditional weights, in leaf order.
PathDistribution tree_to_paths(const ScenarioTree& tree);

/// Conditional law of the next coordinate given the history ending at `node`.
DiscreteDistribution disintegrate(const ScenarioTree& tree, NodeId node);

}  // namespace nestedot
