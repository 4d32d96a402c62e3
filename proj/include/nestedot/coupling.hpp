#pragma once

#include <vector>

#include <Eigen/Core>

#include "nestedot/ground_metric.hpp"
#include "nestedot/process_model.hpp"

namespace nestedot {

struct CouplingEntry {
    NodeId mu_leaf = 0;
    NodeId nu_leaf = 0;
    double mass = 0.0;
};

/// Joint law on pairs of leaf paths of two trees. Entries have positive mass;
/// leaves are node ids of the respective trees.
struct Coupling {
    std::vector<CouplingEntry> entries;

    double total_mass() const;
    /// Integral of d^p, i.e. sum of mass * path_cost.
    double cost(const ScenarioTree& mu, const ScenarioTree& nu, const GroundMetric& m) const;
    /// Dense (mu leaf index) x (nu leaf index) mass matrix; duplicates are summed.
    Eigen::MatrixXd dense(const ScenarioTree& mu, const ScenarioTree& nu) const;
    /// Largest deviation of the mu-marginal from the path law of mu.
    double mu_marginal_error(const ScenarioTree& mu, const ScenarioTree& nu) const;
    double nu_marginal_error(const ScenarioTree& mu, const ScenarioTree& nu) const;
    /// Swaps the roles of the two trees.
    Coupling transposed() const;
    /// Entries sorted by leaf ids, duplicates merged.
    Coupling canonical() const;

    /// Inverse of `dense`; cells with mass <= 0 are dropped.
    static Coupling from_dense(const ScenarioTree& mu, const ScenarioTree& nu, const Eigen::MatrixXd& mass);
};

/// The independent coupling mu (x) nu.
Coupling product_coupling(const ScenarioTree& mu, const ScenarioTree& nu);

/// Leaf indices (positions in tree.leaves()) below each node, as half-open ranges.
/// Canonical breadth-first numbering makes these contiguous.
struct LeafRange {
    std::size_t begin = 0;
    std::size_t end = 0;
};
std::vector<LeafRange> leaf_ranges(const ScenarioTree& tree);

}  // namespace nestedot
