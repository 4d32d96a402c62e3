#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>

#include "nestedot/coupling.hpp"
#include "nestedot/ground_metric.hpp"
#include "nestedot/process_model.hpp"

namespace nestedot {

/// Optimal continuation costs of the backward recursion. `stage(t)(i, j)` is
/// V_t^p for the i-th mu node and j-th nu node at stage t (positions in
/// stage_nodes). Stage depth is identically zero; stage 0 holds the single
/// root pair whose value is the nested distance to the power p.
struct ValueTable {
    std::vector<Eigen::MatrixXd> stages;

    const Eigen::MatrixXd& stage(int t) const { return stages.at(static_cast<std::size_t>(t)); }
    double root_value() const { return stages.front()(0, 0); }
};

struct NestedResult {
    double distance = 0.0;  ///< p-th root of cost_p
    double cost_p = 0.0;
    ValueTable table;
    Coupling plan;          ///< an optimal bicausal coupling
};

struct NestedOptions {
    /// Worker threads for the per-stage node-pair subproblems; 0 = hardware concurrency.
    unsigned threads = 0;
};

/// Nested (bicausal Wasserstein) distance by backward recursion over all node
/// pairs, with an optimal plan composed from the per-pair one-stage plans.
/// Arguments are processed in a canonical order so the result is exactly
/// symmetric in (mu, nu).
NestedResult nested_distance(const ScenarioTree& mu, const ScenarioTree& nu, const GroundMetric& m,
                             NestedOptions opts = {});

/// Upper bound on (leaves of mu) x (leaves of nu) for the single-LP solvers.
inline constexpr std::size_t kPairLimit = 10000;

struct PlanResult {
    double distance = 0.0;
    double cost_p = 0.0;
    Coupling plan;
};

/// Oracle: one linear program over all leaf-path pairs in which bicausality
/// is written as linear kernel constraints. Independent of the recursion.
PlanResult brute_force_bicausal(const ScenarioTree& mu, const ScenarioTree& nu, const GroundMetric& m);

/// Classical Wasserstein distance between the path laws (no filtration).
PlanResult wasserstein_distance(const ScenarioTree& mu, const ScenarioTree& nu, const GroundMetric& m);

/// Symmetric matrix of pairwise nested distances with zero diagonal.
Eigen::MatrixXd cauchy_check(std::span<const ScenarioTree> seq, const GroundMetric& m);

/// Strict weak order on trees used to canonicalise argument order.
bool tree_less(const ScenarioTree& a, const ScenarioTree& b);

}  // namespace nestedot
