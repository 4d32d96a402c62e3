#pragma once

#include <vector>

#include "nestedot/ground_metric.hpp"
#include "nestedot/process_model.hpp"

namespace nestedot {

struct NestedAtom;

/// Nested distribution: a finite law over pairs (value, nested distribution of
/// one less depth). An empty atom list terminates the recursion, so depth-1
/// objects are plain laws on the line.
struct NestedDistribution {
    std::vector<NestedAtom> atoms;

    /// 0 for the terminal (empty) object.
    int depth() const;
    /// Positive masses summing to one at every level, uniform depth.
    void validate() const;
};

struct NestedAtom {
    double mass = 0.0;
    double value = 0.0;
    NestedDistribution next;
};

/// Tolerance on values and masses when comparing or merging atoms.
inline constexpr double kNestedAtomTolerance = 1e-12;

/// Recursive comparison within kNestedAtomTolerance, atoms in stored order.
bool structurally_equal(const NestedDistribution& p, const NestedDistribution& q, double tol = kNestedAtomTolerance);

/// Sorts atoms by (value, structure) and merges equal atoms with summed mass,
/// recursively.
NestedDistribution canonicalize(const NestedDistribution& p);

/// The law of (x_1, law of (x_2, ... | x_1)) of a tree, canonicalised.
NestedDistribution embed(const ScenarioTree& tree);

/// Classical Wasserstein distance on nested distributions of equal depth,
/// computed bottom up: atom-pair costs base^p + W^p(next, next) feed one
/// transport problem per level.
double nested_wasserstein(const NestedDistribution& p, const NestedDistribution& q, const GroundMetric& m);
/// Same, as a p-th power.
double nested_wasserstein_cost(const NestedDistribution& p, const NestedDistribution& q, const GroundMetric& m);

/// Depth-2 only. Realises sum_j lambda_j d(a_j + eps * j / k, m_j) as a tree,
/// atoms sorted by (a_j, m_j) first so that perturbed first coordinates are
/// strictly increasing and hence pairwise distinct.
ScenarioTree dirac_approximation(const NestedDistribution& p, double eps);

/// (d(0, d_1) + d(0, d_{-1})) / 2: two atoms share x = 0 but carry different
/// conditionals, so no tree embeds to it.
NestedDistribution fan_limit();

}  // namespace nestedot
