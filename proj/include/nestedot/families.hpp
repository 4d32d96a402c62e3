#pragma once

#include <cstdint>
#include <random>

#include "nestedot/causality.hpp"
#include "nestedot/process_model.hpp"

// Named instance families used by the regression demos and the acceptance
// suite, plus a seeded random tree generator for property tests.
namespace nestedot::families {

/// (d(1/n, 1) + d(-1/n, -1)) / 2: a fan whose first coordinate reveals the second.
ScenarioTree incompleteness_fan(double n);
/// (d(0, 1) + d(0, -1)) / 2: one stage-1 node with two children.
ScenarioTree incompleteness_limit();

/// (d(eps, ..., eps, 1) + d(-eps, ..., -eps, -1)) / 2 on `depth` stages.
ScenarioTree separating_fan(double eps, int depth = 2);
/// (d(0, ..., 0, 1) + d(0, ..., 0, -1)) / 2 on `depth` stages.
ScenarioTree separating_limit(int depth = 2);

/// (d(1/n, n/2) + d(-1/n, -n/2)) / 2.
ScenarioTree kr_mirror_mu(double n);
/// (d(1/n, -n/2) + d(-1/n, n/2)) / 2.
ScenarioTree kr_mirror_nu(double n);

/// Stage 1 is 0 or 1/n with probability 1/2; stage 2 is uniform on [0, 1]
/// after 0 and on [1, 2] after 1/n, each discretised to k midpoint atoms.
ScenarioTree uniform_split_fan(int n, int k = 16);
/// Stage 1 is 0; stage 2 is uniform on [0, 2] as 2k midpoint atoms.
ScenarioTree uniform_split_limit(int k = 16);

struct RandomTreeSpec {
    int depth = 2;
    int max_branch = 3;
    std::size_t max_leaves = 12;
    double value_range = 2.0;  ///< values uniform in [-range, range]
};

/// Random tree with at most `max_leaves` leaves. Sibling values are distinct
/// (resampled on collision); conditional probabilities are bounded away from 0.
ScenarioTree random_tree(std::mt19937_64& rng, const RandomTreeSpec& spec);

/// Adapted map sending each mu node to a uniformly drawn child of its
/// parent's image. Trees must have equal depth.
AdaptedMap random_adapted_map(std::mt19937_64& rng, const ScenarioTree& mu, const ScenarioTree& nu);

}  // namespace nestedot::families
