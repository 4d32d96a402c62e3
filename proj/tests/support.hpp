#pragma once

#include <random>
#include <utility>
#include <vector>

#include "nestedot/causality.hpp"
#include "nestedot/coupling.hpp"
#include "nestedot/families.hpp"
#include "nestedot/process_model.hpp"

namespace testing {

using namespace nestedot;

inline ScenarioTree paths_tree(std::vector<std::pair<std::vector<double>, double>> paths, double tol = 0.0) {
    PathDistribution d;
    for (auto& [v, w] : paths) d.paths.push_back(WeightedPath{std::move(v), w});
    return build_tree(d, tol);
}

// Two random trees of a common random depth in [1, max_depth].
inline std::pair<ScenarioTree, ScenarioTree> random_pair(std::mt19937_64& rng, int max_depth = 3,
                                                         std::size_t max_leaves = 12) {
    std::uniform_int_distribution<int> depth(1, max_depth);
    const families::RandomTreeSpec spec{depth(rng), 3, max_leaves, 2.0};
    auto a = families::random_tree(rng, spec);
    auto b = families::random_tree(rng, spec);
    return {std::move(a), std::move(b)};
}

// Causality straight from the definition: for every stage t < N and every
// history pair (x_{1:t}, y_{1:t}) of positive mass, gamma(x_{t+1} | x_{1:t}, y_{1:t})
// equals mu's kernel. Sums leaf masses by walking ancestors, no prefix tables.
inline double definition_causal_deviation(const Coupling& g, const ScenarioTree& mu, const ScenarioTree& nu) {
    double worst = 0.0;
    for (int t = 0; t < mu.depth(); ++t)
        for (NodeId x : mu.stage_nodes(t))
            for (NodeId y : nu.stage_nodes(t)) {
                double base = 0.0;
                for (const auto& e : g.entries)
                    if (mu.ancestor(e.mu_leaf, t) == x && nu.ancestor(e.nu_leaf, t) == y) base += e.mass;
                if (base <= 1e-14) continue;
                for (NodeId xc : mu.children(x)) {
                    double joint = 0.0;
                    for (const auto& e : g.entries)
                        if (mu.ancestor(e.mu_leaf, t + 1) == xc && nu.ancestor(e.nu_leaf, t) == y) joint += e.mass;
                    worst = std::max(worst, std::abs(joint / base - mu.node(xc).cond_prob));
                }
            }
    return worst;
}

inline Coupling mix(const Coupling& a, const Coupling& b, double w) {
    Coupling out;
    for (const auto& e : a.entries) out.entries.push_back({e.mu_leaf, e.nu_leaf, w * e.mass});
    for (const auto& e : b.entries) out.entries.push_back({e.mu_leaf, e.nu_leaf, (1.0 - w) * e.mass});
    return out.canonical();
}

}  // namespace testing
