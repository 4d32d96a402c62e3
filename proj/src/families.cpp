#include "nestedot/families.hpp"

#include <algorithm>
#include <set>

#include "nestedot/error.hpp"

namespace nestedot::families {

namespace {

ScenarioTree two_paths(std::vector<double> up, std::vector<double> down) {
    PathDistribution d;
    d.paths.push_back(WeightedPath{std::move(up), 0.5});
    d.paths.push_back(WeightedPath{std::move(down), 0.5});
    return build_tree(d, 0.0);
}

}  // namespace

ScenarioTree incompleteness_fan(double n) {
    if (!(n > 0.0)) throw ValidationError("n must be positive");
    return two_paths({1.0 / n, 1.0}, {-1.0 / n, -1.0});
}

ScenarioTree incompleteness_limit() { return two_paths({0.0, 1.0}, {0.0, -1.0}); }

ScenarioTree separating_fan(double eps, int depth) {
    if (depth < 2) throw ValidationError("separating family needs depth >= 2");
    std::vector<double> up(static_cast<std::size_t>(depth), eps), down(static_cast<std::size_t>(depth), -eps);
    up.back() = 1.0;
    down.back() = -1.0;
    return two_paths(up, down);
}

ScenarioTree separating_limit(int depth) { return separating_fan(0.0, depth); }

ScenarioTree kr_mirror_mu(double n) {
    if (!(n > 0.0)) throw ValidationError("n must be positive");
    return two_paths({1.0 / n, n / 2.0}, {-1.0 / n, -n / 2.0});
}

ScenarioTree kr_mirror_nu(double n) {
    if (!(n > 0.0)) throw ValidationError("n must be positive");
    return two_paths({1.0 / n, -n / 2.0}, {-1.0 / n, n / 2.0});
}

ScenarioTree uniform_split_fan(int n, int k) {
    if (n < 1 || k < 1) throw ValidationError("uniform split family needs n >= 1 and k >= 1");
    PathDistribution d;
    const double w = 0.5 / k;
    for (int i = 0; i < k; ++i) {
        const double u = (i + 0.5) / k;
        d.paths.push_back(WeightedPath{{0.0, u}, w});
        d.paths.push_back(WeightedPath{{1.0 / n, 1.0 + u}, w});
    }
    return build_tree(d, 0.0);
}

ScenarioTree uniform_split_limit(int k) {
    if (k < 1) throw ValidationError("uniform split family needs k >= 1");
    PathDistribution d;
    const double w = 0.5 / k;
    for (int i = 0; i < k; ++i) {
        const double u = (i + 0.5) / k;
        d.paths.push_back(WeightedPath{{0.0, u}, w});
        d.paths.push_back(WeightedPath{{0.0, 1.0 + u}, w});
    }
    return build_tree(d, 0.0);
}

ScenarioTree random_tree(std::mt19937_64& rng, const RandomTreeSpec& spec) {
    if (spec.depth < 1 || spec.max_branch < 1 || spec.max_leaves < 1) throw ValidationError("bad random tree spec");
    std::uniform_int_distribution<int> branch(1, spec.max_branch);
    std::uniform_real_distribution<double> value(-spec.value_range, spec.value_range);
    std::uniform_real_distribution<double> weight(0.2, 1.0);

    std::vector<NodeSpec> nodes{NodeSpec{0, std::nullopt, 0.0, 1.0}};
    std::vector<long long> level{0};
    for (int t = 1; t <= spec.depth; ++t) {
        std::vector<int> counts(level.size());
        std::size_t total = 0;
        for (auto& c : counts) total += static_cast<std::size_t>(c = branch(rng));
        while (total > spec.max_leaves) {
            std::vector<std::size_t> reducible;
            for (std::size_t i = 0; i < counts.size(); ++i)
                if (counts[i] > 1) reducible.push_back(i);
            if (reducible.empty()) break;
            std::uniform_int_distribution<std::size_t> pick(0, reducible.size() - 1);
            --counts[reducible[pick(rng)]];
            --total;
        }
        std::vector<long long> next;
        for (std::size_t i = 0; i < level.size(); ++i) {
            std::set<double> used;
            std::vector<double> w(static_cast<std::size_t>(counts[i]));
            double sum = 0.0;
            for (auto& x : w) sum += (x = weight(rng));
            for (int c = 0; c < counts[i]; ++c) {
                double v;
                do v = value(rng);
                while (!used.insert(v).second);
                const long long id = static_cast<long long>(nodes.size());
                nodes.push_back(NodeSpec{id, level[i], v, w[static_cast<std::size_t>(c)] / sum});
                next.push_back(id);
            }
        }
        level = std::move(next);
    }
    return ScenarioTree::from_specs(spec.depth, nodes);
}

AdaptedMap random_adapted_map(std::mt19937_64& rng, const ScenarioTree& mu, const ScenarioTree& nu) {
    if (mu.depth() != nu.depth()) throw ValidationError("adapted map between trees of different depth");
    AdaptedMap map;
    map.target.assign(mu.size(), kRootNode);
    for (NodeId id = 1; id < mu.size(); ++id) {
        const auto kids = nu.children(map.target[*mu.node(id).parent]);
        std::uniform_int_distribution<std::size_t> pick(0, kids.size() - 1);
        map.target[id] = kids[pick(rng)];
    }
    return map;
}

}  // namespace nestedot::families
