#include "nestedot/process_model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <unordered_map>

#include "nestedot/error.hpp"

namespace nestedot {

void DiscreteDistribution::validate() const {
    if (atoms.empty()) throw ValidationError("distribution has no atoms");
    double total = 0.0;
    for (const auto& a : atoms) {
        if (!(a.mass > 0.0) || !std::isfinite(a.mass)) throw ValidationError("distribution atom with nonpositive mass");
        if (!std::isfinite(a.value)) throw ValidationError("distribution atom with non-finite location");
        total += a.mass;
    }
    if (std::abs(total - 1.0) > kProbabilityTolerance)
        throw ValidationError("distribution masses sum to " + std::to_string(total));
}

void PathDistribution::validate() const {
    if (paths.empty()) throw ValidationError("empty path list");
    const std::size_t n = paths.front().values.size();
    if (n == 0) throw ValidationError("paths must have at least one coordinate");
    double total = 0.0;
    for (const auto& p : paths) {
        if (p.values.size() != n) throw ValidationError("inconsistent path lengths");
        if (!(p.weight > 0.0) || !std::isfinite(p.weight)) throw ValidationError("nonpositive path weight");
        for (double v : p.values)
            if (!std::isfinite(v)) throw ValidationError("non-finite path coordinate");
        total += p.weight;
    }
    if (std::abs(total - 1.0) > kProbabilityTolerance)
        throw ValidationError("path weights sum to " + std::to_string(total));
}

ScenarioTree ScenarioTree::from_specs(int depth, std::span<const NodeSpec> specs) {
    if (depth < 1) throw ValidationError("tree depth must be at least 1");
    if (specs.empty()) throw ValidationError("tree has no nodes");

    std::unordered_map<long long, std::size_t> by_id;
    std::optional<std::size_t> root;
    for (std::size_t i = 0; i < specs.size(); ++i) {
        if (!by_id.emplace(specs[i].id, i).second)
            throw ValidationError("duplicate node id " + std::to_string(specs[i].id));
        if (!specs[i].parent) {
            if (root) throw ValidationError("tree has more than one root");
            root = i;
        }
    }
    if (!root) throw ValidationError("tree has no root");

    std::vector<std::vector<std::size_t>> kids(specs.size());
    for (std::size_t i = 0; i < specs.size(); ++i) {
        if (!specs[i].parent) continue;
        auto it = by_id.find(*specs[i].parent);
        if (it == by_id.end())
            throw ValidationError("node " + std::to_string(specs[i].id) + " has unknown parent");
        kids[it->second].push_back(i);
    }

    // Breadth-first canonical renumbering, siblings ordered by value.
    ScenarioTree tree;
    tree.depth_ = depth;
    std::vector<std::size_t> order{*root};
    std::vector<int> stage(specs.size(), -1);
    stage[*root] = 0;
    tree.nodes_.push_back(Node{});
    std::vector<NodeId> new_id(specs.size(), 0);
    for (std::size_t head = 0; head < order.size(); ++head) {
        const std::size_t s = order[head];
        auto& ch = kids[s];
        std::sort(ch.begin(), ch.end(), [&](std::size_t a, std::size_t b) { return specs[a].value < specs[b].value; });
        if (stage[s] == depth) {
            if (!ch.empty()) throw ValidationError("node at stage " + std::to_string(depth) + " has children");
            continue;
        }
        if (ch.empty()) throw ValidationError("leaf at stage " + std::to_string(stage[s]) + " before depth " + std::to_string(depth));
        double total = 0.0;
        for (std::size_t k = 0; k < ch.size(); ++k) {
            const auto& c = specs[ch[k]];
            if (!std::isfinite(c.value)) throw ValidationError("non-finite node value");
            if (!(c.prob > 0.0) || c.prob > 1.0 + kProbabilityTolerance)
                throw ValidationError("conditional probability of node " + std::to_string(c.id) + " outside (0, 1]");
            if (k > 0 && !(specs[ch[k - 1]].value < c.value))
                throw ValidationError("sibling nodes share the value " + std::to_string(c.value));
            total += c.prob;
        }
        if (std::abs(total - 1.0) > kProbabilityTolerance)
            throw ValidationError("children probabilities of node " + std::to_string(specs[s].id) + " sum to " + std::to_string(total));
        for (std::size_t c : ch) {
            stage[c] = stage[s] + 1;
            new_id[c] = tree.nodes_.size();
            Node n;
            n.parent = new_id[s];
            n.stage = stage[c];
            n.value = specs[c].value;
            n.cond_prob = specs[c].prob / total;
            tree.nodes_.push_back(std::move(n));
            tree.nodes_[new_id[s]].children.push_back(new_id[c]);
            order.push_back(c);
        }
    }
    if (order.size() != specs.size()) throw ValidationError("tree contains nodes unreachable from the root");
    tree.index();
    return tree;
}

ScenarioTree ScenarioTree::dirac(std::span<const double> path) {
    std::vector<NodeSpec> specs;
    specs.push_back(NodeSpec{0, std::nullopt, 0.0, 1.0});
    for (std::size_t t = 0; t < path.size(); ++t)
        specs.push_back(NodeSpec{static_cast<long long>(t + 1), static_cast<long long>(t), path[t], 1.0});
    return from_specs(static_cast<int>(path.size()), specs);
}

void ScenarioTree::index() {
    stages_.assign(static_cast<std::size_t>(depth_) + 1, {});
    stage_index_.resize(nodes_.size());
    path_prob_.resize(nodes_.size());
    for (NodeId id = 0; id < nodes_.size(); ++id) {
        const auto& n = nodes_[id];
        auto& st = stages_[static_cast<std::size_t>(n.stage)];
        stage_index_[id] = st.size();
        st.push_back(id);
        path_prob_[id] = n.parent ? path_prob_[*n.parent] * n.cond_prob : 1.0;
    }
}

NodeId ScenarioTree::ancestor(NodeId id, int stage) const {
    if (stage < 0 || stage > nodes_.at(id).stage) throw ValidationError("ancestor stage out of range");
    while (nodes_[id].stage > stage) id = *nodes_[id].parent;
    return id;
}

std::vector<double> ScenarioTree::history(NodeId id) const {
    std::vector<double> out(static_cast<std::size_t>(nodes_.at(id).stage));
    while (nodes_[id].parent) {
        out[static_cast<std::size_t>(nodes_[id].stage) - 1] = nodes_[id].value;
        id = *nodes_[id].parent;
    }
    return out;
}

bool operator==(const ScenarioTree& a, const ScenarioTree& b) {
    if (a.depth_ != b.depth_ || a.nodes_.size() != b.nodes_.size()) return false;
    for (std::size_t i = 0; i < a.nodes_.size(); ++i) {
        const auto& x = a.nodes_[i];
        const auto& y = b.nodes_[i];
        if (x.parent != y.parent || x.children != y.children) return false;
        if (i != kRootNode && (x.value != y.value || x.cond_prob != y.cond_prob)) return false;
    }
    return true;
}

bool approx_equal(const ScenarioTree& a, const ScenarioTree& b, double tol) {
    if (a.depth_ != b.depth_ || a.nodes_.size() != b.nodes_.size()) return false;
    for (std::size_t i = 0; i < a.nodes_.size(); ++i) {
        const auto& x = a.nodes_[i];
        const auto& y = b.nodes_[i];
        if (x.parent != y.parent || x.children != y.children) return false;
        if (i == kRootNode) continue;
        if (std::abs(x.value - y.value) > tol || std::abs(x.cond_prob - y.cond_prob) > tol) return false;
    }
    return true;
}

namespace {

struct Builder {
    const std::vector<WeightedPath>& paths;
    double tol;
    std::size_t depth;
    std::vector<NodeSpec> specs;

    void expand(long long parent, std::vector<std::size_t> members, std::size_t t) {
        if (t == depth) return;
        std::stable_sort(members.begin(), members.end(),
                         [&](std::size_t a, std::size_t b) { return paths[a].values[t] < paths[b].values[t]; });
        double group_mass = 0.0;
        for (std::size_t m : members) group_mass += paths[m].weight;

        std::size_t begin = 0;
        while (begin < members.size()) {
            const double anchor = paths[members[begin]].values[t];
            std::size_t end = begin;
            double mass = 0.0;
            double moment = 0.0;
            while (end < members.size() && paths[members[end]].values[t] - anchor <= tol) {
                mass += paths[members[end]].weight;
                moment += paths[members[end]].weight * paths[members[end]].values[t];
                ++end;
            }
            const long long id = static_cast<long long>(specs.size());
            const double value = (end - begin == 1) ? anchor : moment / mass;
            specs.push_back(NodeSpec{id, parent, value, mass / group_mass});
            expand(id, std::vector<std::size_t>(members.begin() + static_cast<std::ptrdiff_t>(begin),
                                                 members.begin() + static_cast<std::ptrdiff_t>(end)),
                   t + 1);
            begin = end;
        }
    }
};

}  // namespace

ScenarioTree build_tree(const PathDistribution& input, double merge_tol) {
    if (!(merge_tol >= 0.0)) throw ValidationError("merge tolerance must be nonnegative");
    input.validate();

    std::vector<WeightedPath> paths = input.paths;
    std::sort(paths.begin(), paths.end(), [](const WeightedPath& a, const WeightedPath& b) {
        if (a.values != b.values) return a.values < b.values;
        return a.weight < b.weight;
    });
    double total = 0.0;
    for (const auto& p : paths) total += p.weight;
    for (auto& p : paths) p.weight /= total;

    Builder b{paths, merge_tol, input.depth(), {}};
    b.specs.push_back(NodeSpec{0, std::nullopt, 0.0, 1.0});
    std::vector<std::size_t> all(paths.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    b.expand(0, std::move(all), 0);
    return ScenarioTree::from_specs(static_cast<int>(input.depth()), b.specs);
}

PathDistribution tree_to_paths(const ScenarioTree& tree) {
    PathDistribution out;
    out.paths.reserve(tree.leaves().size());
    for (NodeId leaf : tree.leaves()) out.paths.push_back(WeightedPath{tree.history(leaf), tree.path_prob(leaf)});
    return out;
}

DiscreteDistribution disintegrate(const ScenarioTree& tree, NodeId node) {
    if (node >= tree.size()) throw ValidationError("unknown node id");
    if (tree.is_leaf(node)) throw ValidationError("cannot disintegrate at a leaf");
    DiscreteDistribution d;
    for (NodeId c : tree.children(node)) d.atoms.push_back(Atom{tree.node(c).value, tree.node(c).cond_prob});
    return d;
}

}  // namespace nestedot
