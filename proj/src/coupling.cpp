#include "nestedot/coupling.hpp"

#include <algorithm>
#include <cmath>

#include "nestedot/error.hpp"

namespace nestedot {

namespace {

Eigen::Index leaf_pos(const ScenarioTree& t, NodeId leaf) {
    if (leaf >= t.size() || !t.is_leaf(leaf)) throw ValidationError("coupling entry refers to a non-leaf node");
    return static_cast<Eigen::Index>(t.stage_index(leaf));
}

}  // namespace

double Coupling::total_mass() const {
    double s = 0.0;
    for (const auto& e : entries) s += e.mass;
    return s;
}

double Coupling::cost(const ScenarioTree& mu, const ScenarioTree& nu, const GroundMetric& m) const {
    double s = 0.0;
    for (const auto& e : entries) s += e.mass * m.path_cost(mu.history(e.mu_leaf), nu.history(e.nu_leaf));
    return s;
}

Eigen::MatrixXd Coupling::dense(const ScenarioTree& mu, const ScenarioTree& nu) const {
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(mu.leaves().size()),
                                                static_cast<Eigen::Index>(nu.leaves().size()));
    for (const auto& e : entries) out(leaf_pos(mu, e.mu_leaf), leaf_pos(nu, e.nu_leaf)) += e.mass;
    return out;
}

double Coupling::mu_marginal_error(const ScenarioTree& mu, const ScenarioTree& nu) const {
    const Eigen::VectorXd rows = dense(mu, nu).rowwise().sum();
    double err = 0.0;
    for (NodeId leaf : mu.leaves()) err = std::max(err, std::abs(rows(leaf_pos(mu, leaf)) - mu.path_prob(leaf)));
    return err;
}

double Coupling::nu_marginal_error(const ScenarioTree& mu, const ScenarioTree& nu) const {
    const Eigen::RowVectorXd cols = dense(mu, nu).colwise().sum();
    double err = 0.0;
    for (NodeId leaf : nu.leaves()) err = std::max(err, std::abs(cols(leaf_pos(nu, leaf)) - nu.path_prob(leaf)));
    return err;
}

Coupling Coupling::transposed() const {
    Coupling out;
    out.entries.reserve(entries.size());
    for (const auto& e : entries) out.entries.push_back(CouplingEntry{e.nu_leaf, e.mu_leaf, e.mass});
    return out;
}

Coupling Coupling::canonical() const {
    Coupling out = *this;
    std::sort(out.entries.begin(), out.entries.end(), [](const CouplingEntry& a, const CouplingEntry& b) {
        return a.mu_leaf != b.mu_leaf ? a.mu_leaf < b.mu_leaf : a.nu_leaf < b.nu_leaf;
    });
    std::vector<CouplingEntry> merged;
    for (const auto& e : out.entries) {
        if (!merged.empty() && merged.back().mu_leaf == e.mu_leaf && merged.back().nu_leaf == e.nu_leaf)
            merged.back().mass += e.mass;
        else
            merged.push_back(e);
    }
    out.entries = std::move(merged);
    return out;
}

Coupling Coupling::from_dense(const ScenarioTree& mu, const ScenarioTree& nu, const Eigen::MatrixXd& mass) {
    const auto ml = mu.leaves();
    const auto nl = nu.leaves();
    if (static_cast<std::size_t>(mass.rows()) != ml.size() || static_cast<std::size_t>(mass.cols()) != nl.size())
        throw ValidationError("dense coupling shape does not match the trees");
    Coupling out;
    for (std::size_t i = 0; i < ml.size(); ++i)
        for (std::size_t j = 0; j < nl.size(); ++j) {
            const double w = mass(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
            if (w > 0.0) out.entries.push_back(CouplingEntry{ml[i], nl[j], w});
        }
    return out;
}

Coupling product_coupling(const ScenarioTree& mu, const ScenarioTree& nu) {
    Coupling out;
    for (NodeId x : mu.leaves())
        for (NodeId y : nu.leaves()) out.entries.push_back(CouplingEntry{x, y, mu.path_prob(x) * nu.path_prob(y)});
    return out;
}

std::vector<LeafRange> leaf_ranges(const ScenarioTree& tree) {
    std::vector<LeafRange> out(tree.size());
    for (NodeId leaf : tree.leaves()) {
        const std::size_t k = tree.stage_index(leaf);
        out[leaf] = LeafRange{k, k + 1};
    }
    for (int t = tree.depth() - 1; t >= 0; --t) {
        for (NodeId id : tree.stage_nodes(t)) {
            const auto ch = tree.children(id);
            out[id] = LeafRange{out[ch.front()].begin, out[ch.back()].end};
        }
    }
    return out;
}

}  // namespace nestedot
