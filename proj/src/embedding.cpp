#include "nestedot/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "nestedot/error.hpp"
#include "nestedot/transport.hpp"

namespace nestedot {

int NestedDistribution::depth() const { return atoms.empty() ? 0 : 1 + atoms.front().next.depth(); }

void NestedDistribution::validate() const {
    if (atoms.empty()) throw ValidationError("nested distribution has no atoms");
    const int below = atoms.front().next.depth();
    double total = 0.0;
    for (const auto& a : atoms) {
        if (!(a.mass > 0.0) || !std::isfinite(a.mass)) throw ValidationError("nested atom with nonpositive mass");
        if (!std::isfinite(a.value)) throw ValidationError("nested atom with non-finite value");
        if (a.next.depth() != below) throw ValidationError("nested distribution has non-uniform depth");
        if (below > 0) a.next.validate();
        total += a.mass;
    }
    if (std::abs(total - 1.0) > kProbabilityTolerance)
        throw ValidationError("nested atom masses sum to " + std::to_string(total));
}

namespace {

// Exact lexicographic order on (value, mass, next); used for sorting only.
int compare(const NestedDistribution& p, const NestedDistribution& q);

int compare_atom(const NestedAtom& a, const NestedAtom& b) {
    if (a.value != b.value) return a.value < b.value ? -1 : 1;
    if (const int c = compare(a.next, b.next)) return c;
    if (a.mass != b.mass) return a.mass < b.mass ? -1 : 1;
    return 0;
}

int compare(const NestedDistribution& p, const NestedDistribution& q) {
    if (p.atoms.size() != q.atoms.size()) return p.atoms.size() < q.atoms.size() ? -1 : 1;
    for (std::size_t i = 0; i < p.atoms.size(); ++i)
        if (const int c = compare_atom(p.atoms[i], q.atoms[i])) return c;
    return 0;
}

NestedDistribution embed_node(const ScenarioTree& tree, NodeId id) {
    NestedDistribution out;
    if (tree.is_leaf(id)) return out;
    for (NodeId c : tree.children(id)) out.atoms.push_back(NestedAtom{tree.node(c).cond_prob, tree.node(c).value, embed_node(tree, c)});
    return out;
}

}  // namespace

bool structurally_equal(const NestedDistribution& p, const NestedDistribution& q, double tol) {
    if (p.atoms.size() != q.atoms.size()) return false;
    for (std::size_t i = 0; i < p.atoms.size(); ++i) {
        const auto& a = p.atoms[i];
        const auto& b = q.atoms[i];
        if (std::abs(a.value - b.value) > tol || std::abs(a.mass - b.mass) > tol) return false;
        if (!structurally_equal(a.next, b.next, tol)) return false;
    }
    return true;
}

NestedDistribution canonicalize(const NestedDistribution& p) {
    NestedDistribution out;
    out.atoms.reserve(p.atoms.size());
    for (const auto& a : p.atoms) out.atoms.push_back(NestedAtom{a.mass, a.value, canonicalize(a.next)});
    std::sort(out.atoms.begin(), out.atoms.end(), [](const NestedAtom& a, const NestedAtom& b) {
        if (a.value != b.value) return a.value < b.value;
        return compare(a.next, b.next) < 0;
    });
    std::vector<NestedAtom> merged;
    for (auto& a : out.atoms) {
        if (!merged.empty() && std::abs(merged.back().value - a.value) <= kNestedAtomTolerance &&
            structurally_equal(merged.back().next, a.next)) {
            merged.back().mass += a.mass;
        } else {
            merged.push_back(std::move(a));
        }
    }
    out.atoms = std::move(merged);
    return out;
}

NestedDistribution embed(const ScenarioTree& tree) { return canonicalize(embed_node(tree, kRootNode)); }

double nested_wasserstein_cost(const NestedDistribution& p, const NestedDistribution& q, const GroundMetric& m) {
    if (p.depth() != q.depth()) throw ValidationError("nested distributions have different depths");
    if (p.atoms.empty()) return 0.0;
    const auto rows = static_cast<Eigen::Index>(p.atoms.size());
    const auto cols = static_cast<Eigen::Index>(q.atoms.size());
    Eigen::MatrixXd cost(rows, cols);
    std::vector<double> a, b;
    for (const auto& x : p.atoms) a.push_back(x.mass);
    for (const auto& y : q.atoms) b.push_back(y.mass);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) {
            const auto& x = p.atoms[static_cast<std::size_t>(i)];
            const auto& y = q.atoms[static_cast<std::size_t>(j)];
            cost(i, j) = m.powered(x.value, y.value) + nested_wasserstein_cost(x.next, y.next, m);
        }
    return std::max(solve_ot(cost, a, b).value, 0.0);
}

double nested_wasserstein(const NestedDistribution& p, const NestedDistribution& q, const GroundMetric& m) {
    p.validate();
    q.validate();
    return m.root(nested_wasserstein_cost(p, q, m));
}

ScenarioTree dirac_approximation(const NestedDistribution& p, double eps) {
    p.validate();
    if (p.depth() != 2) throw ValidationError("Dirac approximation is implemented for depth-2 nested distributions only");
    if (!(eps > 0.0)) throw ValidationError("epsilon must be positive");

    std::vector<NestedAtom> atoms;
    for (const auto& a : p.atoms) atoms.push_back(NestedAtom{a.mass, a.value, canonicalize(a.next)});
    std::stable_sort(atoms.begin(), atoms.end(), [](const NestedAtom& a, const NestedAtom& b) { return compare_atom(a, b) < 0; });

    const double k = static_cast<double>(atoms.size());
    std::vector<NodeSpec> specs{NodeSpec{0, std::nullopt, 0.0, 1.0}};
    for (std::size_t j = 0; j < atoms.size(); ++j) {
        const long long id = static_cast<long long>(specs.size());
        specs.push_back(NodeSpec{id, 0, atoms[j].value + eps * static_cast<double>(j + 1) / k, atoms[j].mass});
        for (const auto& c : atoms[j].next.atoms)
            specs.push_back(NodeSpec{static_cast<long long>(specs.size()), id, c.value, c.mass});
    }
    return ScenarioTree::from_specs(2, specs);
}

NestedDistribution fan_limit() {
    NestedDistribution up, down;
    up.atoms.push_back(NestedAtom{1.0, 1.0, {}});
    down.atoms.push_back(NestedAtom{1.0, -1.0, {}});
    NestedDistribution out;
    out.atoms.push_back(NestedAtom{0.5, 0.0, down});
    out.atoms.push_back(NestedAtom{0.5, 0.0, up});
    return out;
}

}  // namespace nestedot
