#include "nestedot/causality.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace nestedot {

namespace {

// Block sums of the leaf-indexed mass matrix over (mu subtree) x (nu subtree).
// Summed directly rather than through prefix sums so empty blocks are exactly 0.
class BlockMass {
public:
    BlockMass(const Coupling& gamma, const ScenarioTree& mu, const ScenarioTree& nu)
        : ra_(leaf_ranges(mu)), rb_(leaf_ranges(nu)), g_(gamma.dense(mu, nu)) {}

    double operator()(NodeId a, NodeId b) const {
        const auto [i0, i1] = ra_[a];
        const auto [j0, j1] = rb_[b];
        return g_.block(static_cast<Eigen::Index>(i0), static_cast<Eigen::Index>(j0), static_cast<Eigen::Index>(i1 - i0),
                        static_cast<Eigen::Index>(j1 - j0))
            .sum();
    }

private:
    std::vector<LeafRange> ra_;
    std::vector<LeafRange> rb_;
    Eigen::MatrixXd g_;
};

// Largest deviation of one side's next-step kernel over all positive-mass
// history pairs; appends violations above tolerance.
double kernel_deviation(const BlockMass& block, const ScenarioTree& mu, const ScenarioTree& nu, Violation::Side side,
                        std::vector<Violation>& out) {
    double worst = 0.0;
    for (int t = 1; t < mu.depth(); ++t) {
        for (NodeId a : mu.stage_nodes(t)) {
            for (NodeId b : nu.stage_nodes(t)) {
                const double total = block(a, b);
                if (!(total > kNegligibleMass)) continue;
                double dev = 0.0;
                if (side == Violation::Side::Mu) {
                    for (NodeId c : mu.children(a)) dev = std::max(dev, std::abs(block(c, b) / total - mu.node(c).cond_prob));
                } else {
                    for (NodeId c : nu.children(b)) dev = std::max(dev, std::abs(block(a, c) / total - nu.node(c).cond_prob));
                }
                worst = std::max(worst, dev);
                if (dev > kCausalityTolerance) out.push_back(Violation{side, t + 1, a, b, dev});
            }
        }
    }
    return worst;
}

void require_depths(const ScenarioTree& mu, const ScenarioTree& nu) {
    if (mu.depth() != nu.depth()) throw ValidationError("coupling trees have different depths");
}

void require_mu_marginal(const Coupling& gamma, const ScenarioTree& mu, const ScenarioTree& nu) {
    const double err = gamma.mu_marginal_error(mu, nu);
    if (err > kCausalityTolerance)
        throw ValidationError("coupling's mu-marginal deviates from mu by " + std::to_string(err));
}

void require_nu_marginal(const Coupling& gamma, const ScenarioTree& mu, const ScenarioTree& nu) {
    const double err = gamma.nu_marginal_error(mu, nu);
    if (err > kCausalityTolerance)
        throw ValidationError("coupling's nu-marginal deviates from nu by " + std::to_string(err));
}

// Is the conditional law over `others` a point mass, for every conditioning node?
bool stagewise_point_masses(const BlockMass& block, const ScenarioTree& cond, const ScenarioTree& other, bool cond_is_mu) {
    for (int t = 1; t <= cond.depth(); ++t) {
        for (NodeId a : cond.stage_nodes(t)) {
            double total = 0.0, first = 0.0, second = 0.0;
            for (NodeId b : other.stage_nodes(t)) {
                const double w = cond_is_mu ? block(a, b) : block(b, a);
                total += w;
                if (w > first) {
                    second = first;
                    first = w;
                } else if (w > second) {
                    second = w;
                }
            }
            if (total > kNegligibleMass && second / total >= kPointMassTolerance) return false;
        }
    }
    return true;
}

}  // namespace

CausalityReport is_causal(const Coupling& gamma, const ScenarioTree& mu, const ScenarioTree& nu) {
    require_depths(mu, nu);
    require_mu_marginal(gamma, mu, nu);
    CausalityReport r;
    const BlockMass block(gamma, mu, nu);
    r.max_causal_deviation = kernel_deviation(block, mu, nu, Violation::Side::Mu, r.violations);
    r.is_causal = r.max_causal_deviation <= kCausalityTolerance;
    return r;
}

CausalityReport is_bicausal(const Coupling& gamma, const ScenarioTree& mu, const ScenarioTree& nu) {
    require_depths(mu, nu);
    require_mu_marginal(gamma, mu, nu);
    require_nu_marginal(gamma, mu, nu);
    CausalityReport r;
    const BlockMass block(gamma, mu, nu);
    r.max_causal_deviation = kernel_deviation(block, mu, nu, Violation::Side::Mu, r.violations);
    const double nu_dev = kernel_deviation(block, mu, nu, Violation::Side::Nu, r.violations);
    r.max_bicausal_deviation = std::max(r.max_causal_deviation, nu_dev);
    r.is_causal = r.max_causal_deviation <= kCausalityTolerance;
    r.is_bicausal = r.max_bicausal_deviation <= kCausalityTolerance;
    return r;
}

CausalityReport detect_monge(const Coupling& gamma, const ScenarioTree& mu, const ScenarioTree& nu) {
    require_depths(mu, nu);
    CausalityReport r;
    const BlockMass block(gamma, mu, nu);
    r.is_monge_adapted = stagewise_point_masses(block, mu, nu, true);
    r.is_invertible_monge = r.is_monge_adapted && stagewise_point_masses(block, nu, mu, false);
    return r;
}

CausalityReport full_report(const Coupling& gamma, const ScenarioTree& mu, const ScenarioTree& nu) {
    CausalityReport r = gamma.nu_marginal_error(mu, nu) <= kCausalityTolerance ? is_bicausal(gamma, mu, nu)
                                                                               : is_causal(gamma, mu, nu);
    const auto monge = detect_monge(gamma, mu, nu);
    r.is_monge_adapted = monge.is_monge_adapted;
    r.is_invertible_monge = monge.is_invertible_monge;
    return r;
}

void validate_map(const AdaptedMap& map, const ScenarioTree& mu, const ScenarioTree& nu) {
    if (mu.depth() != nu.depth()) throw ValidationError("adapted map between trees of different depth");
    if (map.target.size() != mu.size()) throw ValidationError("adapted map must assign every mu node");
    if (map.target[kRootNode] != kRootNode) throw ValidationError("adapted map must send root to root");
    for (NodeId id = 1; id < mu.size(); ++id) {
        const NodeId img = map.target[id];
        if (img >= nu.size()) throw ValidationError("adapted map target out of range");
        if (nu.node(img).stage != mu.node(id).stage) throw ValidationError("adapted map does not preserve stages");
        if (*nu.node(img).parent != map.target[*mu.node(id).parent]) throw ValidationError("map is not adapted");
    }
}

Coupling pushforward_coupling(const AdaptedMap& map, const ScenarioTree& mu, const ScenarioTree& nu) {
    validate_map(map, mu, nu);
    Coupling out;
    for (NodeId leaf : mu.leaves()) out.entries.push_back(CouplingEntry{leaf, map.target[leaf], mu.path_prob(leaf)});
    return out;
}

AdaptedMap constant_map(const ScenarioTree& mu, const ScenarioTree& nu, NodeId nu_leaf) {
    if (!nu.is_leaf(nu_leaf)) throw ValidationError("constant map needs a nu leaf");
    AdaptedMap map;
    map.target.resize(mu.size());
    for (NodeId id = 0; id < mu.size(); ++id) map.target[id] = nu.ancestor(nu_leaf, mu.node(id).stage);
    return map;
}

SplitResult split_non_extreme(const Coupling& gamma, const ScenarioTree& mu, const ScenarioTree& nu,
                              std::optional<double> lambda) {
    const auto causal = is_causal(gamma, mu, nu);
    if (!causal.is_causal) throw ValidationError("coupling is not causal");
    if (detect_monge(gamma, mu, nu).is_monge_adapted) throw AlreadyExtreme();

    const BlockMass block(gamma, mu, nu);
    const int N = mu.depth();

    // Stopping stage: first t at which y_t given x_{1:t} has more than one atom.
    struct Trigger {
        int stage;
        double threshold;
        double below;  // conditional mass of y_t < threshold
    };
    std::map<NodeId, Trigger> triggers;
    std::vector<std::optional<NodeId>> trigger_of(mu.size());
    for (int t = 1; t <= N; ++t) {
        for (NodeId a : mu.stage_nodes(t)) {
            const NodeId parent = *mu.node(a).parent;
            if (trigger_of[parent]) {
                trigger_of[a] = trigger_of[parent];
                continue;
            }
            double total = 0.0;
            std::vector<std::pair<double, double>> law;  // (y_t value, mass)
            for (NodeId b : nu.stage_nodes(t)) {
                const double w = block(a, b);
                if (w > 0.0) law.emplace_back(nu.node(b).value, w);
                total += w;
            }
            std::size_t support = 0;
            for (auto& [v, w] : law) {
                w /= total;
                if (w >= kPointMassTolerance) ++support;
            }
            if (support < 2) continue;

            double mean = 0.0;
            for (const auto& [v, w] : law) mean += v * w;
            auto below_mass = [&](double thr) {
                double s = 0.0;
                for (const auto& [v, w] : law)
                    if (v < thr) s += w;
                return s;
            };
            double q = below_mass(mean);
            if (q <= 0.0 || q >= 1.0) {
                // Mean collapsed onto an extreme atom in floating point; split between the two lowest values.
                std::vector<double> vals;
                for (const auto& [v, w] : law)
                    if (w >= kPointMassTolerance) vals.push_back(v);
                std::sort(vals.begin(), vals.end());
                mean = 0.5 * (vals[0] + vals[1]);
                q = below_mass(mean);
            }
            triggers[a] = Trigger{t, mean, q};
            trigger_of[a] = a;
        }
    }
    if (triggers.empty()) throw AlreadyExtreme();

    double lam;
    if (lambda) {
        lam = *lambda;
        if (!(lam > 0.0 && lam < 1.0)) throw ValidationError("lambda must lie in (0, 1)");
        bool active = false;
        for (const auto& [a, tr] : triggers) active = active || tr.below > lam;
        if (!active) throw ValidationError("lambda too large: no history keeps the restricted branch, the split is vacuous");
    } else {
        double smallest = 1.0;
        for (const auto& [a, tr] : triggers) smallest = std::min({smallest, tr.below, 1.0 - tr.below});
        lam = 0.5 * smallest;
    }

    SplitResult out;
    out.lambda = lam;
    for (NodeId leaf : mu.leaves()) out.tau_per_history[leaf] = trigger_of[leaf] ? triggers.at(*trigger_of[leaf]).stage : N + 1;
    for (const auto& [a, tr] : triggers) out.threshold_per_history[a] = tr.threshold;

    const Coupling g = gamma.canonical();
    for (const auto& e : g.entries) {
        double pi_mass = e.mass;
        if (const auto trig = trigger_of[e.mu_leaf]) {
            const Trigger& tr = triggers.at(*trig);
            if (tr.below > lam) {
                const double y = nu.node(nu.ancestor(e.nu_leaf, tr.stage)).value;
                pi_mass = y < tr.threshold ? e.mass / tr.below : 0.0;
            }
        }
        double rest = (e.mass - lam * pi_mass) / (1.0 - lam);
        if (rest < 0.0 && rest > -1e-15) rest = 0.0;
        if (rest < 0.0) throw SolverError("split produced a negative complementary mass");
        const double rebuilt = lam * pi_mass + (1.0 - lam) * rest;
        out.reconstruction_error = std::max(out.reconstruction_error, std::abs(rebuilt - e.mass));
        if (pi_mass > 0.0) out.pi.entries.push_back(CouplingEntry{e.mu_leaf, e.nu_leaf, pi_mass});
        if (rest > 0.0) out.pi_tilde.entries.push_back(CouplingEntry{e.mu_leaf, e.nu_leaf, rest});
    }
    return out;
}

}  // namespace nestedot
