#include "nestedot/nested_solver.hpp"

#include <algorithm>
#include <string>
#include <thread>

#include "nestedot/error.hpp"
#include "nestedot/linear_program.hpp"
#include "nestedot/transport.hpp"

namespace nestedot {

bool tree_less(const ScenarioTree& a, const ScenarioTree& b) {
    if (a.depth() != b.depth()) return a.depth() < b.depth();
    if (a.size() != b.size()) return a.size() < b.size();
    for (NodeId id = 1; id < a.size(); ++id) {
        const auto& x = a.node(id);
        const auto& y = b.node(id);
        if (x.parent != y.parent) return x.parent < y.parent;
        if (x.value != y.value) return x.value < y.value;
        if (x.cond_prob != y.cond_prob) return x.cond_prob < y.cond_prob;
    }
    return false;
}

namespace {

void check_depths(const ScenarioTree& mu, const ScenarioTree& nu) {
    if (mu.depth() != nu.depth())
        throw ValidationError("depth mismatch: " + std::to_string(mu.depth()) + " vs " + std::to_string(nu.depth()));
}

void check_pair_limit(const ScenarioTree& mu, const ScenarioTree& nu) {
    const std::size_t pairs = mu.leaves().size() * nu.leaves().size();
    if (pairs > kPairLimit)
        throw TooLargeError("instance too large: " + std::to_string(pairs) + " leaf pairs exceed " + std::to_string(kPairLimit));
}

std::vector<double> child_probs(const ScenarioTree& t, NodeId id) {
    std::vector<double> w;
    for (NodeId c : t.children(id)) w.push_back(t.node(c).cond_prob);
    return w;
}

// One-stage subproblem of the recursion for the node pair (a, b).
OtSolution stage_problem(const ScenarioTree& mu, const ScenarioTree& nu, const GroundMetric& m,
                         const Eigen::MatrixXd* next, NodeId a, NodeId b) {
    const auto ca = mu.children(a);
    const auto cb = nu.children(b);
    Eigen::MatrixXd cost(static_cast<Eigen::Index>(ca.size()), static_cast<Eigen::Index>(cb.size()));
    for (std::size_t k = 0; k < ca.size(); ++k) {
        for (std::size_t l = 0; l < cb.size(); ++l) {
            double c = m.powered(mu.node(ca[k]).value, nu.node(cb[l]).value);
            if (next) c += (*next)(static_cast<Eigen::Index>(mu.stage_index(ca[k])), static_cast<Eigen::Index>(nu.stage_index(cb[l])));
            cost(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(l)) = c;
        }
    }
    return solve_ot(cost, child_probs(mu, a), child_probs(nu, b));
}

template <class Fn>
void parallel_for(std::size_t count, unsigned threads, Fn&& fn) {
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    if (threads <= 1 || count < 64) {
        for (std::size_t k = 0; k < count; ++k) fn(k);
        return;
    }
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, count));
    std::vector<std::exception_ptr> errors(threads);
    {
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < threads; ++w) {
            pool.emplace_back([&, w] {
                try {
                    for (std::size_t k = w; k < count; k += threads) fn(k);
                } catch (...) {
                    errors[w] = std::current_exception();
                }
            });
        }
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

NestedResult nested_ordered(const ScenarioTree& mu, const ScenarioTree& nu, const GroundMetric& m, NestedOptions opts) {
    const int N = mu.depth();
    NestedResult out;
    out.table.stages.resize(static_cast<std::size_t>(N) + 1);
    for (int t = 0; t <= N; ++t)
        out.table.stages[static_cast<std::size_t>(t)] = Eigen::MatrixXd::Zero(
            static_cast<Eigen::Index>(mu.stage_nodes(t).size()), static_cast<Eigen::Index>(nu.stage_nodes(t).size()));

    // Backward sweep; all pairs of one stage are independent.
    for (int t = N - 1; t >= 0; --t) {
        const auto an = mu.stage_nodes(t);
        const auto bn = nu.stage_nodes(t);
        const Eigen::MatrixXd* next = (t + 1 < N) ? &out.table.stages[static_cast<std::size_t>(t) + 1] : nullptr;
        Eigen::MatrixXd& cur = out.table.stages[static_cast<std::size_t>(t)];
        parallel_for(an.size() * bn.size(), opts.threads, [&](std::size_t k) {
            const std::size_t i = k / bn.size();
            const std::size_t j = k % bn.size();
            cur(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = stage_problem(mu, nu, m, next, an[i], bn[j]).value;
        });
    }
    out.cost_p = std::max(out.table.root_value(), 0.0);
    out.distance = m.root(out.cost_p);

    // Forward pass composing the one-stage optimal plans along positive-mass pairs.
    struct Pending {
        NodeId a;
        NodeId b;
        double mass;
    };
    std::vector<Pending> frontier{{kRootNode, kRootNode, 1.0}};
    for (int t = 0; t < N; ++t) {
        const Eigen::MatrixXd* next = (t + 1 < N) ? &out.table.stages[static_cast<std::size_t>(t) + 1] : nullptr;
        std::vector<Pending> deeper;
        for (const auto& p : frontier) {
            const auto sol = stage_problem(mu, nu, m, next, p.a, p.b);
            const auto ca = mu.children(p.a);
            const auto cb = nu.children(p.b);
            for (std::size_t k = 0; k < ca.size(); ++k)
                for (std::size_t l = 0; l < cb.size(); ++l) {
                    const double w = sol.plan.mass(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(l));
                    if (w > 0.0) deeper.push_back(Pending{ca[k], cb[l], p.mass * w});
                }
        }
        frontier = std::move(deeper);
    }
    for (const auto& p : frontier) out.plan.entries.push_back(CouplingEntry{p.a, p.b, p.mass});
    return out;
}

}  // namespace

NestedResult nested_distance(const ScenarioTree& mu, const ScenarioTree& nu, const GroundMetric& m, NestedOptions opts) {
    check_depths(mu, nu);
    if (!tree_less(nu, mu)) return nested_ordered(mu, nu, m, opts);
    NestedResult r = nested_ordered(nu, mu, m, opts);
    for (auto& s : r.table.stages) s.transposeInPlace();
    r.plan = r.plan.transposed();
    return r;
}

PlanResult brute_force_bicausal(const ScenarioTree& mu, const ScenarioTree& nu, const GroundMetric& m) {
    check_depths(mu, nu);
    check_pair_limit(mu, nu);
    const auto ml = mu.leaves();
    const auto nl = nu.leaves();
    const std::size_t L = ml.size();
    const std::size_t M = nl.size();
    const auto var = [M](std::size_t i, std::size_t j) { return i * M + j; };
    const auto ra = leaf_ranges(mu);
    const auto rb = leaf_ranges(nu);

    LinearProgram lp(L * M);
    for (std::size_t i = 0; i < L; ++i) {
        const auto xi = mu.history(ml[i]);
        for (std::size_t j = 0; j < M; ++j) lp.set_cost(var(i, j), m.path_cost(xi, nu.history(nl[j])));
    }
    for (std::size_t i = 0; i < L; ++i) {
        std::vector<LinearProgram::Term> row;
        for (std::size_t j = 0; j < M; ++j) row.push_back({var(i, j), 1.0});
        lp.add_equality(std::move(row), mu.path_prob(ml[i]));
    }
    for (std::size_t j = 0; j + 1 < M; ++j) {
        std::vector<LinearProgram::Term> row;
        for (std::size_t i = 0; i < L; ++i) row.push_back({var(i, j), 1.0});
        lp.add_equality(std::move(row), nu.path_prob(nl[j]));
    }

    // Kernel constraints: for each stage t < N and stage-t history pair (a, b),
    //   gamma(child a' of a, b) = mu(a' | a) * gamma(a, b), and symmetrically for nu.
    // The last child of each node is implied by the others.
    for (int t = 1; t < mu.depth(); ++t) {
        for (NodeId a : mu.stage_nodes(t)) {
            for (NodeId b : nu.stage_nodes(t)) {
                const auto ca = mu.children(a);
                for (std::size_t k = 0; k + 1 < ca.size(); ++k) {
                    const double q = mu.node(ca[k]).cond_prob;
                    std::vector<LinearProgram::Term> row;
                    for (std::size_t i = ra[a].begin; i < ra[a].end; ++i) {
                        const bool inside = i >= ra[ca[k]].begin && i < ra[ca[k]].end;
                        for (std::size_t j = rb[b].begin; j < rb[b].end; ++j) row.push_back({var(i, j), (inside ? 1.0 : 0.0) - q});
                    }
                    lp.add_equality(std::move(row), 0.0);
                }
                const auto cb = nu.children(b);
                for (std::size_t l = 0; l + 1 < cb.size(); ++l) {
                    const double q = nu.node(cb[l]).cond_prob;
                    std::vector<LinearProgram::Term> row;
                    for (std::size_t i = ra[a].begin; i < ra[a].end; ++i)
                        for (std::size_t j = rb[b].begin; j < rb[b].end; ++j) {
                            const bool inside = j >= rb[cb[l]].begin && j < rb[cb[l]].end;
                            row.push_back({var(i, j), (inside ? 1.0 : 0.0) - q});
                        }
                    lp.add_equality(std::move(row), 0.0);
                }
            }
        }
    }

    const auto res = lp.solve();
    if (res.status != LinearProgram::Result::Status::Optimal) throw SolverError("bicausal linear program did not reach optimality");
    PlanResult out;
    out.cost_p = std::max(res.objective, 0.0);
    out.distance = m.root(out.cost_p);
    for (std::size_t i = 0; i < L; ++i)
        for (std::size_t j = 0; j < M; ++j)
            if (res.x[var(i, j)] > 0.0) out.plan.entries.push_back(CouplingEntry{ml[i], nl[j], res.x[var(i, j)]});
    return out;
}

namespace {

PlanResult wasserstein_ordered(const ScenarioTree& mu, const ScenarioTree& nu, const GroundMetric& m) {
    const auto ml = mu.leaves();
    const auto nl = nu.leaves();
    Eigen::MatrixXd cost(static_cast<Eigen::Index>(ml.size()), static_cast<Eigen::Index>(nl.size()));
    std::vector<double> a, b;
    for (NodeId x : ml) a.push_back(mu.path_prob(x));
    for (NodeId y : nl) b.push_back(nu.path_prob(y));
    for (std::size_t i = 0; i < ml.size(); ++i) {
        const auto xi = mu.history(ml[i]);
        for (std::size_t j = 0; j < nl.size(); ++j)
            cost(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = m.path_cost(xi, nu.history(nl[j]));
    }
    const auto sol = solve_ot(cost, a, b);
    PlanResult out;
    out.cost_p = std::max(sol.value, 0.0);
    out.distance = m.root(out.cost_p);
    out.plan = Coupling::from_dense(mu, nu, sol.plan.mass);
    return out;
}

}  // namespace

PlanResult wasserstein_distance(const ScenarioTree& mu, const ScenarioTree& nu, const GroundMetric& m) {
    check_depths(mu, nu);
    check_pair_limit(mu, nu);
    if (!tree_less(nu, mu)) return wasserstein_ordered(mu, nu, m);
    PlanResult r = wasserstein_ordered(nu, mu, m);
    r.plan = r.plan.transposed();
    return r;
}

Eigen::MatrixXd cauchy_check(std::span<const ScenarioTree> seq, const GroundMetric& m) {
    if (seq.size() < 2) throw ValidationError("need at least two trees");
    const auto n = static_cast<Eigen::Index>(seq.size());
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double d = nested_distance(seq[static_cast<std::size_t>(i)], seq[static_cast<std::size_t>(j)], m).distance;
            out(i, j) = d;
            out(j, i) = d;
        }
    return out;
}

}  // namespace nestedot
