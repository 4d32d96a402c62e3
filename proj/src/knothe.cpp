#include "nestedot/knothe.hpp"

#include <string>

#include "nestedot/error.hpp"
#include "nestedot/families.hpp"
#include "nestedot/nested_solver.hpp"
#include "nestedot/transport.hpp"

namespace nestedot {

namespace {

KRCoupling rearrangement(const ScenarioTree& mu, const ScenarioTree& nu, bool increasing) {
    if (mu.depth() != nu.depth()) throw ValidationError("KR coupling needs trees of equal depth");
    const int N = mu.depth();
    KRCoupling out;
    out.stages.resize(static_cast<std::size_t>(N));

    struct Pending {
        NodeId a;
        NodeId b;
        double mass;
    };
    std::vector<Pending> frontier{{kRootNode, kRootNode, 1.0}};
    for (int t = 0; t < N; ++t) {
        std::vector<Pending> deeper;
        for (const auto& p : frontier) {
            const auto ca = mu.children(p.a);
            const auto cb = nu.children(p.b);
            const auto pieces = quantile_coupling(disintegrate(mu, p.a), disintegrate(nu, p.b), increasing);
            for (const auto& q : pieces) {
                out.stages[static_cast<std::size_t>(t)].push_back(
                    KRPiece{p.a, p.b, ca[q.source], cb[q.target], q.lower, q.upper});
                deeper.push_back(Pending{ca[q.source], cb[q.target], p.mass * q.mass()});
            }
        }
        frontier = std::move(deeper);
    }
    for (const auto& p : frontier) out.coupling.entries.push_back(CouplingEntry{p.a, p.b, p.mass});
    return out;
}

}  // namespace

KRCoupling kr_coupling(const ScenarioTree& mu, const ScenarioTree& nu) { return rearrangement(mu, nu, true); }

KRCoupling detail::antitone_coupling(const ScenarioTree& mu, const ScenarioTree& nu) { return rearrangement(mu, nu, false); }

double kr_distance(const ScenarioTree& mu, const ScenarioTree& nu, const GroundMetric& m) {
    return m.root(kr_coupling(mu, nu).coupling.cost(mu, nu, m));
}

KRGap kr_gap_demo(int n, double p, int family, int discretize) {
    if (n < 1) throw ValidationError("n must be at least 1");
    const auto metric = GroundMetric::usual(p);
    ScenarioTree mu = family == 2 ? families::uniform_split_fan(n, discretize) : families::kr_mirror_mu(n);
    ScenarioTree nu = family == 2 ? families::uniform_split_limit(discretize) : families::kr_mirror_nu(n);
    if (family != 1 && family != 2) throw ValidationError("unknown KR gap family " + std::to_string(family));
    KRGap out;
    out.kr = kr_distance(mu, nu, metric);
    out.nested = nested_distance(mu, nu, metric).distance;
    if (out.kr < out.nested - 1e-9) throw SolverError("KR distance fell below the nested distance");
    return out;
}

}  // namespace nestedot
