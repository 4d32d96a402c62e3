#pragma once

#include <vector>

#include "nestedot/coupling.hpp"
#include "nestedot/ground_metric.hpp"
#include "nestedot/process_model.hpp"

namespace nestedot {

/// One cell of the stage-wise quantile decomposition: under the matched
/// history pair (mu_parent, nu_parent), the children meet on the u-interval
/// (lower, upper] of that stage's uniform.
struct KRPiece {
    NodeId mu_parent = 0;
    NodeId nu_parent = 0;
    NodeId mu_child = 0;
    NodeId nu_child = 0;
    double lower = 0.0;
    double upper = 0.0;
};

struct KRCoupling {
    Coupling coupling;
    std::vector<std::vector<KRPiece>> stages;  ///< stages[t - 1] holds the pieces of stage t
};

/// Increasing Knothe-Rosenblatt rearrangement realised on atoms: shared
/// uniforms, each matched history pair coupled by its one-stage quantile plan.
KRCoupling kr_coupling(const ScenarioTree& mu, const ScenarioTree& nu);

/// (sum over the KR coupling of mass * d^p)^{1/p}.
double kr_distance(const ScenarioTree& mu, const ScenarioTree& nu, const GroundMetric& m);

namespace detail {
/// Stage-wise antitone rearrangement (nu traversed in decreasing order at
/// every stage). Bicausal, so its cost bounds the nested distance.
KRCoupling antitone_coupling(const ScenarioTree& mu, const ScenarioTree& nu);
}  // namespace detail

struct KRGap {
    double kr = 0.0;
    double nested = 0.0;
};

/// Both distances on one member of a comparison family:
///   family 1: mu_n = (d(1/n, n/2) + d(-1/n, -n/2)) / 2 against the stage-2 mirror nu_n;
///   family 2: two-stage uniform family with its limit, stage 2 discretised to `discretize` atoms.
/// Throws SolverError if kr < nested - 1e-9.
KRGap kr_gap_demo(int n, double p, int family = 1, int discretize = 16);

}  // namespace nestedot
