#pragma once

#include <map>
#include <optional>
#include <vector>

#include "nestedot/coupling.hpp"
#include "nestedot/error.hpp"
#include "nestedot/process_model.hpp"

namespace nestedot {

/// Kernel deviations above this flag a violation.
inline constexpr double kCausalityTolerance = 1e-9;
/// A conditional law is a point mass when its second-largest atom is below this.
inline constexpr double kPointMassTolerance = 1e-12;
/// History pairs carrying at most this much mass are not conditioned on.
inline constexpr double kNegligibleMass = 1e-14;

struct Violation {
    enum class Side { Mu, Nu };
    Side side = Side::Mu;
    int stage = 0;       ///< stage of the next coordinate whose kernel is violated
    NodeId mu_node = 0;  ///< conditioning history pair (stage - 1)
    NodeId nu_node = 0;
    double deviation = 0.0;
};

struct CausalityReport {
    bool is_causal = false;
    bool is_bicausal = false;
    bool is_monge_adapted = false;
    bool is_invertible_monge = false;
    double max_causal_deviation = 0.0;    ///< mu-side kernel deviation
    double max_bicausal_deviation = 0.0;  ///< max over both sides
    std::vector<Violation> violations;
};

/// Checks that, for each stage t < N and each positive-mass history pair,
/// the conditional law of x_{t+1} equals mu's kernel. Requires the mu-marginal
/// of gamma to equal mu (ValidationError otherwise). Fills the causal fields.
CausalityReport is_causal(const Coupling& gamma, const ScenarioTree& mu, const ScenarioTree& nu);

/// Both kernel conditions; also requires the nu-marginal to match. Fills the
/// causal and bicausal fields.
CausalityReport is_bicausal(const Coupling& gamma, const ScenarioTree& mu, const ScenarioTree& nu);

/// Monge fields only: y_t is a.s. a function of x_{1:t} for every t; the
/// invertible variant also needs x_t to be a function of y_{1:t}.
CausalityReport detect_monge(const Coupling& gamma, const ScenarioTree& mu, const ScenarioTree& nu);

/// Everything: causal, bicausal (when the nu-marginal matches) and Monge fields.
CausalityReport full_report(const Coupling& gamma, const ScenarioTree& mu, const ScenarioTree& nu);

/// Adapted map between trees: each mu node goes to a nu node of the same
/// stage, and the image of a child is a child of the image of its parent.
struct AdaptedMap {
    std::vector<NodeId> target;  ///< indexed by mu node id
};

/// Validates adaptedness; throws ValidationError otherwise.
void validate_map(const AdaptedMap& map, const ScenarioTree& mu, const ScenarioTree& nu);
/// (id, T)_* mu as a coupling between mu and nu (nu's probabilities are not used).
Coupling pushforward_coupling(const AdaptedMap& map, const ScenarioTree& mu, const ScenarioTree& nu);
/// The constant map onto one nu leaf path.
AdaptedMap constant_map(const ScenarioTree& mu, const ScenarioTree& nu, NodeId nu_leaf);

class AlreadyExtreme : public ValidationError {
public:
    AlreadyExtreme() : ValidationError("coupling is Monge-adapted and hence already extreme") {}
};

struct SplitResult {
    double lambda = 0.0;
    Coupling pi;
    Coupling pi_tilde;
    std::map<NodeId, int> tau_per_history;         ///< mu leaf -> stopping stage (N + 1 if never)
    std::map<NodeId, double> threshold_per_history;  ///< triggering mu node -> j
    double reconstruction_error = 0.0;
};

/// Writes a causal, non-Monge gamma as lambda * pi + (1 - lambda) * pi_tilde
/// with pi != pi_tilde both causal. The split happens at the first stage tau
/// where y_tau is not determined by x_{1:tau}; pi keeps the part of gamma with
/// y_tau below its conditional mean, renormalised. Without an explicit
/// lambda it uses half the smallest branch mass over triggering histories.
/// Throws AlreadyExtreme for Monge-adapted gamma and ValidationError when
/// gamma is not causal or lambda leaves no history active.
SplitResult split_non_extreme(const Coupling& gamma, const ScenarioTree& mu, const ScenarioTree& nu,
                              std::optional<double> lambda = std::nullopt);

}  // namespace nestedot
