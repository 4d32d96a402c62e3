#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "nestedot/distribution.hpp"
#include "nestedot/ground_metric.hpp"

namespace nestedot {

/// Tolerance on marginal constraints of returned plans.
inline constexpr double kMarginalTolerance = 1e-9;
/// Breakpoints of cumulative sums closer than this are treated as equal.
inline constexpr double kQuantileSnap = 1e-12;

/// Joint mass on source atoms (rows) x target atoms (columns).
struct TransportPlan {
    Eigen::MatrixXd mass;

    std::size_t rows() const { return static_cast<std::size_t>(mass.rows()); }
    std::size_t cols() const { return static_cast<std::size_t>(mass.cols()); }
    double cost(const Eigen::MatrixXd& c) const { return (mass.array() * c.array()).sum(); }
    /// Largest absolute deviation of row/column sums from the given marginals.
    double marginal_error(std::span<const double> a, std::span<const double> b) const;
};

/// Left-continuous generalised inverse F^{-1}(u) = inf{y : F(y) >= u}, u in (0, 1].
double quantile_function(const DiscreteDistribution& dist, double u);

/// One cell of the comonotone (or antitone) coupling: the u-interval
/// (lower, upper] on which source atom `source` meets target atom `target`.
struct QuantilePiece {
    std::size_t source = 0;
    std::size_t target = 0;
    double lower = 0.0;
    double upper = 0.0;

    double mass() const { return upper - lower; }
};

/// Common refinement of the two CDF partitions of (0, 1]. Atom indices refer
/// to the input order. With `increasing = false` the target is traversed in
/// decreasing order (antitone coupling).
std::vector<QuantilePiece> quantile_coupling(const DiscreteDistribution& a, const DiscreteDistribution& b,
                                             bool increasing = true);

struct OneDimTransport {
    double cost_p = 0.0;
    TransportPlan plan;
};

/// Cost of the quantile coupling, integral of base_dist(F_a^{-1}(u), F_b^{-1}(u))^p du,
/// computed exactly by interval splitting. Optimal for the usual base metric;
/// for a truncated base metric it is only the cost of the quantile plan.
OneDimTransport wasserstein_1d(const DiscreteDistribution& a, const DiscreteDistribution& b, const GroundMetric& m);

struct OtSolution {
    double value = 0.0;
    TransportPlan plan;
    /// Dual potentials: u_i + v_j <= c_ij everywhere, equality on the basis.
    Eigen::VectorXd row_potential;
    Eigen::VectorXd col_potential;
    std::size_t pivots = 0;
};

/// Exact transportation simplex on a dense nonnegative cost matrix.
///
/// Starts from the north-west corner basis and pivots with the most negative
/// reduced cost (lowest (row, col) on ties). After a run of degenerate pivots
/// it switches to Bland's rule until progress resumes, so it cannot cycle.
/// Throws ValidationError on negative costs, bad masses or shape mismatch.
OtSolution solve_ot(const Eigen::MatrixXd& cost, std::span<const double> a, std::span<const double> b);

}  // namespace nestedot
