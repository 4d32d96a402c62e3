#include "nestedot/ground_metric.hpp"

#include <algorithm>
#include <cmath>

#include "nestedot/error.hpp"

namespace nestedot {

GroundMetric::GroundMetric(Base base, double cap, double p) : base_(base), cap_(cap), p_(p) {
    if (!(p >= 1.0) || !std::isfinite(p)) throw ValidationError("exponent p must be a finite real >= 1");
    if (!(cap > 0.0)) throw ValidationError("truncation cap must be positive");
}

GroundMetric GroundMetric::usual(double p) { return GroundMetric(Base::Usual, 1.0, p); }

GroundMetric GroundMetric::truncated(double cap, double p) { return GroundMetric(Base::Truncated, cap, p); }

double GroundMetric::base_dist(double a, double b) const {
    const double d = std::abs(a - b);
    return base_ == Base::Truncated ? std::min(d, cap_) : d;
}

double GroundMetric::pow_p(double r) const {
    if (p_ == 1.0) return r;
    if (p_ == 2.0) return r * r;
    return std::pow(r, p_);
}

double GroundMetric::root(double cost_p) const {
    cost_p = std::max(cost_p, 0.0);
    if (p_ == 1.0) return cost_p;
    if (p_ == 2.0) return std::sqrt(cost_p);
    return std::pow(cost_p, 1.0 / p_);
}

double GroundMetric::path_cost(std::span<const double> x, std::span<const double> y) const {
    if (x.size() != y.size()) throw ValidationError("path length mismatch");
    double s = 0.0;
    for (std::size_t t = 0; t < x.size(); ++t) s += powered(x[t], y[t]);
    return s;
}

}  // namespace nestedot
