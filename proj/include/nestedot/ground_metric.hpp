#pragma once

#include <span>
#include <string>

namespace nestedot {

/// Base metric on the line together with the exponent p of the l^p product
/// metric on R^N. Solvers carry costs as p-th powers; `root` converts back.
class GroundMetric {
public:
    enum class Base { Usual, Truncated };

    /// |a - b| with exponent p >= 1.
    static GroundMetric usual(double p = 1.0);
    /// min(|a - b|, cap) with cap > 0 and exponent p >= 1.
    static GroundMetric truncated(double cap = 1.0, double p = 1.0);

    Base base() const { return base_; }
    double cap() const { return cap_; }
    double p() const { return p_; }
    std::string name() const { return base_ == Base::Usual ? "usual" : "truncated"; }

    double base_dist(double a, double b) const;
    /// base_dist(a, b)^p.
    double powered(double a, double b) const { return pow_p(base_dist(a, b)); }
    /// d(x, y)^p = sum_t base_dist(x_t, y_t)^p. Throws on length mismatch.
    double path_cost(std::span<const double> x, std::span<const double> y) const;

    double pow_p(double r) const;
    /// cost^(1/p); the single place where roots are taken.
    double root(double cost_p) const;

    friend bool operator==(const GroundMetric&, const GroundMetric&) = default;

private:
    GroundMetric(Base base, double cap, double p);

    Base base_;
    double cap_;
    double p_;
};

}  // namespace nestedot
