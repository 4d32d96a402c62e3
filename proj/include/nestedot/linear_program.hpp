#pragma once

#include <cstddef>
#include <vector>

namespace nestedot {

/// Standard-form linear program: minimise c^T x subject to A x = b, x >= 0.
/// Rows are stored sparsely; the solver densifies them into a tableau, which
/// is adequate for the few-thousand-variable instances used as oracles.
class LinearProgram {
public:
    struct Term {
        std::size_t var;
        double coef;
    };

    explicit LinearProgram(std::size_t num_vars) : cost_(num_vars, 0.0) {}

    std::size_t num_vars() const { return cost_.size(); }
    std::size_t num_rows() const { return rows_.size(); }

    void set_cost(std::size_t var, double c) { cost_.at(var) = c; }
    void add_equality(std::vector<Term> terms, double rhs);

    struct Result {
        enum class Status { Optimal, Infeasible, Unbounded };
        Status status = Status::Infeasible;
        double objective = 0.0;
        std::vector<double> x;
        std::size_t pivots = 0;
    };

    /// Two-phase dense tableau simplex. Dantzig pricing with a switch to
    /// Bland's rule during degenerate stalls. Redundant rows are dropped after
    /// phase one.
    Result solve() const;

private:
    std::vector<double> cost_;
    std::vector<std::vector<Term>> rows_;
    std::vector<double> rhs_;
};

}  // namespace nestedot
