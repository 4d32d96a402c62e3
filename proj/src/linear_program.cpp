#include "nestedot/linear_program.hpp"

#include <cmath>
#include <limits>

#include "nestedot/error.hpp"

namespace nestedot {

void LinearProgram::add_equality(std::vector<Term> terms, double rhs) {
    for (const auto& t : terms)
        if (t.var >= cost_.size()) throw ValidationError("linear program term refers to an unknown variable");
    rows_.push_back(std::move(terms));
    rhs_.push_back(rhs);
}

namespace {

constexpr double kPivotTol = 1e-9;
constexpr double kPriceTol = 1e-11;
constexpr std::size_t kDegenerateLimit = 50;

class Tableau {
public:
    Tableau(std::size_t rows, std::size_t vars)
        : m_(rows), n_(vars), width_(vars + rows + 1), t_((rows + 1) * width_, 0.0), basis_(rows), active_(rows, true) {}

    double& at(std::size_t r, std::size_t c) { return t_[r * width_ + c]; }
    double at(std::size_t r, std::size_t c) const { return t_[r * width_ + c]; }
    double& rhs(std::size_t r) { return at(r, width_ - 1); }
    std::size_t obj() const { return m_; }

    void pivot(std::size_t pr, std::size_t pc) {
        const double inv = 1.0 / at(pr, pc);
        double* prow = &t_[pr * width_];
        for (std::size_t c = 0; c < width_; ++c) prow[c] *= inv;
        prow[pc] = 1.0;
        for (std::size_t r = 0; r <= m_; ++r) {
            if (r == pr) continue;
            double* row = &t_[r * width_];
            const double f = row[pc];
            if (f == 0.0) continue;
            for (std::size_t c = 0; c < width_; ++c) row[c] -= f * prow[c];
            row[pc] = 0.0;
        }
        basis_[pr] = pc;
    }

    // Runs simplex iterations on the current objective row over columns
    // [0, allowed). Returns false when unbounded.
    bool optimise(std::size_t allowed, std::size_t& pivots) {
        std::size_t degenerate_run = 0;
        const std::size_t cap = 50 * (m_ + n_) + 10000;
        for (std::size_t iter = 0;; ++iter) {
            if (iter > cap) throw SolverError("simplex exceeded its iteration budget");
            const bool bland = degenerate_run > kDegenerateLimit;
            std::size_t enter = allowed;
            double best = -kPriceTol;
            for (std::size_t c = 0; c < allowed; ++c) {
                const double d = at(obj(), c);
                if (d < best) {
                    enter = c;
                    if (bland) break;
                    best = d;
                }
            }
            if (enter == allowed) return true;

            std::size_t leave = m_;
            double ratio = std::numeric_limits<double>::infinity();
            for (std::size_t r = 0; r < m_; ++r) {
                if (!active_[r]) continue;
                const double a = at(r, enter);
                if (a <= kPivotTol) continue;
                const double q = std::max(rhs(r), 0.0) / a;
                if (leave == m_ || q < ratio - 1e-12 * (1.0 + ratio)) {
                    leave = r;
                    ratio = q;
                } else if (q <= ratio + 1e-12 * (1.0 + ratio)) {
                    const bool better = bland ? basis_[r] < basis_[leave] : a > at(leave, enter);
                    if (better) {
                        leave = r;
                        ratio = std::min(ratio, q);
                    }
                }
            }
            if (leave == m_) return false;
            degenerate_run = ratio > 1e-14 ? 0 : degenerate_run + 1;
            pivot(leave, enter);
            ++pivots;
        }
    }

    std::size_t m_;
    std::size_t n_;
    std::size_t width_;
    std::vector<double> t_;
    std::vector<std::size_t> basis_;
    std::vector<bool> active_;
};

}  // namespace

LinearProgram::Result LinearProgram::solve() const {
    const std::size_t m = rows_.size();
    const std::size_t n = cost_.size();
    Result res;
    Tableau tab(m, n);

    for (std::size_t r = 0; r < m; ++r) {
        const double sign = rhs_[r] < 0.0 ? -1.0 : 1.0;
        for (const auto& term : rows_[r]) tab.at(r, term.var) += sign * term.coef;
        tab.at(r, n + r) = 1.0;
        tab.rhs(r) = sign * rhs_[r];
        tab.basis_[r] = n + r;
    }

    // Phase one: minimise the sum of artificials.
    for (std::size_t r = 0; r < m; ++r) {
        for (std::size_t c = 0; c < n; ++c) tab.at(tab.obj(), c) -= tab.at(r, c);
        tab.rhs(tab.obj()) -= tab.rhs(r);
    }
    if (!tab.optimise(n + m, res.pivots)) throw SolverError("phase one reported an unbounded auxiliary problem");
    if (-tab.rhs(tab.obj()) > 1e-9) {
        res.status = Result::Status::Infeasible;
        return res;
    }

    // Drive remaining artificials out of the basis; rows that cannot be
    // pivoted are linearly dependent on the others.
    for (std::size_t r = 0; r < m; ++r) {
        if (tab.basis_[r] < n) continue;
        std::size_t best = n;
        double mag = kPivotTol;
        for (std::size_t c = 0; c < n; ++c) {
            if (std::abs(tab.at(r, c)) > mag) {
                mag = std::abs(tab.at(r, c));
                best = c;
            }
        }
        if (best == n) {
            tab.active_[r] = false;
        } else {
            tab.pivot(r, best);
            ++res.pivots;
        }
    }

    // Phase two objective row.
    for (std::size_t c = 0; c < tab.width_; ++c) tab.at(tab.obj(), c) = 0.0;
    for (std::size_t c = 0; c < n; ++c) tab.at(tab.obj(), c) = cost_[c];
    for (std::size_t r = 0; r < m; ++r) {
        if (!tab.active_[r]) continue;
        const std::size_t bv = tab.basis_[r];
        const double cb = bv < n ? cost_[bv] : 0.0;
        if (cb == 0.0) continue;
        for (std::size_t c = 0; c < tab.width_; ++c) tab.at(tab.obj(), c) -= cb * tab.at(r, c);
    }
    if (!tab.optimise(n, res.pivots)) {
        res.status = Result::Status::Unbounded;
        return res;
    }

    res.status = Result::Status::Optimal;
    res.x.assign(n, 0.0);
    for (std::size_t r = 0; r < m; ++r)
        if (tab.active_[r] && tab.basis_[r] < n) res.x[tab.basis_[r]] = std::max(tab.rhs(r), 0.0);
    res.objective = 0.0;
    for (std::size_t c = 0; c < n; ++c) res.objective += cost_[c] * res.x[c];
    return res;
}

}  // namespace nestedot
