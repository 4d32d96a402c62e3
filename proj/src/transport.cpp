#include "nestedot/transport.hpp"

#include <algorithm>
#include <optional>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "nestedot/error.hpp"

namespace nestedot {

double TransportPlan::marginal_error(std::span<const double> a, std::span<const double> b) const {
    double err = 0.0;
    for (std::size_t i = 0; i < rows(); ++i) err = std::max(err, std::abs(mass.row(static_cast<Eigen::Index>(i)).sum() - a[i]));
    for (std::size_t j = 0; j < cols(); ++j) err = std::max(err, std::abs(mass.col(static_cast<Eigen::Index>(j)).sum() - b[j]));
    return err;
}

namespace {

std::vector<std::size_t> sorted_order(const DiscreteDistribution& d, bool increasing) {
    std::vector<std::size_t> idx(d.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t x, std::size_t y) {
        return increasing ? d.atoms[x].value < d.atoms[y].value : d.atoms[x].value > d.atoms[y].value;
    });
    return idx;
}

}  // namespace

double quantile_function(const DiscreteDistribution& dist, double u) {
    if (!(u > 0.0 && u <= 1.0)) throw ValidationError("quantile level must lie in (0, 1]");
    dist.validate();
    const auto order = sorted_order(dist, true);
    double cdf = 0.0;
    for (std::size_t k = 0; k + 1 < order.size(); ++k) {
        cdf += dist.atoms[order[k]].mass;
        if (cdf >= u) return dist.atoms[order[k]].value;
    }
    return dist.atoms[order.back()].value;
}

std::vector<QuantilePiece> quantile_coupling(const DiscreteDistribution& a, const DiscreteDistribution& b,
                                             bool increasing) {
    a.validate();
    b.validate();
    const auto sa = sorted_order(a, true);
    const auto sb = sorted_order(b, increasing);

    std::vector<QuantilePiece> pieces;
    pieces.reserve(sa.size() + sb.size());
    std::size_t ia = 0, ib = 0;
    double ca = a.atoms[sa[0]].mass;
    double cb = b.atoms[sb[0]].mass;
    double lower = 0.0;
    for (;;) {
        const bool last_a = ia + 1 == sa.size();
        const bool last_b = ib + 1 == sb.size();
        if (last_a) ca = 1.0;
        if (last_b) cb = 1.0;
        if (last_a && last_b) {
            pieces.push_back(QuantilePiece{sa[ia], sb[ib], lower, 1.0});
            break;
        }
        const bool tie = std::abs(ca - cb) <= kQuantileSnap;
        const double upper = tie ? std::max(ca, cb) : std::min(ca, cb);
        if (upper > lower) pieces.push_back(QuantilePiece{sa[ia], sb[ib], lower, upper});
        lower = std::max(lower, upper);
        const bool step_a = !last_a && (tie || ca < cb);
        const bool step_b = !last_b && (tie || cb < ca);
        if (step_a) ca += a.atoms[sa[++ia]].mass;
        if (step_b) cb += b.atoms[sb[++ib]].mass;
        if (!step_a && !step_b) {
            // The exhausted side is at its last atom; advance the other one.
            if (!last_b) cb += b.atoms[sb[++ib]].mass;
            else ca += a.atoms[sa[++ia]].mass;
        }
    }
    return pieces;
}

OneDimTransport wasserstein_1d(const DiscreteDistribution& a, const DiscreteDistribution& b, const GroundMetric& m) {
    OneDimTransport out;
    out.plan.mass = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(a.size()), static_cast<Eigen::Index>(b.size()));
    for (const auto& piece : quantile_coupling(a, b, true)) {
        const double w = piece.mass();
        out.plan.mass(static_cast<Eigen::Index>(piece.source), static_cast<Eigen::Index>(piece.target)) += w;
        out.cost_p += w * m.powered(a.atoms[piece.source].value, b.atoms[piece.target].value);
    }
    return out;
}

namespace {

struct Cell {
    std::size_t row;
    std::size_t col;
};

class TransportationSimplex {
public:
    TransportationSimplex(const Eigen::MatrixXd& cost, std::span<const double> a, std::span<const double> b)
        : c_(cost), a_(a), b_(b), m_(a.size()), n_(b.size()),
          x_(Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m_), static_cast<Eigen::Index>(n_))),
          basic_(m_ * n_, false) {
        scale_ = std::max(1.0, cost.maxCoeff());
    }

    OtSolution run() {
        north_west_corner();
        std::size_t degenerate_run = 0;
        std::size_t pivots = 0;
        const std::size_t cap = 200 * (m_ + n_) * (m_ + n_) + 1000;
        for (;;) {
            compute_potentials();
            const bool bland = degenerate_run > kDegenerateLimit;
            auto entering = choose_entering(bland);
            if (!entering) break;
            if (++pivots > cap) throw SolverError("transportation simplex exceeded its pivot budget");
            const double theta = pivot(*entering);
            degenerate_run = theta > 0.0 ? 0 : degenerate_run + 1;
        }
        OtSolution out;
        out.plan.mass = x_;
        out.value = 0.0;
        for (const auto& cell : basis_) out.value += c_(idx(cell.row), idx(cell.col)) * x_(idx(cell.row), idx(cell.col));
        out.row_potential = u_;
        out.col_potential = v_;
        out.pivots = pivots;
        return out;
    }

private:
    static constexpr std::size_t kDegenerateLimit = 50;
    static Eigen::Index idx(std::size_t i) { return static_cast<Eigen::Index>(i); }

    void add_basic(std::size_t i, std::size_t j, double value) {
        basis_.push_back(Cell{i, j});
        basic_[i * n_ + j] = true;
        x_(idx(i), idx(j)) = value;
    }

    void north_west_corner() {
        std::size_t i = 0, j = 0;
        double ra = a_[0], rb = b_[0];
        for (;;) {
            const double q = std::min(ra, rb);
            add_basic(i, j, q);
            ra -= q;
            rb -= q;
            if (i + 1 == m_ && j + 1 == n_) break;
            if ((ra <= rb && i + 1 < m_) || j + 1 == n_) {
                ra = a_[++i];
            } else {
                rb = b_[++j];
            }
        }
    }

    // Solves u_i + v_j = c_ij on the spanning tree of basic cells.
    void compute_potentials() {
        rows_adj_.assign(m_, {});
        cols_adj_.assign(n_, {});
        for (std::size_t k = 0; k < basis_.size(); ++k) {
            rows_adj_[basis_[k].row].push_back(k);
            cols_adj_[basis_[k].col].push_back(k);
        }
        u_ = Eigen::VectorXd::Constant(idx(m_), std::numeric_limits<double>::quiet_NaN());
        v_ = Eigen::VectorXd::Constant(idx(n_), std::numeric_limits<double>::quiet_NaN());
        u_(0) = 0.0;
        std::vector<std::pair<bool, std::size_t>> stack{{true, 0}};
        while (!stack.empty()) {
            auto [is_row, k] = stack.back();
            stack.pop_back();
            if (is_row) {
                for (std::size_t e : rows_adj_[k]) {
                    const auto j = basis_[e].col;
                    if (std::isnan(v_(idx(j)))) {
                        v_(idx(j)) = c_(idx(k), idx(j)) - u_(idx(k));
                        stack.emplace_back(false, j);
                    }
                }
            } else {
                for (std::size_t e : cols_adj_[k]) {
                    const auto i = basis_[e].row;
                    if (std::isnan(u_(idx(i)))) {
                        u_(idx(i)) = c_(idx(i), idx(k)) - v_(idx(k));
                        stack.emplace_back(true, i);
                    }
                }
            }
        }
    }

    std::optional<Cell> choose_entering(bool bland) const {
        const double eps = 1e-12 * scale_;
        std::optional<Cell> best;
        double best_r = -eps;
        for (std::size_t i = 0; i < m_; ++i) {
            for (std::size_t j = 0; j < n_; ++j) {
                if (basic_[i * n_ + j]) continue;
                const double r = c_(idx(i), idx(j)) - u_(idx(i)) - v_(idx(j));
                if (r < best_r) {
                    best = Cell{i, j};
                    if (bland) return best;
                    best_r = r;
                }
            }
        }
        return best;
    }

    // Path of basic cells from column `col` to row `row` in the basis tree.
    std::vector<std::size_t> tree_path(std::size_t row, std::size_t col) const {
        // Nodes: rows are 0..m-1, columns m..m+n-1. Search from the column.
        const std::size_t total = m_ + n_;
        std::vector<std::size_t> via(total, basis_.size());
        std::vector<bool> seen(total, false);
        std::vector<std::size_t> queue{m_ + col};
        seen[m_ + col] = true;
        for (std::size_t head = 0; head < queue.size(); ++head) {
            const std::size_t node = queue[head];
            if (node == row) break;
            const auto& adj = node < m_ ? rows_adj_[node] : cols_adj_[node - m_];
            for (std::size_t e : adj) {
                const std::size_t other = node < m_ ? m_ + basis_[e].col : basis_[e].row;
                if (!seen[other]) {
                    seen[other] = true;
                    via[other] = e;
                    queue.push_back(other);
                }
            }
        }
        std::vector<std::size_t> path;
        std::size_t node = row;
        while (node != m_ + col) {
            const std::size_t e = via[node];
            path.push_back(e);
            node = node < m_ ? m_ + basis_[e].col : basis_[e].row;
        }
        std::reverse(path.begin(), path.end());
        return path;
    }

    double pivot(Cell entering) {
        // Cycle: entering (+), then cells from its column back to its row,
        // alternating (-), (+), ..., (-).
        const auto path = tree_path(entering.row, entering.col);
        double theta = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < path.size(); k += 2) {
            const auto& cell = basis_[path[k]];
            theta = std::min(theta, x_(idx(cell.row), idx(cell.col)));
        }
        theta = std::max(theta, 0.0);
        std::size_t leave = basis_.size();
        for (std::size_t k = 0; k < path.size(); k += 2) {
            const auto& cell = basis_[path[k]];
            if (x_(idx(cell.row), idx(cell.col)) <= theta + 1e-300) {
                if (leave == basis_.size() || cell.row * n_ + cell.col < basis_[leave].row * n_ + basis_[leave].col)
                    leave = path[k];
            }
        }
        for (std::size_t k = 0; k < path.size(); ++k) {
            const auto& cell = basis_[path[k]];
            double& xv = x_(idx(cell.row), idx(cell.col));
            xv += (k % 2 == 0) ? -theta : theta;
            if (xv < 0.0) xv = 0.0;
        }
        const Cell gone = basis_[leave];
        x_(idx(gone.row), idx(gone.col)) = 0.0;
        basic_[gone.row * n_ + gone.col] = false;
        basis_[leave] = entering;
        basic_[entering.row * n_ + entering.col] = true;
        x_(idx(entering.row), idx(entering.col)) = theta;
        return theta;
    }

    const Eigen::MatrixXd& c_;
    std::span<const double> a_;
    std::span<const double> b_;
    std::size_t m_;
    std::size_t n_;
    double scale_ = 1.0;
    Eigen::MatrixXd x_;
    std::vector<bool> basic_;
    std::vector<Cell> basis_;
    std::vector<std::vector<std::size_t>> rows_adj_;
    std::vector<std::vector<std::size_t>> cols_adj_;
    Eigen::VectorXd u_;
    Eigen::VectorXd v_;
};

void check_masses(std::span<const double> w, const char* side) {
    if (w.empty()) throw ValidationError(std::string(side) + " marginal is empty");
    double total = 0.0;
    for (double x : w) {
        if (!(x >= 0.0) || !std::isfinite(x)) throw ValidationError(std::string(side) + " marginal has a negative entry");
        total += x;
    }
    if (std::abs(total - 1.0) > kMarginalTolerance)
        throw ValidationError(std::string(side) + " marginal sums to " + std::to_string(total));
}

}  // namespace

OtSolution solve_ot(const Eigen::MatrixXd& cost, std::span<const double> a, std::span<const double> b) {
    check_masses(a, "row");
    check_masses(b, "column");
    if (static_cast<std::size_t>(cost.rows()) != a.size() || static_cast<std::size_t>(cost.cols()) != b.size())
        throw ValidationError("cost matrix shape does not match the marginals");
    if (!cost.allFinite() || (cost.array() < 0.0).any()) throw ValidationError("cost matrix has negative or non-finite entries");
    return TransportationSimplex(cost, a, b).run();
}

}  // namespace nestedot
