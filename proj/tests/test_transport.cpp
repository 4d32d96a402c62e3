#include <cmath>
#include <random>

#include "doctest.h"

#include "nestedot/error.hpp"
#include "nestedot/ground_metric.hpp"
#include "nestedot/linear_program.hpp"
#include "nestedot/transport.hpp"

using namespace nestedot;

namespace {

DiscreteDistribution dist(std::vector<Atom> atoms) { return DiscreteDistribution{std::move(atoms)}; }

std::vector<double> random_weights(std::mt19937_64& rng, int n) {
    std::uniform_real_distribution<double> w(0.05, 1.0);
    std::vector<double> out(static_cast<std::size_t>(n));
    double s = 0.0;
    for (auto& x : out) s += (x = w(rng));
    for (auto& x : out) x /= s;
    return out;
}

// Solves the transport LP with the generic tableau solver.
double lp_transport(const Eigen::MatrixXd& c, const std::vector<double>& a, const std::vector<double>& b) {
    const auto n = static_cast<std::size_t>(c.rows()), m = static_cast<std::size_t>(c.cols());
    LinearProgram lp(n * m);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j) lp.set_cost(i * m + j, c(Eigen::Index(i), Eigen::Index(j)));
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<LinearProgram::Term> row;
        for (std::size_t j = 0; j < m; ++j) row.push_back({i * m + j, 1.0});
        lp.add_equality(row, a[i]);
    }
    for (std::size_t j = 0; j < m; ++j) {
        std::vector<LinearProgram::Term> col;
        for (std::size_t i = 0; i < n; ++i) col.push_back({i * m + j, 1.0});
        lp.add_equality(col, b[j]);
    }
    const auto r = lp.solve();
    REQUIRE(r.status == LinearProgram::Result::Status::Optimal);
    return r.objective;
}

}  // namespace

TEST_CASE("ground metric values") {
    const auto u1 = GroundMetric::usual(1.0), u2 = GroundMetric::usual(2.0), tr = GroundMetric::truncated(1.0, 1.0);
    CHECK(u1.base_dist(0, 3) == 3.0);
    CHECK(tr.base_dist(0, 3) == 1.0);
    CHECK(u1.base_dist(2.5, 2.5) == 0.0);
    CHECK(tr.base_dist(2.5, 2.5) == 0.0);
    const std::vector<double> x{0, 1}, y{1, 3}, z{5, 1};
    CHECK(u2.path_cost(x, y) == 5.0);
    CHECK(u1.path_cost(x, y) == 3.0);
    CHECK(tr.path_cost(x, z) == 1.0);
    CHECK_THROWS_AS(u1.path_cost(x, std::vector<double>{1.0}), ValidationError);
    CHECK_THROWS_AS(GroundMetric::usual(0.5), ValidationError);
    CHECK_THROWS_AS(GroundMetric::truncated(0.0, 1.0), ValidationError);
    CHECK(GroundMetric::usual(3.0).root(8.0) == doctest::Approx(2.0));
}

TEST_CASE("property: path metric axioms and truncation monotonicity") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> v(-3, 3);
    for (double p : {1.0, 1.5, 2.0, 3.0}) {
        const auto u = GroundMetric::usual(p), t = GroundMetric::truncated(0.7, p);
        for (int i = 0; i < 200; ++i) {
            std::vector<double> x(3), y(3), z(3);
            for (int k = 0; k < 3; ++k) x[k] = v(rng), y[k] = v(rng), z[k] = v(rng);
            for (const auto* m : {&u, &t}) {
                const double dxy = m->root(m->path_cost(x, y)), dyx = m->root(m->path_cost(y, x));
                const double dxz = m->root(m->path_cost(x, z)), dzy = m->root(m->path_cost(z, y));
                CHECK(dxy == dyx);
                CHECK(dxy <= dxz + dzy + 1e-12);
            }
            CHECK(t.path_cost(x, y) <= u.path_cost(x, y));
        }
    }
}

TEST_CASE("quantile function is left continuous") {
    CHECK(quantile_function(dist({{3.0, 1.0}}), 0.7) == 3.0);
    const auto half = dist({{0.0, 0.5}, {1.0, 0.5}});
    CHECK(quantile_function(half, 0.5) == 0.0);
    CHECK(quantile_function(half, 0.5 + 1e-12) == 1.0);
    CHECK(quantile_function(dist({{-1.0, 0.5}, {1.0, 0.5}}), 1.0) == 1.0);
    CHECK_THROWS_AS(quantile_function(half, 0.0), ValidationError);
    CHECK_THROWS_AS(quantile_function(half, 1.5), ValidationError);
}

TEST_CASE("wasserstein_1d examples") {
    const auto m2 = GroundMetric::usual(2.0);
    CHECK(wasserstein_1d(dist({{0.0, 1.0}}), dist({{1.0, 1.0}}), m2).cost_p == doctest::Approx(1.0));
    CHECK(wasserstein_1d(dist({{0.0, 0.5}, {1.0, 0.5}}), dist({{0.5, 1.0}}), m2).cost_p == doctest::Approx(0.25));
    const auto sym = dist({{1.0, 0.5}, {-1.0, 0.5}});
    CHECK(wasserstein_1d(sym, sym, m2).cost_p == 0.0);
}

TEST_CASE("wasserstein_1d agrees with numerical quantile integration") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> v(-2, 2);
    const auto m = GroundMetric::usual(1.5);
    for (int it = 0; it < 20; ++it) {
        DiscreteDistribution a, b;
        const auto wa = random_weights(rng, 4), wb = random_weights(rng, 3);
        for (double w : wa) a.atoms.push_back({v(rng), w});
        for (double w : wb) b.atoms.push_back({v(rng), w});
        const int steps = 200000;
        double integral = 0.0;
        for (int k = 0; k < steps; ++k) {
            const double u = (k + 0.5) / steps;
            integral += m.powered(quantile_function(a, u), quantile_function(b, u)) / steps;
        }
        CHECK(wasserstein_1d(a, b, m).cost_p == doctest::Approx(integral).epsilon(1e-3));
    }
}

TEST_CASE("quantile_coupling pieces refine both CDFs") {
    const auto a = dist({{0.0, 0.3}, {1.0, 0.7}}), b = dist({{0.0, 0.5}, {2.0, 0.5}});
    const auto pieces = quantile_coupling(a, b);
    double total = 0.0, prev = 0.0;
    for (const auto& q : pieces) {
        CHECK(q.lower == doctest::Approx(prev));
        prev = q.upper;
        total += q.mass();
    }
    CHECK(total == doctest::Approx(1.0));
    CHECK(pieces.size() == 3);
    const auto anti = quantile_coupling(a, b, false);
    CHECK(anti.front().target == 1);
}

TEST_CASE("solve_ot examples") {
    const std::vector<double> half{0.5, 0.5};
    Eigen::MatrixXd c0(2, 2);
    c0 << 0, 1, 1, 0;
    const auto s0 = solve_ot(c0, half, half);
    CHECK(s0.value == 0.0);
    CHECK(s0.plan.mass(0, 0) == doctest::Approx(0.5));
    CHECK(s0.plan.mass(1, 1) == doctest::Approx(0.5));

    Eigen::MatrixXd c1(2, 2);
    c1 << 1, 2, 3, 4;
    // 2x2 plans with these marginals form the segment t in [0, 1/2]; check both vertices.
    double best = 1e300;
    for (double t : {0.0, 0.5}) best = std::min(best, t * 1 + (0.5 - t) * 2 + (0.5 - t) * 3 + t * 4);
    CHECK(solve_ot(c1, half, half).value == doctest::Approx(best));
    CHECK(best == doctest::Approx(2.5));

    Eigen::MatrixXd c2(3, 2);
    c2 << 7, 1, 2, 3, 4, 5;
    const std::vector<double> a{1.0, 0.0, 0.0}, b{1.0, 0.0};
    CHECK(solve_ot(c2, a, b).value == doctest::Approx(7.0));
}

TEST_CASE("solve_ot rejects bad input") {
    Eigen::MatrixXd c(2, 2);
    c << 0, 1, 1, 0;
    const std::vector<double> ok{0.5, 0.5}, bad{0.7, 0.7}, neg{1.5, -0.5}, three{0.2, 0.3, 0.5};
    CHECK_THROWS_AS(solve_ot(c, bad, ok), ValidationError);
    CHECK_THROWS_AS(solve_ot(c, neg, ok), ValidationError);
    CHECK_THROWS_AS(solve_ot(c, ok, three), ValidationError);
    Eigen::MatrixXd cn = c;
    cn(0, 1) = -1;
    CHECK_THROWS_AS(solve_ot(cn, ok, ok), ValidationError);
}

TEST_CASE("property: solve_ot on random instances") {
    std::mt19937_64 rng(5);
    std::uniform_int_distribution<int> size(1, 7);
    std::uniform_real_distribution<double> v(-2, 2), cv(0, 5);
    std::uniform_int_distribution<int> coin(0, 3);
    for (int it = 0; it < 300; ++it) {
        const int n = size(rng), m = size(rng);
        auto a = random_weights(rng, n), b = random_weights(rng, m);
        Eigen::MatrixXd c(n, m);
        // Integer costs and repeated values make degenerate pivots common.
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < m; ++j) c(i, j) = coin(rng) == 0 ? std::floor(cv(rng)) : cv(rng);
        const auto s = solve_ot(c, a, b);
        CHECK(s.plan.marginal_error(a, b) <= 1e-9);
        CHECK((s.plan.mass.array() >= -1e-15).all());
        CHECK(s.value == doctest::Approx(s.plan.cost(c)).epsilon(1e-12));

        // Product plan bound and comparison with the generic LP oracle.
        double product = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < m; ++j) product += a[i] * b[j] * c(i, j);
        CHECK(s.value <= product + 1e-12);
        CHECK(s.value == doctest::Approx(lp_transport(c, a, b)).epsilon(1e-9));

        // Dual feasibility, strong duality and complementary slackness.
        double dual = 0.0;
        for (int i = 0; i < n; ++i) dual += a[i] * s.row_potential(i);
        for (int j = 0; j < m; ++j) dual += b[j] * s.col_potential(j);
        CHECK(dual == doctest::Approx(s.value).epsilon(1e-9));
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < m; ++j) {
                const double reduced = c(i, j) - s.row_potential(i) - s.col_potential(j);
                CHECK(reduced >= -1e-9);
                if (s.plan.mass(i, j) > 1e-12) CHECK(std::abs(reduced) <= 1e-9);
            }
    }
}

TEST_CASE("property: solve_ot matches the quantile cost on the line") {
    std::mt19937_64 rng(9);
    std::uniform_int_distribution<int> size(1, 8);
    std::uniform_real_distribution<double> v(-2, 2);
    for (double p : {1.0, 2.0, 3.0}) {
        const auto m = GroundMetric::usual(p);
        for (int it = 0; it < 100; ++it) {
            DiscreteDistribution a, b;
            for (double w : random_weights(rng, size(rng))) a.atoms.push_back({v(rng), w});
            for (double w : random_weights(rng, size(rng))) b.atoms.push_back({v(rng), w});
            Eigen::MatrixXd c(Eigen::Index(a.size()), Eigen::Index(b.size()));
            std::vector<double> wa, wb;
            for (const auto& x : a.atoms) wa.push_back(x.mass);
            for (const auto& y : b.atoms) wb.push_back(y.mass);
            for (std::size_t i = 0; i < a.size(); ++i)
                for (std::size_t j = 0; j < b.size(); ++j)
                    c(Eigen::Index(i), Eigen::Index(j)) = m.powered(a.atoms[i].value, b.atoms[j].value);
            const auto q = wasserstein_1d(a, b, m);
            CHECK(std::abs(solve_ot(c, wa, wb).value - q.cost_p) <= 1e-10);
            CHECK(q.plan.marginal_error(wa, wb) <= 1e-9);
        }
    }
}

TEST_CASE("linear program status") {
    SUBCASE("infeasible") {
        LinearProgram lp(2);
        lp.add_equality({{0, 1.0}, {1, 1.0}}, 1.0);
        lp.add_equality({{0, 1.0}, {1, 1.0}}, 2.0);
        CHECK(lp.solve().status == LinearProgram::Result::Status::Infeasible);
    }
    SUBCASE("unbounded") {
        LinearProgram lp(2);
        lp.set_cost(0, -1.0);
        lp.add_equality({{0, 1.0}, {1, -1.0}}, 1.0);
        CHECK(lp.solve().status == LinearProgram::Result::Status::Unbounded);
    }
    SUBCASE("redundant rows") {
        LinearProgram lp(3);
        lp.set_cost(0, 1.0);
        lp.set_cost(1, 2.0);
        lp.set_cost(2, 3.0);
        lp.add_equality({{0, 1.0}, {1, 1.0}, {2, 1.0}}, 1.0);
        lp.add_equality({{0, 2.0}, {1, 2.0}, {2, 2.0}}, 2.0);
        lp.add_equality({{1, 1.0}}, 0.25);
        const auto r = lp.solve();
        REQUIRE(r.status == LinearProgram::Result::Status::Optimal);
        CHECK(r.objective == doctest::Approx(1.25));
        CHECK(r.x[0] == doctest::Approx(0.75));
    }
}
