#include <cmath>

#include "doctest.h"
#include "support.hpp"

#include "nestedot/causality.hpp"
#include "nestedot/error.hpp"
#include "nestedot/families.hpp"
#include "nestedot/knothe.hpp"
#include "nestedot/nested_solver.hpp"

using namespace nestedot;
using testing::paths_tree;

TEST_CASE("nested distance: single paths") {
    const std::vector<double> x{0, 1}, y{1, 3};
    const auto mu = ScenarioTree::dirac(x), nu = ScenarioTree::dirac(y);
    CHECK(nested_distance(mu, nu, GroundMetric::usual(1)).distance == doctest::Approx(3.0));
    CHECK(brute_force_bicausal(mu, nu, GroundMetric::usual(2)).cost_p == doctest::Approx(5.0));
}

TEST_CASE("nested distance: fan against merged limit, closed form") {
    const auto mu = families::incompleteness_limit();
    for (double p : {1.0, 2.0, 3.0})
        for (int n : {1, 2, 5}) {
            const auto m = GroundMetric::usual(p);
            const auto fan = families::incompleteness_fan(n);
            const double expected = std::pow(std::pow(2.0, p - 1) + std::pow(n, -p), 1.0 / p);
            CHECK(nested_distance(fan, mu, m).distance == doctest::Approx(expected).epsilon(1e-12));
            CHECK(brute_force_bicausal(fan, mu, m).distance == doctest::Approx(expected).epsilon(1e-10));
            CHECK(wasserstein_distance(fan, mu, GroundMetric::usual(1)).distance == doctest::Approx(1.0 / n));
        }
    CHECK(nested_distance(families::incompleteness_fan(2), mu, GroundMetric::usual(2)).distance == doctest::Approx(1.5));
}

TEST_CASE("nested distance: value table layout") {
    const auto mu = families::incompleteness_fan(2), nu = families::incompleteness_limit();
    const auto r = nested_distance(mu, nu, GroundMetric::usual(2));
    REQUIRE(r.table.stages.size() == 3);
    CHECK(r.table.stage(1).rows() == 2);
    CHECK(r.table.stage(1).cols() == 1);
    CHECK(r.table.stage(2).isZero());
    CHECK(r.table.root_value() == r.cost_p);
    CHECK(r.plan.cost(mu, nu, GroundMetric::usual(2)) == doctest::Approx(r.cost_p));
}

TEST_CASE("cauchy_check") {
    const auto m = GroundMetric::usual(1);
    std::vector<ScenarioTree> seq{families::incompleteness_fan(1), families::incompleteness_fan(2)};
    const auto d = cauchy_check(seq, m);
    CHECK(d(0, 1) <= 0.5 + 1e-12);
    CHECK(d(0, 1) == d(1, 0));
    CHECK(d(0, 0) == 0.0);

    std::vector<ScenarioTree> same{families::incompleteness_limit(), families::incompleteness_limit()};
    CHECK(cauchy_check(same, m).isZero());

    for (double p : {1.0, 2.0}) {
        std::vector<ScenarioTree> sep{families::separating_fan(0.1), families::separating_limit()};
        const double off = cauchy_check(sep, GroundMetric::usual(p))(0, 1);
        CHECK(std::pow(off, p) >= std::pow(2.0, p - 1) - 1e-9);
    }
    CHECK_THROWS_AS(cauchy_check(std::span<const ScenarioTree>(seq.data(), 1), m), ValidationError);
}

TEST_CASE("nested distance input checks") {
    const std::vector<double> one{0}, two{0, 1};
    CHECK_THROWS_AS(nested_distance(ScenarioTree::dirac(one), ScenarioTree::dirac(two), GroundMetric::usual(1)),
                    ValidationError);
    std::vector<std::pair<std::vector<double>, double>> big;
    for (int i = 0; i < 101; ++i) big.push_back({{double(i)}, 1.0 / 101});
    const auto t = paths_tree(big);
    CHECK_THROWS_AS(brute_force_bicausal(t, t, GroundMetric::usual(1)), TooLargeError);
    CHECK_THROWS_AS(wasserstein_distance(t, t, GroundMetric::usual(1)), TooLargeError);
    CHECK(nested_distance(t, t, GroundMetric::usual(1)).distance == 0.0);
}

TEST_CASE("fan sequence: distance to limit stays above one while the sequence is Cauchy") {
    const auto m = GroundMetric::usual(1);
    const auto mu = families::incompleteness_limit();
    for (int n = 1; n <= 20; ++n) {
        CHECK(nested_distance(families::incompleteness_fan(n), mu, m).distance >= 1.0);
        CHECK(nested_distance(families::incompleteness_fan(n), families::incompleteness_fan(2 * n), m).distance <=
              1.0 / (2 * n) + 1e-12);
    }
}

TEST_CASE("property: recursion against the single-LP oracle") {
    std::mt19937_64 rng(21);
    for (int i = 0; i < 60; ++i) {
        const auto [mu, nu] = testing::random_pair(rng);
        for (const auto& m : {GroundMetric::usual(1), GroundMetric::usual(2), GroundMetric::truncated(1.0, 1.5)}) {
            const auto r = nested_distance(mu, nu, m);
            const auto bf = brute_force_bicausal(mu, nu, m);
            CHECK(std::abs(r.distance - bf.distance) <= 1e-8);
            CHECK(bf.plan.mu_marginal_error(mu, nu) <= 1e-9);
            CHECK(is_bicausal(bf.plan, mu, nu).max_bicausal_deviation <= 1e-9);
            const auto report = is_bicausal(r.plan, mu, nu);
            CHECK(report.is_bicausal);
            CHECK(report.max_bicausal_deviation <= 1e-9);
            CHECK(r.plan.cost(mu, nu, m) == doctest::Approx(r.cost_p).epsilon(1e-10));
        }
    }
}

TEST_CASE("property: sandwich and metric axioms") {
    std::mt19937_64 rng(22);
    const auto m = GroundMetric::usual(2);
    for (int i = 0; i < 60; ++i) {
        std::uniform_int_distribution<int> depth(1, 3);
        const families::RandomTreeSpec spec{depth(rng), 3, 10, 2.0};
        const auto a = families::random_tree(rng, spec), b = families::random_tree(rng, spec),
                   c = families::random_tree(rng, spec);
        const double ab = nested_distance(a, b, m).distance;
        CHECK(ab == nested_distance(b, a, m).distance);
        CHECK(nested_distance(a, a, m).distance == 0.0);
        CHECK(ab <= nested_distance(a, c, m).distance + nested_distance(c, b, m).distance + 1e-9);
        CHECK(wasserstein_distance(a, b, m).distance <= ab + 1e-9);
        CHECK(ab <= kr_distance(a, b, m) + 1e-9);
        CHECK(wasserstein_distance(a, b, m).distance == wasserstein_distance(b, a, m).distance);
    }
}

TEST_CASE("thread count does not change results") {
    std::mt19937_64 rng(23);
    const families::RandomTreeSpec spec{3, 4, 40, 2.0};
    const auto a = families::random_tree(rng, spec), b = families::random_tree(rng, spec);
    const auto m = GroundMetric::usual(1);
    const auto serial = nested_distance(a, b, m, {1});
    const auto parallel = nested_distance(a, b, m, {4});
    CHECK(serial.distance == parallel.distance);
    CHECK(serial.plan.dense(a, b) == parallel.plan.dense(a, b));
}
