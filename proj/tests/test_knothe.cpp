#include <cmath>

#include "doctest.h"
#include "support.hpp"

#include "nestedot/causality.hpp"
#include "nestedot/error.hpp"
#include "nestedot/families.hpp"
#include "nestedot/knothe.hpp"
#include "nestedot/nested_solver.hpp"
#include "nestedot/transport.hpp"

using namespace nestedot;

namespace {

double mass_between(const Coupling& c, const ScenarioTree& mu, const ScenarioTree& nu, std::vector<double> x,
                    std::vector<double> y) {
    double s = 0.0;
    for (const auto& e : c.entries)
        if (mu.history(e.mu_leaf) == x && nu.history(e.nu_leaf) == y) s += e.mass;
    return s;
}

}  // namespace

TEST_CASE("KR coupling of a tree with itself is the diagonal") {
    std::mt19937_64 rng(41);
    const auto t = families::random_tree(rng, {3, 3, 20, 2.0});
    const auto kr = kr_coupling(t, t);
    for (const auto& e : kr.coupling.entries) CHECK(e.mu_leaf == e.nu_leaf);
    CHECK(kr_distance(t, t, GroundMetric::usual(2)) == 0.0);
    CHECK(kr.stages.size() == 3);
}

TEST_CASE("KR coupling of the mirror pair matches sorted first coordinates") {
    const auto mu = families::kr_mirror_mu(1), nu = families::kr_mirror_nu(1);
    const auto c = kr_coupling(mu, nu).coupling;
    CHECK(mass_between(c, mu, nu, {1, 0.5}, {1, -0.5}) == doctest::Approx(0.5));
    CHECK(mass_between(c, mu, nu, {-1, -0.5}, {-1, 0.5}) == doctest::Approx(0.5));
}

TEST_CASE("KR coupling between a fan and its merged limit") {
    const auto fan = families::incompleteness_fan(2), lim = families::incompleteness_limit();
    const auto c = kr_coupling(fan, lim).coupling;
    // Stage 1 sends both fan nodes to the single limit node; at stage 2 each
    // deterministic fan branch is spread over both limit children.
    CHECK(mass_between(c, fan, lim, {-0.5, -1}, {0, -1}) == doctest::Approx(0.25));
    CHECK(mass_between(c, fan, lim, {-0.5, -1}, {0, 1}) == doctest::Approx(0.25));
    CHECK(mass_between(c, fan, lim, {0.5, 1}, {0, 1}) == doctest::Approx(0.25));
    CHECK(kr_distance(fan, lim, GroundMetric::usual(1)) == doctest::Approx(1.5));
}

TEST_CASE("KR distance of the mirror family equals n") {
    for (double p : {1.0, 2.0, 3.0})
        for (int n : {1, 2, 3}) {
            CHECK(kr_distance(families::kr_mirror_mu(n), families::kr_mirror_nu(n), GroundMetric::usual(p)) ==
                  doctest::Approx(n).epsilon(1e-12));
        }
}

TEST_CASE("KR distance of single paths is the path distance") {
    const std::vector<double> x{0, 1, 2}, y{1, 3, -1};
    const auto m = GroundMetric::usual(2);
    CHECK(kr_distance(ScenarioTree::dirac(x), ScenarioTree::dirac(y), m) == doctest::Approx(std::sqrt(14.0)));
}

TEST_CASE("kr_gap_demo") {
    const auto g1 = kr_gap_demo(1, 1.0);
    CHECK(g1.kr == doctest::Approx(1.0));
    const auto g2 = kr_gap_demo(2, 1.0);
    CHECK(g2.kr == doctest::Approx(2.0));
    CHECK(g2.nested <= 1.0 + 1e-12);
    CHECK_THROWS_AS(kr_gap_demo(0, 1.0), ValidationError);
    CHECK_THROWS_AS(kr_gap_demo(2, 1.0, 3), ValidationError);
    const auto g3 = kr_gap_demo(4, 1.0, 2, 8);
    CHECK(g3.kr >= g3.nested - 1e-12);
}

TEST_CASE("property: KR coupling is bicausal and dominates the nested distance") {
    std::mt19937_64 rng(42);
    for (int i = 0; i < 100; ++i) {
        const auto [mu, nu] = testing::random_pair(rng);
        const auto kr = kr_coupling(mu, nu);
        const auto r = is_bicausal(kr.coupling, mu, nu);
        CHECK(r.is_bicausal);
        CHECK(r.max_bicausal_deviation <= 1e-12);
        const auto anti = detail::antitone_coupling(mu, nu);
        CHECK(is_bicausal(anti.coupling, mu, nu).is_bicausal);
        const auto m = GroundMetric::usual(1.5);
        CHECK(kr_distance(mu, nu, m) >= nested_distance(mu, nu, m).distance - 1e-9);
    }
}

TEST_CASE("property: KR metric axioms") {
    std::mt19937_64 rng(43);
    const auto m = GroundMetric::usual(2);
    for (int i = 0; i < 100; ++i) {
        std::uniform_int_distribution<int> depth(1, 3);
        const families::RandomTreeSpec spec{depth(rng), 3, 12, 2.0};
        const auto a = families::random_tree(rng, spec), b = families::random_tree(rng, spec),
                   c = families::random_tree(rng, spec);
        const double ab = kr_distance(a, b, m);
        CHECK(ab == kr_distance(b, a, m));
        CHECK(kr_distance(a, a, m) == 0.0);
        CHECK(ab > 0.0);
        CHECK(ab <= kr_distance(a, c, m) + kr_distance(c, b, m) + 1e-9);
    }
}

TEST_CASE("property: one stage, all distances reduce to the quantile cost") {
    std::mt19937_64 rng(44);
    for (double p : {1.0, 2.0}) {
        const auto m = GroundMetric::usual(p);
        for (int i = 0; i < 50; ++i) {
            const auto a = families::random_tree(rng, {1, 6, 6, 2.0}), b = families::random_tree(rng, {1, 6, 6, 2.0});
            const double q = m.root(wasserstein_1d(disintegrate(a, kRootNode), disintegrate(b, kRootNode), m).cost_p);
            CHECK(std::abs(kr_distance(a, b, m) - q) <= 1e-10);
            CHECK(std::abs(nested_distance(a, b, m).distance - q) <= 1e-10);
            CHECK(std::abs(wasserstein_distance(a, b, m).distance - q) <= 1e-10);
        }
    }
}
