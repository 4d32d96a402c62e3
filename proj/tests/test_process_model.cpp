#include <algorithm>

#include "doctest.h"
#include "support.hpp"

#include "nestedot/error.hpp"

using namespace nestedot;
using testing::paths_tree;

TEST_CASE("build_tree: single path gives a chain") {
    const auto t = paths_tree({{{0.0, 1.0}, 1.0}});
    CHECK(t.size() == 3);
    CHECK(t.leaves().size() == 1);
    const NodeId leaf = t.leaves()[0];
    CHECK(t.history(leaf) == std::vector<double>{0.0, 1.0});
    CHECK(t.path_prob(leaf) == 1.0);
}

TEST_CASE("build_tree: coinciding first states share a node") {
    const auto t = paths_tree({{{0.0, 1.0}, 0.5}, {{0.0, -1.0}, 0.5}});
    REQUIRE(t.stage_nodes(1).size() == 1);
    const NodeId s1 = t.stage_nodes(1)[0];
    CHECK(t.node(s1).value == 0.0);
    REQUIRE(t.children(s1).size() == 2);
    for (NodeId c : t.children(s1)) CHECK(t.node(c).cond_prob == 0.5);
    CHECK(t.node(t.children(s1)[0]).value == -1.0);
}

TEST_CASE("build_tree: distinct first states give a fan") {
    const auto t = paths_tree({{{0.1, 1.0}, 0.5}, {{-0.1, -1.0}, 0.5}});
    REQUIRE(t.stage_nodes(1).size() == 2);
    for (NodeId s : t.stage_nodes(1)) CHECK(t.children(s).size() == 1);
}

TEST_CASE("build_tree merges duplicates and respects merge_tol") {
    const auto dup = paths_tree({{{1.0, 2.0}, 0.25}, {{1.0, 2.0}, 0.75}});
    CHECK(dup.leaves().size() == 1);
    CHECK(dup.path_prob(dup.leaves()[0]) == doctest::Approx(1.0));

    const auto merged = paths_tree({{{0.0, 1.0}, 0.5}, {{0.01, -1.0}, 0.5}}, 0.05);
    REQUIRE(merged.stage_nodes(1).size() == 1);
    CHECK(merged.node(merged.stage_nodes(1)[0]).value == doctest::Approx(0.005));
    CHECK(paths_tree({{{0.0, 1.0}, 0.5}, {{0.01, -1.0}, 0.5}}, 0.0).stage_nodes(1).size() == 2);
}

TEST_CASE("tree_to_paths") {
    SUBCASE("chain") {
        const auto p = tree_to_paths(paths_tree({{{0.0, 1.0}, 1.0}}));
        REQUIRE(p.paths.size() == 1);
        CHECK(p.paths[0].weight == 1.0);
    }
    SUBCASE("binary three-stage tree") {
        std::vector<std::pair<std::vector<double>, double>> in;
        for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b)
                for (int c = 0; c < 2; ++c) in.push_back({{double(a), double(b), double(c)}, 0.125});
        const auto p = tree_to_paths(paths_tree(in));
        REQUIRE(p.paths.size() == 8);
        for (const auto& w : p.paths) CHECK(w.weight == doctest::Approx(0.125).epsilon(1e-15));
    }
}

TEST_CASE("disintegrate") {
    const auto mu = paths_tree({{{0.0, 1.0}, 0.5}, {{0.0, -1.0}, 0.5}});
    const auto d = disintegrate(mu, mu.stage_nodes(1)[0]);
    REQUIRE(d.size() == 2);
    CHECK(d.atoms[0] == Atom{-1.0, 0.5});
    CHECK(d.atoms[1] == Atom{1.0, 0.5});

    const auto chain = paths_tree({{{3.0, 7.0}, 1.0}});
    const auto c = disintegrate(chain, chain.stage_nodes(1)[0]);
    CHECK(c.atoms == std::vector<Atom>{{7.0, 1.0}});
    CHECK_THROWS_AS(disintegrate(chain, chain.leaves()[0]), ValidationError);
}

TEST_CASE("from_specs validation") {
    auto bad = [](int depth, std::vector<NodeSpec> s) { CHECK_THROWS_AS(ScenarioTree::from_specs(depth, s), ValidationError); };
    bad(1, {});
    bad(1, {{0, std::nullopt, 0, 1}, {1, 0, 1.0, 0.6}});                                  // probabilities
    bad(1, {{0, std::nullopt, 0, 1}, {1, 0, 1.0, 0.5}, {2, 0, 1.0, 0.5}});               // sibling values
    bad(1, {{0, std::nullopt, 0, 1}, {1, std::nullopt, 1.0, 1.0}});                      // two roots
    bad(1, {{0, std::nullopt, 0, 1}, {1, 7, 1.0, 1.0}});                                 // unknown parent
    bad(2, {{0, std::nullopt, 0, 1}, {1, 0, 1.0, 0.5}, {2, 0, 2.0, 0.5}, {3, 1, 0.0, 1.0}});  // short branch
    bad(1, {{0, std::nullopt, 0, 1}, {1, 0, 1.0, 1.0}, {1, 0, 2.0, 1.0}});               // duplicate id
    bad(1, {{0, std::nullopt, 0, 1}, {1, 0, 1.0, -0.5}, {2, 0, 2.0, 1.5}});              // negative probability
}

TEST_CASE("from_specs is canonical regardless of node order and ids") {
    const std::vector<NodeSpec> a{{0, std::nullopt, 0, 1}, {1, 0, 2.0, 0.3}, {2, 0, -1.0, 0.7}, {3, 1, 5.0, 1.0}, {4, 2, 6.0, 1.0}};
    const std::vector<NodeSpec> b{{40, 12, 6.0, 1.0}, {11, 99, 2.0, 0.3}, {99, std::nullopt, 0, 1}, {31, 11, 5.0, 1.0}, {12, 99, -1.0, 0.7}};
    CHECK(ScenarioTree::from_specs(2, a) == ScenarioTree::from_specs(2, b));
}

TEST_CASE("property: round trip, mass conservation, permutation invariance") {
    std::mt19937_64 rng(7);
    for (int i = 0; i < 100; ++i) {
        const auto t = families::random_tree(rng, {1 + i % 4, 3, 30, 2.0});
        auto paths = tree_to_paths(t);
        double total = 0.0;
        for (const auto& p : paths.paths) total += p.weight;
        CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
        std::shuffle(paths.paths.begin(), paths.paths.end(), rng);
        const auto rebuilt = build_tree(paths, 0.0);
        CHECK(approx_equal(rebuilt, t, 1e-12));
        const auto again = tree_to_paths(rebuilt);
        REQUIRE(again.paths.size() == paths.paths.size());
    }
}
