#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "qbmrl/rng.hpp"
#include "qbmrl/topology.hpp"

using namespace qbmrl;

TEST_CASE("chimera sizes match the paper instances") {
    const auto c11 = build_chimera(1, 1);
    CHECK(c11.qubit_count == 8);
    CHECK(c11.edges.size() == 16);

    const auto c12 = build_chimera(1, 2);
    CHECK(c12.qubit_count == 16);
    CHECK(c12.edges.size() == 36);

    const auto c44 = build_chimera(4, 4);
    CHECK(c44.qubit_count == 128);
    CHECK(c44.edges.size() == 352);
}

TEST_CASE("edge count formula by brute-force enumeration, rows/cols <= 4") {
    for (int rows = 1; rows <= 4; ++rows) {
        for (int cols = 1; cols <= 4; ++cols) {
            const auto t = build_chimera(rows, cols);
            const std::size_t expected =
                16u * rows * cols + 4u * (rows * (cols - 1) + cols * (rows - 1));
            CHECK(t.edges.size() == expected);
            CHECK(t.qubit_count == rows * cols * 8);

            std::set<std::pair<int, int>> unique(t.edges.begin(), t.edges.end());
            CHECK(unique.size() == t.edges.size());
            for (const auto& [j, k] : t.edges) {
                CHECK(j < k);
                CHECK(j >= 0);
                CHECK(k < t.qubit_count);
            }
        }
    }
}

TEST_CASE("edge structure: K(4,4) cells, A-A horizontal, B-B vertical") {
    const auto t = build_chimera(3, 4);
    auto cell_of = [](int node) { return node / 8; };
    int intra = 0, horizontal = 0, vertical = 0;
    for (const auto& [j, k] : t.edges) {
        const Side sj = t.side_of[static_cast<std::size_t>(j)];
        const Side sk = t.side_of[static_cast<std::size_t>(k)];
        if (cell_of(j) == cell_of(k)) {
            // intra-cell edges never connect same-side nodes
            CHECK(sj != sk);
            ++intra;
        } else if (sj == Side::A) {
            CHECK(sk == Side::A);
            CHECK(cell_of(k) - cell_of(j) == 1);  // horizontal neighbour, same row
            CHECK(j % 8 == k % 8);
            ++horizontal;
        } else {
            CHECK(sk == Side::B);
            CHECK(cell_of(k) - cell_of(j) == 4);  // one row down in a 4-wide grid
            CHECK(j % 8 == k % 8);
            ++vertical;
        }
    }
    CHECK(intra == 16 * 12);
    CHECK(horizontal == 4 * 3 * 3);
    CHECK(vertical == 4 * 2 * 4);
}

TEST_CASE("build_chimera is deterministic and rejects zero sizes") {
    const auto a = build_chimera(2, 3);
    const auto b = build_chimera(2, 3);
    CHECK(a.edges == b.edges);
    CHECK(a.side_of == b.side_of);
    CHECK_THROWS_AS(build_chimera(0, 1), std::invalid_argument);
    CHECK_THROWS_AS(build_chimera(1, 0), std::invalid_argument);
}

TEST_CASE("default visible mapping reproduces the paper weight counts") {
    SUBCASE("1x2 cell, one state and one action unit: 52 weights") {
        const auto t = build_chimera(1, 2);
        const auto m = default_visible_mapping(t, 1, 1);
        const auto p = make_ising_problem(to_graph(t), m);
        CHECK(trainable_weight_count(p) == 52);
    }
    SUBCASE("1x1 cell: 24 weights") {
        const auto t = build_chimera(1, 1);
        const auto p = make_ising_problem(to_graph(t), default_visible_mapping(t, 1, 1));
        CHECK(trainable_weight_count(p) == 24);
    }
    SUBCASE("4x4 cells, 10 state and 10 action units: 1632 weights") {
        const auto t = build_chimera(4, 4);
        const auto p = make_ising_problem(to_graph(t), default_visible_mapping(t, 10, 10));
        CHECK(trainable_weight_count(p) == 1632);
    }
}

TEST_CASE("mapping targets: state units on side A, action units on side B") {
    const auto t = build_chimera(2, 2);
    const auto m = default_visible_mapping(t, 2, 3);
    REQUIRE(m.targets.size() == 5);
    for (int i = 0; i < 2; ++i) {
        CHECK(!m.targets[static_cast<std::size_t>(i)].empty());
        for (int j : m.targets[static_cast<std::size_t>(i)])
            CHECK(t.side_of[static_cast<std::size_t>(j)] == Side::A);
    }
    for (int i = 2; i < 5; ++i) {
        CHECK(!m.targets[static_cast<std::size_t>(i)].empty());
        for (int j : m.targets[static_cast<std::size_t>(i)])
            CHECK(t.side_of[static_cast<std::size_t>(j)] == Side::B);
    }
    CHECK_THROWS_AS(default_visible_mapping(t, 0, 1), std::invalid_argument);
}

TEST_CASE("ising JSON round-trips weights bit-exactly") {
    const auto t = build_chimera(1, 2);
    auto p = make_ising_problem(to_graph(t), default_visible_mapping(t, 1, 1));
    init_weights_uniform(p, 0.5, 42);
    const auto text = ising_to_json(p);
    const auto q = ising_from_json(text);
    CHECK(q.graph.edges == p.graph.edges);
    CHECK(q.hidden_weights == p.hidden_weights);
    CHECK(q.visible_weights == p.visible_weights);
    CHECK(q.mapping.state_dim == 1);
    CHECK(q.mapping.action_dim == 1);
}

TEST_CASE("soft update over critic weight maps") {
    const auto t = build_chimera(1, 1);
    auto online = make_ising_problem(to_graph(t), default_visible_mapping(t, 1, 1));
    auto target = online;
    init_weights_uniform(online, 0.5, 7);

    SUBCASE("tau = 1 copies") {
        soft_update_weights(target, online, 1.0);
        CHECK(target.hidden_weights == online.hidden_weights);
        CHECK(target.visible_weights == online.visible_weights);
    }
    SUBCASE("tau = 0.5 halves the gap, repeated updates contract geometrically") {
        soft_update_weights(target, online, 0.5);
        for (std::size_t e = 0; e < target.hidden_weights.size(); ++e)
            CHECK(target.hidden_weights[e] == doctest::Approx(0.5 * online.hidden_weights[e]));
        double gap_prev = 0.0;
        for (std::size_t e = 0; e < target.hidden_weights.size(); ++e)
            gap_prev = std::max(gap_prev, std::abs(target.hidden_weights[e] - online.hidden_weights[e]));
        soft_update_weights(target, online, 0.5);
        double gap = 0.0;
        for (std::size_t e = 0; e < target.hidden_weights.size(); ++e)
            gap = std::max(gap, std::abs(target.hidden_weights[e] - online.hidden_weights[e]));
        CHECK(gap <= 0.5 * gap_prev + 1e-12);
    }
}
