#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <sstream>

#include "rbrw/graph.hpp"

using namespace rbrw;

TEST_CASE("torus d=1 L=4 is the 4-cycle") {
    auto g = build_lattice_torus(1, 4);
    CHECK(g->vertex_count() == 4);
    for (int v = 0; v < 4; ++v) CHECK(g->degree(v) == 2);
    CHECK(g->max_degree == 2);
    CHECK(g->dist[g->root] == 0);
}

TEST_CASE("degenerate tree is a single vertex") {
    auto g = build_tree(2, 0);
    CHECK(g->vertex_count() == 1);
    CHECK(g->degree(0) == 0);
}

TEST_CASE("tree n=2 depth=2 has layers 1,3,6") {
    auto g = build_tree(2, 2);
    CHECK(g->vertex_count() == 10);
    int layers[3] = {0, 0, 0};
    for (int v = 0; v < g->vertex_count(); ++v) ++layers[g->dist[v]];
    CHECK(layers[0] == 1);
    CHECK(layers[1] == 3);
    CHECK(layers[2] == 6);
    CHECK(g->degree(g->root) == 3);
    CHECK(g->max_degree == 3);
}

TEST_CASE("invalid build parameters are rejected") {
    CHECK_THROWS_AS(build_lattice_torus(0, 4), std::invalid_argument);
    CHECK_THROWS_AS(build_lattice_box(1, 1), std::invalid_argument);
    CHECK_THROWS_AS(build_tree(1, 3), std::invalid_argument);
    CHECK_THROWS_AS(build_tree(2, -1), std::invalid_argument);
    // disconnected custom graph
    CHECK_THROWS_AS(build_custom(3, {{0, 1}}), std::invalid_argument);
}

TEST_CASE("neighbor distances differ by at most one") {
    for (auto g : {build_lattice_torus(2, 5), build_tree(3, 3), build_lattice_box(2, 4)}) {
        for (int v = 0; v < g->vertex_count(); ++v) {
            for (int u : g->adjacency[v]) {
                CHECK(std::abs(g->dist[u] - g->dist[v]) <= 1);
                CHECK(g->has_edge(u, v));  // symmetry
            }
        }
    }
}

TEST_CASE("simple kernel on the 4-cycle is 1/2 per neighbor") {
    auto g = build_lattice_torus(1, 4);
    Kernel k = build_simple_kernel(g);
    CHECK_FALSE(k.substochastic);
    for (int v = 0; v < 4; ++v) {
        CHECK(k.weight(v, (v + 1) % 4) == doctest::Approx(0.5));
        CHECK(k.weight(v, (v + 3) % 4) == doctest::Approx(0.5));
        CHECK(k.row_sum(v) == doctest::Approx(1.0));
    }
}

TEST_CASE("biased tree kernel weights at depth 2") {
    auto g = build_tree(2, 3);
    Kernel k = build_biased_tree_kernel(g, 0.45);
    int depth2 = -1;
    for (int v = 0; v < g->vertex_count(); ++v) {
        if (g->dist[v] == 2) {
            depth2 = v;
            break;
        }
    }
    REQUIRE(depth2 >= 0);
    int children = 0, parents = 0;
    for (int u : g->adjacency[depth2]) {
        if (g->dist[u] == 3) {
            CHECK(k.weight(depth2, u) == doctest::Approx(0.45));
            ++children;
        } else {
            CHECK(k.weight(depth2, u) == doctest::Approx(0.10));
            ++parents;
        }
    }
    CHECK(children == 2);
    CHECK(parents == 1);
    // root sends 1/(n+1) everywhere
    for (int u : g->adjacency[g->root]) {
        CHECK(k.weight(g->root, u) == doctest::Approx(1.0 / 3));
    }
    // leaves keep only the inward weight
    for (int v = 0; v < g->vertex_count(); ++v) {
        if (g->degree(v) == 1 && v != g->root) {
            CHECK(k.row_sum(v) == doctest::Approx(0.10));
        }
    }
    CHECK(k.substochastic);
}

TEST_CASE("biased tree at p = 1/(n+1) equals the simple kernel") {
    auto g = build_tree(2, 4);
    Kernel biased = build_biased_tree_kernel(g, 1.0 / 3);
    Kernel simple = build_simple_kernel(g);
    for (int v = 0; v < g->vertex_count(); ++v) {
        for (int u : g->adjacency[v]) {
            CHECK(biased.weight(v, u) == doctest::Approx(simple.weight(v, u)).epsilon(1e-14));
        }
    }
}

TEST_CASE("biased tree kernel rejects bad inputs") {
    CHECK_THROWS_AS(build_biased_tree_kernel(build_lattice_torus(1, 6), 0.3),
                    std::invalid_argument);
    CHECK_THROWS_AS(build_biased_tree_kernel(build_tree(2, 2), 0.6), std::invalid_argument);
    CHECK_THROWS_AS(build_biased_tree_kernel(build_tree(2, 2), -0.1), std::invalid_argument);
}

TEST_CASE("kernel support matches adjacency exactly") {
    for (auto g : {build_lattice_torus(1, 6), build_lattice_box(2, 3), build_tree(2, 3)}) {
        Kernel k = build_simple_kernel(g);
        for (int x = 0; x < g->vertex_count(); ++x) {
            for (int y = 0; y < g->vertex_count(); ++y) {
                bool edge = g->has_edge(x, y);
                bool mass = k.weight(x, y) > 0.0;
                CHECK(edge == mass);
            }
        }
    }
}

TEST_CASE("restriction semantics") {
    auto g = build_lattice_torus(1, 4);
    Kernel k = build_simple_kernel(g);

    SUBCASE("identity restriction leaves entries unchanged") {
        Kernel r = restrict_kernel(k, g->all_vertices());
        for (int x = 0; x < 4; ++x) {
            for (int y = 0; y < 4; ++y) CHECK(r.weight(x, y) == k.weight(x, y));
        }
    }
    SUBCASE("two-site restriction halves the row sums") {
        Kernel r = restrict_kernel(k, VertexSet(4, {0, 1}));
        CHECK(r.row_sum(0) == doctest::Approx(0.5));
        CHECK(r.row_sum(1) == doctest::Approx(0.5));
        CHECK(r.row_sum(2) == 0.0);
        CHECK(r.substochastic);
    }
    SUBCASE("empty region is rejected") {
        CHECK_THROWS_AS(restrict_kernel(k, VertexSet(4, {})), std::invalid_argument);
    }
}

TEST_CASE("interior of {0,1,2} on the 6-cycle is {1}") {
    auto g = build_lattice_torus(1, 6);
    VertexSet inner = g->interior(VertexSet(6, {0, 1, 2}));
    REQUIRE(inner.size() == 1);
    CHECK(inner.contains(1));
}

TEST_CASE("restriction is idempotent") {
    std::mt19937_64 rng(42);
    auto g = build_lattice_torus(2, 4);
    Kernel k = build_simple_kernel(g);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<int> members;
        for (int v = 0; v < g->vertex_count(); ++v) {
            if (rng() % 2) members.push_back(v);
        }
        if (members.empty()) members.push_back(0);
        VertexSet region(g->vertex_count(), members);
        Kernel once = restrict_kernel(k, region);
        Kernel twice = restrict_kernel(once, region);
        for (int x = 0; x < g->vertex_count(); ++x) {
            CHECK(once.row_sum(x) == twice.row_sum(x));
            for (const auto& e : once.rows[x]) CHECK(twice.weight(x, e.target) == e.weight);
        }
    }
}

TEST_CASE("row sums: 1 before restriction, <= 1 after") {
    auto g = build_lattice_torus(1, 8);
    Kernel k = build_simple_kernel(g);
    for (int x = 0; x < 8; ++x) CHECK(std::abs(k.row_sum(x) - 1.0) < 1e-12);
    Kernel r = restrict_kernel(k, VertexSet(8, {0, 1, 2, 3}));
    for (int x = 0; x < 8; ++x) CHECK(r.row_sum(x) <= 1.0 + 1e-12);
}

TEST_CASE("alpha weights") {
    SUBCASE("1D lattice with M=2: contraction at the root") {
        auto g = build_lattice_box(1, 9);
        auto w = make_alpha_weights(g, 2.0);
        Kernel k = build_simple_kernel(g);
        double s = 0.0;
        for (const auto& e : k.rows[g->root]) s += e.weight * w.alpha[e.target];
        CHECK(s == doctest::Approx(0.5));
        CHECK(s <= w.M * w.alpha[g->root]);
        CHECK(w.verified_on_simple_kernel);
    }
    SUBCASE("tree n=2 accepts M=5, rejects M=3") {
        auto g = build_tree(2, 3);
        CHECK_NOTHROW(make_alpha_weights(g, 5.0));
        CHECK_THROWS_AS(make_alpha_weights(g, 3.0), std::invalid_argument);
        CHECK_THROWS_AS(make_alpha_weights(g, 4.0), std::invalid_argument);  // boundary
        auto def = make_alpha_weights(g);
        CHECK(def.M == doctest::Approx(5.0));
    }
    SUBCASE("inequality holds for every built kernel at every vertex") {
        auto torus = build_lattice_torus(2, 4);
        auto tree = build_tree(2, 4);
        auto box = build_lattice_box(1, 7);
        CHECK(alpha_inequality_slack(build_simple_kernel(torus), make_alpha_weights(torus)) <=
              1e-12);
        CHECK(alpha_inequality_slack(build_simple_kernel(tree), make_alpha_weights(tree)) <= 1e-12);
        CHECK(alpha_inequality_slack(build_biased_tree_kernel(tree, 0.45),
                                     make_alpha_weights(tree)) <= 1e-12);
        CHECK(alpha_inequality_slack(build_simple_kernel(box), make_alpha_weights(box)) <= 1e-12);
        Kernel restricted =
            restrict_kernel(build_simple_kernel(torus), torus->ball(torus->root, 1));
        CHECK(alpha_inequality_slack(restricted, make_alpha_weights(torus)) <= 1e-12);
    }
}

TEST_CASE("kernel CSV edge list") {
    auto g = build_lattice_torus(1, 3);
    Kernel k = build_simple_kernel(g);
    std::ostringstream os;
    write_kernel_csv(os, k);
    std::string text = os.str();
    CHECK(text.rfind("src,dst,weight\n", 0) == 0);
    CHECK(text.find("0,1,0.5") != std::string::npos);
}

TEST_CASE("custom graph with self-loop") {
    auto g = build_custom(1, {{0, 0}});
    Kernel k = build_simple_kernel(g);
    CHECK(k.weight(0, 0) == doctest::Approx(1.0));
}

TEST_CASE("two-vertex custom graph gives p(a,b)=1") {
    auto g = build_custom(2, {{0, 1}});
    Kernel k = build_simple_kernel(g);
    CHECK(k.weight(0, 1) == doctest::Approx(1.0));
    CHECK(k.weight(1, 0) == doctest::Approx(1.0));
    CHECK_FALSE(k.substochastic);
}

TEST_CASE("torus with L=2 merges the two directions onto one neighbor") {
    auto g = build_lattice_torus(1, 2);
    Kernel k = build_simple_kernel(g);
    CHECK(g->degree(0) == 1);
    CHECK(k.weight(0, 1) == doctest::Approx(1.0));
    CHECK(k.row_sum(0) == doctest::Approx(1.0));
}

TEST_CASE("balls and interiors") {
    auto g = build_lattice_torus(1, 10);
    VertexSet b1 = g->ball(0, 1);
    CHECK(b1.size() == 3);
    CHECK(b1.subset_of(g->ball(0, 2)));
    CHECK_FALSE(g->ball(0, 2).subset_of(b1));
    CHECK(g->interior(g->all_vertices()) == g->all_vertices());
}
