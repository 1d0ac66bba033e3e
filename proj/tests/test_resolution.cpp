#include <algorithm>
#include <deque>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "confdim/error.hpp"
#include "confdim/resolution.hpp"
#include "doctest.h"
#include "resolution_oracles.hpp"

using namespace confdim;

namespace {

using namespace grid_oracle;

Rational half(long n) {
  Rational r(n, 2);
  r.canonicalize();
  return r;
}

}  // namespace

TEST_CASE("resolution graphs of the basic families") {
  SUBCASE("carpet level 1") {
    auto G = build_resolution(PartitionFamily::carpet(3), 1);
    CHECK(G.level_vertices(1).size() == 8);
    auto oracle = grid_graph(1, 3, 2, carpet_present, true);
    std::size_t edges = 0;
    for (std::size_t v = 0; v < oracle.verts.size(); ++v)
      if (oracle.verts[v][0] == 1) edges += oracle.hadj[v].size();
    // ring edges plus the four corner contacts around the removed centre
    CHECK(edges / 2 == 12);
    CHECK(G.horizontal_edge_count(1) == 12);
  }
  SUBCASE("carpet level 3 edge sets match the grid model") {
    auto G = build_resolution(PartitionFamily::carpet(3), 3);
    auto oracle = grid_graph(3, 3, 2, carpet_present, true);
    REQUIRE(static_cast<std::size_t>(G.size()) == oracle.verts.size());
    for (int v = 0; v < G.size(); ++v) {
      int o = oracle.id.at(carpet_coords(G.address(v)));
      std::set<std::array<long, 3>> mine, theirs;
      for (int u : G.horizontal(v)) mine.insert(carpet_coords(G.address(u)));
      for (int u : oracle.hadj[o]) theirs.insert(oracle.verts[u]);
      CHECK(mine == theirs);
      if (v > 0) CHECK(carpet_coords(G.address(G.parent(v))) == oracle.verts[oracle.adj[o][0]]);
    }
  }
  SUBCASE("cantor has no horizontal edges") {
    auto G = build_resolution(PartitionFamily::cantor_ternary(5), 5);
    for (int m = 0; m <= 5; ++m) CHECK(G.horizontal_edge_count(m) == 0);
  }
  SUBCASE("interval level 2 is a path") {
    auto G = build_resolution(PartitionFamily::interval_binary(3), 2);
    CHECK(G.level_vertices(2).size() == 4);
    CHECK(G.horizontal_edge_count(2) == 3);
    auto l2 = G.level_vertices(2);
    for (int i = 0; i + 1 < 4; ++i) CHECK(graph_distance(G, l2[i], l2[i + 1]) == 1);
  }
  SUBCASE("depth guard") { CHECK_THROWS_AS(build_resolution(PartitionFamily::carpet(2), 3), DepthExceeded); }
}

TEST_CASE("graph invariants") {
  for (auto fam : {PartitionFamily::carpet(3), PartitionFamily::interval_binary(5), PartitionFamily::cantor_ternary(4),
                   PartitionFamily::square_full(3)}) {
    auto G = build_resolution(fam, fam.max_depth());
    for (int v = 0; v < G.size(); ++v) {
      CHECK((G.parent(v) < 0) == (v == 0));
      if (v > 0) CHECK(G.level_of(G.parent(v)) == G.level_of(v) - 1);
      for (int u : G.horizontal(v)) {
        CHECK(u != v);
        CHECK(G.level_of(u) == G.level_of(v));
        const auto& back = G.horizontal(u);
        CHECK(std::find(back.begin(), back.end(), v) != back.end());
      }
    }
    auto d = distances_from(G, 0);
    for (int v = 0; v < G.size(); ++v) CHECK(d[v] == G.level_of(v));
  }
}

TEST_CASE("distances and Gromov products") {
  auto fam = PartitionFamily::carpet(4);
  auto G = build_resolution(fam, 4);
  auto oracle = grid_graph(4, 3, 2, carpet_present, true);
  SUBCASE("opposite level-2 corners") {
    int a = *G.find(2, Address{1, 1}), b = *G.find(2, Address{5, 5});
    int oa = oracle.id.at(carpet_coords(Address{1, 1})), ob = oracle.id.at(carpet_coords(Address{5, 5}));
    CHECK(graph_distance(G, a, b) == bfs(oracle.adj, oa)[ob]);
    CHECK(graph_distance(G, a, a) == 0);
  }
  SUBCASE("sampled pairs against the oracle and the bridge form") {
    std::mt19937_64 rng(7);
    std::uniform_int_distribution<int> pick(0, G.size() - 1);
    for (int t = 0; t < 60; ++t) {
      int a = pick(rng), b = pick(rng);
      int oa = oracle.id.at(carpet_coords(G.address(a))), ob = oracle.id.at(carpet_coords(G.address(b)));
      int d = graph_distance(G, a, b);
      CHECK(d == bfs(oracle.adj, oa)[ob]);
      CHECK(bridge_distance(G, a, b) == d);
    }
  }
  SUBCASE("Gromov product identities") {
    int a = *G.find(3, Address{2, 4, 6});
    CHECK(gromov_product(G, a, a) == 3);
    CHECK(gromov_product(G, 0, a) == 0);
    int b = G.horizontal(a).front();
    CHECK(gromov_product(G, a, b) == half(5));
  }
  SUBCASE("empirical four-point constant") {
    Rational eta = empirical_eta(G, 80, 11);
    CHECK(eta >= 0);
    std::uniform_int_distribution<int> pick(0, G.size() - 1);
    // eta is a sample maximum, so the same triples satisfy the four-point bound
    std::mt19937_64 replay(11);
    for (int t = 0; t < 80; ++t) {
      int x = pick(replay), y = pick(replay), z = pick(replay);
      CHECK(gromov_product(G, x, y) >= std::min(gromov_product(G, x, z), gromov_product(G, y, z)) - eta);
    }
  }
}

TEST_CASE("disconnected resolutions") {
  auto G = build_resolution(PartitionFamily::cantor_ternary(3), 3);
  // Still connected through the root; bridge heights may be zero.
  int a = *G.find(3, Address{0, 0, 0}), b = *G.find(3, Address{2, 2, 2});
  CHECK(graph_distance(G, a, b) == 6);
  CHECK(bridge_distance(G, a, b) == 6);
}

TEST_CASE("horizontally minimal pairs") {
  SUBCASE("carpet against brute force") {
    auto G = build_resolution(PartitionFamily::carpet(4), 4);
    auto scan = horizontally_minimal_scan(G, 4);
    auto grid = grid_graph(4, 3, 2, carpet_present, true);
    auto brute = brute_minimal(grid, 4);
    CHECK(scan.per_level == brute);
    CHECK(brute_minimal_d4(grid, 4, 3) == brute);
    CHECK(scan.max_bound == *std::max_element(brute.begin(), brute.end()));
    CHECK(scan.per_level[3] == scan.per_level[4]);
    for (int m = 1; m <= 4; ++m) {
      const auto& w = scan.witnesses[m];
      CHECK(G.level_of(w.a) == m);
      CHECK(graph_distance(G, w.a, w.b) == w.distance);
      CHECK(horizontal_distances_from(G, w.a)[w.b] == w.distance);
    }
  }
  SUBCASE("interval against brute force") {
    auto fam = PartitionFamily::interval_binary(6);
    auto G = build_resolution(fam, 6);
    auto oracle = grid_graph(6, 2, 1, always, true);
    for (int v = 0; v < G.size(); ++v) REQUIRE(oracle.id.count(interval_coords(G.address(v))));
    auto scan = horizontally_minimal_scan(G, 6);
    CHECK(scan.per_level == brute_minimal(oracle, 6));
    // a horizontal run of 5 ties with climbing one level, so 5 is never beaten
    CHECK(scan.max_bound == 5);
    for (int m = 3; m <= 6; ++m) CHECK(scan.per_level[m] == 5);
  }
  SUBCASE("cantor") {
    auto G = build_resolution(PartitionFamily::cantor_ternary(4), 4);
    CHECK(horizontally_minimal_scan(G, 4).max_bound == 0);
  }
}

TEST_CASE("rearranged resolutions") {
  auto fam = PartitionFamily::carpet(4);
  SUBCASE("geometric weight reproduces the resolution") {
    auto A = build_resolution(fam, 3);
    auto B = rearranged_resolution(fam, WeightFunction::geometric(Rational(1, 3)), Rational(1, 3), 3);
    std::ostringstream ea, eb;
    A.write_edges(ea);
    B.write_edges(eb);
    CHECK(ea.str() == eb.str());
  }
  SUBCASE("mixed carpet weight") {
    auto B = rearranged_resolution(fam, WeightFunction::carpet_mixed(), Rational(1, 3), 2);
    std::vector<Address> l1, l2;
    for (int v : B.level_vertices(1)) l1.push_back(B.address(v));
    for (int v : B.level_vertices(2)) l2.push_back(B.address(v));
    CHECK(l1 == fam.level(1));
    std::vector<Address> expect;
    for (int d : {1, 3, 5, 7}) expect.push_back(Address{d});
    for (int e : {2, 4, 6, 8})
      for (int d = 1; d <= 8; ++d) expect.push_back(Address{e, d});
    std::sort(expect.begin(), expect.end());
    CHECK(l2 == expect);
    // odd digits reappear at rank 2 as distinct vertices with rank-1 parents
    int v = *B.find(2, Address{1});
    CHECK(B.address(B.parent(v)) == Address{1});
    CHECK(B.parent(v) != v);
    CHECK(B.level_of(B.parent(v)) == 1);
  }
  SUBCASE("zero levels") {
    auto B = rearranged_resolution(fam, WeightFunction::carpet_mixed(), Rational(1, 3), 0);
    CHECK(B.size() == 1);
    CHECK(B.horizontal(0).empty());
  }
  SUBCASE("scales beyond the horizon") {
    CHECK_THROWS_AS(rearranged_resolution(PartitionFamily::carpet(2), WeightFunction::geometric(Rational(1, 3)),
                                          Rational(1, 9), 2),
                    DepthExceeded);
  }
}

TEST_CASE("edge list export") {
  auto G = build_resolution(PartitionFamily::interval_binary(2), 1);
  std::ostringstream out;
  G.write_edges(out);
  CHECK(out.str() == "h 1:0 1:1\nv 1:0 0:root\nv 1:1 0:root\n");
}
