#include <random>
#include <set>

#include "confdim/error.hpp"
#include "confdim/partition.hpp"
#include "doctest.h"

using namespace confdim;

namespace {

Rational q(long n, long d = 1) {
  Rational r(n, d);
  r.canonicalize();
  return r;
}
RationalBox box(Rational a, Rational b, Rational c, Rational d) { return RationalBox{{a, c}, {b, d}}; }

// Independent digit layout for square families: (column,row) in units 1/3.
std::pair<long, long> grid_index(const Address& w) {
  static const int ox[] = {0, 0, 1, 2, 2, 2, 1, 0, 0, 1};
  static const int oy[] = {0, 0, 0, 0, 1, 2, 2, 2, 1, 1};
  long a = 0, b = 0;
  for (int i = 0; i < w.depth(); ++i) {
    a = 3 * a + ox[w[i]];
    b = 3 * b + oy[w[i]];
  }
  return {a, b};
}

bool in_open_or_boundary_interval(const Rational& v, const Rational& lo, const Rational& hi) {
  return (v > lo || (v == lo && lo == 0)) && (v < hi || (v == hi && hi == 1));
}

// X = unit square minus removed interiors relative to the square.
bool holes_member(const std::vector<RationalBox>& removed, const Rational& x, const Rational& y) {
  for (const auto& r : removed)
    if (in_open_or_boundary_interval(x, r.lo[0], r.hi[0]) && in_open_or_boundary_interval(y, r.lo[1], r.hi[1]))
      return false;
  return true;
}

// K_w ∩ K_v nonempty iff some vertex of the fine grid in Q_w ∩ Q_v survives.
bool holes_meet_oracle(const std::vector<RationalBox>& removed, const RationalBox& a, const RationalBox& b,
                       long fine) {
  Rational x0 = std::max(a.lo[0], b.lo[0]), x1 = std::min(a.hi[0], b.hi[0]);
  Rational y0 = std::max(a.lo[1], b.lo[1]), y1 = std::min(a.hi[1], b.hi[1]);
  if (x0 > x1 || y0 > y1) return false;
  for (long i = 0; i <= fine; ++i) {
    Rational x = q(i, fine);
    if (x < x0 || x > x1) continue;
    for (long j = 0; j <= fine; ++j) {
      Rational y = q(j, fine);
      if (y < y0 || y > y1) continue;
      if (holes_member(removed, x, y)) return true;
    }
  }
  return false;
}

bool carpet_oracle(const Rational& x, const Rational& y, int k_max) {
  Rational u = x, v = y;
  for (int k = 1; k <= k_max; ++k) {
    u *= 3;
    v *= 3;
    if (u.get_den() == 1 || v.get_den() == 1) return true;
    mpz_class a = u.get_num() / u.get_den(), b = v.get_num() / v.get_den();
    if (a % 3 == 1 && b % 3 == 1) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("carpet cells and adjacency") {
  auto c = PartitionFamily::carpet(4);
  auto g = c.cell(Address{1});
  REQUIRE(g.boxes.size() == 1);
  CHECK(g.boxes[0] == box(0, q(1, 3), 0, q(1, 3)));
  CHECK(PartitionFamily::square_full(2).cell(Address()).boxes[0] == box(0, 1, 0, 1));
  CHECK_FALSE(c.intersects(Address{1}, Address{3}));
  CHECK(c.intersects(Address{1}, Address{2}));
  CHECK_THROWS_AS(c.cell(Address{9}), InvalidAddress);
  CHECK(c.children(Address()).size() == 8);
}

TEST_CASE("carpet adjacency equals combinatorial square adjacency") {
  auto c = PartitionFamily::carpet(3);
  for (int m = 1; m <= 2; ++m) {
    const auto& lv = c.level(m);
    for (const auto& w : lv)
      for (const auto& v : lv) {
        auto [a, b] = grid_index(w);
        auto [x, y] = grid_index(v);
        bool combinatorial = std::labs(a - x) <= 1 && std::labs(b - y) <= 1;
        CHECK(c.intersects(w, v) == combinatorial);
        CHECK(c.intersects(w, v) == c.intersects(v, w));
      }
  }
}

TEST_CASE("cells_meeting agrees with brute force across levels") {
  std::vector<PartitionFamily> fams{PartitionFamily::carpet(4), PartitionFamily::interval_binary(6),
                                    PartitionFamily::cantor_ternary(5), square_example("thin-strips", 4),
                                    square_example("centred-squares", 4)};
  std::mt19937 rng(11);
  for (const auto& f : fams) {
    for (int m = 0; m <= 3; ++m) {
      const auto& lv = f.level(m);
      for (int t = 0; t < 6 && !lv.empty(); ++t) {
        const Address& w = lv[rng() % lv.size()];
        for (int l = 0; l <= f.max_depth(); ++l) {
          std::vector<Address> brute;
          for (const auto& v : f.level(l))
            if (!(v.is_prefix_of(w) || w.is_prefix_of(v)) && f.intersects(w, v)) brute.push_back(v);
          CHECK(f.cells_meeting(w, l, true) == brute);
        }
      }
    }
  }
}

TEST_CASE("holes families: membership and adjacency match a grid oracle") {
  for (std::string name : {"thin-strips", "cantor-strips", "corner-squares", "centred-squares"}) {
    auto f = square_example(name, 4);
    const auto& removed = f.removed();
    // every lattice level used is <= 4
    for (int m = 1; m <= 2; ++m) {
      std::set<std::pair<long, long>> present;
      for (const auto& w : f.level(m)) present.insert(grid_index(w));
      long n = m == 1 ? 3 : 9;
      for (long a = 0; a < n; ++a)
        for (long b = 0; b < n; ++b) {
          RationalBox Q = box(q(a, n), q(a + 1, n), q(b, n), q(b + 1, n));
          bool inside_some = false;
          for (const auto& r : removed)
            if (subset(Q, r)) inside_some = true;
          CHECK(present.count({a, b}) == (inside_some ? 0u : 1u));
        }
      for (const auto& w : f.level(m))
        for (const auto& v : f.level(m)) {
          bool oracle = holes_meet_oracle(removed, f.hull_box(w), f.hull_box(v), 81);
          CHECK_MESSAGE(f.intersects(w, v) == oracle, name, " ", w.str(), " ", v.str());
        }
    }
  }
}

TEST_CASE("thin strips: the first hole removes level-2 cells and separates its sides") {
  auto f = square_example("thin-strips", 4);
  REQUIRE(f.removed().front() == box(q(2, 9), q(4, 9), 0, 1));
  Address inside{1, 3};  // [2/9,1/3] x [0,1/9]
  CHECK(f.hull_box(inside) == box(q(2, 9), q(1, 3), 0, q(1, 9)));
  CHECK_THROWS_AS(f.cell(inside), InvalidAddress);
  Address left{1, 2}, right{2, 2};
  CHECK(f.hull_box(left).hi[0] == q(2, 9));
  CHECK(f.hull_box(right).lo[0] == q(4, 9));
  CHECK_FALSE(f.intersects(left, right));
  // boundary of the hole belongs to X
  auto ref = f.point_addresses(Point{{q(2, 9), 0}}, 2);
  CHECK(ref.addresses[1] == std::vector<Address>{Address{1}});
  CHECK(ref.addresses[2] == std::vector<Address>{Address{1, 2}});
  CHECK_THROWS_AS(f.point_addresses(Point{{q(1, 3), q(1, 2)}}, 2), PointOutsideSpace);
}

TEST_CASE("corner squares: the hole corner joins the two diagonal cells") {
  auto f = square_example("corner-squares", 6);
  for (int m = 1; m <= 3; ++m) {
    std::vector<int> wd(m - 1, 1), vd(m, 1);
    wd.push_back(9);
    Address w(std::vector<std::uint8_t>(wd.begin(), wd.end())), v(std::vector<std::uint8_t>(vd.begin(), vd.end()));
    CHECK(f.intersects(w, v));
  }
}

TEST_CASE("point addresses on the carpet") {
  auto c = PartitionFamily::carpet(5);
  auto r = c.point_addresses(Point{{q(1, 3), 0}}, 1);
  CHECK(r.addresses[1] == std::vector<Address>{Address{1}, Address{2}});
  auto o = c.point_addresses(Point{{0, 0}}, 5);
  CHECK(o.addresses[5] == std::vector<Address>{Address{1, 1, 1, 1, 1}});
  CHECK_THROWS_AS(c.point_addresses(Point{{q(1, 2), q(1, 2)}}, 2), PointOutsideSpace);

  std::mt19937 rng(3);
  std::uniform_int_distribution<long> coord(0, 729);
  int checked = 0;
  while (checked < 300) {
    Rational x(coord(rng), 729), y(coord(rng), 729);
    x.canonicalize();
    y.canonicalize();
    bool member = carpet_oracle(x, y, 7);
    CHECK(c.point_in_space(Point{{x, y}}) == member);
    if (!member) continue;
    ++checked;
    auto ref = c.point_addresses(Point{{x, y}}, 5);
    for (const auto& lvl : ref.addresses) {
      CHECK(lvl.size() >= 1);
      CHECK(static_cast<int>(lvl.size()) <= c.strong_finiteness_bound());
    }
  }
}

TEST_CASE("(P1) holds for every built-in family") {
  std::vector<PartitionFamily> fams{PartitionFamily::carpet(3), PartitionFamily::square_full(3),
                                    PartitionFamily::interval_binary(4), PartitionFamily::cantor_ternary(4)};
  for (std::string name : {"thin-strips", "cantor-strips", "centred-squares"}) fams.push_back(square_example(name, 4));
  for (const auto& f : fams) CHECK_MESSAGE(f.p1_violations(f.max_depth()).empty(), f.label());
}

TEST_CASE("corner squares break (P1) along the hole edges inside the parent") {
  // R_j = Q_{1^{j-1} 9 1^j} has two sides on the boundary of Q_{1^{j-1} 9 1^{j-1}};
  // those sides lie in X and in that cell but in none of its surviving children.
  auto f = square_example("corner-squares", 6);
  std::vector<Address> expected{Address{9}, Address{1, 9, 1}, Address{1, 1, 9, 1, 1}};
  CHECK(f.p1_violations(6) == expected);
}

TEST_CASE("minimality of built-in families") {
  CHECK(PartitionFamily::carpet(3).minimality_check(3).all_minimal);
  CHECK(PartitionFamily::interval_binary(4).minimality_check(4).all_minimal);
  auto same = PartitionFamily::carpet(3).minimize(3);
  CHECK(same.pruned().empty());
  CHECK(same.level(3).size() == 512);
}

TEST_CASE("a covered cell is detected and pruned") {
  std::map<Address, RationalBox> cells;
  auto iv = [](Rational a, Rational b) { return RationalBox{{a}, {b}}; };
  cells[Address()] = iv(0, 1);
  cells[Address{0}] = iv(0, q(1, 2));
  cells[Address{1}] = iv(q(1, 4), q(3, 4));
  cells[Address{2}] = iv(q(1, 2), 1);
  cells[Address{0, 0}] = iv(0, q(1, 4));
  cells[Address{0, 1}] = iv(q(1, 4), q(1, 2));
  cells[Address{1, 0}] = iv(q(1, 4), q(1, 2));
  cells[Address{1, 1}] = iv(q(1, 2), q(3, 4));
  cells[Address{2, 0}] = iv(q(1, 2), q(3, 4));
  cells[Address{2, 1}] = iv(q(3, 4), 1);
  auto f = PartitionFamily::custom(1, 2, cells, 2);
  auto rep = f.minimality_check(2);
  CHECK_FALSE(rep.all_minimal);
  CHECK(std::find(rep.violating.begin(), rep.violating.end(), Address{1}) != rep.violating.end());

  auto g = f.minimize(2);
  CHECK(g.pruned() == std::set<Address>{Address{1}});
  CHECK(g.minimality_check(2).all_minimal);
  CHECK(g.p1_violations(2).empty());
  CHECK_THROWS_AS(g.cell(Address{1, 0}), InvalidAddress);
  CHECK(f.minimize(0).pruned().empty());
}

TEST_CASE("overlapping removed rectangles are rejected") {
  std::vector<RationalBox> rs{box(q(1, 3), q(2, 3), q(1, 3), q(2, 3)), box(q(2, 3), 1, q(2, 3), 1)};
  try {
    PartitionFamily::square_with_holes(rs, 3);
    FAIL("expected InvalidFamily");
  } catch (const InvalidFamily& e) {
    CHECK(std::string(e.what()).find("(SQ2)") != std::string::npos);
  }
  CHECK_THROWS_AS(PartitionFamily::square_with_holes({box(q(1, 4), q(1, 2), 0, 1)}, 3), InvalidFamily);
}

TEST_CASE("dyadic cubes over a point cloud") {
  std::vector<Point> cloud{Point{{q(1, 8), q(1, 8)}}, Point{{q(1, 2), q(1, 4)}}, Point{{q(7, 8), q(7, 8)}}};
  auto f = PartitionFamily::dyadic_cubes(cloud, 3);
  // (1/2,1/4) sits on the vertical line x = 1/2, so both lower cubes own it.
  CHECK(f.contains(Address{0}));
  CHECK(f.contains(Address{1}));
  CHECK(f.contains(Address{3}));
  CHECK_FALSE(f.contains(Address{2}));
  CHECK(f.intersects(Address{0}, Address{1}));
  CHECK_FALSE(f.intersects(Address{0}, Address{3}));
  CHECK(f.p1_violations(3).empty());
  auto rep = f.minimality_check(3);
  CHECK(rep.undecided.empty());
}

TEST_CASE("intersects is reflexive and symmetric") {
  auto f = square_example("cantor-strips", 3);
  for (int m = 0; m <= 2; ++m)
    for (const auto& w : f.level(m)) {
      CHECK(f.intersects(w, w));
      for (const auto& v : f.level(m)) CHECK(f.intersects(w, v) == f.intersects(v, w));
    }
}
