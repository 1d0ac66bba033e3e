#include <algorithm>
#include <set>

#include "confdim/error.hpp"
#include "confdim/weight.hpp"
#include "doctest.h"

using namespace confdim;

namespace {

Rational q(long n, long d = 1) {
  Rational r(n, d);
  r.canonicalize();
  return r;
}

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

bool carpet_adjacent(const Address& w, const Address& v) {
  auto [a, b] = grid_index(w);
  auto [x, y] = grid_index(v);
  return std::labs(a - x) <= 1 && std::labs(b - y) <= 1;
}

Rational mixed(const Address& w) {
  Rational v = 1;
  for (int i = 0; i < w.depth(); ++i) v *= w[i] % 2 ? q(1, 9) : q(1, 3);
  return v;
}

std::vector<Address> all_words(const std::vector<int>& digits, int len) {
  std::vector<Address> out{Address()};
  for (int k = 0; k < len; ++k) {
    std::vector<Address> next;
    for (const auto& w : out)
      for (int d : digits) next.push_back(w.child(d));
    out.swap(next);
  }
  return out;
}

std::vector<Rational> powers(Rational r, int from, int to) {
  std::vector<Rational> out;
  for (int k = from; k <= to; ++k) out.push_back(rpow(r, k));
  return out;
}

}  // namespace

TEST_CASE("weight values compare on squares") {
  auto a = WeightValue::from_square(2);
  auto b = WeightValue::from_rational(q(3, 2));
  CHECK(a < b);
  CHECK_FALSE(a.is_rational());
  CHECK(a.str() == "sqrt(2)");
  CHECK((a * a).exact() == Rational(2));
  CHECK(WeightValue::from_square(q(4, 9)).exact() == q(2, 3));
}

TEST_CASE("scale sets of the carpet") {
  auto c = PartitionFamily::carpet(4);
  auto h = WeightFunction::geometric(q(1, 3));
  auto s = scale_set(h, c, q(1, 9));
  CHECK(s.members == c.level(2));
  CHECK(s.members.size() == 64);

  auto g = WeightFunction::carpet_mixed();
  auto s3 = scale_set(g, c, q(1, 3));
  CHECK(s3.members == c.level(1));
  auto s9 = scale_set(g, c, q(1, 9));
  std::vector<Address> expected;
  for (int i : {1, 3, 5, 7}) expected.push_back(Address{i});
  for (int i : {2, 4, 6, 8})
    for (int j = 1; j <= 8; ++j) expected.push_back(Address{i, j});
  std::sort(expected.begin(), expected.end());
  CHECK(s9.members == expected);

  CHECK(scale_set(h, c, 1).members == std::vector<Address>{Address()});
  CHECK_THROWS_AS(scale_set(h, c, q(1, 243)), DepthExceeded);
}

TEST_CASE("scale sets are antichains covering every end") {
  auto c = PartitionFamily::carpet(4);
  for (const auto& g : {WeightFunction::geometric(q(1, 3)), WeightFunction::carpet_mixed()})
    for (Rational s : {q(1, 3), q(1, 9), q(1, 27), q(1, 81)}) {
      auto set = scale_set(g, c, s);
      for (const auto& w : set.members) {
        CHECK(g(w).square() <= s * s);
        if (!w.is_root()) CHECK(g(parent(w)).square() > s * s);
      }
      for (const auto& leaf : c.level(4)) {
        int owners = 0;
        for (int m = 0; m <= 4; ++m) owners += set.contains(leaf.prefix(m));
        CHECK(owners == 1);
      }
    }
}

TEST_CASE("symmetric digit weights give dihedrally invariant scale sets") {
  auto c = PartitionFamily::carpet(4);
  auto g = WeightFunction::carpet_mixed();
  auto set = scale_set(g, c, q(1, 27));
  // rotation by a quarter turn permutes the boundary digits cyclically by two
  auto rot = [](const Address& w) {
    std::vector<std::uint8_t> d(w.digits());
    for (auto& x : d) x = static_cast<std::uint8_t>((x + 1) % 8 + 1);
    return Address(d);
  };
  std::set<Address> members(set.members.begin(), set.members.end());
  for (const auto& w : set.members) CHECK(members.count(rot(w)) == 1);
}

TEST_CASE("exponential constants") {
  auto c = PartitionFamily::carpet(4);
  auto e = exp_constants(WeightFunction::geometric(q(1, 3)), c, 3);
  CHECK(e.lambda == WeightValue::from_rational(q(1, 3)));
  REQUIRE(e.sub_m.has_value());
  CHECK(*e.sub_m == 1);
  CHECK(e.gamma[0] == WeightValue::from_rational(q(1, 3)));

  auto m = exp_constants(WeightFunction::carpet_mixed(), c, 3);
  CHECK(m.lambda == WeightValue::from_rational(q(1, 9)));
  CHECK(*m.sub_m == 1);
  CHECK(m.gamma[0] == WeightValue::from_rational(q(1, 3)));

  for (Rational r : {q(1, 2), q(1, 3), q(2, 5)}) {
    auto i = PartitionFamily::interval_binary(5);
    CHECK(exp_constants(WeightFunction::geometric(r), i, 5).lambda == WeightValue::from_rational(r));
  }

  auto iv = PartitionFamily::interval_binary(3);
  std::map<Address, Rational> table;
  for (int m = 0; m <= 3; ++m)
    for (const auto& w : iv.level(m)) {
      bool zeros = std::all_of(w.digits().begin(), w.digits().end(), [](auto d) { return d == 0; });
      table[w] = zeros ? Rational(1) : rpow(q(1, 2), m);
    }
  auto flat = exp_constants(WeightFunction::custom_table(table), iv, 3);
  CHECK_FALSE(flat.sub_m.has_value());
}

TEST_CASE("uniform finiteness counts match brute-force adjacency") {
  auto c = PartitionFamily::carpet(4);
  std::size_t oracle = 0;
  for (int m = 1; m <= 4; ++m) {
    const auto& lv = c.level(m);
    for (const auto& w : lv) {
      std::size_t n = 0;
      for (const auto& v : lv) n += carpet_adjacent(w, v);
      oracle = std::max(oracle, n);
    }
  }
  CHECK(uniformly_finite_bound(WeightFunction::geometric(q(1, 3)), c, powers(q(1, 3), 1, 4)) ==
        static_cast<int>(oracle));
  // every 3x3 window of same-level cells contains a removed centre
  CHECK(oracle == 8);
  CHECK(uniformly_finite_bound(WeightFunction::geometric(q(1, 2)), PartitionFamily::interval_binary(5),
                               powers(q(1, 2), 1, 5)) == 3);
  CHECK(uniformly_finite_bound(WeightFunction::geometric(q(1, 3)), PartitionFamily::cantor_ternary(5),
                               powers(q(1, 3), 1, 5)) == 1);
}

TEST_CASE("gentleness") {
  auto c = PartitionFamily::carpet(5);
  auto h = WeightFunction::geometric(q(1, 3));
  auto same = gentle_constant(h, h, c, powers(q(1, 3), 1, 5));
  REQUIRE(same.constant.has_value());
  CHECK(*same.constant == WeightValue::from_rational(1));

  auto mixed_rep = gentle_constant(h, WeightFunction::carpet_mixed(), c, powers(q(1, 3), 1, 5));
  Rational oracle = 1;
  for (int m = 1; m <= 5; ++m) {
    auto words = all_words({1, 2, 3, 4, 5, 6, 7, 8}, m);
    for (const auto& w : words)
      for (const auto& v : words)
        if (carpet_adjacent(w, v)) oracle = std::max(oracle, Rational(mixed(w) / mixed(v)));
  }
  REQUIRE(mixed_rep.constant.has_value());
  CHECK(mixed_rep.constant->exact() == oracle);
  CHECK_FALSE(mixed_rep.unbounded);

  auto ones = WeightFunction::function(
      [](const Address& w) {
        long k = std::count(w.digits().begin(), w.digits().end(), 1);
        return rpow(q(1, 2), static_cast<int>(k * k));
      },
      "ones-squared");
  auto diverging = gentle_constant(h, ones, c, powers(q(1, 3), 1, 5));
  CHECK(diverging.unbounded);
  CHECK_FALSE(diverging.constant.has_value());
  for (int m = 1; m <= 5; ++m) CHECK(diverging.trace[m - 1].square() >= rpow(Rational(2), 2 * (2 * m - 1)));
}

TEST_CASE("gentle constant of a weight with itself is at most 1/lambda") {
  auto c = PartitionFamily::carpet(4);
  auto g = WeightFunction::carpet_mixed();
  auto lam = exp_constants(g, c, 4).lambda;
  auto rep = gentle_constant(g, g, c, powers(q(1, 3), 1, 4));
  REQUIRE(rep.constant.has_value());
  CHECK(*rep.constant <= WeightValue::from_rational(1) / lam);
}

TEST_CASE("bi-Lipschitz constants") {
  auto c = PartitionFamily::carpet(5);
  auto h = WeightFunction::geometric(q(1, 3));
  auto eq = bilipschitz_constants(h, h, c, 5);
  CHECK(eq.c1 == WeightValue::from_rational(1));
  CHECK(eq.c2 == WeightValue::from_rational(1));

  auto normalized = bilipschitz_constants(h, WeightFunction::metric_induced(c, true), c, 5);
  CHECK(normalized.c1 == WeightValue::from_rational(1));
  CHECK(normalized.c2 == WeightValue::from_rational(1));
  auto raw = bilipschitz_constants(h, WeightFunction::metric_induced(c, false), c, 5);
  CHECK(raw.c1 == WeightValue::from_square(2));
  CHECK(raw.c2 == WeightValue::from_square(2));

  auto iv = PartitionFamily::interval_binary(2);
  std::map<Address, Rational> a, b;
  for (int m = 0; m <= 2; ++m)
    for (const auto& w : iv.level(m)) {
      a[w] = rpow(q(1, 2), m);
      b[w] = m == 0 ? Rational(1) : (w[0] == 0 ? rpow(q(1, 3), m) : rpow(q(2, 3), m));
    }
  auto s = bilipschitz_constants(WeightFunction::custom_table(a), WeightFunction::custom_table(b), iv, 2);
  CHECK(s.c1 < WeightValue::from_rational(1));
  CHECK(s.c2 > WeightValue::from_rational(1));
  CHECK(s.c1 == WeightValue::from_rational(q(4, 9)));
  CHECK(s.c2 == WeightValue::from_rational(q(16, 9)));
}

TEST_CASE("thickness") {
  auto carpet = thickness_th1_bound(PartitionFamily::carpet(4), 3, 4);
  REQUIRE(carpet.bound.has_value());
  CHECK(*carpet.bound == 2);
  auto full = thickness_th1_bound(PartitionFamily::square_full(4), 3, 4);
  REQUIRE(full.bound.has_value());
  CHECK(*full.bound == 1);
  auto centred = thickness_th1_bound(square_example("centred-squares", 4), 2, 2);
  CHECK_FALSE(centred.bound.has_value());
  CHECK_FALSE(centred.missing.empty());
}
