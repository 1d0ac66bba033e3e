#include <cmath>
#include <numeric>
#include <random>

#include "confdim/energy.hpp"
#include "confdim/error.hpp"
#include "doctest.h"
#include "energy_oracles.hpp"

using namespace confdim;
using oracle::Instance;

namespace {

Graph path3() { return Graph{3, {{0, 1}, {1, 2}}}; }
Graph cycle4() { return Graph{4, {{0, 1}, {1, 2}, {2, 3}, {3, 0}}}; }

double E(const Instance& I, double p) { return solve_energy({I.g, I.U1, I.U2, p}).value; }

// Random instances with a U1-U2 connection but no direct U1-U2 edge.
std::vector<Instance> sample(std::uint64_t seed, int count, int nmin, int nmax) {
  std::mt19937_64 rng(seed);
  std::vector<Instance> out;
  while (static_cast<int>(out.size()) < count) {
    int n = std::uniform_int_distribution<int>(nmin, nmax)(rng);
    int n1 = std::uniform_int_distribution<int>(1, 2)(rng);
    int n2 = std::uniform_int_distribution<int>(1, 2)(rng);
    if (n1 + n2 >= n) continue;
    auto I = oracle::random_instance(rng, n, 0.45, n1, n2);
    auto mod = solve_modulus(I.g, I.U1, I.U2, 2);
    if (mod.infinite || mod.no_curve) continue;
    out.push_back(I);
  }
  return out;
}

}  // namespace

TEST_CASE("energy evaluation and Hoelder constant") {
  CHECK(energy_eval({1, 0.5, 0}, path3(), 2) == doctest::Approx(0.5));
  CHECK(energy_eval({0.3, 0.3, 0.3}, path3(), 2.7) == 0);
  CHECK(energy_eval({1, 0}, Graph{2, {}}, 2) == 0);
  CHECK(holder_constant(2, 2) == 2);
  CHECK(holder_constant(1, 7) == 1);
  CHECK(holder_constant(3, 4) == 16);
  CHECK(path3().max_degree() == 2);
}

TEST_CASE("energy on small closed-form graphs") {
  auto r = solve_energy({path3(), {0}, {2}, 2});
  CHECK(r.value == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(r.minimizer[1] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(r.minimizer[0] == 1);
  CHECK(r.minimizer[2] == 0);
  CHECK(solve_energy({cycle4(), {0}, {2}, 2}).value == doctest::Approx(1).epsilon(1e-12));
  auto r3 = solve_energy({path3(), {0}, {2}, 3});
  CHECK(r3.value == doctest::Approx(0.25).epsilon(1e-9));
  CHECK(r3.converged);
  auto r15 = solve_energy({path3(), {0}, {2}, 1.5});
  CHECK(r15.value == doctest::Approx(2 * std::pow(0.5, 1.5)).epsilon(1e-9));

  CHECK_THROWS_AS(solve_energy({path3(), {0}, {2}, 1.0}), InvalidP);
  CHECK_THROWS_AS(solve_energy({path3(), {0}, {2}, 20.5}), InvalidP);
  CHECK_THROWS_AS(solve_energy({path3(), {0}, {0}, 2}), InadmissibleInput);

  auto z = solve_energy({Graph{4, {{0, 1}, {2, 3}}}, {0}, {3}, 2});
  CHECK(z.exact_zero);
  CHECK(z.value == 0);
  CHECK(z.minimizer[1] == 1);
  CHECK(solve_energy({Graph{3, {}}, {0}, {2}, 2}).exact_zero);
}

TEST_CASE("modulus on small closed-form graphs") {
  auto m = solve_modulus(path3(), {0}, {2}, 2);
  CHECK(m.value == doctest::Approx(1).epsilon(1e-9));
  CHECK(m.density[1] == doctest::Approx(1).epsilon(1e-9));
  CHECK(m.density[0] == 0);
  REQUIRE(m.active_curves.size() == 1);
  CHECK(m.active_curves[0] == std::vector<int>{1});
  CHECK(solve_modulus(cycle4(), {0}, {2}, 2).value == doctest::Approx(2).epsilon(1e-9));
  CHECK(solve_modulus(cycle4(), {0}, {2}, 3).value == doctest::Approx(2).epsilon(1e-9));
  auto d = solve_modulus(Graph{4, {{0, 1}, {2, 3}}}, {0}, {3}, 2);
  CHECK(d.no_curve);
  CHECK(d.value == 0);
  auto inf = solve_modulus(Graph{2, {{0, 1}}}, {0}, {1}, 2);
  CHECK(inf.infinite);
  CHECK(std::isinf(inf.value));
  CHECK_THROWS_AS(solve_modulus(path3(), {0}, {2}, 0.5), InvalidP);

  // Two disjoint 2-curves in series-parallel: a-b-c-z and a-d-e-z.
  Graph g{6, {{0, 1}, {1, 2}, {2, 5}, {0, 3}, {3, 4}, {4, 5}}};
  for (double p : {1.5, 2.0, 3.0}) {
    double expect = 2 * 2 * std::pow(0.5, p);
    CHECK(solve_modulus(g, {0}, {5}, p).value == doctest::Approx(expect).epsilon(1e-8));
  }
}

TEST_CASE("energy matches exhaustive grid search and coordinate descent") {
  for (double p : {1.5, 2.0, 3.0}) {
    for (const auto& I : sample(11 + static_cast<int>(p * 10), 12, 4, 5)) {
      double solver = E(I, p);
      double grid = oracle::grid_search(I, p, 64);
      CHECK(solver <= grid + 1e-12);
      CHECK(grid - solver <= 1e-3);
    }
    for (const auto& I : sample(29 + static_cast<int>(p * 10), 12, 6, 8)) {
      double solver = E(I, p);
      double cd = oracle::coordinate_descent(I, p);
      CHECK(solver <= cd + 1e-9);
      CHECK(cd - solver <= 1e-7 * std::max(1.0, cd));
    }
  }
}

TEST_CASE("modulus matches the enumerated-curve program, both methods") {
  for (double p : {1.5, 2.0, 3.0}) {
    for (const auto& I : sample(7 + static_cast<int>(p * 10), 15, 4, 8)) {
      auto ref = oracle::solve_curve_program(I, p);
      REQUIRE(ref.value - ref.dual <= 1e-7 * std::max(1.0, ref.value));
      ModulusOptions cg, pot;
      cg.method = ModulusMethod::ConstraintGeneration;
      pot.method = ModulusMethod::Potential;
      auto a = solve_modulus(I.g, I.U1, I.U2, p, cg);
      auto b = solve_modulus(I.g, I.U1, I.U2, p, pot);
      CHECK(a.used == ModulusMethod::ConstraintGeneration);
      CHECK(b.used == ModulusMethod::Potential);
      CHECK(std::fabs(a.value - ref.value) <= 1e-6 * std::max(1.0, ref.value));
      CHECK(std::fabs(b.value - ref.value) <= 1e-6 * std::max(1.0, ref.value));
      CHECK(a.residual <= 1e-7);
      for (const auto& c : a.active_curves) {
        double s = 0;
        for (int v : c) s += a.density[v];
        CHECK(s >= 1 - 1e-7);
      }
      for (double d : b.density) CHECK(d >= 0);
    }
  }
}

TEST_CASE("transfer maps and duality bounds") {
  // path: F of the indicator of b, G of the minimizer.
  std::vector<double> ind{0, 1, 0};
  auto F = transfer_F(ind, path3(), {0}, {2});
  CHECK(F == std::vector<double>{1, 1, 0});
  CHECK(energy_eval(F, path3(), 2) <= holder_constant(2, 2) * 2 * 1 + 1e-12);
  auto r = solve_energy({path3(), {0}, {2}, 2});
  auto G = transfer_G(r.minimizer, path3(), {0}, {2});
  CHECK(G[1] == doctest::Approx(1));
  CHECK(min_curve_sum(path3(), {0}, {2}, G) >= 1 - 1e-12);
  CHECK_THROWS_AS(transfer_G({0, 0, 0}, path3(), {0}, {2}), InadmissibleInput);
  CHECK_THROWS_AS(transfer_F({0, 0.5, 0}, path3(), {0}, {2}), InadmissibleInput);
  CHECK_THROWS_AS(transfer_F({0, -1, 0}, path3(), {0}, {2}), InadmissibleInput);

  for (double p : {1.5, 2.0, 3.0}) {
    for (const auto& I : sample(101 + static_cast<int>(p), 20, 5, 30)) {
      auto er = solve_energy({I.g, I.U1, I.U2, p});
      auto mr = solve_modulus(I.g, I.U1, I.U2, p);
      double L = I.g.max_degree();
      CHECK(er.value <= holder_constant(p, 2) * L * mr.value + 1e-9);
      CHECK(mr.value <= 2 * holder_constant(p, L) * er.value + 1e-9);

      auto Ff = transfer_F(mr.density, I.g, I.U1, I.U2);
      for (int v : I.U1) CHECK(Ff[v] >= 1 - 1e-9);
      for (int v : I.U2) CHECK(Ff[v] == 0);
      double fp = 0;
      for (double d : mr.density) fp += std::pow(d, p);
      CHECK(energy_eval(Ff, I.g, p) <= holder_constant(p, 2) * L * fp + 1e-9);
      CHECK(energy_eval(Ff, I.g, p) >= er.value - 1e-9);

      auto Gg = transfer_G(er.minimizer, I.g, I.U1, I.U2);
      CHECK(min_curve_sum(I.g, I.U1, I.U2, Gg) >= 1 - 1e-9);
      double gp = 0;
      for (double d : Gg) gp += std::pow(d, p);
      CHECK(gp <= 2 * holder_constant(p, L) * er.value + 1e-9);
      CHECK(gp >= mr.value - 1e-6);
    }
  }
}

TEST_CASE("energy symmetries and monotonicity") {
  std::mt19937_64 rng(5);
  for (const auto& I : sample(77, 25, 6, 14)) {
    for (double p : {1.5, 2.0, 3.0}) {
      double e = E(I, p);
      // U1 <-> U2 swap.
      CHECK(solve_energy({I.g, I.U2, I.U1, p}).value == doctest::Approx(e).epsilon(1e-7));
      // Relabeling.
      std::vector<int> perm(I.g.n);
      std::iota(perm.begin(), perm.end(), 0);
      std::shuffle(perm.begin(), perm.end(), rng);
      Instance J;
      J.g.n = I.g.n;
      for (auto [a, b] : I.g.edges) J.g.edges.emplace_back(perm[b], perm[a]);
      for (int v : I.U1) J.U1.push_back(perm[v]);
      for (int v : I.U2) J.U2.push_back(perm[v]);
      CHECK(E(J, p) == doctest::Approx(e).epsilon(1e-7));
      // Adding an edge, enlarging U2.
      Instance K = I;
      for (int a = 0; a < I.g.n && K.g.edges.size() == I.g.edges.size(); ++a)
        for (int b = a + 1; b < I.g.n; ++b)
          if (std::find(I.g.edges.begin(), I.g.edges.end(), std::pair{a, b}) == I.g.edges.end()) {
            K.g.edges.emplace_back(a, b);
            break;
          }
      CHECK(E(K, p) >= e - 1e-9);
      auto fr = oracle::free_vertices(I);
      if (!fr.empty()) {
        Instance U = I;
        U.U2.push_back(fr.front());
        CHECK(E(U, p) >= e - 1e-9);
      }
    }
    CHECK(E(I, 3.0) <= E(I, 2.0) + 1e-9);
    CHECK(E(I, 2.0) <= E(I, 1.5) + 1e-9);
  }
}

TEST_CASE("warm start reproduces the cold solution") {
  for (const auto& I : sample(313, 10, 10, 25)) {
    auto cold = solve_energy({I.g, I.U1, I.U2, 1.7});
    auto base = solve_energy({I.g, I.U1, I.U2, 2.3});
    EnergyOptions o;
    o.warm = &base.minimizer;
    auto warm = solve_energy({I.g, I.U1, I.U2, 1.7}, o);
    CHECK(warm.value == doctest::Approx(cold.value).epsilon(1e-8));
  }
}
