#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "confdim/partition.hpp"

namespace confdim {

// Gamma_M(w): cells of level |w| joined to w by a horizontal chain of at most
// M + 1 cells.  Lexicographic.
std::vector<Address> gamma(const PartitionFamily& family, const Address& w, int M);

// S^k(A): the depth-(|w|+k) descendants of the members of A.  Lexicographic.
std::vector<Address> refine(const PartitionFamily& family, const std::vector<Address>& A, int k);

// A vertex is a cell or a point of X.
struct NetworkVertex {
  std::optional<Address> cell;
  std::optional<Point> point;

  std::string name(int level) const;  // "m:address" or "m:(x,y)"
};

struct HorizontalNetwork {
  int level = 0;
  std::vector<NetworkVertex> vertices;
  std::vector<std::pair<int, int>> edges;          // i < j, sorted, unique
  std::vector<std::vector<Address>> owners;        // cells w with the vertex in Omega_{m,w}
  std::map<Address, std::vector<int>> omega;       // Omega_{m,w}

  std::vector<std::vector<int>> adjacency() const;
  void write_edges(std::ostream& out) const;       // "h a b" per edge
  void write_ownership(std::ostream& out) const;   // "vertex owner owner ..."
};

enum class SystemKind { CellGraph, CarpetEdges, CarpetCorners };

struct ProperSystem {
  SystemKind kind = SystemKind::CellGraph;
  int N = 1, L0 = 1, L1 = 1, L2 = 1;

  static ProperSystem cell_graph(int N);  // indices (N,1,1,1)
  static ProperSystem carpet_edges();     // indices (1,1,1,2)
  static ProperSystem carpet_corners();   // indices (1,5,1,1)
  static ProperSystem parse(const std::string& name, int N = 1);  // "cells", "carpet-edges", "carpet-corners"
  std::string name() const;
};

// Throws UnsupportedFamily for the carpet systems on other families and
// DepthExceeded beyond max_depth.
HorizontalNetwork build_network(const ProperSystem& system, const PartitionFamily& family, int m);

struct LevelCheck {
  int level = 0;
  bool n1 = true, n2 = true, n3 = true, n4 = true, n5 = true;
  int max_pair_edges = 0;  // observed L0
  std::size_t n5_pairs = 0;
  std::vector<std::string> failures;
};

struct SystemReport {
  std::vector<LevelCheck> levels;
  bool ok() const;
};

// Exact (N1)-(N4) at levels 0..max_level.  (N5) on up to `samples` pairs of
// J^h_{L1} per level (0 means every pair).  E_m(u,v) counts undirected edges.
SystemReport validate_proper_system(const ProperSystem& system, const PartitionFamily& family, int max_level,
                                    std::size_t samples = 0, std::uint64_t seed = 1);

struct GrowthRates {
  int L_star = 0;  // sup #Gamma_1(w)
  int N_star = 0;  // sup #S(w)
  std::vector<int> n;
  std::vector<std::size_t> gamma_counts;   // sup_w #S^n(Gamma_{N2}(w))
  std::vector<double> gamma_rates;         // their n-th roots
  std::vector<std::size_t> single_counts;  // sup_w #S^n(w)
  std::vector<double> single_rates;
};

// Suprema over every w with |w| + n <= max_depth.
GrowthRates growth_rates(const PartitionFamily& family, int N2, const std::vector<int>& depths);

enum class BalancedVerdict { Balanced, Violated };
std::string to_string(BalancedVerdict v);

struct BalancedReport {
  BalancedVerdict verdict = BalancedVerdict::Balanced;
  std::vector<Address> witness;   // violating path when Violated
  Rational witness_sum = 0, threshold = 0;
  std::size_t entry_cells = 0, exit_cells = 0;
};

using CellFunction = std::function<Rational(const Address&)>;

// Is sum phi(w(i)) >= phi(pi(w(m))) over C_w^M?  Deleting a loop from a path
// in C_w^M leaves a path in C_w^M with a smaller sum, so the minimum over the
// paths of at most max_path_len cells is found by a hop-bounded relaxation.
// Throws PathBudgetExceeded when a cheaper violating path might need more
// cells than the budget allows (i.e. the unbounded minimum is still falling).
BalancedReport balanced_check_bounded(const PartitionFamily& family, const CellFunction& phi, int M,
                                      const Address& w, int max_path_len);

}  // namespace confdim
