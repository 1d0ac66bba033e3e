#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "confdim/partition.hpp"
#include "confdim/weight.hpp"

namespace confdim {

// Levels 0..L of a resolution.  Vertex ids run level by level; a vertex is the
// pair (rank m, address w), so in a rearranged resolution the same address may
// appear at several ranks as distinct vertices.
class ResolutionGraph {
 public:
  int levels() const { return static_cast<int>(offset_.size()) - 1; }
  int size() const { return static_cast<int>(addr_.size()); }
  int level_of(int v) const { return rank_[v]; }
  const Address& address(int v) const { return addr_[v]; }
  int parent(int v) const { return parent_[v]; }  // -1 at the root
  const std::vector<int>& horizontal(int v) const { return hadj_[v]; }
  std::vector<int> level_vertices(int m) const;
  std::optional<int> find(int m, const Address& w) const;
  std::string name(int v) const;  // "m:address"
  std::size_t horizontal_edge_count(int m) const;

  // One edge per line: "h m:a m:b" or "v m:child (m-1):parent".
  void write_edges(std::ostream& out) const;

  friend ResolutionGraph build_resolution(const PartitionFamily& family, int L);
  friend ResolutionGraph rearranged_resolution(const PartitionFamily& family, const WeightFunction& g,
                                               const Rational& r, int levels);

 private:
  void add_level(std::vector<Address> cells);
  std::vector<int> offset_;  // first id of each level, plus the end
  std::vector<int> rank_;
  std::vector<Address> addr_;
  std::vector<int> parent_;
  std::vector<std::vector<int>> hadj_;
};

ResolutionGraph build_resolution(const PartitionFamily& family, int L);
ResolutionGraph rearranged_resolution(const PartitionFamily& family, const WeightFunction& g, const Rational& r,
                                      int levels);

// BFS over both edge kinds.  Throws Disconnected.
int graph_distance(const ResolutionGraph& G, int a, int b);
std::vector<int> distances_from(const ResolutionGraph& G, int a);  // -1 where unreachable
// BFS restricted to the horizontal edges of a's level.
std::vector<int> horizontal_distances_from(const ResolutionGraph& G, int a);

Rational gromov_product(const ResolutionGraph& G, int a, int b);

struct HorizontalPair {
  int a = 0, b = 0, distance = 0;
};

struct MinimalScan {
  int max_bound = 0;
  std::vector<int> per_level;              // max horizontally minimal distance at each level
  std::vector<HorizontalPair> witnesses;   // one worst pair per level attaining its maximum
};

// Same-level pairs whose graph distance is realized by horizontal edges only.
MinimalScan horizontally_minimal_scan(const ResolutionGraph& G, int L);

// Distance through the best ascending-horizontal-descending path.
int bridge_distance(const ResolutionGraph& G, int a, int b);

// Smallest eta with (a|b) >= min((a|c),(b|c)) - eta over sampled triples.
Rational empirical_eta(const ResolutionGraph& G, std::size_t triples, std::uint64_t seed);

}  // namespace confdim
