#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "confdim/geometry.hpp"
#include "confdim/tree.hpp"

namespace confdim {

enum class FamilyKind { IntervalBinary, CantorTernary, SquareFull, Carpet, SquareHoles, DyadicCubes, Custom };

std::string to_string(FamilyKind k);
FamilyKind parse_family_kind(const std::string& s);

// Exact description of K_w.  For the lattice families `boxes` holds the hull
// Q_w and `holes` the removed rectangles meeting it (their interiors relative
// to the unit square are not in X).  Point-cloud cells list their points.
struct CellGeometry {
  std::vector<RationalBox> boxes;
  std::vector<RationalBox> holes;
  std::vector<Point> points;
};

struct PointRef {
  Point x;
  std::vector<std::vector<Address>> addresses;  // per level 0..depth
};

struct MinimalityReport {
  bool all_minimal = true;
  std::vector<Address> violating;
  std::vector<Address> undecided;  // no witness inside the horizon
};

class PartitionFamily {
 public:
  static PartitionFamily interval_binary(int max_depth);
  static PartitionFamily cantor_ternary(int max_depth);
  static PartitionFamily square_full(int max_depth);
  static PartitionFamily carpet(int max_depth);
  // Removed rectangles must be grid aligned on the ternary lattice, inside the
  // unit square, nondegenerate and pairwise disjoint as closed sets.
  static PartitionFamily square_with_holes(std::vector<RationalBox> removed, int max_depth,
                                           std::string label = "square-with-holes");
  static PartitionFamily dyadic_cubes(std::vector<Point> cloud, int max_depth);
  // Explicit cells: one box per address, K_w = box, children from the keys.
  static PartitionFamily custom(int dim, int base, std::map<Address, RationalBox> cells, int max_depth,
                                std::string label = "custom");

  FamilyKind kind() const;
  const std::string& label() const;
  int dim() const;
  int base() const;
  int max_depth() const;
  const TreeShape& tree() const;
  const std::vector<RationalBox>& removed() const;  // holes families
  const std::vector<Point>& cloud() const;          // dyadic families
  const std::map<Address, RationalBox>& custom_cells() const;
  const std::set<Address>& pruned() const;
  bool self_similar() const;  // every cell's subtree is a scaled copy of X

  bool contains(const Address& w) const;  // w in T
  void require(const Address& w) const;   // throws InvalidAddress
  std::vector<Address> children(const Address& w) const;
  const std::vector<Address>& level(int m) const;  // cached, lexicographic

  LatticeBox hull(const Address& w) const;  // lattice families only
  RationalBox hull_box(const Address& w) const;
  CellGeometry cell(const Address& w) const;

  bool intersects(const Address& w, const Address& v) const;
  bool point_in_space(const Point& x) const;
  bool cell_contains(const Address& w, const Point& x) const;
  PointRef point_addresses(const Point& x, int depth) const;
  int strong_finiteness_bound() const;

  // Present cells at `lvl` that meet K_w.  With exclude_nested, descendants and
  // ancestors of w are skipped (they are never needed by chain searches).
  std::vector<Address> cells_meeting(const Address& w, int lvl, bool exclude_nested) const;
  std::vector<Address> neighbors(const Address& w) const;  // same level, excluding w
  std::optional<Address> address_at(int lvl, const std::array<std::int64_t, 3>& idx) const;

  // Is O_w = K_w minus the other same-level cells nonempty?  Returns nullopt
  // when no witness was found inside the horizon but none was ruled out.
  std::optional<bool> has_private_part(const Address& w) const;
  // Smallest k such that some descendant v with |v| = |w| + k meets no other
  // cell of level |w| (so K_v lies in O_w); searched up to `horizon` levels.
  std::optional<int> private_witness_depth(const Address& w, int horizon) const;
  MinimalityReport minimality_check(int depth) const;
  PartitionFamily minimize(int depth) const;
  PartitionFamily with_depth(int max_depth) const;
  PartitionFamily with_pruned(const std::set<Address>& cut) const;  // subtrees removed from T

  // (P1) at every level up to depth: children cover the parent cell and
  // every missing child region lies outside X.  Returns offending addresses.
  std::vector<Address> p1_violations(int depth) const;

  struct Impl;

 private:
  explicit PartitionFamily(std::shared_ptr<Impl> impl);
  std::shared_ptr<Impl> impl_;
};

// Removed-rectangle generators for the square examples, truncated to rectangles
// whose lattice level is at most `depth`.
std::vector<RationalBox> cantor_strip_rectangles(int depth);     // C3 x [0,1]
std::vector<RationalBox> thin_strip_rectangles(int depth);       // R_j around 3^-j, width 2*3^-2j
std::vector<RationalBox> corner_square_rectangles(int depth);    // R_j = Q_{1^{j-1} 9 1^j}
std::vector<RationalBox> centred_square_rectangles(int depth);   // R(v) in Q_{v9}, v in {1,3,5,7}^{m-1}

// Named presets: "cantor-strips", "thin-strips", "corner-squares", "centred-squares".
PartitionFamily square_example(const std::string& name, int max_depth);

// Ternary digit layout of the nine squares: offset (a,b) in {0,1,2}^2 of digit d.
std::array<int, 2> square_offset(int digit);
int square_digit(int a, int b);

}  // namespace confdim
