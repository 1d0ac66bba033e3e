#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "confdim/rational.hpp"

namespace confdim {

// Closed axis-aligned box with rational corners; lo[i] <= hi[i].
struct RationalBox {
  std::vector<Rational> lo, hi;

  std::size_t dim() const { return lo.size(); }
  bool contains(const Point& p) const;
  bool degenerate() const;  // some side has zero length
  Rational diam2() const;
  std::string str() const;  // "[a,b]x[c,d]"
  bool operator==(const RationalBox&) const = default;
};

std::optional<RationalBox> intersect(const RationalBox& a, const RationalBox& b);
bool subset(const RationalBox& a, const RationalBox& b);

// Closed box with integer corners in units of base^{-level}.  Used for every
// predicate on the lattice families so that adjacency tests stay in int64.
struct LatticeBox {
  int level = 0;
  int dim = 0;
  std::array<std::int64_t, 3> lo{}, hi{};

  RationalBox to_rational(int base) const;
  LatticeBox rescaled(int base, int new_level) const;  // new_level >= level
};

// Smallest level at which the rational box is grid aligned; nullopt if none
// up to max_level.
std::optional<LatticeBox> to_lattice(const RationalBox& b, int base, int max_level);

std::optional<LatticeBox> intersect(const LatticeBox& a, const LatticeBox& b, int base);
bool subset(const LatticeBox& a, const LatticeBox& b, int base);

// a is contained in the interior of r relative to the unit cube: a side of r
// lying on the cube boundary counts as open there.
bool subset_rel_interior(const LatticeBox& a, const LatticeBox& r, int base);

// Does the point lie in the closed lattice box / in the interior of r relative
// to the unit cube?
bool contains(const LatticeBox& b, const Point& p, int base);
bool rel_interior_contains(const LatticeBox& r, const Point& p, int base);

}  // namespace confdim
