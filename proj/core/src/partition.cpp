#include "confdim/partition.hpp"

#include <algorithm>
#include <mutex>
#include <unordered_set>

#include "confdim/error.hpp"

namespace confdim {

namespace {

constexpr std::array<std::array<int, 2>, 10> kOffsets = {{
    {-1, -1}, {0, 0}, {1, 0}, {2, 0}, {2, 1}, {2, 2}, {1, 2}, {0, 2}, {0, 1}, {1, 1}}};

// Geometry below max_depth is still well defined; witness searches look a few
// levels past the horizon, bounded by int64 lattice coordinates.
int lattice_cap(int base) { return base == 2 ? 60 : 36; }

struct IdxHash {
  std::size_t operator()(const std::array<std::int64_t, 3>& a) const noexcept {
    std::uint64_t h = 1469598103934665603ull;
    for (auto v : a) h = (h ^ static_cast<std::uint64_t>(v)) * 1099511628211ull;
    return h;
  }
};

// One factor of an elementary grid cell: a single coordinate or an open
// interval between two consecutive coordinates.
struct Piece {
  Rational a, b;
  bool point;
};

std::vector<std::vector<Piece>> elementary_pieces(const RationalBox& box, const std::vector<RationalBox>& others) {
  std::vector<std::vector<Piece>> axes;
  for (std::size_t i = 0; i < box.dim(); ++i) {
    std::vector<Rational> cs{box.lo[i], box.hi[i]};
    for (const auto& o : others) {
      if (o.lo[i] > box.lo[i] && o.lo[i] < box.hi[i]) cs.push_back(o.lo[i]);
      if (o.hi[i] > box.lo[i] && o.hi[i] < box.hi[i]) cs.push_back(o.hi[i]);
    }
    std::sort(cs.begin(), cs.end());
    cs.erase(std::unique(cs.begin(), cs.end()), cs.end());
    std::vector<Piece> ps;
    for (std::size_t k = 0; k < cs.size(); ++k) {
      ps.push_back({cs[k], cs[k], true});
      if (k + 1 < cs.size()) ps.push_back({cs[k], cs[k + 1], false});
    }
    axes.push_back(std::move(ps));
  }
  return axes;
}

bool piece_in_box(const std::vector<Piece>& cell, const RationalBox& b) {
  for (std::size_t i = 0; i < cell.size(); ++i)
    if (cell[i].a < b.lo[i] || cell[i].b > b.hi[i]) return false;
  return true;
}

// Enumerate every elementary cell of box; stop early when fn returns false.
template <class Fn>
bool for_each_piece(const std::vector<std::vector<Piece>>& axes, Fn&& fn) {
  std::vector<std::size_t> idx(axes.size(), 0);
  std::vector<Piece> cell(axes.size());
  while (true) {
    for (std::size_t i = 0; i < axes.size(); ++i) cell[i] = axes[i][idx[i]];
    if (!fn(cell)) return false;
    std::size_t i = 0;
    while (i < axes.size() && ++idx[i] == axes[i].size()) idx[i++] = 0;
    if (i == axes.size()) return true;
  }
}

// Is box covered by the union of closed boxes `cover`?
bool covered(const RationalBox& box, const std::vector<RationalBox>& cover) {
  auto axes = elementary_pieces(box, cover);
  return for_each_piece(axes, [&](const std::vector<Piece>& c) {
    for (const auto& o : cover)
      if (piece_in_box(c, o)) return true;
    return false;
  });
}

// Elementary piece contained in the interior of r relative to the unit cube.
bool piece_in_rel_interior(const std::vector<Piece>& c, const RationalBox& r) {
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (c[i].point) {
      const Rational& v = c[i].a;
      bool ok = (v > r.lo[i] || (v == r.lo[i] && r.lo[i] == 0)) && (v < r.hi[i] || (v == r.hi[i] && r.hi[i] == 1));
      if (!ok) return false;
    } else if (c[i].a < r.lo[i] || c[i].b > r.hi[i]) {
      return false;
    }
  }
  return true;
}

bool in_unit_cube(const Point& x) {
  for (const auto& v : x.x)
    if (v < 0 || v > 1) return false;
  return true;
}

}  // namespace

std::string to_string(FamilyKind k) {
  switch (k) {
    case FamilyKind::IntervalBinary: return "interval-binary";
    case FamilyKind::CantorTernary: return "cantor-ternary";
    case FamilyKind::SquareFull: return "square-full";
    case FamilyKind::Carpet: return "sierpinski-carpet";
    case FamilyKind::SquareHoles: return "square-with-holes";
    case FamilyKind::DyadicCubes: return "dyadic-cubes";
    case FamilyKind::Custom: return "custom";
  }
  return "?";
}

FamilyKind parse_family_kind(const std::string& s) {
  for (auto k : {FamilyKind::IntervalBinary, FamilyKind::CantorTernary, FamilyKind::SquareFull, FamilyKind::Carpet,
                 FamilyKind::SquareHoles, FamilyKind::DyadicCubes, FamilyKind::Custom})
    if (to_string(k) == s) return k;
  if (s == "carpet") return FamilyKind::Carpet;
  if (s == "interval") return FamilyKind::IntervalBinary;
  if (s == "cantor") return FamilyKind::CantorTernary;
  throw ParseError("unknown family kind '" + s + "'");
}

std::array<int, 2> square_offset(int digit) { return kOffsets.at(digit); }

int square_digit(int a, int b) {
  for (int d = 1; d <= 9; ++d)
    if (kOffsets[d][0] == a && kOffsets[d][1] == b) return d;
  return -1;
}

struct PartitionFamily::Impl {
  FamilyKind kind;
  std::string label;
  int dim = 1;
  int base = 2;
  int max_depth = 0;
  std::vector<int> alphabet;
  std::vector<RationalBox> removed;
  std::vector<LatticeBox> removed_lat;
  std::vector<Point> cloud;
  std::vector<std::unordered_set<std::array<std::int64_t, 3>, IdxHash>> occupied;  // dyadic, per level
  std::map<Address, RationalBox> custom;
  std::map<Address, LatticeBox> custom_lat;
  std::set<Address> pruned;
  std::optional<TreeShape> shape;

  mutable std::mutex mu;
  mutable std::vector<std::unique_ptr<std::vector<Address>>> levels;

  bool digits_ok(const Address& w) const {
    for (int i = 0; i < w.depth(); ++i)
      if (!std::binary_search(alphabet.begin(), alphabet.end(), w[i])) return false;
    return true;
  }

  LatticeBox hull(const Address& w) const {
    if (kind == FamilyKind::Custom) {
      auto it = custom_lat.find(w);
      if (it == custom_lat.end()) throw InvalidAddress("no custom cell at '" + w.str() + "'");
      return it->second;
    }
    LatticeBox b;
    b.level = w.depth();
    b.dim = dim;
    for (int k = 0; k < w.depth(); ++k) {
      int d = w[k];
      for (int i = 0; i < dim; ++i) b.lo[i] *= base;
      switch (kind) {
        case FamilyKind::IntervalBinary:
        case FamilyKind::CantorTernary: b.lo[0] += d; break;
        case FamilyKind::SquareFull:
        case FamilyKind::Carpet:
        case FamilyKind::SquareHoles:
          b.lo[0] += kOffsets[d][0];
          b.lo[1] += kOffsets[d][1];
          break;
        case FamilyKind::DyadicCubes:
          for (int i = 0; i < dim; ++i) b.lo[i] += (d >> i) & 1;
          break;
        default: break;
      }
    }
    for (int i = 0; i < dim; ++i) b.hi[i] = b.lo[i] + 1;
    return b;
  }

  // Geometric presence, ignoring the max_depth horizon.
  bool present(const Address& w) const {
    if (kind == FamilyKind::Custom) {
      if (!custom.count(w)) return false;
    } else {
      if (w.depth() > lattice_cap(base)) return false;
      if (!digits_ok(w)) return false;
    }
    for (const auto& p : pruned)
      if (p.is_prefix_of(w)) return false;
    if (kind == FamilyKind::SquareHoles) {
      LatticeBox h = hull(w);
      for (const auto& r : removed_lat)
        if (subset(h, r, base)) return false;
    } else if (kind == FamilyKind::DyadicCubes) {
      LatticeBox h = hull(w);
      if (w.depth() < static_cast<int>(occupied.size()))
        return occupied[w.depth()].count(h.lo) > 0;
      for (const auto& p : cloud)
        if (confdim::contains(h, p, base)) return true;
      return false;
    }
    return true;
  }

  std::vector<Address> present_children(const Address& w) const {
    std::vector<Address> out;
    if (kind == FamilyKind::Custom) {
      for (auto it = custom.upper_bound(w); it != custom.end() && w.is_prefix_of(it->first); ++it)
        if (it->first.depth() == w.depth() + 1 && present(it->first)) out.push_back(it->first);
      return out;
    }
    for (int d : alphabet) {
      Address c = w.child(d);
      if (present(c)) out.push_back(std::move(c));
    }
    return out;
  }

  bool meets(const Address& w, const Address& v) const {
    auto I = intersect(hull(w), hull(v), base);
    if (!I) return false;
    if (kind == FamilyKind::SquareHoles) {
      for (const auto& r : removed_lat)
        if (subset_rel_interior(*I, r, base)) return false;
      return true;
    }
    if (kind == FamilyKind::DyadicCubes) {
      for (const auto& p : cloud)
        if (confdim::contains(*I, p, base)) return true;
      return false;
    }
    return true;
  }

  bool point_in_space(const Point& x) const {
    if (static_cast<int>(x.dim()) != dim) return false;
    switch (kind) {
      case FamilyKind::IntervalBinary:
      case FamilyKind::SquareFull: return in_unit_cube(x);
      case FamilyKind::CantorTernary: {
        if (!in_unit_cube(x)) return false;
        Rational t = x.x[0];
        std::set<Rational> seen;
        while (seen.insert(t).second) {
          Rational s = 3 * t;
          if (s <= 1) t = s;
          else if (s >= 2) t = s - 2;
          else return false;
        }
        return true;
      }
      case FamilyKind::Carpet: {
        if (!in_unit_cube(x)) return false;
        Rational u = x.x[0], v = x.x[1];
        std::set<std::pair<Rational, Rational>> seen;
        while (seen.insert({u, v}).second) {
          Rational su = 3 * u, sv = 3 * v;
          // A point on a ternary grid line lies on the boundary of some
          // non-central square, and such boundaries belong to X.
          if (su.get_den() == 1 || sv.get_den() == 1) return true;
          mpz_class a = su.get_num() / su.get_den(), b = sv.get_num() / sv.get_den();
          if (a == 1 && b == 1) return false;
          u = su - Rational(a);
          v = sv - Rational(b);
        }
        return true;
      }
      case FamilyKind::SquareHoles: {
        if (!in_unit_cube(x)) return false;
        for (const auto& r : removed_lat)
          if (rel_interior_contains(r, x, base)) return false;
        return true;
      }
      case FamilyKind::DyadicCubes: return std::find(cloud.begin(), cloud.end(), x) != cloud.end();
      case FamilyKind::Custom: return custom.at(Address()).contains(x);
    }
    return false;
  }
};

PartitionFamily::PartitionFamily(std::shared_ptr<Impl> impl) : impl_(std::move(impl)) {
  Impl* raw = impl_.get();
  impl_->shape.emplace(
      [raw](const Address& w) {
        std::vector<int> ds;
        for (const auto& c : raw->present_children(w)) ds.push_back(c.digits().back());
        return ds;
      },
      impl_->max_depth);
  impl_->levels.resize(impl_->max_depth + 1);
}

namespace {
std::shared_ptr<PartitionFamily::Impl> make_impl(FamilyKind k, int dim, int base, int max_depth, std::string label,
                                                 std::vector<int> alphabet) {
  if (max_depth < 0) throw InvalidFamily("max_depth must be nonnegative");
  if (max_depth > lattice_cap(base)) throw InvalidFamily("max_depth exceeds the exact lattice range");
  auto p = std::make_shared<PartitionFamily::Impl>();
  p->kind = k;
  p->dim = dim;
  p->base = base;
  p->max_depth = max_depth;
  p->label = std::move(label);
  p->alphabet = std::move(alphabet);
  std::sort(p->alphabet.begin(), p->alphabet.end());
  return p;
}
}  // namespace

PartitionFamily PartitionFamily::interval_binary(int max_depth) {
  return PartitionFamily(make_impl(FamilyKind::IntervalBinary, 1, 2, max_depth, "interval-binary", {0, 1}));
}

PartitionFamily PartitionFamily::cantor_ternary(int max_depth) {
  return PartitionFamily(make_impl(FamilyKind::CantorTernary, 1, 3, max_depth, "cantor-ternary", {0, 2}));
}

PartitionFamily PartitionFamily::square_full(int max_depth) {
  return PartitionFamily(
      make_impl(FamilyKind::SquareFull, 2, 3, max_depth, "square-full", {1, 2, 3, 4, 5, 6, 7, 8, 9}));
}

PartitionFamily PartitionFamily::carpet(int max_depth) {
  return PartitionFamily(
      make_impl(FamilyKind::Carpet, 2, 3, max_depth, "sierpinski-carpet", {1, 2, 3, 4, 5, 6, 7, 8}));
}

PartitionFamily PartitionFamily::square_with_holes(std::vector<RationalBox> removed, int max_depth,
                                                   std::string label) {
  auto p = make_impl(FamilyKind::SquareHoles, 2, 3, max_depth, std::move(label), {1, 2, 3, 4, 5, 6, 7, 8, 9});
  for (std::size_t j = 0; j < removed.size(); ++j) {
    const auto& r = removed[j];
    std::string tag = "removed rectangle " + std::to_string(j + 1) + " " + (r.dim() == 2 ? r.str() : "?");
    if (r.dim() != 2) throw InvalidFamily("(SQ1) " + tag + " is not two-dimensional");
    for (int i = 0; i < 2; ++i) {
      if (r.lo[i] < 0 || r.hi[i] > 1) throw InvalidFamily("(SQ1) " + tag + " leaves the unit square");
      if (r.lo[i] >= r.hi[i]) throw InvalidFamily("(SQ1) " + tag + " has empty interior");
    }
    auto lat = to_lattice(r, 3, lattice_cap(3));
    if (!lat) throw InvalidFamily("(SQ1) " + tag + " is not aligned to the ternary grid");
    p->removed_lat.push_back(*lat);
  }
  for (std::size_t a = 0; a < removed.size(); ++a)
    for (std::size_t b = a + 1; b < removed.size(); ++b)
      if (intersect(removed[a], removed[b]))
        throw InvalidFamily("(SQ2) removed rectangles " + std::to_string(a + 1) + " " + removed[a].str() + " and " +
                            std::to_string(b + 1) + " " + removed[b].str() + " are not disjoint");
  p->removed = std::move(removed);
  return PartitionFamily(p);
}

PartitionFamily PartitionFamily::dyadic_cubes(std::vector<Point> cloud, int max_depth) {
  if (cloud.empty()) throw InvalidFamily("dyadic family needs a nonempty point cloud");
  int dim = static_cast<int>(cloud.front().dim());
  if (dim < 1 || dim > 3) throw InvalidFamily("dyadic cubes support dimensions 1..3");
  std::vector<int> alphabet;
  for (int d = 0; d < (1 << dim); ++d) alphabet.push_back(d);
  auto p = make_impl(FamilyKind::DyadicCubes, dim, 2, max_depth, "dyadic-cubes", alphabet);
  std::sort(cloud.begin(), cloud.end(), [](const Point& a, const Point& b) { return a.x < b.x; });
  cloud.erase(std::unique(cloud.begin(), cloud.end()), cloud.end());
  for (const auto& x : cloud) {
    if (static_cast<int>(x.dim()) != dim) throw InvalidFamily("mixed dimensions in point cloud");
    if (!in_unit_cube(x)) throw InvalidFamily("cloud point " + to_string(x) + " outside the unit cube");
  }
  p->cloud = std::move(cloud);
  // Closed cubes: a point on a grid hyperplane belongs to the cubes on both sides.
  p->occupied.resize(max_depth + 1);
  for (int m = 0; m <= max_depth; ++m) {
    std::int64_t n = ipow(2, m);
    for (const auto& x : p->cloud) {
      std::vector<std::vector<std::int64_t>> opts(dim);
      for (int i = 0; i < dim; ++i) {
        Rational s = x.x[i] * Rational(mpz_class(static_cast<long>(n)));
        mpz_class f = s.get_num() / s.get_den();
        std::int64_t fi = f.get_si();
        if (fi < n) opts[i].push_back(fi);
        if (s.get_den() == 1 && fi > 0) opts[i].push_back(fi - 1);
      }
      std::array<std::int64_t, 3> idx{};
      std::function<void(int)> rec = [&](int i) {
        if (i == dim) {
          p->occupied[m].insert(idx);
          return;
        }
        for (auto v : opts[i]) {
          idx[i] = v;
          rec(i + 1);
        }
      };
      rec(0);
    }
  }
  return PartitionFamily(p);
}

PartitionFamily PartitionFamily::custom(int dim, int base, std::map<Address, RationalBox> cells, int max_depth,
                                        std::string label) {
  if (!cells.count(Address())) throw InvalidFamily("custom family needs a root cell");
  std::vector<int> alphabet;
  auto p = make_impl(FamilyKind::Custom, dim, base, max_depth, std::move(label), {});
  for (const auto& [w, box] : cells) {
    if (static_cast<int>(box.dim()) != dim) throw InvalidFamily("cell '" + w.str() + "' has wrong dimension");
    if (w.depth() > max_depth) throw InvalidFamily("cell '" + w.str() + "' below max_depth");
    if (!w.is_root() && !cells.count(parent(w))) throw InvalidFamily("cell '" + w.str() + "' has no parent");
    auto lat = to_lattice(box, base, lattice_cap(base));
    if (!lat) throw InvalidFamily("cell '" + w.str() + "' is not grid aligned");
    p->custom_lat[w] = *lat;
  }
  p->custom = std::move(cells);
  return PartitionFamily(p);
}

FamilyKind PartitionFamily::kind() const { return impl_->kind; }
const std::string& PartitionFamily::label() const { return impl_->label; }
int PartitionFamily::dim() const { return impl_->dim; }
int PartitionFamily::base() const { return impl_->base; }
int PartitionFamily::max_depth() const { return impl_->max_depth; }
const TreeShape& PartitionFamily::tree() const { return *impl_->shape; }
const std::vector<RationalBox>& PartitionFamily::removed() const { return impl_->removed; }
const std::vector<Point>& PartitionFamily::cloud() const { return impl_->cloud; }
const std::map<Address, RationalBox>& PartitionFamily::custom_cells() const { return impl_->custom; }
const std::set<Address>& PartitionFamily::pruned() const { return impl_->pruned; }

bool PartitionFamily::self_similar() const {
  if (!impl_->pruned.empty()) return false;
  switch (impl_->kind) {
    case FamilyKind::IntervalBinary:
    case FamilyKind::CantorTernary:
    case FamilyKind::SquareFull:
    case FamilyKind::Carpet: return true;
    default: return false;
  }
}

bool PartitionFamily::contains(const Address& w) const {
  return w.depth() <= impl_->max_depth && impl_->present(w);
}

void PartitionFamily::require(const Address& w) const {
  if (!contains(w)) throw InvalidAddress("address '" + w.str() + "' is not in the tree of " + impl_->label);
}

std::vector<Address> PartitionFamily::children(const Address& w) const {
  require(w);
  if (w.depth() >= impl_->max_depth) throw DepthExceeded("children requested at max_depth");
  return impl_->present_children(w);
}

const std::vector<Address>& PartitionFamily::level(int m) const {
  if (m < 0 || m > impl_->max_depth) throw DepthExceeded("level " + std::to_string(m) + " beyond max_depth");
  std::lock_guard<std::mutex> lock(impl_->mu);
  auto& slot = impl_->levels[m];
  if (!slot) {
    int have = 0;
    while (have + 1 <= m && impl_->levels[have + 1]) ++have;
    std::vector<Address> cur = have == 0 ? std::vector<Address>{Address()} : *impl_->levels[have];
    if (!impl_->levels[0]) impl_->levels[0] = std::make_unique<std::vector<Address>>(std::vector<Address>{Address()});
    for (int l = have + 1; l <= m; ++l) {
      std::vector<Address> next;
      for (const auto& w : cur)
        for (auto& c : impl_->present_children(w)) next.push_back(std::move(c));
      std::sort(next.begin(), next.end());
      impl_->levels[l] = std::make_unique<std::vector<Address>>(next);
      cur.swap(next);
    }
  }
  return *slot;
}

LatticeBox PartitionFamily::hull(const Address& w) const { return impl_->hull(w); }

RationalBox PartitionFamily::hull_box(const Address& w) const {
  if (impl_->kind == FamilyKind::Custom) return impl_->custom.at(w);
  return impl_->hull(w).to_rational(impl_->base);
}

CellGeometry PartitionFamily::cell(const Address& w) const {
  require(w);
  CellGeometry g;
  g.boxes.push_back(hull_box(w));
  if (impl_->kind == FamilyKind::SquareHoles) {
    for (const auto& r : impl_->removed)
      if (auto I = intersect(r, g.boxes[0]); I && !I->degenerate()) g.holes.push_back(r);
  } else if (impl_->kind == FamilyKind::DyadicCubes) {
    for (const auto& p : impl_->cloud)
      if (g.boxes[0].contains(p)) g.points.push_back(p);
  }
  return g;
}

bool PartitionFamily::intersects(const Address& w, const Address& v) const {
  require(w);
  require(v);
  return impl_->meets(w, v);
}

bool PartitionFamily::point_in_space(const Point& x) const { return impl_->point_in_space(x); }

bool PartitionFamily::cell_contains(const Address& w, const Point& x) const {
  if (!contains(w) || !point_in_space(x)) return false;
  if (impl_->kind == FamilyKind::Custom) return impl_->custom.at(w).contains(x);
  return confdim::contains(impl_->hull(w), x, impl_->base);
}

PointRef PartitionFamily::point_addresses(const Point& x, int depth) const {
  if (!point_in_space(x)) throw PointOutsideSpace("point " + to_string(x) + " is not in " + impl_->label);
  if (depth > impl_->max_depth) throw DepthExceeded("point depth beyond max_depth");
  PointRef ref;
  ref.x = x;
  ref.addresses.push_back({Address()});
  for (int m = 1; m <= depth; ++m) {
    std::vector<Address> next;
    for (const auto& w : ref.addresses.back())
      for (const auto& c : impl_->present_children(w)) {
        bool in = impl_->kind == FamilyKind::Custom ? impl_->custom.at(c).contains(x)
                                                    : confdim::contains(impl_->hull(c), x, impl_->base);
        if (in) next.push_back(c);
      }
    std::sort(next.begin(), next.end());
    next.erase(std::unique(next.begin(), next.end()), next.end());
    ref.addresses.push_back(std::move(next));
  }
  return ref;
}

int PartitionFamily::strong_finiteness_bound() const {
  if (impl_->kind == FamilyKind::Custom) {
    std::size_t n = 0;
    for (int m = 0; m <= impl_->max_depth; ++m) n = std::max(n, level(m).size());
    return static_cast<int>(n);
  }
  return 1 << impl_->dim;
}

std::optional<Address> PartitionFamily::address_at(int lvl, const std::array<std::int64_t, 3>& idx) const {
  const Impl& I = *impl_;
  if (I.kind == FamilyKind::Custom) return std::nullopt;
  std::int64_t n = ipow(I.base, lvl);
  for (int i = 0; i < I.dim; ++i)
    if (idx[i] < 0 || idx[i] >= n) return std::nullopt;
  std::vector<std::uint8_t> d(lvl);
  std::array<std::int64_t, 3> rest = idx;
  for (int k = lvl - 1; k >= 0; --k) {
    int digit = 0;
    switch (I.kind) {
      case FamilyKind::IntervalBinary:
      case FamilyKind::CantorTernary: digit = static_cast<int>(rest[0] % I.base); break;
      case FamilyKind::DyadicCubes:
        for (int i = 0; i < I.dim; ++i) digit |= static_cast<int>(rest[i] & 1) << i;
        break;
      default: digit = square_digit(static_cast<int>(rest[0] % 3), static_cast<int>(rest[1] % 3)); break;
    }
    for (int i = 0; i < I.dim; ++i) rest[i] /= I.base;
    d[k] = static_cast<std::uint8_t>(digit);
  }
  Address w(d);
  if (!contains(w)) return std::nullopt;
  return w;
}

std::vector<Address> PartitionFamily::cells_meeting(const Address& w, int lvl, bool exclude_nested) const {
  const Impl& I = *impl_;
  std::vector<Address> out;
  if (I.kind == FamilyKind::Custom) {
    for (const auto& v : level(lvl)) {
      if (exclude_nested && (v.is_prefix_of(w) || w.is_prefix_of(v))) continue;
      if (I.meets(w, v)) out.push_back(v);
    }
    return out;
  }
  LatticeBox h = I.hull(w);
  std::int64_t n = ipow(I.base, lvl);
  std::array<std::int64_t, 3> from{}, to{}, in_lo{}, in_hi{};
  for (int i = 0; i < I.dim; ++i) {
    if (lvl >= h.level) {
      std::int64_t f = ipow(I.base, lvl - h.level);
      std::int64_t L = h.lo[i] * f, H = h.hi[i] * f;
      from[i] = L - 1;
      to[i] = H;
      in_lo[i] = L;
      in_hi[i] = H - 1;
    } else {
      std::int64_t f = ipow(I.base, h.level - lvl);
      from[i] = (h.lo[i] + f - 1) / f - 1;
      to[i] = h.hi[i] / f;
      in_lo[i] = h.lo[i] / f;  // the ancestor's index
      in_hi[i] = in_lo[i];
    }
    from[i] = std::max<std::int64_t>(from[i], 0);
    to[i] = std::min<std::int64_t>(to[i], n - 1);
  }
  std::array<std::int64_t, 3> idx{};
  // Walk the index box; when exclude_nested, the last axis only visits
  // values outside the nested block unless an earlier axis already left it.
  std::function<void(int, bool)> rec = [&](int i, bool outside) {
    if (i == I.dim) {
      if (exclude_nested && !outside) return;
      auto v = address_at(lvl, idx);
      if (v && (!exclude_nested || !(v->is_prefix_of(w) || w.is_prefix_of(*v))) && I.meets(w, *v))
        out.push_back(*v);
      return;
    }
    bool last = i == I.dim - 1;
    for (std::int64_t t = from[i]; t <= to[i]; ++t) {
      bool o = outside || t < in_lo[i] || t > in_hi[i];
      if (exclude_nested && last && !o) {
        t = std::max(t, in_hi[i]);
        continue;
      }
      idx[i] = t;
      rec(i + 1, o);
    }
  };
  rec(0, false);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<Address> PartitionFamily::neighbors(const Address& w) const {
  require(w);
  return cells_meeting(w, w.depth(), true);
}

std::optional<bool> PartitionFamily::has_private_part(const Address& w) const {
  require(w);
  const Impl& I = *impl_;
  if (w.is_root()) return true;
  if (I.kind == FamilyKind::Custom) {
    std::vector<RationalBox> others;
    for (const auto& v : level(w.depth()))
      if (v != w) others.push_back(I.custom.at(v));
    return !covered(I.custom.at(w), others);
  }
  if (I.kind == FamilyKind::DyadicCubes) {
    std::vector<Address> nb = neighbors(w);
    LatticeBox h = I.hull(w);
    for (const auto& p : I.cloud) {
      if (!confdim::contains(h, p, I.base)) continue;
      bool shared = false;
      for (const auto& v : nb)
        if (confdim::contains(I.hull(v), p, I.base)) shared = true;
      if (!shared) return true;
    }
    return false;
  }
  int horizon = std::min(lattice_cap(I.base), std::max(I.max_depth, w.depth()) + 6) - w.depth();
  if (private_witness_depth(w, horizon)) return true;
  return std::nullopt;
}

std::optional<int> PartitionFamily::private_witness_depth(const Address& w, int horizon) const {
  require(w);
  const Impl& I = *impl_;
  if (w.is_root()) return 0;
  std::vector<Address> nb = neighbors(w);
  // Every frontier cell meets a neighbour, otherwise we would have stopped,
  // so the frontier stays a thin shell along the boundary.
  std::vector<Address> frontier{w};
  int limit = std::min(lattice_cap(I.base), w.depth() + horizon);
  while (!frontier.empty()) {
    for (const auto& u : frontier) {
      bool alone = true;
      for (const auto& v : nb)
        if (I.meets(u, v)) {
          alone = false;
          break;
        }
      if (alone) return u.depth() - w.depth();
    }
    if (frontier.front().depth() >= limit) break;
    std::vector<Address> next;
    for (const auto& u : frontier)
      for (auto& c : I.present_children(u)) next.push_back(std::move(c));
    frontier.swap(next);
  }
  return std::nullopt;
}

MinimalityReport PartitionFamily::minimality_check(int depth) const {
  MinimalityReport rep;
  depth = std::min(depth, impl_->max_depth);
  for (int m = 0; m <= depth; ++m)
    for (const auto& w : level(m)) {
      auto r = has_private_part(w);
      if (!r) {
        rep.undecided.push_back(w);
        rep.all_minimal = false;
      } else if (!*r) {
        rep.violating.push_back(w);
        rep.all_minimal = false;
      }
    }
  return rep;
}

PartitionFamily PartitionFamily::with_depth(int max_depth) const {
  auto p = make_impl(impl_->kind, impl_->dim, impl_->base, max_depth, impl_->label, impl_->alphabet);
  p->removed = impl_->removed;
  p->removed_lat = impl_->removed_lat;
  p->cloud = impl_->cloud;
  p->custom = impl_->custom;
  p->custom_lat = impl_->custom_lat;
  p->pruned = impl_->pruned;
  if (p->kind == FamilyKind::DyadicCubes) {
    auto fresh = dyadic_cubes(impl_->cloud, max_depth);
    p->occupied = fresh.impl_->occupied;
  }
  if (p->kind == FamilyKind::Custom) {
    for (auto it = p->custom.begin(); it != p->custom.end();) {
      if (it->first.depth() > max_depth) {
        p->custom_lat.erase(it->first);
        it = p->custom.erase(it);
      } else {
        ++it;
      }
    }
  }
  return PartitionFamily(p);
}

PartitionFamily PartitionFamily::with_pruned(const std::set<Address>& cut) const {
  for (const auto& w : cut)
    if (w.is_root()) throw InvalidFamily("the root cannot be pruned");
  PartitionFamily next = with_depth(impl_->max_depth);
  next.impl_->pruned.insert(cut.begin(), cut.end());
  return next;
}

PartitionFamily PartitionFamily::minimize(int depth) const {
  PartitionFamily cur = *this;
  depth = std::min(depth, impl_->max_depth);
  while (true) {
    std::optional<Address> victim;
    for (int m = 1; m <= depth && !victim; ++m) {
      const auto& lv = cur.level(m);
      for (auto it = lv.rbegin(); it != lv.rend(); ++it) {
        auto r = cur.has_private_part(*it);
        if (r && !*r) {
          victim = *it;  // largest address among the shallowest covered cells
          break;
        }
      }
    }
    if (!victim) return cur;
    PartitionFamily next = cur.with_depth(cur.max_depth());
    next.impl_->pruned.insert(*victim);
    cur = next;
  }
}

std::vector<Address> PartitionFamily::p1_violations(int depth) const {
  const Impl& I = *impl_;
  std::vector<Address> bad;
  depth = std::min(depth, I.max_depth);
  for (int m = 0; m < depth; ++m)
    for (const auto& w : level(m)) {
      auto kids = I.present_children(w);
      RationalBox W = hull_box(w);
      std::vector<RationalBox> kb;
      for (const auto& c : kids) kb.push_back(hull_box(c));
      bool ok = !kids.empty();
      for (const auto& b : kb)
        if (!subset(b, W)) ok = false;
      if (ok && I.kind == FamilyKind::Custom) ok = covered(W, kb);
      if (ok && I.kind == FamilyKind::DyadicCubes) {
        for (const auto& p : I.cloud)
          if (W.contains(p)) {
            bool in = false;
            for (const auto& b : kb) in = in || b.contains(p);
            ok = ok && in;
          }
      }
      if (ok && I.kind != FamilyKind::Custom && I.kind != FamilyKind::DyadicCubes) {
        // Pieces of W outside the children must be outside X.
        std::vector<RationalBox> removed_here;
        if (I.kind == FamilyKind::Carpet) removed_here.push_back(I.hull(w.child(9)).to_rational(3));
        if (I.kind == FamilyKind::CantorTernary) removed_here.push_back(I.hull(w.child(1)).to_rational(3));
        if (I.kind == FamilyKind::SquareHoles) removed_here = I.removed;
        auto axes = elementary_pieces(W, [&] {
          auto all = kb;
          all.insert(all.end(), removed_here.begin(), removed_here.end());
          return all;
        }());
        for_each_piece(axes, [&](const std::vector<Piece>& c) {
          for (const auto& b : kb)
            if (piece_in_box(c, b)) return true;
          for (const auto& r : removed_here) {
            bool inside = I.kind == FamilyKind::SquareHoles ? piece_in_rel_interior(c, r) : [&] {
              // Open interior of the central square / middle third.
              for (std::size_t i = 0; i < c.size(); ++i) {
                if (c[i].point && !(c[i].a > r.lo[i] && c[i].a < r.hi[i])) return false;
                if (!c[i].point && (c[i].a < r.lo[i] || c[i].b > r.hi[i])) return false;
              }
              return true;
            }();
            if (inside) return true;
          }
          ok = false;
          return false;
        });
      }
      if (!ok) bad.push_back(w);
    }
  return bad;
}

std::vector<RationalBox> cantor_strip_rectangles(int depth) {
  std::vector<RationalBox> out;
  if (depth >= 1) out.push_back({{Rational(1, 3), Rational(0)}, {Rational(2, 3), Rational(1)}});
  // I_{i1..in}: lattice level n+1
  std::vector<Rational> starts{Rational(0)};
  for (int n = 1; n + 1 <= depth; ++n) {
    std::vector<Rational> next;
    Rational step = Rational(1) / Rational(mpz_class(static_cast<long>(ipow(3, n))));
    for (const auto& s : starts)
      for (int i : {0, 2}) next.push_back(s + i * step);
    Rational third = step / 3;
    for (const auto& s : next) out.push_back({{s + third, Rational(0)}, {s + 2 * third, Rational(1)}});
    starts.swap(next);
  }
  return out;
}

std::vector<RationalBox> thin_strip_rectangles(int depth) {
  std::vector<RationalBox> out;
  for (int j = 1; 2 * j <= depth; ++j) {
    Rational a = Rational(1) / Rational(mpz_class(static_cast<long>(ipow(3, j))));
    Rational b = Rational(1) / Rational(mpz_class(static_cast<long>(ipow(3, 2 * j))));
    out.push_back({{a - b, Rational(0)}, {a + b, Rational(1)}});
  }
  return out;
}

std::vector<RationalBox> corner_square_rectangles(int depth) {
  std::vector<RationalBox> out;
  auto hull_of = [](const std::vector<int>& digits) {
    Rational x = 0, y = 0, s = 1;
    for (int d : digits) {
      s /= 3;
      x += kOffsets[d][0] * s;
      y += kOffsets[d][1] * s;
    }
    return RationalBox{{x, y}, {x + s, y + s}};
  };
  for (int j = 1; 2 * j <= depth; ++j) {
    std::vector<int> w(j - 1, 1);
    w.push_back(9);
    for (int i = 0; i < j; ++i) w.push_back(1);
    out.push_back(hull_of(w));
  }
  return out;
}

std::vector<RationalBox> centred_square_rectangles(int depth) {
  std::vector<RationalBox> out;
  for (int m = 1; 2 * m <= depth; ++m) {
    std::vector<std::vector<int>> vs{{}};
    for (int k = 0; k < m - 1; ++k) {
      std::vector<std::vector<int>> next;
      for (const auto& v : vs)
        for (int e : {1, 3, 5, 7}) {
          auto u = v;
          u.push_back(e);
          next.push_back(u);
        }
      vs.swap(next);
    }
    for (auto v : vs) {
      v.push_back(9);
      Rational x = 0, y = 0, s = 1;
      for (int d : v) {
        s /= 3;
        x += kOffsets[d][0] * s;
        y += kOffsets[d][1] * s;
      }
      // Union of the level-2m cells of Q_{v9} not touching its boundary.
      Rational t = s / Rational(mpz_class(static_cast<long>(ipow(3, m))));
      out.push_back({{x + t, y + t}, {x + s - t, y + s - t}});
    }
  }
  return out;
}

PartitionFamily square_example(const std::string& name, int max_depth) {
  if (name == "cantor-strips") return PartitionFamily::square_with_holes(cantor_strip_rectangles(max_depth), max_depth, name);
  if (name == "thin-strips") return PartitionFamily::square_with_holes(thin_strip_rectangles(max_depth), max_depth, name);
  if (name == "corner-squares")
    return PartitionFamily::square_with_holes(corner_square_rectangles(max_depth), max_depth, name);
  if (name == "centred-squares")
    return PartitionFamily::square_with_holes(centred_square_rectangles(max_depth), max_depth, name);
  throw InvalidFamily("unknown square example '" + name + "'");
}

}  // namespace confdim
