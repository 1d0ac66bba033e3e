#include "confdim/visual_metric.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numeric>
#include <queue>
#include <random>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "confdim/error.hpp"

namespace confdim {

struct VisualMetric::Cache {
  std::once_flag once;
  std::vector<WeightValue> candidates;
  std::vector<WeightValue> min_g, max_g;  // per level
  bool exact = true;
};

VisualMetric::VisualMetric(WeightFunction g, PartitionFamily family)
    : g_(std::move(g)), f_(std::move(family)), cache_(std::make_shared<Cache>()) {}

const VisualMetric::Cache& VisualMetric::cache() const {
  std::call_once(cache_->once, [this] {
    Cache& c = *cache_;
    if (const auto& r = g_.geometric_ratio()) {
      // constant on levels: no enumeration needed
      for (int m = 0; m <= f_.max_depth(); ++m) {
        if (f_.level(std::min(m, 1)).empty()) throw InvalidFamily("family '" + f_.label() + "' has an empty level");
        c.min_g.push_back(WeightValue::from_rational(rpow(*r, m)));
        c.max_g.push_back(c.min_g.back());
      }
      c.candidates.assign(c.min_g.rbegin(), c.min_g.rend());
      return;
    }
    std::set<WeightValue> seen;
    for (int m = 0; m <= f_.max_depth(); ++m) {
      const auto& lv = f_.level(m);
      if (lv.empty()) throw InvalidFamily("level " + std::to_string(m) + " of '" + f_.label() + "' is empty");
      WeightValue lo = g_(lv.front()), hi = lo;
      for (const auto& w : lv) {
        WeightValue v = g_(w);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
        if (!v.is_rational()) c.exact = false;
        seen.insert(v);
      }
      c.min_g.push_back(lo);
      c.max_g.push_back(hi);
    }
    const WeightValue& finest = c.max_g.back();
    for (const auto& v : seen)
      if (v >= finest) c.candidates.push_back(v);
  });
  return *cache_;
}

const std::vector<WeightValue>& VisualMetric::candidates() const { return cache().candidates; }
const WeightValue& VisualMetric::finest_scale() const { return cache().max_g.back(); }
bool VisualMetric::exact_costs() const { return cache().exact; }

std::pair<int, int> VisualMetric::level_range(const WeightValue& s) const {
  const Cache& c = cache();
  if (s < c.max_g.back())
    throw DepthExceeded("scale " + s.str() + " is finer than max_depth " + std::to_string(f_.max_depth()) + " resolves");
  int n = static_cast<int>(c.max_g.size());
  int lo = 0, hi = n - 1;
  while (lo < n && c.min_g[lo] > s) ++lo;
  for (int m = 0; m < n; ++m)
    if (c.max_g[m] <= s) {
      hi = m;
      break;
    }
  return {lo, hi};
}

bool VisualMetric::in_scale(const Address& w, const WeightValue& s) const {
  if (g_(w) > s) return false;
  return w.is_root() || g_(parent(w)) > s;
}

std::vector<Address> VisualMetric::cells_at(const PointRef& x, const WeightValue& s) const {
  auto [lo, hi] = level_range(s);
  std::vector<Address> out;
  for (int l = lo; l <= hi && l < static_cast<int>(x.addresses.size()); ++l)
    for (const auto& w : x.addresses[l])
      if (in_scale(w, s)) out.push_back(w);
  return out;
}

std::vector<Address> VisualMetric::scale_neighbors(const Address& w, const WeightValue& s) const {
  auto [lo, hi] = level_range(s);
  std::vector<Address> out;
  for (int l = lo; l <= hi; ++l)
    for (auto& v : f_.cells_meeting(w, l, true))
      if (in_scale(v, s)) out.push_back(std::move(v));
  std::sort(out.begin(), out.end());
  return out;
}

Neighborhood VisualMetric::neighborhood(const Point& x, const WeightValue& s, int M) const {
  if (M < 0) throw InvalidFamily("M must be nonnegative");
  PointRef xr = f_.point_addresses(x, f_.max_depth());
  Neighborhood U{s, M, {}};
  std::set<Address> seen;
  std::vector<Address> frontier = cells_at(xr, s);
  seen.insert(frontier.begin(), frontier.end());
  for (int step = 0; step < M && !frontier.empty(); ++step) {
    std::vector<Address> next;
    for (const auto& u : frontier)
      for (auto& v : scale_neighbors(u, s))
        if (seen.insert(v).second) next.push_back(std::move(v));
    frontier.swap(next);
  }
  U.cells.assign(seen.begin(), seen.end());
  return U;
}

bool VisualMetric::neighborhood_contains(const Neighborhood& U, const Point& y) const {
  if (!f_.point_in_space(y)) return false;
  for (const auto& w : U.cells)
    if (f_.cell_contains(w, y)) return true;
  return false;
}

bool VisualMetric::feasible(const PointRef& x, const PointRef& y, const WeightValue& s, int M,
                            ChainWitness* out) const {
  std::vector<Address> start = cells_at(x, s);
  std::vector<Address> goal = cells_at(y, s);
  std::set<Address> target(goal.begin(), goal.end());
  std::map<Address, Address> pred;
  std::vector<Address> frontier;
  auto finish = [&](Address a) {
    if (!out) return;
    out->cells.clear();
    while (true) {
      out->cells.push_back(a);
      auto it = pred.find(a);
      if (it == pred.end()) break;
      a = it->second;
    }
    std::reverse(out->cells.begin(), out->cells.end());
  };
  std::set<Address> seen;
  for (const auto& a : start) {
    if (target.count(a)) {
      finish(a);
      return true;
    }
    seen.insert(a);
    frontier.push_back(a);
  }
  for (int step = 0; step < M && !frontier.empty(); ++step) {
    std::vector<Address> next;
    for (const auto& u : frontier)
      for (auto& v : scale_neighbors(u, s)) {
        if (!seen.insert(v).second) continue;
        pred.emplace(v, u);
        if (target.count(v)) {
          finish(v);
          return true;
        }
        next.push_back(std::move(v));
      }
    frontier.swap(next);
  }
  return false;
}

DeltaResult VisualMetric::delta(const Point& x, const Point& y, int M) const {
  if (M < 0) throw InvalidFamily("M must be nonnegative");
  PointRef xr = f_.point_addresses(x, f_.max_depth());
  PointRef yr = f_.point_addresses(y, f_.max_depth());
  if (x == y) return {WeightValue::from_rational(0), {{xr.addresses.back().front()}}};
  const auto& cand = candidates();
  ChainWitness w;
  if (feasible(xr, yr, cand.front(), M, &w))
    throw Unresolved(to_string(x) + " and " + to_string(y) + " are chained at the finest scale " +
                     cand.front().str() + "; raise max_depth");
  std::size_t lo = 0, hi = cand.size() - 1;  // infeasible at lo, feasible at hi
  while (hi - lo > 1) {
    std::size_t mid = lo + (hi - lo) / 2;
    if (feasible(xr, yr, cand[mid], M, nullptr)) hi = mid;
    else lo = mid;
  }
  feasible(xr, yr, cand[hi], M, &w);
  return {cand[hi], w};
}

namespace {

template <class C>
C cost_of(const WeightValue& v);
template <>
Rational cost_of<Rational>(const WeightValue& v) {
  return *v.exact();
}
template <>
double cost_of<double>(const WeightValue& v) {
  return v.to_double();
}

template <class C>
ChainCost wrap(const C& c);
template <>
ChainCost wrap<Rational>(const Rational& c) {
  return {c, c.get_d()};
}
template <>
ChainCost wrap<double>(const double& c) {
  return {std::nullopt, c};
}

template <class C>
class ChainSearch {
 public:
  ChainSearch(const VisualMetric& vm, const std::vector<WeightValue>& min_g) : vm_(vm), f_(vm.family()) {
    for (const auto& v : min_g) min_g_.push_back(cost_of<C>(v));
  }

  const C& g(const Address& w) {
    auto it = memo_.find(w);
    if (it != memo_.end()) return it->second;
    return memo_.emplace(w, cost_of<C>(vm_.weight()(w))).first->second;
  }

  std::vector<Address> all_cells(const PointRef& r, int cap) {
    std::vector<Address> out;
    for (int l = 0; l <= cap && l < static_cast<int>(r.addresses.size()); ++l)
      for (const auto& w : r.addresses[l]) out.push_back(w);
    return out;
  }

  // Bounded-hop search seeded with an upper bound and its chain.
  void bounded(const PointRef& xr, const PointRef& yr, int M, C& best, std::vector<Address>& chain) {
    struct Node {
      Address a;
      C cost;
      int prev;
    };
    int cap = f_.max_depth();
    std::vector<Address> ys = all_cells(yr, cap);
    std::set<Address> yset(ys.begin(), ys.end());
    std::vector<std::vector<Node>> layers(1);
    for (const auto& a : all_cells(xr, cap)) {
      const C& c = g(a);
      if (yset.count(a) && c < best) {
        best = c;
        chain = {a};
      }
      if (c < best) layers[0].push_back({a, c, -1});
    }
    auto trace = [&](int layer, int idx) {
      std::vector<Address> out;
      for (; layer >= 0; --layer) {
        out.push_back(layers[layer][idx].a);
        idx = layers[layer][idx].prev;
      }
      std::reverse(out.begin(), out.end());
      return out;
    };
    for (int pos = 1; pos <= M; ++pos) {
      auto& cur = layers[pos - 1];
      for (int i = 0; i < static_cast<int>(cur.size()); ++i)
        for (const auto& b : ys) {
          C c = cur[i].cost + g(b);
          if (!(c < best) || b == cur[i].a || !f_.intersects(cur[i].a, b)) continue;
          best = c;
          chain = trace(pos - 1, i);
          chain.push_back(b);
        }
      if (pos == M) break;
      std::unordered_map<Address, int, AddressHash> index;
      std::vector<Node> next;
      for (int i = 0; i < static_cast<int>(cur.size()); ++i) {
        const Node& u = cur[i];
        for (int l = 0; l <= cap; ++l) {
          if (!(u.cost + min_g_[l] < best)) continue;
          for (auto& v : f_.cells_meeting(u.a, l, true)) {
            C c = u.cost + g(v);
            if (!(c < best)) continue;
            auto [it, fresh] = index.emplace(v, static_cast<int>(next.size()));
            if (fresh) next.push_back({std::move(v), c, i});
            else if (c < next[it->second].cost) next[it->second] = {it->first, c, i};
          }
        }
      }
      layers.push_back(std::move(next));
    }
  }

  // Node-weighted Dijkstra over cells of depth <= cap.
  bool dijkstra(const PointRef& xr, const PointRef& yr, int cap, C& best, std::vector<Address>& chain) {
    std::vector<Address> ys = all_cells(yr, cap);
    std::set<Address> yset(ys.begin(), ys.end());
    using Item = std::pair<C, Address>;
    auto later = [](const Item& a, const Item& b) { return b.first < a.first || (!(a.first < b.first) && b.second < a.second); };
    std::priority_queue<Item, std::vector<Item>, decltype(later)> pq(later);
    std::unordered_map<Address, C, AddressHash> dist;
    std::unordered_map<Address, Address, AddressHash> pred;
    std::unordered_set<Address, AddressHash> done;
    for (const auto& a : all_cells(xr, cap)) {
      dist.emplace(a, g(a));
      pq.push({g(a), a});
    }
    while (!pq.empty()) {
      auto [c, u] = pq.top();
      pq.pop();
      if (!done.insert(u).second) continue;
      if (yset.count(u)) {
        best = c;
        chain.clear();
        for (Address a = u;;) {
          chain.push_back(a);
          auto it = pred.find(a);
          if (it == pred.end()) break;
          a = it->second;
        }
        std::reverse(chain.begin(), chain.end());
        return true;
      }
      for (int l = 0; l <= cap; ++l)
        for (auto& v : f_.cells_meeting(u, l, true)) {
          if (done.count(v)) continue;
          C nc = c + g(v);
          auto it = dist.find(v);
          if (it != dist.end() && !(nc < it->second)) continue;
          dist[v] = nc;
          pred[v] = u;
          pq.push({nc, std::move(v)});
        }
    }
    return false;
  }

 private:
  const VisualMetric& vm_;
  const PartitionFamily& f_;
  std::vector<C> min_g_;
  std::unordered_map<Address, C, AddressHash> memo_;
};

template <class C>
ChainResult chain_distance_impl(const VisualMetric& vm, const std::vector<WeightValue>& min_g, const Point& x,
                                const Point& y, int M) {
  const auto& f = vm.family();
  DeltaResult d = vm.delta(x, y, M);
  PointRef xr = f.point_addresses(x, f.max_depth());
  PointRef yr = f.point_addresses(y, f.max_depth());
  ChainSearch<C> search(vm, min_g);
  C best = 0;
  for (const auto& w : d.witness.cells) best += search.g(w);
  std::vector<Address> chain = d.witness.cells;
  search.bounded(xr, yr, M, best, chain);
  return {wrap<C>(best), {chain}, f.max_depth()};
}

template <class C>
ChainResult chain_metric_impl(const VisualMetric& vm, const std::vector<WeightValue>& min_g, const Point& x,
                              const Point& y, int cap) {
  const auto& f = vm.family();
  PointRef xr = f.point_addresses(x, cap);
  PointRef yr = f.point_addresses(y, cap);
  ChainSearch<C> search(vm, min_g);
  C best = 0;
  std::vector<Address> chain;
  if (!search.dijkstra(xr, yr, cap, best, chain))
    throw Unresolved("no chain joins " + to_string(x) + " and " + to_string(y) + " within depth " +
                     std::to_string(cap));
  return {wrap<C>(best), {chain}, cap};
}

}  // namespace

ChainResult VisualMetric::chain_distance(const Point& x, const Point& y, int M) const {
  if (x == y) {
    PointRef xr = f_.point_addresses(x, f_.max_depth());
    return {wrap<Rational>(Rational(0)), {{xr.addresses.back().front()}}, f_.max_depth()};
  }
  const Cache& c = cache();
  return c.exact ? chain_distance_impl<Rational>(*this, c.min_g, x, y, M)
                 : chain_distance_impl<double>(*this, c.min_g, x, y, M);
}

ChainResult VisualMetric::chain_metric(const Point& x, const Point& y, int depth_cap) const {
  if (depth_cap < 0 || depth_cap > f_.max_depth()) throw DepthExceeded("depth_cap outside 0..max_depth");
  if (x == y) {
    PointRef xr = f_.point_addresses(x, depth_cap);
    return {wrap<Rational>(Rational(0)), {{xr.addresses.back().front()}}, depth_cap};
  }
  const Cache& c = cache();
  return c.exact ? chain_metric_impl<Rational>(*this, c.min_g, x, y, depth_cap)
                 : chain_metric_impl<double>(*this, c.min_g, x, y, depth_cap);
}

namespace {

// Three consecutive entries each at least double the previous one.
bool growing(const std::vector<WeightValue>& trace) {
  int run = 0;
  for (std::size_t i = 1; i < trace.size(); ++i) {
    run = trace[i].square() >= 4 * trace[i - 1].square() ? run + 1 : 0;
    if (run >= 2) return true;
  }
  return false;
}

}  // namespace

AdaptednessReport adaptedness_report(const VisualMetric& vm, MetricChoice d, int M,
                                     const std::vector<std::pair<Point, Point>>& pairs, int depth) {
  const auto& f = vm.family();
  const auto& g = vm.weight();
  AdaptednessReport rep;
  rep.diam2_x = f.hull_box(Address()).diam2();
  Rational norm = d == MetricChoice::EuclideanNormalized ? rep.diam2_x : Rational(1);
  depth = std::min(depth, f.max_depth());
  rep.c_ada = WeightValue::from_rational(0);
  for (int l = 0; l <= depth; ++l) {
    WeightValue worst = WeightValue::from_rational(0);
    for (const auto& w : f.level(l)) {
      Rational gw2 = g(w).square();
      worst = std::max(worst, WeightValue::from_square(f.hull_box(w).diam2() / norm / gw2));
    }
    rep.c_ada_trace.push_back(worst);
    rep.c_ada = std::max(rep.c_ada, worst);
  }
  std::map<int, WeightValue> bands;
  rep.c_adb = WeightValue::from_rational(0);
  double base = f.base();
  for (const auto& [x, y] : pairs) {
    if (x == y) continue;
    DeltaResult del;
    try {
      del = vm.delta(x, y, M);
    } catch (const Unresolved&) {
      ++rep.unresolved;
      continue;
    }
    ++rep.evaluated;
    Rational d2 = dist2(x, y) / norm;
    Rational ratio2 = del.value.square() / d2;
    WeightValue r = WeightValue::from_square(ratio2);
    rep.c_adb = std::max(rep.c_adb, r);
    WeightValue inv = WeightValue::from_square(d2 / del.value.square());
    if (!rep.min_d_over_delta || inv < *rep.min_d_over_delta) rep.min_d_over_delta = inv;
    if (!rep.max_d_over_delta || inv > *rep.max_d_over_delta) rep.max_d_over_delta = inv;
    int band = static_cast<int>(std::floor(-0.5 * std::log(d2.get_d()) / std::log(base) + 1e-9));
    auto it = bands.find(band);
    if (it == bands.end()) bands.emplace(band, r);
    else it->second = std::max(it->second, r);
  }
  for (const auto& [b, v] : bands) rep.c_adb_trace.push_back(v);
  rep.satisfied = rep.evaluated > 0 && !growing(rep.c_ada_trace) && !growing(rep.c_adb_trace);
  return rep;
}

std::vector<Point> sample_points(const PartitionFamily& family, std::size_t count, std::uint64_t seed, int level,
                                 int refine) {
  std::mt19937_64 rng(seed);
  std::vector<Point> out;
  if (family.kind() == FamilyKind::DyadicCubes) {
    const auto& cloud = family.cloud();
    std::uniform_int_distribution<std::size_t> pick(0, cloud.size() - 1);
    while (out.size() < count) out.push_back(cloud[pick(rng)]);
    return out;
  }
  level = std::min(level, family.max_depth());
  int dim = family.dim();
  std::int64_t scale = ipow(family.base(), refine);
  int attempts = 0;
  while (out.size() < count) {
    if (++attempts > static_cast<int>(count) * 1000 + 1000) throw InvalidFamily("could not sample points of X");
    Address w;
    while (w.depth() < level) {
      auto kids = family.children(w);
      if (kids.empty()) break;
      std::uniform_int_distribution<std::size_t> pick(0, kids.size() - 1);
      w = kids[pick(rng)];
    }
    if (w.depth() < level) continue;
    LatticeBox h = family.hull(w);
    std::array<std::int64_t, 3> c{};
    std::uniform_int_distribution<int> axis_pick(0, dim - 1), side(0, 1);
    int fixed = axis_pick(rng);
    for (int i = 0; i < dim; ++i) {
      std::int64_t lo = h.lo[i] * scale, hi = h.hi[i] * scale;
      if (i == fixed) c[i] = side(rng) ? hi : lo;
      else c[i] = std::uniform_int_distribution<std::int64_t>(lo, hi)(rng);
    }
    Point p;
    Rational den = Rational(ipow(family.base(), h.level)) * Rational(scale);
    for (int i = 0; i < dim; ++i) {
      Rational v = Rational(c[i]) / den;
      v.canonicalize();
      p.x.push_back(v);
    }
    if (family.point_in_space(p)) out.push_back(std::move(p));
  }
  return out;
}

Rational distortion(const RationalBox& r) {
  if (r.dim() != 2 || r.degenerate()) throw DegenerateRectangle("distortion needs a nondegenerate rectangle, got " + r.str());
  const Rational &a = r.lo[0], &b = r.hi[0], &c = r.lo[1], &d = r.hi[1];
  Rational w = b - a, h = d - c;
  Rational best = 1;
  if (c != 0 && d != 1) best = std::max(best, Rational(w / h));
  if (a != 0 && b != 1) best = std::max(best, Rational(h / w));
  return best;
}

namespace {

bool rel_interior(const RationalBox& r, const Rational& x, const Rational& y) {
  auto inside = [](const Rational& lo, const Rational& hi, const Rational& v) {
    return (lo < v || (lo == 0 && v == 0)) && (v < hi || (hi == 1 && v == 1));
  };
  return inside(r.lo[0], r.hi[0], x) && inside(r.lo[1], r.hi[1], y);
}

struct UnionFind {
  std::vector<int> p;
  explicit UnionFind(int n) : p(n) { std::iota(p.begin(), p.end(), 0); }
  int find(int a) { return p[a] == a ? a : p[a] = find(p[a]); }
  void unite(int a, int b) { p[find(a)] = find(b); }
};

}  // namespace

int components_outside(const RationalBox& q, const RationalBox& r) {
  auto cuts = [](const Rational& lo, const Rational& hi, const Rational& a, const Rational& b) {
    std::vector<Rational> v{lo, hi};
    if (lo < a && a < hi) v.push_back(a);
    if (lo < b && b < hi) v.push_back(b);
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
  };
  std::vector<Rational> xs = cuts(q.lo[0], q.hi[0], r.lo[0], r.hi[0]);
  std::vector<Rational> ys = cuts(q.lo[1], q.hi[1], r.lo[1], r.hi[1]);
  int nx = static_cast<int>(xs.size()), ny = static_cast<int>(ys.size());
  // Pieces on a doubled grid: (2i, 2j) vertices, odd coordinates span an interval.
  int W = 2 * nx - 1, H = 2 * ny - 1;
  auto coord = [](const std::vector<Rational>& v, int k) {
    return k % 2 == 0 ? v[k / 2] : Rational((v[k / 2] + v[k / 2 + 1]) / 2);
  };
  std::vector<char> kept(W * H);
  for (int i = 0; i < W; ++i)
    for (int j = 0; j < H; ++j) kept[i * H + j] = !rel_interior(r, coord(xs, i), coord(ys, j));
  UnionFind uf(W * H);
  for (int i = 0; i < W; ++i)
    for (int j = 0; j < H; ++j) {
      if (!kept[i * H + j]) continue;
      // grid neighbours are always face/coface pairs; a vertex also touches
      // the four open faces diagonal to it
      if (i + 1 < W && kept[(i + 1) * H + j]) uf.unite(i * H + j, (i + 1) * H + j);
      if (j + 1 < H && kept[i * H + j + 1]) uf.unite(i * H + j, i * H + j + 1);
      if (i % 2 == j % 2 && i + 1 < W) {
        if (j + 1 < H && kept[(i + 1) * H + j + 1]) uf.unite(i * H + j, (i + 1) * H + j + 1);
        if (j >= 1 && kept[(i + 1) * H + j - 1]) uf.unite(i * H + j, (i + 1) * H + j - 1);
      }
    }
  std::set<int> roots;
  for (int k = 0; k < W * H; ++k)
    if (kept[k]) roots.insert(uf.find(k));
  return static_cast<int>(roots.size());
}

std::string to_string(Sq4Verdict v) {
  switch (v) {
    case Sq4Verdict::R0: return "R0";
    case Sq4Verdict::R1: return "R1";
    case Sq4Verdict::Neither: return "neither";
  }
  return "?";
}

std::vector<Sq4Entry> sq4_classify(const PartitionFamily& family, const Rational& kappa, int depth) {
  if (family.kind() != FamilyKind::SquareHoles) throw UnsupportedFamily("sq4_classify needs a square-with-holes family");
  depth = std::min(depth, family.max_depth());
  std::vector<Sq4Entry> out;
  for (const auto& R : family.removed()) {
    Sq4Entry e;
    e.rect = R;
    e.kappa = distortion(R);
    if (e.kappa <= kappa) {
      e.verdict = Sq4Verdict::R0;
      out.push_back(std::move(e));
      continue;
    }
    std::vector<Address> frontier{Address()};
    for (int l = 0; l <= depth && !frontier.empty() && e.verdict != Sq4Verdict::R1; ++l) {
      std::vector<Address> next;
      for (const auto& w : frontier) {
        RationalBox q = family.hull_box(w);
        auto I = intersect(q, R);
        if (!I || I->degenerate()) continue;
        if (components_outside(q, R) == 2) {
          Rational k = distortion(*I);
          if (!e.best_two_component_kappa || k < *e.best_two_component_kappa) e.best_two_component_kappa = k;
          if (k <= kappa && !e.witness) {
            e.verdict = Sq4Verdict::R1;
            e.witness = w;
            e.witness_kappa = k;
          }
        }
        if (l < depth)
          for (auto& c : family.children(w)) next.push_back(std::move(c));
      }
      frontier.swap(next);
    }
    out.push_back(std::move(e));
  }
  return out;
}

}  // namespace confdim
