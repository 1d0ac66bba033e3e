#include "confdim/resolution.hpp"

#include <algorithm>
#include <deque>
#include <limits>
#include <map>
#include <ostream>
#include <random>
#include <stdexcept>

#include "confdim/error.hpp"
#include "confdim/family_io.hpp"

namespace confdim {

std::vector<int> ResolutionGraph::level_vertices(int m) const {
  std::vector<int> out;
  if (m < 0 || m > levels()) return out;
  for (int v = offset_[m]; v < offset_[m + 1]; ++v) out.push_back(v);
  return out;
}

std::optional<int> ResolutionGraph::find(int m, const Address& w) const {
  if (m < 0 || m > levels()) return std::nullopt;
  auto first = addr_.begin() + offset_[m], last = addr_.begin() + offset_[m + 1];
  auto it = std::lower_bound(first, last, w);
  if (it == last || *it != w) return std::nullopt;
  return static_cast<int>(it - addr_.begin());
}

std::string ResolutionGraph::name(int v) const { return std::to_string(rank_[v]) + ":" + address_token(addr_[v]); }

std::size_t ResolutionGraph::horizontal_edge_count(int m) const {
  std::size_t n = 0;
  for (int v : level_vertices(m)) n += hadj_[v].size();
  return n / 2;
}

void ResolutionGraph::write_edges(std::ostream& out) const {
  for (int v = 0; v < size(); ++v)
    for (int u : hadj_[v])
      if (u > v) out << "h " << name(v) << " " << name(u) << "\n";
  for (int v = 0; v < size(); ++v)
    if (parent_[v] >= 0) out << "v " << name(v) << " " << name(parent_[v]) << "\n";
}

void ResolutionGraph::add_level(std::vector<Address> cells) {
  if (offset_.empty()) offset_.push_back(0);
  int m = static_cast<int>(offset_.size()) - 1;
  std::sort(cells.begin(), cells.end());
  for (auto& w : cells) {
    rank_.push_back(m);
    addr_.push_back(std::move(w));
    parent_.push_back(-1);
    hadj_.emplace_back();
  }
  offset_.push_back(static_cast<int>(addr_.size()));
}

ResolutionGraph build_resolution(const PartitionFamily& family, int L) {
  if (L < 0 || L > family.max_depth()) throw DepthExceeded("resolution level beyond max_depth");
  ResolutionGraph G;
  for (int m = 0; m <= L; ++m) {
    G.add_level(family.level(m));
    for (int v : G.level_vertices(m)) {
      const Address& w = G.addr_[v];
      if (m > 0) G.parent_[v] = *G.find(m - 1, parent(w));
      for (const auto& u : family.neighbors(w)) G.hadj_[v].push_back(*G.find(m, u));
      std::sort(G.hadj_[v].begin(), G.hadj_[v].end());
    }
  }
  return G;
}

ResolutionGraph rearranged_resolution(const PartitionFamily& family, const WeightFunction& g, const Rational& r,
                                      int levels) {
  if (levels < 0) throw DepthExceeded("negative level count");
  if (r <= 0 || r >= 1) throw std::invalid_argument("ratio r must lie in (0,1)");
  ResolutionGraph G;
  for (int m = 0; m <= levels; ++m) {
    ScaleSet set = scale_set(g, family, rpow(r, m));
    G.add_level(set.members);
    // members are lexicographic, matching the sorted level order
    auto adj = scale_adjacency(family, set);
    int base = G.offset_[m];
    for (int i = 0; i < static_cast<int>(set.members.size()); ++i) {
      int v = base + i;
      for (auto j : adj[i]) G.hadj_[v].push_back(base + static_cast<int>(j));
      std::sort(G.hadj_[v].begin(), G.hadj_[v].end());
      if (m == 0) continue;
      const Address& w = G.addr_[v];
      for (int k = w.depth(); k >= 0; --k)
        if (auto p = G.find(m - 1, w.prefix(k))) {
          G.parent_[v] = *p;
          break;
        }
      if (G.parent_[v] < 0) throw InvalidFamily("scale sets do not nest at '" + w.str() + "'");
    }
  }
  return G;
}

std::vector<int> distances_from(const ResolutionGraph& G, int a) {
  std::vector<std::vector<int>> down(G.size());
  for (int v = 0; v < G.size(); ++v)
    if (G.parent(v) >= 0) down[G.parent(v)].push_back(v);
  std::vector<int> dist(G.size(), -1);
  std::deque<int> q{a};
  dist[a] = 0;
  auto visit = [&](int u, int d) {
    if (dist[u] < 0) {
      dist[u] = d;
      q.push_back(u);
    }
  };
  while (!q.empty()) {
    int v = q.front();
    q.pop_front();
    int d = dist[v] + 1;
    if (G.parent(v) >= 0) visit(G.parent(v), d);
    for (int u : down[v]) visit(u, d);
    for (int u : G.horizontal(v)) visit(u, d);
  }
  return dist;
}

std::vector<int> horizontal_distances_from(const ResolutionGraph& G, int a) {
  std::vector<int> dist(G.size(), -1);
  std::deque<int> q{a};
  dist[a] = 0;
  while (!q.empty()) {
    int v = q.front();
    q.pop_front();
    for (int u : G.horizontal(v))
      if (dist[u] < 0) {
        dist[u] = dist[v] + 1;
        q.push_back(u);
      }
  }
  return dist;
}

int graph_distance(const ResolutionGraph& G, int a, int b) {
  int d = distances_from(G, a)[b];
  if (d < 0) throw Disconnected(G.name(a) + " and " + G.name(b) + " lie in different components");
  return d;
}

Rational gromov_product(const ResolutionGraph& G, int a, int b) {
  Rational v(G.level_of(a) + G.level_of(b) - graph_distance(G, a, b), 2);
  v.canonicalize();
  return v;
}

namespace {

// BFS from one source that can be advanced a layer at a time.  Stamps avoid
// clearing the distance arrays between sources.
class LayeredBfs {
 public:
  LayeredBfs(const ResolutionGraph& G, const std::vector<std::vector<int>>& down, bool horizontal_only)
      : G_(G), down_(down), hz_(horizontal_only), dist_(G.size()), stamp_(G.size(), 0) {}

  void reset(int src) {
    ++epoch_;
    frontier_ = {src};
    mark(src, 0);
    depth_ = 0;
  }

  // Returns the newly reached layer.
  const std::vector<int>& advance() {
    next_.clear();
    ++depth_;
    for (int v : frontier_) {
      for (int u : G_.horizontal(v)) push(u);
      if (hz_) continue;
      if (G_.parent(v) >= 0) push(G_.parent(v));
      for (int u : down_[v]) push(u);
    }
    frontier_.swap(next_);
    return frontier_;
  }

  int dist(int v) const { return stamp_[v] == epoch_ ? dist_[v] : -1; }

 private:
  void mark(int v, int d) {
    stamp_[v] = epoch_;
    dist_[v] = d;
  }
  void push(int u) {
    if (stamp_[u] == epoch_) return;
    mark(u, depth_);
    next_.push_back(u);
  }

  const ResolutionGraph& G_;
  const std::vector<std::vector<int>>& down_;
  bool hz_;
  std::vector<int> dist_;
  std::vector<unsigned> stamp_;
  unsigned epoch_ = 0;
  int depth_ = 0;
  std::vector<int> frontier_, next_;
};

}  // namespace

// A subpath of a horizontal geodesic is again a horizontal geodesic, so once a
// horizontal ring around w holds no minimal vertex no farther ring does.
MinimalScan horizontally_minimal_scan(const ResolutionGraph& G, int L) {
  std::vector<std::vector<int>> down(G.size());
  for (int v = 0; v < G.size(); ++v)
    if (G.parent(v) >= 0) down[G.parent(v)].push_back(v);
  LayeredBfs full(G, down, false), hz(G, down, true);
  MinimalScan out;
  int top = std::min(L, G.levels());
  out.per_level.assign(top + 1, 0);
  out.witnesses.assign(top + 1, HorizontalPair{});
  for (int m = 0; m <= top; ++m) {
    for (int w : G.level_vertices(m)) {
      full.reset(w);
      hz.reset(w);
      for (int k = 1;; ++k) {
        full.advance();
        const auto& ring = hz.advance();
        bool any = false;
        for (int v : ring) {
          if (full.dist(v) != k) continue;
          any = true;
          if (k > out.per_level[m] && v > w) {
            out.per_level[m] = k;
            out.witnesses[m] = {w, v, k};
          }
        }
        if (!any) break;
      }
    }
    out.max_bound = std::max(out.max_bound, out.per_level[m]);
  }
  return out;
}

int bridge_distance(const ResolutionGraph& G, int a, int b) {
  int la = G.level_of(a), lb = G.level_of(b);
  int best = std::numeric_limits<int>::max();
  // Ancestors of a and b at every height up to min(la, lb).
  std::vector<int> anc_a(la + 1), anc_b(lb + 1);
  for (int v = a, h = la; h >= 0; v = G.parent(v), --h) anc_a[h] = v;
  for (int v = b, h = lb; h >= 0; v = G.parent(v), --h) anc_b[h] = v;
  for (int h = std::min(la, lb); h >= 0; --h) {
    int climb = (la - h) + (lb - h);
    if (climb >= best) break;
    int hd = horizontal_distances_from(G, anc_a[h])[anc_b[h]];
    if (hd >= 0) best = std::min(best, climb + hd);
  }
  if (best == std::numeric_limits<int>::max())
    throw Disconnected(G.name(a) + " and " + G.name(b) + " have no bridge");
  return best;
}

Rational empirical_eta(const ResolutionGraph& G, std::size_t triples, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pick(0, G.size() - 1);
  Rational eta = 0;
  for (std::size_t t = 0; t < triples; ++t) {
    int a = pick(rng), b = pick(rng), c = pick(rng);
    auto da = distances_from(G, a), db = distances_from(G, b);
    if (da[b] < 0 || da[c] < 0 || db[c] < 0) continue;
    auto gp = [&](int x, int y, int dxy) { return Rational(G.level_of(x) + G.level_of(y) - dxy, 2); };
    Rational gab = gp(a, b, da[b]), gac = gp(a, c, da[c]), gbc = gp(b, c, db[c]);
    Rational gap = std::min(gac, gbc) - gab;
    gap.canonicalize();
    if (gap > eta) eta = gap;
  }
  return eta;
}

}  // namespace confdim
