#pragma once

// Grid model of the lattice resolutions, built from coordinates alone, and a
// brute-force horizontally minimal scan over it.

#include <algorithm>
#include <array>
#include <deque>
#include <map>
#include <vector>

#include "confdim/tree.hpp"

namespace grid_oracle {

using confdim::Address;


// Grid model of a lattice resolution: vertex (m, a, b), parent (m-1, a/k, b/k),
// horizontal edges between present cells whose closed squares touch.
struct GridGraph {
  std::vector<std::array<long, 3>> verts;
  std::map<std::array<long, 3>, int> id;
  std::vector<std::vector<int>> adj;   // both kinds
  std::vector<std::vector<int>> hadj;  // horizontal only
};

inline GridGraph grid_graph(int L, long k, int dim, bool (*present)(long, long, int), bool touching) {
  GridGraph g;
  for (int m = 0; m <= L; ++m) {
    long n = 1;
    for (int i = 0; i < m; ++i) n *= k;
    for (long a = 0; a < n; ++a)
      for (long b = 0; b < (dim == 2 ? n : 1); ++b)
        if (present(a, b, m)) {
          g.id[{m, a, b}] = static_cast<int>(g.verts.size());
          g.verts.push_back({m, a, b});
        }
  }
  g.adj.resize(g.verts.size());
  g.hadj.resize(g.verts.size());
  for (std::size_t v = 0; v < g.verts.size(); ++v) {
    auto [m, a, b] = g.verts[v];
    if (m > 0) {
      int p = g.id.at({m - 1, a / k, b / k});
      g.adj[v].push_back(p);
      g.adj[p].push_back(static_cast<int>(v));
    }
    if (!touching) continue;
    for (long da = -1; da <= 1; ++da)
      for (long db = -1; db <= 1; ++db) {
        if ((da == 0 && db == 0) || (dim == 1 && db != 0)) continue;
        auto it = g.id.find({m, a + da, b + db});
        if (it == g.id.end()) continue;
        g.adj[v].push_back(it->second);
        g.hadj[v].push_back(it->second);
      }
  }
  return g;
}

inline std::vector<int> bfs(const std::vector<std::vector<int>>& adj, int s) {
  std::vector<int> d(adj.size(), -1);
  std::deque<int> q{s};
  d[s] = 0;
  while (!q.empty()) {
    int v = q.front();
    q.pop_front();
    for (int u : adj[v])
      if (d[u] < 0) {
        d[u] = d[v] + 1;
        q.push_back(u);
      }
  }
  return d;
}

// Brute force: every same-level pair, full BFS against horizontal BFS.
inline std::vector<int> brute_minimal(const GridGraph& g, int L) {
  std::vector<int> best(L + 1, 0);
  for (std::size_t v = 0; v < g.verts.size(); ++v) {
    int m = static_cast<int>(g.verts[v][0]);
    if (m > L) continue;
    auto full = bfs(g.adj, static_cast<int>(v)), hz = bfs(g.hadj, static_cast<int>(v));
    for (std::size_t u = 0; u < g.verts.size(); ++u)
      if (u != v && g.verts[u][0] == m && hz[u] > 0 && hz[u] == full[u]) best[m] = std::max(best[m], hz[u]);
  }
  return best;
}

inline bool carpet_present(long a, long b, int m) {
  for (int i = 0; i < m; ++i, a /= 3, b /= 3)
    if (a % 3 == 1 && b % 3 == 1) return false;
  return true;
}
inline bool always(long, long, int) { return true; }

// Carpet digit layout, counter-clockwise from the lower left corner.
inline std::array<long, 2> carpet_offset(int d) {
  static const long off[9][2] = {{0, 0}, {0, 0}, {1, 0}, {2, 0}, {2, 1}, {2, 2}, {1, 2}, {0, 2}, {0, 1}};
  return {off[d][0], off[d][1]};
}

inline std::array<long, 3> carpet_coords(const Address& w) {
  long a = 0, b = 0;
  for (int i = 0; i < w.depth(); ++i) {
    auto o = carpet_offset(w[i]);
    a = 3 * a + o[0];
    b = 3 * b + o[1];
  }
  return {w.depth(), a, b};
}

inline std::array<long, 3> interval_coords(const Address& w) {
  long a = 0;
  for (int i = 0; i < w.depth(); ++i) a = 2 * a + w[i];
  return {w.depth(), a, 0};
}

// Same scan with sources restricted to one representative per orbit of the
// square's symmetry group.  Valid for D4-invariant presence patterns, where
// every symmetry of the grid square is a graph automorphism.
inline std::vector<int> brute_minimal_d4(const GridGraph& g, int L, long k) {
  std::vector<int> best(L + 1, 0);
  for (std::size_t v = 0; v < g.verts.size(); ++v) {
    auto [m, a, b] = g.verts[v];
    if (m > L) continue;
    long n = 1;
    for (int i = 0; i < m; ++i) n *= k;
    std::array<long, 2> me{a, b};
    bool canonical = true;
    for (int s = 0; s < 8 && canonical; ++s) {
      long x = (s & 1) ? n - 1 - a : a, y = (s & 2) ? n - 1 - b : b;
      if (s & 4) std::swap(x, y);
      if (std::array<long, 2>{x, y} < me) canonical = false;
    }
    if (!canonical) continue;
    auto full = bfs(g.adj, static_cast<int>(v)), hz = bfs(g.hadj, static_cast<int>(v));
    for (std::size_t u = 0; u < g.verts.size(); ++u)
      if (u != v && g.verts[u][0] == m && hz[u] > 0 && hz[u] == full[u]) best[m] = std::max(best[m], hz[u]);
  }
  return best;
}

}  // namespace grid_oracle
