#include "confdim/network.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <ostream>
#include <random>

#include "confdim/error.hpp"
#include "confdim/family_io.hpp"

namespace confdim {

std::vector<Address> gamma(const PartitionFamily& family, const Address& w, int M) {
  family.require(w);
  std::set<Address> seen{w};
  std::vector<Address> frontier{w};
  for (int step = 0; step < M && !frontier.empty(); ++step) {
    std::vector<Address> next;
    for (const auto& v : frontier)
      for (auto& u : family.neighbors(v))
        if (seen.insert(u).second) next.push_back(std::move(u));
    frontier.swap(next);
  }
  return {seen.begin(), seen.end()};
}

std::vector<Address> refine(const PartitionFamily& family, const std::vector<Address>& A, int k) {
  std::vector<Address> out;
  for (const auto& a : A) {
    if (a.depth() + k > family.max_depth())
      throw DepthExceeded("refinement of '" + a.str() + "' passes max_depth");
    std::vector<Address> cur{a};
    for (int i = 0; i < k; ++i) {
      std::vector<Address> next;
      for (const auto& c : cur)
        for (auto& d : family.children(c)) next.push_back(std::move(d));
      cur.swap(next);
    }
    out.insert(out.end(), cur.begin(), cur.end());
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::string NetworkVertex::name(int level) const {
  std::string head = std::to_string(level) + ":";
  return cell ? head + address_token(*cell) : head + to_string(*point);
}

std::vector<std::vector<int>> HorizontalNetwork::adjacency() const {
  std::vector<std::vector<int>> adj(vertices.size());
  for (auto [a, b] : edges) {
    adj[a].push_back(b);
    adj[b].push_back(a);
  }
  return adj;
}

void HorizontalNetwork::write_edges(std::ostream& out) const {
  for (auto [a, b] : edges) out << "h " << vertices[a].name(level) << " " << vertices[b].name(level) << "\n";
}

void HorizontalNetwork::write_ownership(std::ostream& out) const {
  for (std::size_t v = 0; v < vertices.size(); ++v) {
    out << vertices[v].name(level);
    for (const auto& w : owners[v]) out << " " << address_token(w);
    out << "\n";
  }
}

ProperSystem ProperSystem::cell_graph(int N) {
  if (N < 1) throw std::invalid_argument("cell graph index N must be positive");
  return {SystemKind::CellGraph, N, 1, 1, 1};
}
ProperSystem ProperSystem::carpet_edges() { return {SystemKind::CarpetEdges, 1, 1, 1, 2}; }
ProperSystem ProperSystem::carpet_corners() { return {SystemKind::CarpetCorners, 1, 5, 1, 1}; }

ProperSystem ProperSystem::parse(const std::string& name, int N) {
  if (name == "cells") return cell_graph(N);
  if (name == "carpet-edges") return carpet_edges();
  if (name == "carpet-corners") return carpet_corners();
  throw ParseError("unknown network system '" + name + "'");
}

std::string ProperSystem::name() const {
  switch (kind) {
    case SystemKind::CellGraph: return "cells";
    case SystemKind::CarpetEdges: return "carpet-edges";
    case SystemKind::CarpetCorners: return "carpet-corners";
  }
  return "?";
}

namespace {

void finish(HorizontalNetwork& net) {
  for (auto& e : net.edges)
    if (e.first > e.second) std::swap(e.first, e.second);
  std::sort(net.edges.begin(), net.edges.end());
  net.edges.erase(std::unique(net.edges.begin(), net.edges.end()), net.edges.end());
  for (std::size_t v = 0; v < net.owners.size(); ++v) {
    auto& o = net.owners[v];
    std::sort(o.begin(), o.end());
    o.erase(std::unique(o.begin(), o.end()), o.end());
    for (const auto& w : o) net.omega[w].push_back(static_cast<int>(v));
  }
}

HorizontalNetwork cell_network(const PartitionFamily& family, int m,
                               const std::function<bool(const Address&, const Address&)>& keep, int N) {
  HorizontalNetwork net;
  net.level = m;
  const auto& cells = family.level(m);
  std::map<Address, int> id;
  for (const auto& w : cells) {
    id[w] = static_cast<int>(net.vertices.size());
    net.vertices.push_back({w, std::nullopt});
    net.owners.push_back({w});
  }
  for (const auto& w : cells) {
    auto near = N == 1 ? family.neighbors(w) : gamma(family, w, N);
    for (const auto& v : near)
      if (v != w && w < v && keep(w, v)) net.edges.push_back({id[w], id[v]});
  }
  finish(net);
  return net;
}

// Carpet corners: lattice coordinates at level m, scaled by 3^m.
HorizontalNetwork corner_network(const PartitionFamily& family, int m) {
  HorizontalNetwork net;
  net.level = m;
  std::map<std::pair<std::int64_t, std::int64_t>, int> id;
  const Rational scale(ipow(3, m));
  auto vertex = [&](std::int64_t a, std::int64_t b) {
    auto [it, fresh] = id.emplace(std::make_pair(a, b), static_cast<int>(net.vertices.size()));
    if (fresh) {
      Rational x(a), y(b);
      x /= scale;
      y /= scale;
      net.vertices.push_back({std::nullopt, Point{{x, y}}});
      net.owners.emplace_back();
    }
    return it->second;
  };
  for (const auto& w : family.level(m)) {
    LatticeBox h = family.hull(w).rescaled(3, m);
    int c[4] = {vertex(h.lo[0], h.lo[1]), vertex(h.hi[0], h.lo[1]), vertex(h.hi[0], h.hi[1]),
                vertex(h.lo[0], h.hi[1])};
    for (int i = 0; i < 4; ++i) {
      net.owners[c[i]].push_back(w);
      net.edges.push_back({c[i], c[(i + 1) % 4]});
    }
  }
  finish(net);
  return net;
}

}  // namespace

HorizontalNetwork build_network(const ProperSystem& system, const PartitionFamily& family, int m) {
  if (m < 0 || m > family.max_depth()) throw DepthExceeded("network level beyond max_depth");
  if (system.kind != SystemKind::CellGraph && family.kind() != FamilyKind::Carpet)
    throw UnsupportedFamily(system.name() + " is defined on the carpet only");
  switch (system.kind) {
    case SystemKind::CellGraph:
      return cell_network(family, m, [](const Address&, const Address&) { return true; }, system.N);
    case SystemKind::CarpetEdges:
      return cell_network(
          family, m,
          [&](const Address& w, const Address& v) {
            auto box = intersect(family.hull(w), family.hull(v), 3);
            if (!box) return false;
            int extent = 0;
            for (int i = 0; i < box->dim; ++i) extent += box->hi[i] > box->lo[i];
            return extent == 1;
          },
          1);
    case SystemKind::CarpetCorners: return corner_network(family, m);
  }
  throw std::logic_error("unreachable");
}

bool SystemReport::ok() const {
  return std::all_of(levels.begin(), levels.end(),
                     [](const LevelCheck& c) { return c.n1 && c.n2 && c.n3 && c.n4 && c.n5; });
}

namespace {

using GammaMap = std::map<Address, std::set<Address>>;

GammaMap gamma_map(const PartitionFamily& family, int m, int M) {
  GammaMap g;
  for (const auto& w : family.level(m)) {
    auto v = gamma(family, w, M);
    g[w] = std::set<Address>(v.begin(), v.end());
  }
  return g;
}

// (N5) for one u: states (vertex, cell) with the vertex in Omega of the cell
// and the cell in Gamma_{L2}(u); returns the reachable states from (x, u).
std::set<std::pair<int, Address>> n5_reach(const HorizontalNetwork& net, const std::vector<std::vector<int>>& adj,
                                           const std::set<Address>& allowed, int x, const Address& u) {
  std::set<std::pair<int, Address>> seen{{x, u}};
  std::deque<std::pair<int, Address>> q{{x, u}};
  while (!q.empty()) {
    auto [v, c] = q.front();
    q.pop_front();
    for (int y : adj[v])
      for (const auto& o : net.owners[y])
        if (allowed.count(o) && seen.insert({y, o}).second) q.push_back({y, o});
  }
  return seen;
}

}  // namespace

SystemReport validate_proper_system(const ProperSystem& system, const PartitionFamily& family, int max_level,
                                    std::size_t samples, std::uint64_t seed) {
  SystemReport report;
  std::mt19937_64 rng(seed);
  for (int m = 0; m <= max_level; ++m) {
    LevelCheck chk;
    chk.level = m;
    auto fail = [&](bool& flag, std::string msg) {
      flag = false;
      if (chk.failures.size() < 20) chk.failures.push_back(std::move(msg));
    };
    auto net = build_network(system, family, m);
    auto adj = net.adjacency();

    for (const auto& v : net.vertices) {
      if (v.cell && (v.cell->depth() != m || !family.contains(*v.cell)))
        fail(chk.n1, "cell vertex " + v.name(m) + " is not in (T)_m");
      if (v.point && !family.point_in_space(*v.point)) fail(chk.n1, "point vertex " + v.name(m) + " lies outside X");
    }
    for (const auto& w : family.level(m))
      if (!net.omega.count(w) || net.omega.at(w).empty()) fail(chk.n2, "Omega of " + address_token(w) + " is empty");

    auto gN = gamma_map(family, m, system.N);
    std::map<std::pair<Address, Address>, int> pair_edges;
    for (auto [a, b] : net.edges) {
      std::set<std::pair<Address, Address>> pairs;
      bool admissible = false;
      for (const auto& u : net.owners[a])
        for (const auto& v : net.owners[b]) {
          pairs.insert(std::minmax(u, v));
          if (gN.at(u).count(v)) admissible = true;
        }
      for (const auto& p : pairs) chk.max_pair_edges = std::max(chk.max_pair_edges, ++pair_edges[p]);
      if (!admissible)
        fail(chk.n4, "edge " + net.vertices[a].name(m) + " - " + net.vertices[b].name(m) + " is not in J^h_N");
    }
    if (chk.max_pair_edges > system.L0)
      fail(chk.n3, "a cell pair carries " + std::to_string(chk.max_pair_edges) + " edges");

    auto g1 = system.L1 == system.N ? gN : gamma_map(family, m, system.L1);
    std::vector<std::pair<Address, Address>> todo;
    for (const auto& [u, near] : g1)
      for (const auto& v : near) todo.push_back({u, v});
    if (samples > 0 && todo.size() > samples) {
      std::shuffle(todo.begin(), todo.end(), rng);
      todo.resize(samples);
      std::sort(todo.begin(), todo.end());
    }
    std::map<Address, std::set<Address>> g2;
    for (std::size_t i = 0; i < todo.size();) {
      const Address u = todo[i].first;
      if (!g2.count(u)) {
        auto v = gamma(family, u, system.L2);
        g2[u] = std::set<Address>(v.begin(), v.end());
      }
      std::map<int, std::set<std::pair<int, Address>>> reach;
      for (int x : net.omega.at(u)) reach[x] = n5_reach(net, adj, g2[u], x, u);
      for (; i < todo.size() && todo[i].first == u; ++i) {
        const Address& v = todo[i].second;
        ++chk.n5_pairs;
        for (const auto& [x, seen] : reach)
          for (int y : net.omega.at(v))
            if (!seen.count({y, v}))
              fail(chk.n5, "no path " + net.vertices[x].name(m) + " -> " + net.vertices[y].name(m) + " for (" +
                               address_token(u) + ", " + address_token(v) + ")");
      }
    }
    report.levels.push_back(std::move(chk));
  }
  return report;
}

GrowthRates growth_rates(const PartitionFamily& family, int N2, const std::vector<int>& depths) {
  GrowthRates out;
  int D = family.max_depth();
  for (int k = 0; k <= D; ++k)
    for (const auto& w : family.level(k)) {
      out.L_star = std::max(out.L_star, static_cast<int>(gamma(family, w, 1).size()));
      if (k < D) out.N_star = std::max(out.N_star, static_cast<int>(family.children(w).size()));
    }
  for (int n : depths) {
    if (n < 1 || n > D) throw DepthExceeded("growth depth " + std::to_string(n) + " outside 1..max_depth");
    std::size_t best_gamma = 0, best_single = 0;
    for (int k = 0; k + n <= D; ++k) {
      std::map<Address, std::size_t> below;
      for (const auto& c : family.level(k + n)) ++below[c.prefix(k)];
      for (const auto& w : family.level(k)) {
        best_single = std::max(best_single, below[w]);
        std::size_t total = 0;
        for (const auto& v : gamma(family, w, N2)) total += below[v];
        best_gamma = std::max(best_gamma, total);
      }
    }
    out.n.push_back(n);
    out.gamma_counts.push_back(best_gamma);
    out.single_counts.push_back(best_single);
    out.gamma_rates.push_back(std::pow(static_cast<double>(best_gamma), 1.0 / n));
    out.single_rates.push_back(std::pow(static_cast<double>(best_single), 1.0 / n));
  }
  return out;
}

std::string to_string(BalancedVerdict v) { return v == BalancedVerdict::Balanced ? "balanced" : "violated"; }

BalancedReport balanced_check_bounded(const PartitionFamily& family, const CellFunction& phi, int M,
                                      const Address& w, int max_path_len) {
  if (w.depth() + 1 > family.max_depth()) throw DepthExceeded("balanced check needs the children of w");
  if (max_path_len < 1) throw PathBudgetExceeded("path budget must be at least one cell");
  auto gw = gamma(family, w, M);
  std::set<Address> top(gw.begin(), gw.end());
  std::vector<Address> region = refine(family, gw, 1);  // S(Gamma_M(w))
  std::map<Address, int> id;
  for (std::size_t i = 0; i < region.size(); ++i) id[region[i]] = static_cast<int>(i);
  const int n = static_cast<int>(region.size());

  std::map<Address, Rational> memo;
  auto value = [&](const Address& a) -> const Rational& {
    auto it = memo.find(a);
    if (it == memo.end()) {
      Rational v = phi(a);
      if (v <= 0) throw InadmissibleInput("phi must be positive, got " + to_string(v) + " at '" + a.str() + "'");
      it = memo.emplace(a, v).first;
    }
    return it->second;
  };

  std::vector<std::vector<int>> next(n);
  std::vector<char> entry(n, 0), exit(n, 0);
  for (int i = 0; i < n; ++i) {
    for (const auto& u : gamma(family, region[i], M)) {
      auto it = id.find(u);
      if (it == id.end()) exit[i] = 1;  // a step leaving S(Gamma_M(w))
      else next[i].push_back(it->second);
      if (parent(u) == w) entry[i] = 1;
    }
  }

  BalancedReport rep;
  // Layered relaxation: cost[k][i] is the least sum over paths of k+1 cells.
  std::vector<std::vector<std::optional<Rational>>> cost(1, std::vector<std::optional<Rational>>(n));
  std::vector<std::vector<int>> pred(1, std::vector<int>(n, -1));
  for (int i = 0; i < n; ++i) {
    rep.entry_cells += entry[i];
    rep.exit_cells += exit[i];
    if (entry[i]) cost[0][i] = value(region[i]);
  }
  bool moving = true;
  for (int k = 1; k < max_path_len && moving; ++k) {
    cost.push_back(cost.back());
    pred.push_back(std::vector<int>(n, -2));  // -2: carried from the previous layer
    moving = false;
    for (int i = 0; i < n; ++i) {
      if (!cost[k - 1][i]) continue;
      for (int j : next[i]) {
        Rational c = *cost[k - 1][i] + value(region[j]);
        if (!cost[k][j] || c < *cost[k][j]) {
          cost[k][j] = c;
          pred[k][j] = i;
          moving = true;
        }
      }
    }
  }

  const auto& last = cost.back();
  std::optional<Rational> worst;
  int worst_at = -1;
  for (int i = 0; i < n; ++i) {
    if (!exit[i] || !last[i]) continue;
    Rational slack = *last[i] - value(parent(region[i]));
    if (slack < 0 && (!worst || slack < *worst)) {
      worst = slack;
      worst_at = i;
    }
  }
  if (worst_at >= 0) {
    rep.verdict = BalancedVerdict::Violated;
    rep.witness_sum = *last[worst_at];
    rep.threshold = value(parent(region[worst_at]));
    int i = worst_at;
    for (int k = static_cast<int>(cost.size()) - 1; k >= 0;) {
      int p = pred[k][i];
      if (p == -2) {
        --k;
        continue;
      }
      rep.witness.push_back(region[i]);
      if (p < 0) break;
      i = p;
      --k;
    }
    std::reverse(rep.witness.begin(), rep.witness.end());
    return rep;
  }
  if (moving && max_path_len < n)
    throw PathBudgetExceeded("balanced check still improving at " + std::to_string(max_path_len) +
                             " cells; verdict inconclusive-pass");
  return rep;
}

}  // namespace confdim
