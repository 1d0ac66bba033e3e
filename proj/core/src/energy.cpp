#include "confdim/energy.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <string>

#include "confdim/error.hpp"

namespace confdim {

namespace {

using SpMat = Eigen::SparseMatrix<double>;
using Vec = Eigen::VectorXd;
constexpr double kInf = std::numeric_limits<double>::infinity();

void check_p(double p) {
  if (!(p > 1.0) || !(p <= 20.0))
    throw InvalidP("p must lie in (1, 20], got " + std::to_string(p));
}

// 0 free, 1 in U1, 2 in U2.
std::vector<int> roles(int n, const std::vector<int>& U1, const std::vector<int>& U2) {
  std::vector<int> role(n, 0);
  for (int v : U1) {
    if (v < 0 || v >= n) throw InadmissibleInput("U1 vertex out of range");
    role[v] = 1;
  }
  for (int v : U2) {
    if (v < 0 || v >= n) throw InadmissibleInput("U2 vertex out of range");
    if (role[v] == 1) throw InadmissibleInput("U1 and U2 intersect");
    role[v] = 2;
  }
  return role;
}

std::vector<int> components(const std::vector<std::vector<int>>& adj) {
  const int n = static_cast<int>(adj.size());
  std::vector<int> comp(n, -1);
  int c = 0;
  for (int s = 0; s < n; ++s) {
    if (comp[s] >= 0) continue;
    std::vector<int> stack{s};
    comp[s] = c;
    while (!stack.empty()) {
      int x = stack.back();
      stack.pop_back();
      for (int y : adj[x])
        if (comp[y] < 0) comp[y] = c, stack.push_back(y);
    }
    ++c;
  }
  return comp;
}

// Factorization with a diagonal shift that grows until LDLT succeeds.
class Factor {
 public:
  bool solve(SpMat& H, const Vec& rhs, Vec& out) {
    if (!analyzed_) {
      ldlt_.analyzePattern(H);
      analyzed_ = true;
    }
    double dmax = 0;
    for (int i = 0; i < H.rows(); ++i) dmax = std::max(dmax, H.coeff(i, i));
    double shift = 1e-14 * std::max(dmax, 1e-300);
    for (int attempt = 0; attempt < 8; ++attempt) {
      for (int i = 0; i < H.rows(); ++i) H.coeffRef(i, i) += shift;
      ldlt_.factorize(H);
      if (ldlt_.info() == Eigen::Success) {
        out = ldlt_.solve(rhs);
        if (out.allFinite()) return true;
      }
      shift *= 100;
    }
    return false;
  }

 private:
  Eigen::SimplicialLDLT<SpMat> ldlt_;
  bool analyzed_ = false;
};

// ---------------------------------------------------------------- energy

struct EnergyProblem {
  std::vector<int> var;         // vertex -> variable or -1
  std::vector<double> fixed;    // boundary values for non-variables
  std::vector<std::pair<int, int>> edges;
  int nvar = 0;
};

double value_of(const EnergyProblem& P, const Vec& x, int v) {
  return P.var[v] >= 0 ? x[P.var[v]] : P.fixed[v];
}

double smoothed(const EnergyProblem& P, const Vec& x, double p, double eps) {
  double s = 0;
  for (auto [a, b] : P.edges) {
    double d = value_of(P, x, a) - value_of(P, x, b);
    s += std::pow(d * d + eps * eps, p / 2);
  }
  return s;
}

// Gradient and Hessian of the smoothed functional.  The sparsity pattern is
// fixed by the edge list so the symbolic factorization is reused.
void derivatives(const EnergyProblem& P, const Vec& x, double p, double eps, Vec& g, SpMat& H) {
  g.setZero(P.nvar);
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(4 * P.edges.size() + P.nvar);
  for (int i = 0; i < P.nvar; ++i) trip.emplace_back(i, i, 0.0);
  for (auto [a, b] : P.edges) {
    double d = value_of(P, x, a) - value_of(P, x, b);
    double d1 = 2 * d, d2 = 2;
    if (p != 2.0) {
      double r = d * d + eps * eps;
      d1 = p * d * std::pow(r, p / 2 - 1);
      d2 = p * std::pow(r, p / 2 - 2) * ((p - 1) * d * d + eps * eps);
    }
    int ia = P.var[a], ib = P.var[b];
    if (ia >= 0) g[ia] += d1, trip.emplace_back(ia, ia, d2);
    if (ib >= 0) g[ib] -= d1, trip.emplace_back(ib, ib, d2);
    if (ia >= 0 && ib >= 0) trip.emplace_back(ia, ib, -d2), trip.emplace_back(ib, ia, -d2);
  }
  H.resize(P.nvar, P.nvar);
  H.setFromTriplets(trip.begin(), trip.end());
}

}  // namespace

std::vector<std::vector<int>> Graph::adjacency() const {
  std::vector<std::vector<int>> adj(n);
  for (auto [a, b] : edges) {
    if (a < 0 || b < 0 || a >= n || b >= n) throw InadmissibleInput("edge endpoint out of range");
    adj[a].push_back(b);
    adj[b].push_back(a);
  }
  return adj;
}

int Graph::max_degree() const {
  int L = 0;
  for (const auto& nb : adjacency()) L = std::max<int>(L, static_cast<int>(nb.size()));
  return L;
}

double holder_constant(double p, double n) { return std::max(std::pow(n, p - 1), 1.0); }

double energy_eval(const std::vector<double>& f, const Graph& g, double p) {
  double s = 0;
  for (auto [a, b] : g.edges) s += std::pow(std::fabs(f[a] - f[b]), p);
  return s;
}

EnergyResult solve_energy(const BoundaryValueProblem& bvp, const EnergyOptions& opt) {
  check_p(bvp.p);
  const Graph& G = bvp.graph;
  const double p = bvp.p;
  auto role = roles(G.n, bvp.U1, bvp.U2);
  auto adj = G.adjacency();
  auto comp = components(adj);
  int ncomp = G.n ? *std::max_element(comp.begin(), comp.end()) + 1 : 0;
  std::vector<char> has1(ncomp, 0), has2(ncomp, 0);
  for (int v = 0; v < G.n; ++v) {
    if (role[v] == 1) has1[comp[v]] = 1;
    if (role[v] == 2) has2[comp[v]] = 1;
  }

  EnergyResult res;
  res.minimizer.assign(G.n, 0.0);
  EnergyProblem P;
  P.var.assign(G.n, -1);
  P.fixed.assign(G.n, 0.0);
  bool any = false;
  for (int v = 0; v < G.n; ++v) {
    int c = comp[v];
    if (role[v] == 1) P.fixed[v] = 1;
    else if (role[v] == 2) P.fixed[v] = 0;
    else if (has1[c] && has2[c]) P.var[v] = P.nvar++;
    else P.fixed[v] = has1[c] ? 1.0 : 0.0;
    res.minimizer[v] = P.fixed[v];
    if (has1[c] && has2[c]) any = true;
  }
  if (!any) {
    res.exact_zero = true;
    return res;
  }
  for (auto [a, b] : G.edges)
    if (has1[comp[a]] && has2[comp[a]] && (P.var[a] >= 0 || P.var[b] >= 0 || P.fixed[a] != P.fixed[b]))
      P.edges.emplace_back(a, b);

  Vec x(P.nvar);
  Factor fac;
  Vec g, dx;
  SpMat H;
  // The quadratic problem is solved exactly by one Newton step from anywhere.
  auto quadratic_solve = [&]() {
    x.setConstant(0.5);
    derivatives(P, x, 2.0, 0.0, g, H);
    if (!fac.solve(H, -g, dx)) throw InadmissibleInput("singular energy system");
    x += dx;
    ++res.newton_steps;
  };
  if (opt.warm && static_cast<int>(opt.warm->size()) == G.n) {
    for (int v = 0; v < G.n; ++v)
      if (P.var[v] >= 0) x[P.var[v]] = std::clamp((*opt.warm)[v], 0.0, 1.0);
  } else {
    quadratic_solve();
  }

  double decrement = 0;
  if (p == 2.0) {
    if (opt.warm) quadratic_solve();
    derivatives(P, x, 2.0, 0.0, g, H);
    double scale = std::max(smoothed(P, x, 2.0, 0.0), 1e-300);
    decrement = g.cwiseAbs().maxCoeff() / scale;
  } else {
    for (std::size_t s = 0; s < opt.eps.size(); ++s) {
      double eps = opt.eps[s];
      bool last = s + 1 == opt.eps.size();
      double stage_tol = last ? opt.tol : std::max(opt.tol, 1e-6);
      double phi = smoothed(P, x, p, eps);
      int it = 0;
      for (; it < opt.max_newton; ++it) {
        derivatives(P, x, p, eps, g, H);
        if (!fac.solve(H, -g, dx)) break;
        double lam2 = -g.dot(dx);
        decrement = lam2 / std::max(phi, 1e-300);
        if (lam2 <= 0 || decrement <= stage_tol) break;
        double step = 1.0;
        Vec trial;
        double phit = phi;
        for (int ls = 0; ls < 60; ++ls) {
          trial = x + step * dx;
          phit = smoothed(P, trial, p, eps);
          if (phit <= phi - 1e-4 * step * lam2) break;
          step *= 0.5;
        }
        ++res.newton_steps;
        if (!(phit < phi)) break;  // no further progress at double precision
        x = trial;
        phi = phit;
      }
      if (last && it == opt.max_newton) res.converged = false;
    }
  }
  for (int v = 0; v < G.n; ++v)
    if (P.var[v] >= 0) res.minimizer[v] = std::clamp(x[P.var[v]], 0.0, 1.0);
  res.value = energy_eval(res.minimizer, G, p);
  res.residual = std::max(decrement, 0.0);
  return res;
}

// ---------------------------------------------------------------- modulus

namespace {

// minimize t * sum_{i < nobj} x_i^p - sum_k log(a_k . x - b_k)
struct Barrier {
  struct Row {
    std::vector<std::pair<int, double>> a;
    double b = 0;
  };
  int n = 0, nobj = 0;
  double p = 2;
  std::vector<Row> rows;

  double slack(const Row& r, const Vec& x) const {
    double s = -r.b;
    for (auto [i, c] : r.a) s += c * x[i];
    return s;
  }
  double objective(const Vec& x) const {
    double s = 0;
    for (int i = 0; i < nobj; ++i) s += std::pow(x[i], p);
    return s;
  }
  // +inf outside the strict interior.
  double merit(const Vec& x, double t) const {
    double s = t * objective(x);
    for (const auto& r : rows) {
      double sl = slack(r, x);
      if (!(sl > 0)) return kInf;
      s -= std::log(sl);
    }
    return s;
  }

  bool solve(Vec& x, double rel_gap, int& newton) const {
    const double m = static_cast<double>(rows.size());
    double t = m / std::max(objective(x), 1e-12);
    Factor fac;
    Vec g(n), dx;
    SpMat H(n, n);
    std::vector<Eigen::Triplet<double>> trip;
    for (int outer = 0; outer < 200; ++outer) {
      double phi = merit(x, t);
      for (int it = 0; it < 200; ++it) {
        g.setZero();
        trip.clear();
        for (int i = 0; i < n; ++i) trip.emplace_back(i, i, 0.0);
        for (int i = 0; i < nobj; ++i) {
          g[i] += t * p * std::pow(x[i], p - 1);
          trip.emplace_back(i, i, t * p * (p - 1) * std::pow(x[i], p - 2));
        }
        for (const auto& r : rows) {
          double sl = slack(r, x);
          for (auto [i, c] : r.a) g[i] -= c / sl;
          double w = 1.0 / (sl * sl);
          for (auto [i, ci] : r.a)
            for (auto [j, cj] : r.a) trip.emplace_back(i, j, w * ci * cj);
        }
        H.setFromTriplets(trip.begin(), trip.end());
        if (!fac.solve(H, -g, dx)) return false;
        double lam2 = -g.dot(dx);
        if (!(lam2 > 1e-10)) break;
        double step = 1.0, phit = kInf;
        Vec trial;
        for (int ls = 0; ls < 80; ++ls) {
          trial = x + step * dx;
          phit = merit(trial, t);
          if (phit <= phi - 0.01 * step * lam2) break;
          step *= 0.5;
        }
        ++newton;
        if (!(phit < phi)) break;
        x = trial;
        phi = phit;
      }
      if (m / t <= rel_gap * std::max(objective(x), 1e-300)) return true;
      t *= 8;
    }
    return false;
  }
};

struct FreeView {
  std::vector<int> role;
  std::vector<std::vector<int>> adj;
  std::vector<char> entry, exit;
  bool direct = false;
};

FreeView free_view(const Graph& g, const std::vector<int>& U1, const std::vector<int>& U2) {
  FreeView F;
  F.role = roles(g.n, U1, U2);
  F.adj = g.adjacency();
  F.entry.assign(g.n, 0);
  F.exit.assign(g.n, 0);
  for (int v = 0; v < g.n; ++v)
    for (int y : F.adj[v]) {
      if (F.role[v] == 1 && F.role[y] == 2) F.direct = true;
      if (F.role[v] == 0 && F.role[y] == 1) F.entry[v] = 1;
      if (F.role[v] == 0 && F.role[y] == 2) F.exit[v] = 1;
    }
  return F;
}

// Node-weighted Dijkstra from every entry; dist counts both endpoints.
void curve_dijkstra(const FreeView& F, const std::vector<double>& f, std::vector<double>& dist,
                    std::vector<int>& pred) {
  const int n = static_cast<int>(F.role.size());
  dist.assign(n, kInf);
  pred.assign(n, -1);
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  for (int v = 0; v < n; ++v)
    if (F.entry[v]) dist[v] = f[v], pq.emplace(dist[v], v);
  while (!pq.empty()) {
    auto [d, x] = pq.top();
    pq.pop();
    if (d > dist[x]) continue;
    for (int y : F.adj[x]) {
      if (F.role[y] != 0) continue;
      double nd = d + f[y];
      if (nd < dist[y]) dist[y] = nd, pred[y] = x, pq.emplace(nd, y);
    }
  }
}

std::vector<int> trace(const std::vector<int>& pred, int v) {
  std::vector<int> c;
  for (; v >= 0; v = pred[v]) c.push_back(v);
  std::reverse(c.begin(), c.end());
  return c;
}

}  // namespace

double min_curve_sum(const Graph& g, const std::vector<int>& U1, const std::vector<int>& U2,
                     const std::vector<double>& f, std::vector<int>* curve) {
  auto F = free_view(g, U1, U2);
  if (curve) curve->clear();
  if (F.direct) return 0.0;
  std::vector<double> dist;
  std::vector<int> pred;
  curve_dijkstra(F, f, dist, pred);
  double best = kInf;
  int arg = -1;
  for (int v = 0; v < g.n; ++v)
    if (F.exit[v] && dist[v] < best) best = dist[v], arg = v;
  if (curve && arg >= 0) *curve = trace(pred, arg);
  return best;
}

ModulusResult solve_modulus(const Graph& g, const std::vector<int>& U1, const std::vector<int>& U2, double p,
                            const ModulusOptions& opt) {
  check_p(p);
  auto F = free_view(g, U1, U2);
  ModulusResult res;
  res.density.assign(g.n, 0.0);
  if (F.direct) {
    res.infinite = true;
    res.value = kInf;
    return res;
  }
  // Variables: free vertices lying on some entry-to-exit path of free vertices.
  std::vector<std::vector<int>> fadj(g.n);
  for (int v = 0; v < g.n; ++v)
    if (F.role[v] == 0)
      for (int y : F.adj[v])
        if (F.role[y] == 0) fadj[v].push_back(y);
  auto comp = components(fadj);
  int nc = g.n ? *std::max_element(comp.begin(), comp.end()) + 1 : 0;
  std::vector<char> ce(nc, 0), cx(nc, 0);
  for (int v = 0; v < g.n; ++v) {
    if (F.role[v] != 0) continue;
    if (F.entry[v]) ce[comp[v]] = 1;
    if (F.exit[v]) cx[comp[v]] = 1;
  }
  std::vector<int> var(g.n, -1), verts;
  for (int v = 0; v < g.n; ++v)
    if (F.role[v] == 0 && ce[comp[v]] && cx[comp[v]]) var[v] = static_cast<int>(verts.size()), verts.push_back(v);
  const int nf = static_cast<int>(verts.size());
  if (nf == 0) {
    res.no_curve = true;
    return res;
  }

  ModulusMethod method = opt.method;
  if (method == ModulusMethod::Auto)
    method = static_cast<std::size_t>(nf) <= opt.auto_limit ? ModulusMethod::ConstraintGeneration
                                                            : ModulusMethod::Potential;
  res.used = method;
  int newton = 0;

  if (method == ModulusMethod::ConstraintGeneration) {
    std::vector<std::vector<int>> working;
    std::vector<double> f(g.n, 0.0);
    for (int round = 0;; ++round) {
      std::vector<double> dist;
      std::vector<int> pred;
      curve_dijkstra(F, f, dist, pred);
      bool added = false;
      for (int v = 0; v < g.n; ++v) {
        if (!F.exit[v] || !(dist[v] < 1 - opt.tol)) continue;
        auto c = trace(pred, v);
        if (std::find(working.begin(), working.end(), c) == working.end()) working.push_back(c), added = true;
      }
      if (!added) break;
      if (round >= opt.max_rounds) {
        res.converged = false;
        break;
      }
      Barrier B;
      B.n = B.nobj = nf;
      B.p = p;
      for (int i = 0; i < nf; ++i) B.rows.push_back({{{i, 1.0}}, 0.0});
      for (const auto& c : working) {
        Barrier::Row r;
        r.b = 1.0;
        for (int v : c) r.a.emplace_back(var[v], 1.0);
        B.rows.push_back(std::move(r));
      }
      Vec x = Vec::Constant(nf, 2.0);
      if (!B.solve(x, 1e-12, newton)) res.converged = false;
      for (int i = 0; i < nf; ++i) f[verts[i]] = std::max(x[i], 0.0);
    }
    res.density = f;
    res.active_curves = working;
  } else {
    // f_y >= u_y - u_x along free edges, f_y >= u_y at entries, u = 1 at exits,
    // 0 <= u <= 1.  Then u is below the least curve sum from the entries, so
    // every curve sum is at least 1; conversely min(sum, 1) is feasible.
    std::vector<int> uvar(g.n, -1);
    int n = nf;
    for (int v : verts)
      if (!F.exit[v]) uvar[v] = n++;
    Barrier B;
    B.n = n;
    B.nobj = nf;
    B.p = p;
    auto u_term = [&](Barrier::Row& r, int v, double c) {
      if (uvar[v] >= 0) r.a.emplace_back(uvar[v], c);
      else r.b -= c;  // u_v = 1
    };
    for (int v : verts) {
      B.rows.push_back({{{var[v], 1.0}}, 0.0});
      if (uvar[v] >= 0) {
        B.rows.push_back({{{uvar[v], 1.0}}, 0.0});
        B.rows.push_back({{{uvar[v], -1.0}}, -1.0});
      }
      if (F.entry[v]) {
        Barrier::Row r{{{var[v], 1.0}}, 0.0};
        u_term(r, v, -1.0);
        B.rows.push_back(std::move(r));
      }
      for (int x : fadj[v]) {
        Barrier::Row r{{{var[v], 1.0}}, 0.0};
        u_term(r, v, -1.0);
        u_term(r, x, 1.0);
        B.rows.push_back(std::move(r));
      }
    }
    Vec x = Vec::Constant(n, 0.5);
    for (int i = 0; i < nf; ++i) x[i] = 2.0;
    if (!B.solve(x, 1e-12, newton)) res.converged = false;
    for (int i = 0; i < nf; ++i) res.density[verts[i]] = std::max(x[i], 0.0);
  }

  std::vector<int> worst;
  double s = min_curve_sum(g, U1, U2, res.density, &worst);
  res.residual = std::max(0.0, 1.0 - s);
  if (s < 1.0 && s > 0.0)
    for (double& d : res.density) d /= s;  // restore exact admissibility
  if (method == ModulusMethod::Potential && !worst.empty()) res.active_curves = {worst};
  double val = 0;
  for (double d : res.density) val += std::pow(d, p);
  res.value = val;
  return res;
}

std::vector<double> transfer_F(const std::vector<double>& f, const Graph& g, const std::vector<int>& U1,
                               const std::vector<int>& U2, double tol) {
  if (static_cast<int>(f.size()) != g.n) throw InadmissibleInput("density size mismatch");
  for (double v : f)
    if (!(v >= 0)) throw InadmissibleInput("density must be nonnegative");
  if (min_curve_sum(g, U1, U2, f) < 1 - tol) throw InadmissibleInput("density is not admissible");
  auto role = roles(g.n, U1, U2);
  auto adj = g.adjacency();
  std::vector<double> F(g.n, kInf);
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  for (int v = 0; v < g.n; ++v)
    if (role[v] == 2) F[v] = 0, pq.emplace(0.0, v);
  while (!pq.empty()) {
    auto [d, x] = pq.top();
    pq.pop();
    if (d > F[x]) continue;
    for (int y : adj[x])
      if (d + f[y] < F[y]) F[y] = d + f[y], pq.emplace(F[y], y);
  }
  for (double& v : F)
    if (v == kInf) v = 1.0;  // component without U2
  return F;
}

std::vector<double> transfer_G(const std::vector<double>& gv, const Graph& graph, const std::vector<int>& U1,
                               const std::vector<int>& U2, double tol) {
  if (static_cast<int>(gv.size()) != graph.n) throw InadmissibleInput("function size mismatch");
  auto role = roles(graph.n, U1, U2);
  for (int v = 0; v < graph.n; ++v) {
    if (!(gv[v] >= -tol)) throw InadmissibleInput("energy function must be nonnegative");
    if (role[v] == 1 && gv[v] < 1 - tol) throw InadmissibleInput("energy function below 1 on U1");
    if (role[v] == 2 && std::fabs(gv[v]) > tol) throw InadmissibleInput("energy function nonzero on U2");
  }
  std::vector<double> G(graph.n, 0.0);
  for (auto [a, b] : graph.edges) {
    double d = std::fabs(gv[a] - gv[b]);
    G[a] += d;
    G[b] += d;
  }
  return G;
}

}  // namespace confdim
