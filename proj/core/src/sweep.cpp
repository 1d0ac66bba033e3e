#include "confdim/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <map>
#include <ostream>
#include <stdexcept>
#include <thread>

#include "confdim/error.hpp"
#include "confdim/rational.hpp"
#include "json.hpp"

namespace confdim {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool member(const std::vector<Address>& sorted, const Address& a) {
  return std::binary_search(sorted.begin(), sorted.end(), a);
}

using Offset = std::array<int, 2>;

// Symmetries acting on window offsets; the identity comes first.
std::vector<Offset (*)(Offset)> symmetry_group(const PartitionFamily& f) {
  switch (f.kind()) {
    case FamilyKind::Carpet:
    case FamilyKind::SquareFull:
      return {[](Offset o) { return o; },
              [](Offset o) { return Offset{-o[1], o[0]}; },
              [](Offset o) { return Offset{-o[0], -o[1]}; },
              [](Offset o) { return Offset{o[1], -o[0]}; },
              [](Offset o) { return Offset{-o[0], o[1]}; },
              [](Offset o) { return Offset{o[0], -o[1]}; },
              [](Offset o) { return Offset{o[1], o[0]}; },
              [](Offset o) { return Offset{-o[1], -o[0]}; }};
    case FamilyKind::IntervalBinary:
    case FamilyKind::CantorTernary:
      return {[](Offset o) { return o; }, [](Offset o) { return Offset{-o[0], o[1]}; }};
    default:
      return {};
  }
}

std::string pattern_key(const PartitionFamily& f, const Address& w, int radius,
                        const std::vector<Offset (*)(Offset)>& group) {
  const int dim = f.dim();
  auto lo = f.hull(w).lo;
  const int R = radius, side = 2 * R + 1;
  std::vector<char> present(dim == 2 ? side * side : side, 0);
  auto slot = [&](Offset o) { return dim == 2 ? (o[1] + R) * side + (o[0] + R) : o[0] + R; };
  for (int dy = (dim == 2 ? -R : 0); dy <= (dim == 2 ? R : 0); ++dy)
    for (int dx = -R; dx <= R; ++dx) {
      std::array<std::int64_t, 3> idx{lo[0] + dx, dim == 2 ? lo[1] + dy : 0, 0};
      present[slot({dx, dy})] = f.address_at(w.depth(), idx).has_value();
    }
  std::string best;
  for (auto g : group) {
    std::string key(present.size(), '0');
    for (int dy = (dim == 2 ? -R : 0); dy <= (dim == 2 ? R : 0); ++dy)
      for (int dx = -R; dx <= R; ++dx)
        key[slot(g({dx, dy}))] = present[slot({dx, dy})] ? '1' : '0';
    if (best.empty() || key < best) best = key;
  }
  return best;
}

}  // namespace

LocalProblem local_problem(const HorizontalNetwork& net, const PartitionFamily& family, const Address& w, int N1,
                           int N2, int k, const std::vector<std::vector<int>>* adjacency) {
  if (net.level != w.depth() + k) throw std::invalid_argument("network level does not match |w| + k");
  auto inner = refine(family, gamma(family, w, N2), k);
  auto core = refine(family, gamma(family, w, N1), k);
  std::vector<int> local(net.vertices.size(), -1);
  LocalProblem P;
  auto add = [&](int x) {
    if (local[x] < 0) local[x] = static_cast<int>(P.global.size()), P.global.push_back(x);
  };
  for (const auto& v : inner) {
    auto it = net.omega.find(v);
    if (it != net.omega.end())
      for (int x : it->second) add(x);
  }
  const std::size_t n_inner = P.global.size();
  std::vector<char> role;  // 0 free, 1 U1, 2 U2
  role.assign(n_inner, 0);
  for (std::size_t i = 0; i < n_inner; ++i) {
    int x = P.global[i];
    bool in1 = false, out = false;
    for (const auto& o : net.owners[x]) {
      if (member(core, o)) in1 = true;
      if (!member(inner, o)) out = true;
    }
    role[i] = out ? 2 : in1 ? 1 : 0;
  }
  std::vector<std::vector<int>> own;
  if (!adjacency) own = net.adjacency(), adjacency = &own;
  const auto& adj = *adjacency;
  for (std::size_t i = 0; i < n_inner; ++i)
    for (int y : adj[P.global[i]]) add(y);
  role.resize(P.global.size(), 2);
  for (auto [a, b] : net.edges) {
    int la = local[a], lb = local[b];
    if (la < 0 || lb < 0) continue;
    if (role[la] == 2 && role[lb] == 2) continue;
    P.graph.edges.emplace_back(std::min(la, lb), std::max(la, lb));
  }
  std::sort(P.graph.edges.begin(), P.graph.edges.end());
  P.graph.n = static_cast<int>(P.global.size());
  for (int i = 0; i < P.graph.n; ++i) {
    if (role[i] == 1) P.U1.push_back(i);
    if (role[i] == 2) P.U2.push_back(i);
  }
  return P;
}

std::string to_string(WitnessPolicy p) { return p == WitnessPolicy::AllAtLevel ? "all" : "symmetry"; }

WitnessPolicy parse_witness_policy(const std::string& s) {
  if (s == "all") return WitnessPolicy::AllAtLevel;
  if (s == "symmetry") return WitnessPolicy::SymmetryReduced;
  throw std::invalid_argument("unknown witness policy '" + s + "' (all, symmetry)");
}

std::vector<WitnessClass> witness_classes(const PartitionFamily& family, int level, int radius,
                                          WitnessPolicy policy) {
  const auto& cells = family.level(level);
  std::vector<WitnessClass> out;
  auto group = symmetry_group(family);
  if (policy == WitnessPolicy::AllAtLevel || group.empty() || !family.self_similar()) {
    for (const auto& w : cells) out.push_back({w, {w}});
    return out;
  }
  std::map<std::string, std::vector<Address>> by_key;
  for (const auto& w : cells) by_key[pattern_key(family, w, radius, group)].push_back(w);
  for (auto& [key, members] : by_key) {
    std::sort(members.begin(), members.end());
    out.push_back({members.front(), members});
  }
  std::sort(out.begin(), out.end(),
            [](const WitnessClass& a, const WitnessClass& b) { return a.representative < b.representative; });
  return out;
}

unsigned resolve_threads(unsigned requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("CONFDIM_THREADS")) {
    char* end = nullptr;
    long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

EnergySweep run_sweep(const PartitionFamily& family, const SweepConfig& cfg) {
  if (cfg.N1 < 0 || cfg.N2 <= cfg.N1) throw std::invalid_argument("sweep needs N2 > N1 >= 0");
  if (cfg.p_grid.empty() || cfg.k_list.empty()) throw std::invalid_argument("empty p grid or depth list");
  if (!cfg.energy && !cfg.modulus) throw std::invalid_argument("sweep computes neither energy nor modulus");
  for (double p : cfg.p_grid)
    if (!(p > 1.0 && p <= 20.0)) throw InvalidP("p must lie in (1, 20], got " + fmt_double(p));
  for (int k : cfg.k_list) {
    if (k < 0) throw std::invalid_argument("negative depth in k list");
    if (cfg.level + k > family.max_depth())
      throw DepthExceeded("level " + std::to_string(cfg.level + k) + " beyond max depth " +
                          std::to_string(family.max_depth()));
  }

  EnergySweep S;
  S.system = cfg.system;
  S.family = family.label();
  S.N1 = cfg.N1;
  S.N2 = cfg.N2;
  S.N = cfg.system.N;
  S.level = cfg.level;
  S.grid = cfg.p_grid;
  S.depths = cfg.k_list;
  S.has_energy = cfg.energy;
  S.has_modulus = cfg.modulus;

  auto classes = witness_classes(family, cfg.level, cfg.N2 + cfg.system.N + 1, cfg.policy);
  // Warm starts run through the grid in increasing p.
  std::vector<std::size_t> porder(cfg.p_grid.size());
  for (std::size_t i = 0; i < porder.size(); ++i) porder[i] = i;
  std::stable_sort(porder.begin(), porder.end(),
                   [&](std::size_t a, std::size_t b) { return cfg.p_grid[a] < cfg.p_grid[b]; });

  const std::size_t nc = classes.size(), np = cfg.p_grid.size();
  std::vector<WitnessValue> results(cfg.k_list.size() * nc * np);
  auto slot = [&](std::size_t ki, std::size_t ci, std::size_t pi) { return (ki * nc + ci) * np + pi; };
  const unsigned threads = resolve_threads(cfg.threads);

  for (std::size_t ki = 0; ki < cfg.k_list.size(); ++ki) {
    const int k = cfg.k_list[ki];
    const auto net = build_network(cfg.system, family, cfg.level + k);
    const auto adj = net.adjacency();
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
      for (std::size_t ci; (ci = next.fetch_add(1)) < nc;) {
        const auto& cls = classes[ci];
        auto P = local_problem(net, family, cls.representative, cfg.N1, cfg.N2, k, &adj);
        int L = P.graph.max_degree();
        std::vector<double> warm;
        for (std::size_t pi : porder) {
          WitnessValue& r = results[slot(ki, ci, pi)];
          r.p = cfg.p_grid[pi];
          r.k = k;
          r.w = cls.representative;
          r.multiplicity = cls.members.size();
          r.L = L;
          r.vertices = static_cast<std::size_t>(P.graph.n);
          r.edges = P.graph.edges.size();
          r.E = r.M = kNaN;
          try {
            if (cfg.energy) {
              EnergyOptions eo = cfg.energy_options;
              if (!warm.empty()) eo.warm = &warm;
              auto er = solve_energy({P.graph, P.U1, P.U2, r.p}, eo);
              r.E = er.value;
              r.E_residual = er.residual;
              r.converged = r.converged && er.converged;
              warm = er.minimizer;
              if (cfg.keep_minimizers) r.minimizer = er.minimizer;
            }
            if (cfg.modulus) {
              auto mr = solve_modulus(P.graph, P.U1, P.U2, r.p, cfg.modulus_options);
              r.M = mr.value;
              r.M_residual = mr.residual;
              r.converged = r.converged && mr.converged;
            }
          } catch (const Error& e) {
            r.error = e.code();
          }
        }
      }
    };
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < std::min<std::size_t>(threads, nc); ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
  }

  for (std::size_t pi = 0; pi < np; ++pi)
    for (std::size_t ki = 0; ki < cfg.k_list.size(); ++ki) {
      SweepCell c;
      c.p = cfg.p_grid[pi];
      c.k = cfg.k_list[ki];
      c.E = cfg.energy ? 0.0 : kNaN;
      c.M = cfg.modulus ? 0.0 : kNaN;
      bool firstE = true, firstM = true;
      for (std::size_t ci = 0; ci < nc; ++ci) {
        const auto& r = results[slot(ki, ci, pi)];
        c.candidates += r.multiplicity;
        if (!r.error.empty()) {
          c.errors += r.multiplicity;
          continue;
        }
        // Representatives are the smallest members and classes are visited in
        // address order, so strict comparison keeps the smallest witness.
        if (cfg.energy && (firstE || r.E > c.E)) c.E = r.E, c.witness_E = r.w, firstE = false;
        if (cfg.modulus && (firstM || r.M > c.M)) c.M = r.M, c.witness_M = r.w, firstM = false;
        c.residual = std::max({c.residual, r.E_residual, r.M_residual});
      }
      S.cells.push_back(c);
    }
  for (auto& r : results) S.details.push_back(std::move(r));
  return S;
}

EnergySweep energy_sweep(const PartitionFamily& family, SweepConfig config) {
  config.energy = true;
  config.modulus = false;
  return run_sweep(family, config);
}

EnergySweep modulus_sweep(const PartitionFamily& family, SweepConfig config) {
  config.energy = false;
  config.modulus = true;
  return run_sweep(family, config);
}

const SweepCell& EnergySweep::cell(double p, int k) const {
  for (const auto& c : cells)
    if (c.p == p && c.k == k) return c;
  throw std::out_of_range("no sweep cell for p = " + fmt_double(p) + ", k = " + std::to_string(k));
}

std::vector<double> EnergySweep::energy_series(double p) const {
  std::vector<double> out;
  for (int k : depths) out.push_back(cell(p, k).E);
  return out;
}

std::vector<double> EnergySweep::modulus_series(double p) const {
  std::vector<double> out;
  for (int k : depths) out.push_back(cell(p, k).M);
  return out;
}

void EnergySweep::write_csv(std::ostream& out) const {
  out << "p,k,witness_w,E_value,M_value,solver_residual\n";
  for (const auto& c : cells) {
    const Address& w = has_energy ? c.witness_E : c.witness_M;
    out << fmt_double(c.p) << ',' << c.k << ',' << w.str() << ',' << (has_energy ? fmt_double(c.E) : "") << ','
        << (has_modulus ? fmt_double(c.M) : "") << ',' << fmt_double(c.residual) << '\n';
  }
}

void EnergySweep::write_json(std::ostream& out, bool with_minimizers) const {
  using nlohmann::ordered_json;
  auto num = [](double v) -> ordered_json {
    if (std::isnan(v)) return nullptr;
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return std::stod(fmt_double(v));
  };
  ordered_json j;
  j["family"] = family;
  j["system"] = system.name();
  j["N1"] = N1;
  j["N2"] = N2;
  j["N"] = N;
  j["level"] = level;
  j["p_grid"] = grid;
  j["depths"] = depths;
  ordered_json cs = ordered_json::array();
  for (const auto& c : cells) {
    ordered_json e;
    e["p"] = num(c.p);
    e["k"] = c.k;
    if (has_energy) e["E"] = num(c.E), e["witness_E"] = c.witness_E.str();
    if (has_modulus) e["M"] = num(c.M), e["witness_M"] = c.witness_M.str();
    e["residual"] = num(c.residual);
    e["candidates"] = c.candidates;
    e["errors"] = c.errors;
    cs.push_back(e);
  }
  j["cells"] = cs;
  ordered_json ds = ordered_json::array();
  for (const auto& d : details) {
    ordered_json e;
    e["p"] = num(d.p);
    e["k"] = d.k;
    e["w"] = d.w.str();
    e["multiplicity"] = d.multiplicity;
    if (has_energy) e["E"] = num(d.E);
    if (has_modulus) e["M"] = num(d.M);
    e["L"] = d.L;
    e["vertices"] = d.vertices;
    e["edges"] = d.edges;
    e["converged"] = d.converged;
    if (!d.error.empty()) e["error"] = d.error;
    if (with_minimizers && !d.minimizer.empty()) {
      ordered_json m = ordered_json::array();
      for (double v : d.minimizer) m.push_back(num(v));
      e["minimizer"] = m;
    }
    ds.push_back(e);
  }
  j["details"] = ds;
  out << j.dump(1) << '\n';
}

}  // namespace confdim
