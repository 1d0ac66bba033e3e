#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "confdim/dimension.hpp"
#include "confdim/error.hpp"
#include "confdim/resolution.hpp"
#include "confdim/visual_metric.hpp"
#include "run_config.hpp"

using namespace confdim;
using namespace confdim::cli;
using nlohmann::ordered_json;

namespace {

// Failures raised while reading or validating input.  Anything else thrown
// after validation is a computation error.
struct ConfigFailure : std::runtime_error {
  std::string code;
  ConfigFailure(std::string c, const std::string& what) : std::runtime_error(what), code(std::move(c)) {}
};

ordered_json num(double v) {
  if (std::isnan(v)) return nullptr;
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return std::stod(fmt_double(v));
}

class Outputs {
 public:
  Outputs(const RunConfig& c, DepthCaps caps) : c_(c), caps_(std::move(caps)) {
    std::filesystem::create_directories(c.out);
  }

  // Text outputs start with the header comment line.
  void text(const std::string& name, const std::string& body) {
    write(name, header_line(c_, caps_) + body);
  }
  void json(const std::string& name, ordered_json body) {
    ordered_json j;
    j["header"] = header_json(c_, caps_);
    for (auto& [k, v] : body.items()) j[k] = v;
    write(name, j.dump(1) + "\n");
  }
  const DepthCaps& caps() const { return caps_; }

 private:
  void write(const std::string& name, const std::string& content) {
    auto path = std::filesystem::path(c_.out) / name;
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + path.string());
    f << content;
    std::cout << path.string() << "\n";
  }
  const RunConfig& c_;
  DepthCaps caps_;
};

std::string strip_header(const std::string& csv) { return csv.substr(csv.find('\n') + 1); }

// --- partition -----------------------------------------------------------

void cmd_partition(const PartitionFamily& f, Outputs& out) {
  const int depth = out.caps().used.front().second;
  const auto& cells = f.level(depth);
  std::ostringstream t;
  t << "address,level";
  for (std::size_t i = 0; i < static_cast<std::size_t>(f.dim()); ++i)
    t << ",lo" << i << ",hi" << i << ",lo" << i << "_f,hi" << i << "_f";
  t << "\n";
  for (const auto& w : cells) {
    auto b = f.hull_box(w);
    t << address_token(w) << "," << w.depth();
    for (std::size_t i = 0; i < b.dim(); ++i)
      t << "," << to_string(b.lo[i]) << "," << to_string(b.hi[i]) << "," << fmt_double(b.lo[i].get_d()) << ","
        << fmt_double(b.hi[i].get_d());
    t << "\n";
  }
  out.text("cells.csv", t.str());

  std::ostringstream a;
  a << "a,b\n";
  for (const auto& w : cells)
    for (const auto& v : f.neighbors(w))
      if (w < v) a << address_token(w) << "," << address_token(v) << "\n";
  out.text("adjacency.csv", a.str());

  auto report = f.minimality_check(depth);
  auto p1 = f.p1_violations(depth);
  auto tokens = [](const std::vector<Address>& ws) {
    ordered_json j = ordered_json::array();
    for (const auto& w : ws) j.push_back(address_token(w));
    return j;
  };
  ordered_json j;
  j["family"] = f.label();
  j["kind"] = to_string(f.kind());
  j["depth"] = depth;
  j["cells"] = cells.size();
  j["all_minimal"] = report.all_minimal;
  j["violating"] = tokens(report.violating);
  j["undecided"] = tokens(report.undecided);
  j["p1_violations"] = tokens(p1);
  out.json("minimality.json", j);
}

// --- metric --------------------------------------------------------------

std::vector<std::pair<Point, Point>> read_pairs(const std::string& path, const PartitionFamily& f) {
  if (path.empty()) throw std::invalid_argument("metric needs 'pairs' (a file of 'x y' point pairs)");
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot read pairs file " + path);
  std::vector<std::pair<Point, Point>> pairs;
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    std::istringstream ls(line);
    std::string a, b, rest;
    if (!(ls >> a) || a[0] == '#') continue;
    if (!(ls >> b) || (ls >> rest)) throw ParseError("pairs line " + std::to_string(n) + ": expected two points");
    Point x = parse_point(a), y = parse_point(b);
    for (const auto* p : {&x, &y}) {
      if (static_cast<int>(p->dim()) != f.dim())
        throw ParseError("pairs line " + std::to_string(n) + ": point dimension differs from the family");
      if (!f.point_in_space(*p))
        throw PointOutsideSpace("pairs line " + std::to_string(n) + ": " + to_string(*p) + " is not in X");
    }
    pairs.emplace_back(std::move(x), std::move(y));
  }
  return pairs;
}

std::string weight_float(const WeightValue& v) { return fmt_double(v.to_double()); }

void cmd_metric(const RunConfig& c, const PartitionFamily& f, const std::vector<std::pair<Point, Point>>& pairs,
                Outputs& out) {
  VisualMetric vm(build_weight(c, f), f);
  std::ostringstream t;
  t << "x,y,M,delta,delta_f,D,D_f,d_euclid,d_euclid_f,status\n";
  auto quote = [](const std::string& s) { return "\"" + s + "\""; };
  for (const auto& [x, y] : pairs) {
    Rational d2 = dist2(x, y), root;
    std::string d_exact = exact_sqrt(d2, &root) ? to_string(root) : "sqrt(" + to_string(d2) + ")";
    std::string d_f = fmt_double(std::sqrt(d2.get_d()));
    t << quote(to_string(x)) << "," << quote(to_string(y)) << "," << c.M << ",";
    try {
      auto delta = vm.delta(x, y, c.M);
      auto chain = vm.chain_distance(x, y, c.M);
      t << delta.value.str() << "," << weight_float(delta.value) << "," << chain.value.str() << ","
        << fmt_double(chain.value.exact ? chain.value.exact->get_d() : chain.value.approx) << "," << d_exact << ","
        << d_f << ",ok\n";
    } catch (const Unresolved&) {
      t << ",,,," << d_exact << "," << d_f << ",unresolved\n";
    }
  }
  out.text("metric.csv", t.str());
}

// --- resolution ----------------------------------------------------------

void cmd_resolution(const RunConfig& c, const PartitionFamily& f, Outputs& out) {
  const int L = out.caps().used.front().second;
  auto G = build_resolution(f, L);
  std::ostringstream e;
  G.write_edges(e);
  out.text("resolution_edges.txt", e.str());
  auto scan = horizontally_minimal_scan(G, L);
  ordered_json j;
  j["family"] = f.label();
  j["levels"] = L;
  ordered_json lv = ordered_json::array();
  for (int m = 0; m <= L; ++m) {
    ordered_json x;
    x["level"] = m;
    x["vertices"] = G.level_vertices(m).size();
    x["horizontal_edges"] = G.horizontal_edge_count(m);
    x["max_minimal_distance"] = scan.per_level[m];
    lv.push_back(x);
  }
  j["per_level"] = lv;
  j["horizontal_bound"] = scan.max_bound;
  ordered_json wit = ordered_json::array();
  for (const auto& h : scan.witnesses) wit.push_back({G.name(h.a), G.name(h.b), h.distance});
  j["witnesses"] = wit;
  Rational eta = empirical_eta(G, c.samples, c.seed);
  j["eta"] = to_string(eta);
  j["eta_f"] = num(eta.get_d());
  j["eta_triples"] = c.samples;
  j["seed"] = c.seed;
  out.json("resolution.json", j);
}

// --- network -------------------------------------------------------------

void cmd_network(const RunConfig& c, const PartitionFamily& f, Outputs& out) {
  auto sys = ProperSystem::parse(c.system, c.N);
  auto net = build_network(sys, f, c.network_level);
  std::ostringstream e, o;
  net.write_edges(e);
  net.write_ownership(o);
  out.text("network_edges.txt", e.str());
  out.text("network_ownership.txt", o.str());
  auto rep = validate_proper_system(sys, f, c.network_level, c.samples, c.seed);
  ordered_json j;
  j["family"] = f.label();
  j["system"] = sys.name();
  j["indices"] = {sys.N, sys.L0, sys.L1, sys.L2};
  j["level"] = c.network_level;
  j["vertices"] = net.vertices.size();
  j["edges"] = net.edges.size();
  j["proper"] = rep.ok();
  ordered_json lv = ordered_json::array();
  for (const auto& l : rep.levels) {
    ordered_json x;
    x["level"] = l.level;
    x["N1"] = l.n1;
    x["N2"] = l.n2;
    x["N3"] = l.n3;
    x["N4"] = l.n4;
    x["N5"] = l.n5;
    x["max_pair_edges"] = l.max_pair_edges;
    x["n5_pairs"] = l.n5_pairs;
    x["failures"] = l.failures;
    lv.push_back(x);
  }
  j["checks"] = lv;
  std::vector<int> ns;
  for (int n = 1; n <= std::min(3, f.max_depth()); ++n) ns.push_back(n);
  if (!ns.empty()) {
    auto g = growth_rates(f, c.N2, ns);
    ordered_json gr;
    gr["L_star"] = g.L_star;
    gr["N_star"] = g.N_star;
    gr["n"] = g.n;
    gr["gamma_counts"] = g.gamma_counts;
    gr["single_counts"] = g.single_counts;
    ordered_json gr_rates = ordered_json::array(), s_rates = ordered_json::array();
    for (double r : g.gamma_rates) gr_rates.push_back(num(r));
    for (double r : g.single_rates) s_rates.push_back(num(r));
    gr["gamma_rates"] = gr_rates;
    gr["single_rates"] = s_rates;
    j["growth"] = gr;
  }
  out.json("network.json", j);
}

// --- energy / modulus ----------------------------------------------------

void write_sweep(const EnergySweep& S, const std::string& stem, bool minimizers, Outputs& out) {
  std::ostringstream csv, js;
  S.write_csv(csv);
  out.text(stem + ".csv", csv.str());
  S.write_json(js, minimizers);
  out.json(stem + ".json", ordered_json::parse(js.str()));
}

void cmd_sweep(const RunConfig& c, const PartitionFamily& f, bool modulus, Outputs& out) {
  auto S = run_sweep(f, sweep_config(c, !modulus, modulus));
  write_sweep(S, modulus ? "modulus_sweep" : "energy_sweep", c.minimizers, out);
}

// --- dimension -----------------------------------------------------------

ordered_json rate_json(const RateEstimate& r) {
  ordered_json j;
  j["p"] = num(r.p);
  j["R"] = num(r.R);
  j["slope"] = num(r.slope);
  j["fit_residual"] = num(r.residual);
  j["all_zero"] = r.all_zero;
  j["monotone_ratios"] = r.monotone_ratios;
  ordered_json v = ordered_json::array();
  for (double x : r.values) v.push_back(num(x));
  j["E"] = v;
  return j;
}

void cmd_dimension(const RunConfig& c, const PartitionFamily& f, Outputs& out) {
  if (c.k_list.size() < 2) throw std::invalid_argument("dimension needs at least two depths in 'k'");
  SweepConfig base = sweep_config(c, true, false);
  auto D = conformal_dimension(f, base, c.k_list, c.p_low, c.p_high, c.tol);

  // Spectral dimension at p = 2 from the sweep there, evaluated if needed.
  std::vector<const EnergySweep*> sweeps;
  for (const auto& s : D.sweeps) sweeps.push_back(&s);
  const EnergySweep* at2 = nullptr;
  for (const auto* s : sweeps)
    if (s->grid.front() == 2.0) at2 = s;
  EnergySweep extra;
  if (!at2) {
    SweepConfig s2 = base;
    s2.p_grid = {2.0};
    extra = run_sweep(f, s2);
    at2 = &extra;
    sweeps.push_back(at2);
  }
  std::stable_sort(sweeps.begin(), sweeps.end(),
                   [](const EnergySweep* a, const EnergySweep* b) { return a->grid.front() < b->grid.front(); });

  ordered_json j;
  j["family"] = f.label();
  j["system"] = base.system.name();
  j["N1"] = c.N1;
  j["N2"] = c.N2;
  j["level"] = c.level;
  j["k_window"] = c.k_list;
  j["bracket"] = {num(c.p_low), num(c.p_high)};
  j["tol"] = num(c.tol);
  j["degenerate"] = D.degenerate;
  j["p_star"] = D.degenerate ? ordered_json(nullptr) : num(D.p_star);
  j["p_low"] = num(D.p_low);
  j["p_high"] = num(D.p_high);
  j["R_low"] = num(D.R_low);
  j["R_high"] = num(D.R_high);
  j["N_bar"] = num(D.N_bar);
  j["r"] = num(D.r);
  j["volume_bound"] = num(D.upper_bound_volume);
  auto r2 = rate(*at2, 2.0, c.k_list);
  j["rate_p2"] = rate_json(r2);
  ordered_json spectral;
  if (r2.all_zero || D.N_bar <= 1) {
    spectral["d"] = nullptr;
    spectral["note"] = "energy vanishes at p = 2";
  } else {
    try {
      double d = spectral_dimension(2.0, r2.R, D.N_bar);
      auto dr = dichotomy_report(2.0, r2.R, d, 1e-9);
      spectral["d"] = num(d);
      spectral["identity_residual"] = num(spectral_identity_residual(2.0, r2.R, D.N_bar, d));
      spectral["branch"] = to_string(dr.branch);
      spectral["consistent"] = dr.consistent;
    } catch (const DivergentRate& e) {
      spectral["d"] = nullptr;
      spectral["note"] = e.what();
    }
  }
  j["d_spectral"] = spectral;
  ordered_json tr = ordered_json::array();
  for (const auto& s : D.trace) {
    ordered_json x;
    x["p_low"] = num(s.p_low);
    x["p_high"] = num(s.p_high);
    x["p_mid"] = num(s.p_mid);
    x["R_mid"] = num(s.R_mid);
    tr.push_back(x);
  }
  j["trace"] = tr;
  ordered_json rates = ordered_json::array();
  for (const auto* s : sweeps) rates.push_back(rate_json(rate(*s, s->grid.front(), c.k_list)));
  j["rates"] = rates;
  out.json("dimension.json", j);

  std::string csv = "p,k,witness_w,E_value,M_value,solver_residual\n";
  std::string plot = "p,k,log_E\n";
  for (const auto* s : sweeps) {
    std::ostringstream o;
    s->write_csv(o);
    csv += strip_header(o.str());
    for (const auto& cell : s->cells)
      plot += fmt_double(cell.p) + "," + std::to_string(cell.k) + "," +
              (cell.E > 0 ? fmt_double(std::log(cell.E)) : std::string("-inf")) + "\n";
  }
  out.text("dimension_sweep.csv", csv);
  out.text("dimension_plot.csv", plot);
}

// --- validate ------------------------------------------------------------

void cmd_validate(const RunConfig& c, const PartitionFamily& f, Outputs& out) {
  const int depth = std::min(out.caps().used.front().second, 3);
  auto p1 = f.p1_violations(depth);
  if (!p1.empty()) throw ConfigFailure("InvalidFamily", "(P1) fails at " + address_token(p1.front()));
  auto g = build_weight(c, f);
  auto sys = ProperSystem::parse(c.system, c.N);
  build_network(sys, f, std::min(1, f.max_depth()));
  ordered_json j;
  j["valid"] = true;
  j["family"] = f.label();
  j["kind"] = to_string(f.kind());
  j["dim"] = f.dim();
  j["base"] = f.base();
  j["self_similar"] = f.self_similar();
  j["weight"] = g.name();
  j["system"] = sys.name();
  j["checked_depth"] = depth;
  j["minimal"] = f.minimality_check(depth).all_minimal;
  j["config"] = c.canonical();
  out.json("validate.json", j);
}

int fail(int code, const std::string& kind, const std::string& what) {
  ordered_json j;
  j["error"] = kind;
  j["message"] = what;
  j["exit_code"] = code;
  std::cerr << j.dump() << "\n";
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Combinatorial energies and conformal dimension of partitioned spaces", "confdim"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);
  app.fallthrough();
  std::optional<std::string> config_path;
  std::vector<std::string> sets;
  std::string out_dir;
  std::optional<unsigned> threads;
  app.add_option("-c,--config", config_path, "key = value configuration file");
  app.add_option("-s,--set", sets, "override a configuration key (key=value), repeatable");
  app.add_option("-o,--out", out_dir, "output directory");
  app.add_option("-t,--threads", threads, "worker thread cap (default: CONFDIM_THREADS or all cores)");

  const std::vector<std::pair<std::string, std::string>> commands{
      {"partition", "cell table, adjacency and minimality report"},
      {"metric", "visual pre-metric, chain distance and Euclidean distance of point pairs"},
      {"resolution", "resolution graph edges and hyperbolicity diagnostics"},
      {"network", "horizontal network of a proper system and its validation"},
      {"energy", "sweep of the local p-energies"},
      {"modulus", "sweep of the local p-moduli"},
      {"dimension", "bisection for the critical exponent, rates and spectral dimension"},
      {"validate", "check a configuration without running an analysis"}};
  for (const auto& [name, help] : commands) app.add_subcommand(name, help);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail(2, "UsageError", e.what());
  }
  const std::string command = app.get_subcommands().front()->get_name();

  RunConfig cfg;
  PartitionFamily* family = nullptr;
  std::optional<PartitionFamily> fam;
  std::optional<Outputs> out;
  std::vector<std::pair<Point, Point>> pairs;
  try {
    std::vector<std::string> overrides = sets;
    if (!out_dir.empty()) overrides.push_back("out=" + out_dir);
    if (threads) overrides.push_back("threads=" + std::to_string(*threads));
    cfg = load_config(config_path, overrides);
    fam.emplace(build_family(cfg));
    family = &*fam;
    auto caps = check_caps(cfg, *family, command);
    build_weight(cfg, *family);
    ProperSystem::parse(cfg.system, cfg.N);
    for (double p : cfg.p_grid)
      if (!(p > 1)) throw InvalidP("p must exceed 1, got " + fmt_double(p));
    if (command == "metric") pairs = read_pairs(cfg.pairs, *family);
    out.emplace(cfg, caps);
  } catch (const Error& e) {
    return fail(2, e.code(), e.what());
  } catch (const std::exception& e) {
    return fail(2, "ConfigError", e.what());
  }

  try {
    if (command == "partition") cmd_partition(*family, *out);
    else if (command == "metric") cmd_metric(cfg, *family, pairs, *out);
    else if (command == "resolution") cmd_resolution(cfg, *family, *out);
    else if (command == "network") cmd_network(cfg, *family, *out);
    else if (command == "energy") cmd_sweep(cfg, *family, false, *out);
    else if (command == "modulus") cmd_sweep(cfg, *family, true, *out);
    else if (command == "dimension") cmd_dimension(cfg, *family, *out);
    else cmd_validate(cfg, *family, *out);
  } catch (const ConfigFailure& e) {
    return fail(2, e.code, e.what());
  } catch (const std::invalid_argument& e) {
    return fail(2, "ConfigError", e.what());
  } catch (const Error& e) {
    return fail(3, e.code(), e.what());
  } catch (const std::exception& e) {
    return fail(3, "ComputationError", e.what());
  }
  return 0;
}
