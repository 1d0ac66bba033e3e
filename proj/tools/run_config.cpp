#include "run_config.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "confdim/error.hpp"

namespace confdim::cli {

namespace {

const std::set<std::string> kFamilyKeys{"kind", "max_depth", "label", "preset", "removed",
                                        "point", "dim",       "base",  "cell",   "pruned"};

std::string trim(const std::string& s) {
  auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> tokens(const std::string& s) {
  std::string t = s;
  std::replace(t.begin(), t.end(), ',', ' ');
  std::istringstream in(t);
  std::vector<std::string> out;
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

long long to_int(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    long long x = std::stoll(v, &used);
    if (used == v.size()) return x;
  } catch (const std::exception&) {
  }
  throw std::invalid_argument("'" + key + "' expects an integer, got '" + v + "'");
}

int to_small_int(const std::string& key, const std::string& v, int lo) {
  long long x = to_int(key, v);
  if (x < lo || x > 1000000) throw std::invalid_argument("'" + key + "' out of range: " + v);
  return static_cast<int>(x);
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    double x = std::stod(v, &used);
    if (used == v.size() && std::isfinite(x)) return x;
  } catch (const std::exception&) {
  }
  throw std::invalid_argument("'" + key + "' expects a number, got '" + v + "'");
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw std::invalid_argument("'" + key + "' expects a boolean, got '" + v + "'");
}

// "1,2,3", "1 2 3" or "1..4".
std::vector<int> int_list(const std::string& key, const std::string& v) {
  std::vector<int> out;
  for (const auto& t : tokens(v)) {
    auto dots = t.find("..");
    if (dots == std::string::npos) {
      out.push_back(to_small_int(key, t, 0));
      continue;
    }
    int a = to_small_int(key, t.substr(0, dots), 0), b = to_small_int(key, t.substr(dots + 2), 0);
    if (b < a) throw std::invalid_argument("'" + key + "' has an empty range " + t);
    for (int i = a; i <= b; ++i) out.push_back(i);
  }
  if (out.empty()) throw std::invalid_argument("'" + key + "' is empty");
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<double> double_list(const std::string& key, const std::string& v) {
  std::vector<double> out;
  for (const auto& t : tokens(v)) out.push_back(to_double(key, t));
  if (out.empty()) throw std::invalid_argument("'" + key + "' is empty");
  return out;
}

std::string join(const std::vector<std::string>& xs) {
  std::string s;
  for (const auto& x : xs) s += (s.empty() ? "" : ",") + x;
  return s;
}

void apply(RunConfig& c, const std::string& key, const std::string& value) {
  if (kFamilyKeys.count(key)) {
    if (key == "kind") c.family_keys = KeyValues();  // a new kind starts a fresh family
    c.family_keys.add(key, value);
  } else if (key == "family_file") {
    KeyValues file = KeyValues::load(value);
    for (const auto& [k, v] : file.entries()) {
      if (!kFamilyKeys.count(k)) throw ParseError("family file " + value + ": unknown key '" + k + "'");
      if (k == "kind") c.family_keys = KeyValues();
      c.family_keys.add(k, v);
    }
  } else if (key == "weight") {
    WeightSpec::parse(value);
    c.weight = value;
  } else if (key == "system") {
    ProperSystem::parse(value);
    c.system = value;
  } else if (key == "N") {
    c.N = to_small_int(key, value, 1);
  } else if (key == "N1") {
    c.N1 = to_small_int(key, value, 0);
  } else if (key == "N2") {
    c.N2 = to_small_int(key, value, 0);
  } else if (key == "p") {
    c.p_grid = double_list(key, value);
  } else if (key == "k") {
    c.k_list = int_list(key, value);
    if (c.k_list.front() < 1) throw std::invalid_argument("'k' entries must be positive");
  } else if (key == "level") {
    c.level = to_small_int(key, value, 0);
  } else if (key == "policy") {
    parse_witness_policy(value);
    c.policy = value;
  } else if (key == "modulus_method") {
    if (value != "auto" && value != "curves" && value != "potential")
      throw std::invalid_argument("'modulus_method' must be auto, curves or potential");
    c.modulus_method = value;
  } else if (key == "depth") {
    c.depth = to_small_int(key, value, 0);
  } else if (key == "network_level") {
    c.network_level = to_small_int(key, value, 0);
  } else if (key == "M") {
    c.M = to_small_int(key, value, 0);
  } else if (key == "pairs") {
    c.pairs = value;
  } else if (key == "seed") {
    long long s = to_int(key, value);
    if (s < 0) throw std::invalid_argument("'seed' must be nonnegative");
    c.seed = static_cast<std::uint64_t>(s);
  } else if (key == "samples") {
    c.samples = static_cast<std::size_t>(to_small_int(key, value, 0));
  } else if (key == "p_low") {
    c.p_low = to_double(key, value);
  } else if (key == "p_high") {
    c.p_high = to_double(key, value);
  } else if (key == "tol") {
    c.tol = to_double(key, value);
    if (!(c.tol > 0)) throw std::invalid_argument("'tol' must be positive");
  } else if (key == "out") {
    if (value.empty()) throw std::invalid_argument("'out' is empty");
    c.out = value;
  } else if (key == "threads") {
    c.threads = static_cast<unsigned>(to_small_int(key, value, 0));
  } else if (key == "minimizers") {
    c.minimizers = to_bool(key, value);
  } else {
    throw std::invalid_argument("unknown configuration key '" + key + "'");
  }
}

}  // namespace

RunConfig load_config(const std::optional<std::string>& path, const std::vector<std::string>& overrides) {
  RunConfig c;
  if (path) {
    KeyValues kv = KeyValues::load(*path);
    for (const auto& [k, v] : kv.entries()) apply(c, k, v);
  }
  for (const auto& o : overrides) {
    auto eq = o.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("override '" + o + "' is not key=value");
    std::string key = trim(o.substr(0, eq));
    if (key.empty()) throw std::invalid_argument("override '" + o + "' has an empty key");
    apply(c, key, trim(o.substr(eq + 1)));
  }
  if (!c.family_keys.has("kind")) throw std::invalid_argument("no family given (set 'kind' or 'family_file')");
  if (c.N2 <= c.N1) throw std::invalid_argument("N2 must exceed N1");
  if (!(c.p_low < c.p_high)) throw std::invalid_argument("p_low must be below p_high");
  return c;
}

std::string RunConfig::canonical() const {
  std::ostringstream s;
  s << family_keys.str();
  auto fmt_list = [](const auto& xs) {
    std::vector<std::string> t;
    for (auto x : xs) {
      if constexpr (std::is_same_v<decltype(x), double>) t.push_back(fmt_double(x));
      else t.push_back(std::to_string(x));
    }
    return join(t);
  };
  s << "weight=" << weight << "\nsystem=" << system << "\nN=" << N << "\nN1=" << N1 << "\nN2=" << N2
    << "\np=" << fmt_list(p_grid) << "\nk=" << fmt_list(k_list) << "\nlevel=" << level << "\npolicy=" << policy
    << "\nmodulus_method=" << modulus_method << "\ndepth=" << depth << "\nnetwork_level=" << network_level
    << "\nM=" << M << "\npairs=" << pairs << "\nseed=" << seed << "\nsamples=" << samples
    << "\np_low=" << fmt_double(p_low) << "\np_high=" << fmt_double(p_high) << "\ntol=" << fmt_double(tol)
    << "\nminimizers=" << minimizers << "\n";
  return s.str();
}

std::string RunConfig::hash() const {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : canonical()) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

PartitionFamily build_family(const RunConfig& c) { return family_from_keys(c.family_keys); }

WeightFunction build_weight(const RunConfig& c, const PartitionFamily& f) {
  if (c.weight.empty()) return WeightFunction::geometric(Rational(1, f.base()));
  return WeightSpec::parse(c.weight).build(f);
}

SweepConfig sweep_config(const RunConfig& c, bool energy, bool modulus) {
  SweepConfig s;
  s.system = ProperSystem::parse(c.system, c.N);
  s.N1 = c.N1;
  s.N2 = c.N2;
  s.p_grid = c.p_grid;
  s.k_list = c.k_list;
  s.level = c.level;
  s.policy = parse_witness_policy(c.policy);
  s.energy = energy;
  s.modulus = modulus;
  s.threads = c.threads;
  s.keep_minimizers = c.minimizers;
  s.modulus_options.method = c.modulus_method == "curves"      ? ModulusMethod::ConstraintGeneration
                             : c.modulus_method == "potential" ? ModulusMethod::Potential
                                                               : ModulusMethod::Auto;
  return s;
}

DepthCaps check_caps(const RunConfig& c, const PartitionFamily& f, const std::string& command) {
  DepthCaps caps;
  caps.max_depth = f.max_depth();
  auto use = [&](const std::string& name, int v) {
    if (v > caps.max_depth)
      throw std::invalid_argument(name + " = " + std::to_string(v) + " exceeds max_depth = " +
                                  std::to_string(caps.max_depth));
    caps.used.emplace_back(name, v);
  };
  if (command == "partition" || command == "resolution" || command == "metric" || command == "validate") {
    use("depth", c.depth < 0 ? caps.max_depth : c.depth);
  } else if (command == "network") {
    use("network_level", c.network_level);
  } else {
    use("level", c.level);
    use("level+k_max", c.level + c.k_list.back());
  }
  return caps;
}

std::string header_line(const RunConfig& c, const DepthCaps& caps) {
  std::string s = "# tool=confdim version=" + std::string(kVersion) + " config=" + c.hash() +
                  " caps=max_depth:" + std::to_string(caps.max_depth);
  for (const auto& [k, v] : caps.used) s += "," + k + ":" + std::to_string(v);
  return s + "\n";
}

nlohmann::ordered_json header_json(const RunConfig& c, const DepthCaps& caps) {
  nlohmann::ordered_json h;
  h["tool"] = "confdim";
  h["version"] = kVersion;
  h["config"] = c.hash();
  nlohmann::ordered_json d;
  d["max_depth"] = caps.max_depth;
  for (const auto& [k, v] : caps.used) d[k] = v;
  h["caps"] = d;
  return h;
}

}  // namespace confdim::cli
