#include "confdim/family_io.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "confdim/error.hpp"

namespace confdim {

namespace {

std::string trim(const std::string& s) {
  auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split_ws(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  for (std::string t; in >> t;) out.push_back(t);
  return out;
}

int parse_int(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    int x = std::stoi(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ParseError("'" + key + "' expects an integer, got '" + v + "'");
  }
}

std::string require_key(const KeyValues& kv, const std::string& key) {
  auto v = kv.get(key);
  if (!v) throw ParseError("missing key '" + key + "'");
  return *v;
}

}  // namespace

KeyValues KeyValues::parse(std::istream& in) {
  KeyValues kv;
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    auto eq = t.find('=');
    if (eq == std::string::npos) throw ParseError("line " + std::to_string(n) + ": expected 'key = value'");
    std::string key = trim(t.substr(0, eq));
    if (key.empty()) throw ParseError("line " + std::to_string(n) + ": empty key");
    kv.add(key, trim(t.substr(eq + 1)));
  }
  return kv;
}

KeyValues KeyValues::parse_string(const std::string& text) {
  std::istringstream in(text);
  return parse(in);
}

KeyValues KeyValues::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'");
  return parse(in);
}

void KeyValues::add(std::string key, std::string value) { entries_.emplace_back(std::move(key), std::move(value)); }

std::optional<std::string> KeyValues::get(const std::string& key) const {
  for (auto it = entries_.rbegin(); it != entries_.rend(); ++it)
    if (it->first == key) return it->second;
  return std::nullopt;
}

std::vector<std::string> KeyValues::all(const std::string& key) const {
  std::vector<std::string> out;
  for (const auto& [k, v] : entries_)
    if (k == key) out.push_back(v);
  return out;
}

bool KeyValues::has(const std::string& key) const { return get(key).has_value(); }

std::string KeyValues::str() const {
  std::string out;
  for (const auto& [k, v] : entries_) out += k + " = " + v + "\n";
  return out;
}

Address parse_address_token(const std::string& s) {
  if (s.empty() || s == "root") return Address();
  try {
    return Address::parse(s);
  } catch (const Error&) {
    throw;
  } catch (const std::exception&) {
    throw ParseError("bad address '" + s + "'");
  }
}

std::string address_token(const Address& w) { return w.is_root() ? "root" : w.str(); }

WeightSpec WeightSpec::parse(const std::string& text) {
  auto tok = split_ws(text);
  if (tok.empty()) throw ParseError("empty weight declaration");
  WeightSpec w;
  w.kind = tok[0];
  w.args.assign(tok.begin() + 1, tok.end());
  static const std::vector<std::string> known{"geometric", "product",      "measure", "metric",
                                              "metric-raw", "carpet-mixed", "table"};
  if (std::find(known.begin(), known.end(), w.kind) == known.end())
    throw ParseError("unknown weight kind '" + w.kind + "'");
  if ((w.kind == "geometric" || w.kind == "table") && w.args.size() != 1)
    throw ParseError("weight '" + w.kind + "' takes one argument");
  return w;
}

std::string WeightSpec::str() const {
  std::string out = kind;
  for (const auto& a : args) out += " " + a;
  return out;
}

WeightFunction WeightSpec::build(const PartitionFamily& family) const {
  auto digit_map = [this]() {
    std::map<int, Rational> m;
    for (const auto& a : args) {
      auto c = a.find(':');
      if (c == std::string::npos) throw ParseError("expected 'digit:ratio', got '" + a + "'");
      m[parse_int("digit", a.substr(0, c))] = parse_rational(a.substr(c + 1));
    }
    return m;
  };
  if (kind == "geometric") return WeightFunction::geometric(parse_rational(args.at(0)));
  if (kind == "product") return WeightFunction::product(digit_map());
  if (kind == "measure") return WeightFunction::measure_product(digit_map());
  if (kind == "metric") return WeightFunction::metric_induced(family, true);
  if (kind == "metric-raw") return WeightFunction::metric_induced(family, false);
  if (kind == "carpet-mixed") return WeightFunction::carpet_mixed();
  if (kind == "table") return WeightFunction::custom_table(read_weight_csv(args.at(0)));
  throw ParseError("unknown weight kind '" + kind + "'");
}

PartitionFamily family_from_keys(const KeyValues& kv) {
  FamilyKind kind = parse_family_kind(require_key(kv, "kind"));
  int depth = parse_int("max_depth", require_key(kv, "max_depth"));
  if (depth < 0) throw ParseError("max_depth must be nonnegative");
  std::optional<std::string> label = kv.get("label");
  PartitionFamily fam = PartitionFamily::interval_binary(0);
  switch (kind) {
    case FamilyKind::IntervalBinary: fam = PartitionFamily::interval_binary(depth); break;
    case FamilyKind::CantorTernary: fam = PartitionFamily::cantor_ternary(depth); break;
    case FamilyKind::SquareFull: fam = PartitionFamily::square_full(depth); break;
    case FamilyKind::Carpet: fam = PartitionFamily::carpet(depth); break;
    case FamilyKind::SquareHoles: {
      if (auto preset = kv.get("preset")) {
        fam = square_example(*preset, depth);
        if (kv.has("removed")) throw ParseError("give either 'preset' or 'removed', not both");
        break;
      }
      std::vector<RationalBox> removed;
      for (const auto& r : kv.all("removed")) {
        auto t = split_ws(r);
        if (t.size() != 4) throw ParseError("'removed' expects four rationals: x_lo x_hi y_lo y_hi");
        removed.push_back(RationalBox{{parse_rational(t[0]), parse_rational(t[2])},
                                      {parse_rational(t[1]), parse_rational(t[3])}});
      }
      fam = PartitionFamily::square_with_holes(std::move(removed), depth, label.value_or("square-with-holes"));
      break;
    }
    case FamilyKind::DyadicCubes: {
      std::vector<Point> cloud;
      for (const auto& p : kv.all("point")) cloud.push_back(parse_point(p));
      if (cloud.empty()) throw ParseError("dyadic-cubes needs at least one 'point'");
      if (auto d = kv.get("dim"))
        for (const auto& p : cloud)
          if (static_cast<int>(p.dim()) != parse_int("dim", *d)) throw ParseError("point dimension differs from 'dim'");
      fam = PartitionFamily::dyadic_cubes(std::move(cloud), depth);
      break;
    }
    case FamilyKind::Custom: {
      int dim = parse_int("dim", require_key(kv, "dim"));
      int base = parse_int("base", require_key(kv, "base"));
      std::map<Address, RationalBox> cells;
      for (const auto& c : kv.all("cell")) {
        auto colon = c.find(':');
        if (colon == std::string::npos) throw ParseError("'cell' expects 'address : lo hi ...'");
        Address w = parse_address_token(trim(c.substr(0, colon)));
        auto t = split_ws(c.substr(colon + 1));
        if (static_cast<int>(t.size()) != 2 * dim) throw ParseError("cell '" + c + "' needs 2*dim coordinates");
        RationalBox b;
        for (int i = 0; i < dim; ++i) {
          b.lo.push_back(parse_rational(t[2 * i]));
          b.hi.push_back(parse_rational(t[2 * i + 1]));
        }
        if (!cells.emplace(w, std::move(b)).second) throw ParseError("duplicate cell '" + address_token(w) + "'");
      }
      fam = PartitionFamily::custom(dim, base, std::move(cells), depth, label.value_or("custom"));
      break;
    }
  }
  std::set<Address> cut;
  for (const auto& p : kv.all("pruned")) cut.insert(parse_address_token(p));
  if (!cut.empty()) fam = fam.with_pruned(cut);
  return fam;
}

KeyValues family_to_keys(const PartitionFamily& family) {
  KeyValues kv;
  kv.add("kind", to_string(family.kind()));
  kv.add("max_depth", std::to_string(family.max_depth()));
  switch (family.kind()) {
    case FamilyKind::SquareHoles:
      kv.add("label", family.label());
      for (const auto& r : family.removed())
        kv.add("removed", to_string(r.lo[0]) + " " + to_string(r.hi[0]) + " " + to_string(r.lo[1]) + " " +
                              to_string(r.hi[1]));
      break;
    case FamilyKind::DyadicCubes:
      kv.add("dim", std::to_string(family.dim()));
      for (const auto& p : family.cloud()) kv.add("point", to_string(p));
      break;
    case FamilyKind::Custom:
      kv.add("label", family.label());
      kv.add("dim", std::to_string(family.dim()));
      kv.add("base", std::to_string(family.base()));
      for (const auto& [w, b] : family.custom_cells()) {
        std::string line = address_token(w) + " :";
        for (std::size_t i = 0; i < b.dim(); ++i) line += " " + to_string(b.lo[i]) + " " + to_string(b.hi[i]);
        kv.add("cell", line);
      }
      break;
    default: break;
  }
  for (const auto& w : family.pruned()) kv.add("pruned", address_token(w));
  return kv;
}

std::string family_text(const PartitionFamily& family) { return family_to_keys(family).str(); }

PartitionFamily read_family(const std::string& path) { return family_from_keys(KeyValues::load(path)); }

void write_family(const PartitionFamily& family, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write '" + path + "'");
  out << family_text(family);
}

std::map<Address, Rational> read_weight_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'");
  std::map<Address, Rational> table;
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    if (header) {
      header = false;
      if (line.rfind("address", 0) == 0) continue;
    }
    auto comma = line.find(',');
    if (comma == std::string::npos) throw ParseError("weight row '" + line + "' needs 'address,value'");
    Address w = parse_address_token(trim(line.substr(0, comma)));
    if (!table.emplace(w, parse_rational(trim(line.substr(comma + 1)))).second)
      throw ParseError("duplicate weight row for '" + address_token(w) + "'");
  }
  return table;
}

void write_weight_csv(const std::map<Address, Rational>& table, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write '" + path + "'");
  out << "address,value\n";
  for (const auto& [w, v] : table) out << address_token(w) << "," << to_string(v) << "\n";
}

}  // namespace confdim
