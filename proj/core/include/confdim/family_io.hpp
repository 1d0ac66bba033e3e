#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "confdim/partition.hpp"
#include "confdim/weight.hpp"

namespace confdim {

// Line-oriented "key = value" text.  Blank lines and lines starting with '#'
// are ignored; keys may repeat and keep their order.
class KeyValues {
 public:
  static KeyValues parse(std::istream& in);
  static KeyValues parse_string(const std::string& text);
  static KeyValues load(const std::string& path);

  void add(std::string key, std::string value);
  std::optional<std::string> get(const std::string& key) const;  // last occurrence
  std::vector<std::string> all(const std::string& key) const;
  bool has(const std::string& key) const;
  const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }
  std::string str() const;

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
};

// Weight declaration: "geometric 1/3", "product 1:1/9 2:1/3", "measure 0:1/2 1:1/2",
// "metric", "metric-raw", "carpet-mixed", "table <csv path>".
struct WeightSpec {
  std::string kind = "geometric";
  std::vector<std::string> args{"1/3"};

  static WeightSpec parse(const std::string& text);
  std::string str() const;
  WeightFunction build(const PartitionFamily& family) const;
};

// Family keys: kind, max_depth, label, preset (square examples), removed
// ("x_lo x_hi y_lo y_hi" per line), point (dyadic cloud), dim, base,
// cell ("address : lo_1 hi_1 ... lo_n hi_n", "root" for the empty word),
// pruned (address per line).
PartitionFamily family_from_keys(const KeyValues& kv);
KeyValues family_to_keys(const PartitionFamily& family);

PartitionFamily read_family(const std::string& path);
void write_family(const PartitionFamily& family, const std::string& path);
std::string family_text(const PartitionFamily& family);

// Custom weight tables as "address,value" CSV with a header row.
std::map<Address, Rational> read_weight_csv(const std::string& path);
void write_weight_csv(const std::map<Address, Rational>& table, const std::string& path);

// "root" or "" for the empty address, dotted digits otherwise.
Address parse_address_token(const std::string& s);
std::string address_token(const Address& w);

}  // namespace confdim
