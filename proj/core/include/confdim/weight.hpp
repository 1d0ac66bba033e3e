#pragma once

#include <compare>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "confdim/partition.hpp"

namespace confdim {

// Nonnegative number known through its exact square.  Diameter weights carry
// square-root factors, so every comparison is done on squares.
class WeightValue {
 public:
  WeightValue() = default;
  static WeightValue from_rational(const Rational& v);
  static WeightValue from_square(const Rational& sq);

  const Rational& square() const { return sq_; }
  const std::optional<Rational>& exact() const { return val_; }
  bool is_rational() const { return val_.has_value(); }
  double to_double() const;
  std::string str() const;  // "num/den" or "sqrt(num/den)"

  WeightValue operator*(const WeightValue& o) const;
  WeightValue operator/(const WeightValue& o) const;
  std::weak_ordering operator<=>(const WeightValue& o) const {
    int c = cmp(sq_, o.sq_);
    return c < 0 ? std::weak_ordering::less : c > 0 ? std::weak_ordering::greater : std::weak_ordering::equivalent;
  }
  bool operator==(const WeightValue& o) const { return sq_ == o.sq_; }

 private:
  Rational sq_ = 0;
  std::optional<Rational> val_ = Rational(0);
};

enum class WeightForm { Geometric, Product, MetricInduced, MeasureInduced, CustomTable, Function };
std::string to_string(WeightForm f);

class WeightFunction {
 public:
  static WeightFunction geometric(const Rational& r);  // r^{|w|}
  // g(w) = product of ratio[digit] over the digits of w.
  static WeightFunction product(std::map<int, Rational> ratio, std::string name = "product");
  static WeightFunction measure_product(std::map<int, Rational> mass);
  // Euclidean diameter of K_w; divided by diam(X) when normalize is set.
  static WeightFunction metric_induced(const PartitionFamily& family, bool normalize = true);
  static WeightFunction custom_table(std::map<Address, Rational> table);
  static WeightFunction function(std::function<Rational(const Address&)> fn, std::string name);
  // Carpet weight with ratio 1/9 on odd digits and 1/3 on even digits.
  static WeightFunction carpet_mixed();

  WeightValue operator()(const Address& w) const;
  WeightForm form() const { return form_; }
  const std::string& name() const { return name_; }
  bool rational() const { return rational_; }
  const std::optional<Rational>& geometric_ratio() const { return ratio_; }

 private:
  WeightForm form_ = WeightForm::Function;
  std::string name_;
  bool rational_ = true;
  std::optional<Rational> ratio_;
  std::function<WeightValue(const Address&)> eval_;
};

struct ScaleSet {
  WeightValue s;
  std::vector<Address> members;  // lexicographic
  int min_level = 0;
  int max_level = 0;

  bool contains(const Address& w) const;
  std::optional<std::size_t> index(const Address& w) const;
};

ScaleSet scale_set(const WeightFunction& g, const PartitionFamily& family, const Rational& s);
ScaleSet scale_set(const WeightFunction& g, const PartitionFamily& family, const WeightValue& s);
// Adjacency lists (indices into members, excluding self) under K_w ∩ K_v ≠ ∅.
std::vector<std::vector<std::size_t>> scale_adjacency(const PartitionFamily& family, const ScaleSet& set);

struct ExpConstants {
  WeightValue lambda;                 // min g(w)/g(parent(w))
  std::vector<WeightValue> gamma;     // gamma[m-1] = max g(v)/g(w), v in S^m(w)
  std::optional<int> sub_m;           // smallest m with gamma < 1
};
ExpConstants exp_constants(const WeightFunction& g, const PartitionFamily& family, int depth);

int uniformly_finite_bound(const WeightFunction& g, const PartitionFamily& family,
                           const std::vector<Rational>& scale_samples);

struct GrowthReport {
  std::optional<WeightValue> constant;  // empty when flagged unbounded
  bool unbounded = false;
  std::vector<WeightValue> trace;       // one entry per sample
};
// Growth factor between consecutive samples that counts as divergence.
inline constexpr int kUnboundedFactor = 2;

GrowthReport gentle_constant(const WeightFunction& g, const WeightFunction& h, const PartitionFamily& family,
                             const std::vector<Rational>& scale_samples);

struct BiLipschitz {
  WeightValue c1, c2;
};
BiLipschitz bilipschitz_constants(const WeightFunction& g, const WeightFunction& h, const PartitionFamily& family,
                                  int depth);

struct ThicknessReport {
  std::optional<int> bound;           // empty when unbounded inside the horizon
  std::vector<int> per_level;         // max witness depth per level, -1 when missing
  std::vector<Address> missing;       // cells without a witness
};
ThicknessReport thickness_th1_bound(const PartitionFamily& family, int depth, int horizon);

}  // namespace confdim
