#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "confdim/partition.hpp"
#include "confdim/weight.hpp"

namespace confdim {

// A chain cost: exact when every weight in play is rational.
struct ChainCost {
  std::optional<Rational> exact;
  double approx = 0;

  std::string str() const { return exact ? to_string(*exact) : fmt_double(approx); }
};

struct ChainWitness {
  std::vector<Address> cells;  // consecutive cells intersect; first holds x, last holds y
};

struct Neighborhood {
  WeightValue s;
  int M = 0;
  std::vector<Address> cells;  // Lambda_{s,M}(x), lexicographic
};

struct DeltaResult {
  WeightValue value;
  ChainWitness witness;
};

struct ChainResult {
  ChainCost value;
  ChainWitness witness;
  int depth_cap = 0;
};

// Queries of the visual pre-metrics for one weight on one family.  Scale-set
// membership is tested pointwise (g(w) <= s < g(parent)), so no scale set is
// ever materialized.  Thread safe.
class VisualMetric {
 public:
  VisualMetric(WeightFunction g, PartitionFamily family);

  const WeightFunction& weight() const { return g_; }
  const PartitionFamily& family() const { return f_; }

  // Distinct weight values s with Lambda_s realizable inside max_depth, ascending.
  const std::vector<WeightValue>& candidates() const;
  const WeightValue& finest_scale() const;
  bool exact_costs() const;  // all candidate weights rational

  bool in_scale(const Address& w, const WeightValue& s) const;
  std::vector<Address> cells_at(const PointRef& x, const WeightValue& s) const;
  std::vector<Address> scale_neighbors(const Address& w, const WeightValue& s) const;

  Neighborhood neighborhood(const Point& x, const WeightValue& s, int M) const;
  bool neighborhood_contains(const Neighborhood& U, const Point& y) const;

  // Throws Unresolved when x != y and a chain already exists at the finest
  // realizable scale, i.e. the true value lies below the horizon.
  DeltaResult delta(const Point& x, const Point& y, int M) const;
  ChainResult chain_distance(const Point& x, const Point& y, int M) const;
  ChainResult chain_metric(const Point& x, const Point& y, int depth_cap) const;

 private:
  struct Cache;
  bool feasible(const PointRef& x, const PointRef& y, const WeightValue& s, int M, ChainWitness* out) const;
  std::pair<int, int> level_range(const WeightValue& s) const;
  const Cache& cache() const;

  WeightFunction g_;
  PartitionFamily f_;
  std::shared_ptr<Cache> cache_;
};

enum class MetricChoice { EuclideanNormalized, EuclideanRaw };

struct AdaptednessReport {
  WeightValue c_ada;                      // max diam(K_w)/g(w)
  std::vector<WeightValue> c_ada_trace;   // per level
  WeightValue c_adb;                      // max delta_M(x,y)/d(x,y)
  std::vector<WeightValue> c_adb_trace;   // per distance band
  std::optional<WeightValue> min_d_over_delta;
  std::optional<WeightValue> max_d_over_delta;
  Rational diam2_x;                       // squared diameter used to normalize d
  int unresolved = 0;
  int evaluated = 0;
  bool satisfied = false;
};

// Pairs whose delta is Unresolved are counted, not used.  Cell diameters are
// measured on the hull Q_w, an upper bound for K_w on the holes families.
AdaptednessReport adaptedness_report(const VisualMetric& vm, MetricChoice d, int M,
                                     const std::vector<std::pair<Point, Point>>& pairs, int depth);

// Points of X drawn from boundaries of random cells at `level`, with
// coordinates on the lattice of level `level + refine`.  Deterministic in seed.
std::vector<Point> sample_points(const PartitionFamily& family, std::size_t count, std::uint64_t seed, int level,
                                 int refine = 1);

// Rectangle distortion with the unit-square boundary corrections.
Rational distortion(const RationalBox& r);

// Connected components of Q \ int(R), with the interior of R taken relative to
// the unit square.
int components_outside(const RationalBox& q, const RationalBox& r);

enum class Sq4Verdict { R0, R1, Neither };
std::string to_string(Sq4Verdict v);

struct Sq4Entry {
  RationalBox rect;
  Rational kappa;
  Sq4Verdict verdict = Sq4Verdict::Neither;
  std::optional<Address> witness;        // cell giving the R1 verdict
  std::optional<Rational> witness_kappa;
  std::optional<Rational> best_two_component_kappa;  // smallest seen, even above the threshold
};

std::vector<Sq4Entry> sq4_classify(const PartitionFamily& family, const Rational& kappa, int depth);

}  // namespace confdim
