#include "confdim/weight.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "confdim/error.hpp"

namespace confdim {

WeightValue WeightValue::from_rational(const Rational& v) {
  WeightValue w;
  w.sq_ = v * v;
  w.val_ = v;
  return w;
}

WeightValue WeightValue::from_square(const Rational& sq) {
  WeightValue w;
  w.sq_ = sq;
  Rational r;
  if (exact_sqrt(sq, &r)) w.val_ = r;
  else w.val_.reset();
  return w;
}

double WeightValue::to_double() const { return val_ ? val_->get_d() : std::sqrt(sq_.get_d()); }

std::string WeightValue::str() const { return val_ ? to_string(*val_) : "sqrt(" + to_string(sq_) + ")"; }

WeightValue WeightValue::operator*(const WeightValue& o) const {
  if (val_ && o.val_) return from_rational(*val_ * *o.val_);
  return from_square(sq_ * o.sq_);
}

WeightValue WeightValue::operator/(const WeightValue& o) const {
  if (o.sq_ == 0) throw InvalidFamily("division by a zero weight");
  if (val_ && o.val_) return from_rational(*val_ / *o.val_);
  return from_square(sq_ / o.sq_);
}

std::string to_string(WeightForm f) {
  switch (f) {
    case WeightForm::Geometric: return "geometric";
    case WeightForm::Product: return "product";
    case WeightForm::MetricInduced: return "metric-induced";
    case WeightForm::MeasureInduced: return "measure-induced";
    case WeightForm::CustomTable: return "custom-table";
    case WeightForm::Function: return "function";
  }
  return "?";
}

WeightFunction WeightFunction::geometric(const Rational& r) {
  if (r <= 0 || r >= 1) throw InvalidFamily("geometric ratio must lie in (0,1)");
  WeightFunction g;
  g.form_ = WeightForm::Geometric;
  g.name_ = "h_" + to_string(r);
  g.ratio_ = r;
  g.eval_ = [r](const Address& w) { return WeightValue::from_rational(rpow(r, w.depth())); };
  return g;
}

WeightFunction WeightFunction::product(std::map<int, Rational> ratio, std::string name) {
  for (const auto& [d, r] : ratio)
    if (r <= 0 || r > 1) throw InvalidFamily("digit ratio for " + std::to_string(d) + " outside (0,1]");
  WeightFunction g;
  g.form_ = WeightForm::Product;
  g.name_ = std::move(name);
  g.eval_ = [ratio = std::move(ratio)](const Address& w) {
    Rational v = 1;
    for (int i = 0; i < w.depth(); ++i) {
      auto it = ratio.find(w[i]);
      if (it == ratio.end()) throw InvalidAddress("no weight ratio for digit " + std::to_string(w[i]));
      v *= it->second;
    }
    return WeightValue::from_rational(v);
  };
  return g;
}

WeightFunction WeightFunction::measure_product(std::map<int, Rational> mass) {
  Rational total = 0;
  for (const auto& [d, m] : mass) total += m;
  if (total != 1) throw InvalidFamily("digit masses must sum to 1");
  WeightFunction g = product(std::move(mass), "measure");
  g.form_ = WeightForm::MeasureInduced;
  return g;
}

WeightFunction WeightFunction::carpet_mixed() {
  std::map<int, Rational> r;
  for (int d = 1; d <= 8; ++d) r[d] = d % 2 ? Rational(1, 9) : Rational(1, 3);
  return product(std::move(r), "carpet-mixed");
}

WeightFunction WeightFunction::metric_induced(const PartitionFamily& family, bool normalize) {
  if (family.kind() == FamilyKind::SquareHoles)
    throw UnsupportedFamily("diameter weights need cells whose hull corners lie in X");
  // For the remaining families diam(K_w) is the diameter of the hull: the hull
  // corners belong to K_w (dyadic cells use the cube as a stand-in).
  PartitionFamily fam = family;
  Rational root = family.hull_box(Address()).diam2();
  WeightFunction g;
  g.form_ = WeightForm::MetricInduced;
  g.name_ = normalize ? "diameter" : "diameter-raw";
  g.rational_ = false;
  g.eval_ = [fam, root, normalize](const Address& w) {
    Rational d2 = fam.hull_box(w).diam2();
    return WeightValue::from_square(normalize ? Rational(d2 / root) : d2);
  };
  return g;
}

WeightFunction WeightFunction::custom_table(std::map<Address, Rational> table) {
  if (!table.count(Address()) || table.at(Address()) != 1) throw InvalidFamily("custom weight needs g(root) = 1");
  for (const auto& [w, v] : table)
    if (v <= 0 || v > 1) throw InvalidFamily("custom weight at '" + w.str() + "' outside (0,1]");
  WeightFunction g;
  g.form_ = WeightForm::CustomTable;
  g.name_ = "custom";
  g.eval_ = [table = std::move(table)](const Address& w) {
    auto it = table.find(w);
    if (it == table.end()) throw InvalidAddress("custom weight has no value at '" + w.str() + "'");
    return WeightValue::from_rational(it->second);
  };
  return g;
}

WeightFunction WeightFunction::function(std::function<Rational(const Address&)> fn, std::string name) {
  WeightFunction g;
  g.form_ = WeightForm::Function;
  g.name_ = std::move(name);
  g.eval_ = [fn = std::move(fn)](const Address& w) { return WeightValue::from_rational(fn(w)); };
  return g;
}

WeightValue WeightFunction::operator()(const Address& w) const { return eval_(w); }

bool ScaleSet::contains(const Address& w) const { return std::binary_search(members.begin(), members.end(), w); }

std::optional<std::size_t> ScaleSet::index(const Address& w) const {
  auto it = std::lower_bound(members.begin(), members.end(), w);
  if (it == members.end() || *it != w) return std::nullopt;
  return static_cast<std::size_t>(it - members.begin());
}

ScaleSet scale_set(const WeightFunction& g, const PartitionFamily& family, const Rational& s) {
  if (s <= 0) throw InvalidFamily("scale must be positive");
  return scale_set(g, family, WeightValue::from_rational(s));
}

ScaleSet scale_set(const WeightFunction& g, const PartitionFamily& family, const WeightValue& s) {
  if (s.square() <= 0) throw InvalidFamily("scale must be positive");
  ScaleSet out;
  out.s = s;
  out.min_level = family.max_depth();
  out.max_level = 0;
  const Rational& s2 = s.square();
  std::vector<Address> stack{Address()};
  while (!stack.empty()) {
    Address w = std::move(stack.back());
    stack.pop_back();
    if (g(w).square() <= s2) {
      out.min_level = std::min(out.min_level, w.depth());
      out.max_level = std::max(out.max_level, w.depth());
      out.members.push_back(std::move(w));
      continue;
    }
    if (w.depth() >= family.max_depth())
      throw DepthExceeded("scale " + s.str() + " not reached at max_depth below '" + w.str() + "'");
    for (auto& c : family.children(w)) stack.push_back(std::move(c));
  }
  std::sort(out.members.begin(), out.members.end());
  return out;
}

std::vector<std::vector<std::size_t>> scale_adjacency(const PartitionFamily& family, const ScaleSet& set) {
  std::vector<std::vector<std::size_t>> adj(set.members.size());
  for (std::size_t i = 0; i < set.members.size(); ++i)
    for (int l = set.min_level; l <= set.max_level; ++l)
      for (const auto& v : family.cells_meeting(set.members[i], l, true))
        if (auto j = set.index(v); j && *j != i) adj[i].push_back(*j);
  for (auto& a : adj) {
    std::sort(a.begin(), a.end());
    a.erase(std::unique(a.begin(), a.end()), a.end());
  }
  return adj;
}

namespace {

// best[m] = max over v in S^m(w) of g(v)/g(w), for m = 0..depth-|w|.
std::vector<WeightValue> best_descent(const WeightFunction& g, const PartitionFamily& f, const Address& w, int depth,
                                      WeightValue& lambda, bool& have_lambda) {
  std::vector<WeightValue> best{WeightValue::from_rational(1)};
  if (w.depth() >= depth) return best;
  WeightValue gw = g(w);
  for (const auto& c : f.children(w)) {
    WeightValue step = g(c) / gw;
    if (!have_lambda || step < lambda) {
      lambda = step;
      have_lambda = true;
    }
    auto sub = best_descent(g, f, c, depth, lambda, have_lambda);
    for (std::size_t m = 0; m < sub.size(); ++m) {
      WeightValue v = step * sub[m];
      if (best.size() <= m + 1) best.push_back(v);
      else if (best[m + 1] < v) best[m + 1] = v;
    }
  }
  return best;
}

}  // namespace

ExpConstants exp_constants(const WeightFunction& g, const PartitionFamily& family, int depth) {
  if (depth < 2) throw DepthExceeded("exponential constants need depth >= 2");
  if (depth > family.max_depth()) throw DepthExceeded("depth beyond max_depth");
  ExpConstants out;
  bool have = false;
  std::vector<WeightValue> gamma;
  for (int l = 0; l < depth; ++l)
    for (const auto& w : family.level(l)) {
      auto best = best_descent(g, family, w, depth, out.lambda, have);
      for (std::size_t m = 1; m < best.size(); ++m) {
        if (gamma.size() < m) gamma.push_back(best[m]);
        else if (gamma[m - 1] < best[m]) gamma[m - 1] = best[m];
      }
    }
  out.gamma = gamma;
  for (std::size_t m = 0; m < gamma.size(); ++m)
    if (gamma[m] < WeightValue::from_rational(1)) {
      out.sub_m = static_cast<int>(m + 1);
      break;
    }
  return out;
}

int uniformly_finite_bound(const WeightFunction& g, const PartitionFamily& family,
                           const std::vector<Rational>& scale_samples) {
  std::size_t best = 0;
  for (const auto& s : scale_samples) {
    ScaleSet set = scale_set(g, family, s);
    for (const auto& a : scale_adjacency(family, set)) best = std::max(best, a.size() + 1);
  }
  return static_cast<int>(best);
}

GrowthReport gentle_constant(const WeightFunction& g, const WeightFunction& h, const PartitionFamily& family,
                             const std::vector<Rational>& scale_samples) {
  GrowthReport rep;
  for (const auto& s : scale_samples) {
    ScaleSet set = scale_set(g, family, s);
    auto adj = scale_adjacency(family, set);
    WeightValue worst = WeightValue::from_rational(1);
    for (std::size_t i = 0; i < adj.size(); ++i) {
      WeightValue hi = h(set.members[i]);
      for (auto j : adj[i]) worst = std::max(worst, hi / h(set.members[j]));
    }
    rep.trace.push_back(worst);
  }
  bool diverging = rep.trace.size() >= 3;
  const Rational factor2 = kUnboundedFactor * kUnboundedFactor;
  for (std::size_t i = 1; i < rep.trace.size() && diverging; ++i)
    diverging = rep.trace[i].square() >= factor2 * rep.trace[i - 1].square();
  rep.unbounded = diverging;
  if (!diverging && !rep.trace.empty()) rep.constant = *std::max_element(rep.trace.begin(), rep.trace.end());
  return rep;
}

BiLipschitz bilipschitz_constants(const WeightFunction& g, const WeightFunction& h, const PartitionFamily& family,
                                  int depth) {
  if (depth > family.max_depth()) throw DepthExceeded("depth beyond max_depth");
  BiLipschitz out{h(Address()) / g(Address()), h(Address()) / g(Address())};
  for (int l = 1; l <= depth; ++l)
    for (const auto& w : family.level(l)) {
      WeightValue r = h(w) / g(w);
      out.c1 = std::min(out.c1, r);
      out.c2 = std::max(out.c2, r);
    }
  return out;
}

ThicknessReport thickness_th1_bound(const PartitionFamily& family, int depth, int horizon) {
  ThicknessReport rep;
  depth = std::min(depth, family.max_depth());
  int worst = 0;
  for (int l = 0; l <= depth; ++l) {
    int level_max = 0;
    for (const auto& w : family.level(l)) {
      auto k = family.private_witness_depth(w, horizon);
      if (!k) {
        rep.missing.push_back(w);
        level_max = -1;
        continue;
      }
      if (level_max >= 0) level_max = std::max(level_max, *k);
      worst = std::max(worst, *k);
    }
    rep.per_level.push_back(level_max);
  }
  if (rep.missing.empty()) rep.bound = worst;
  return rep;
}

}  // namespace confdim
