#include "confdim/dimension.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "confdim/error.hpp"
#include "confdim/rational.hpp"

namespace confdim {

RateEstimate rate_from_values(double p, const std::vector<int>& ks, const std::vector<double>& values) {
  if (ks.size() != values.size() || ks.size() < 2) throw std::invalid_argument("rate fit needs at least two depths");
  RateEstimate R;
  R.p = p;
  R.window = ks;
  R.values = values;
  std::size_t zeros = 0;
  for (double v : values) {
    if (!(v >= 0) || std::isinf(v)) throw std::invalid_argument("rate fit needs finite nonnegative values");
    if (v == 0) ++zeros;
  }
  if (zeros == values.size()) {
    R.all_zero = true;
    R.slope = -std::numeric_limits<double>::infinity();
    return R;
  }
  if (zeros > 0) throw std::invalid_argument("rate fit over a window mixing zero and positive values");
  const double n = static_cast<double>(ks.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < ks.size(); ++i) mx += ks[i], my += std::log(values[i]);
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < ks.size(); ++i) {
    sxx += (ks[i] - mx) * (ks[i] - mx);
    sxy += (ks[i] - mx) * (std::log(values[i]) - my);
  }
  if (sxx == 0) throw std::invalid_argument("rate fit needs distinct depths");
  R.slope = sxy / sxx;
  R.R = std::exp(R.slope);
  double ss = 0;
  for (std::size_t i = 0; i < ks.size(); ++i) {
    double e = std::log(values[i]) - (my + R.slope * (ks[i] - mx));
    ss += e * e;
  }
  R.residual = std::sqrt(ss / n);
  for (std::size_t i = 0; i + 1 < values.size(); ++i) R.ratios.push_back(values[i + 1] / values[i]);
  for (std::size_t i = 0; i + 1 < R.ratios.size(); ++i)
    if (R.ratios[i + 1] > R.ratios[i] * (1 + 1e-12)) R.monotone_ratios = false;
  return R;
}

RateEstimate rate(const EnergySweep& sweep, double p, const std::vector<int>& k_window) {
  std::vector<int> ks = k_window.empty() ? sweep.depths : k_window;
  std::vector<double> vals;
  for (int k : ks) vals.push_back(sweep.cell(p, k).E);
  return rate_from_values(p, ks, vals);
}

double volume_bound(double N_bar, double r) { return -std::log(N_bar) / std::log(r); }

double family_ratio(const PartitionFamily& family) { return 1.0 / family.base(); }

double family_volume_growth(const PartitionFamily& family) {
  int depth = std::min(family.max_depth(), 3);
  auto g = growth_rates(family, 1, {depth});
  return g.single_rates.front();
}

DimensionEstimate conformal_dimension(const PartitionFamily& family, const SweepConfig& base,
                                      const std::vector<int>& k_window, double p_low, double p_high, double tol) {
  if (!(p_low < p_high)) throw BracketInvalid("p bracket must satisfy p_low < p_high");
  if (!(tol > 0)) throw std::invalid_argument("bisection tolerance must be positive");
  DimensionEstimate D;
  D.r = family_ratio(family);
  D.N_bar = family_volume_growth(family);
  D.upper_bound_volume = D.N_bar > 1 ? volume_bound(D.N_bar, D.r) : 0.0;

  auto eval = [&](double p) {
    SweepConfig c = base;
    c.p_grid = {p};
    c.k_list = k_window;
    c.energy = true;
    c.modulus = false;
    D.sweeps.push_back(run_sweep(family, c));
    return rate(D.sweeps.back(), p, k_window);
  };
  auto lo = eval(p_low);
  auto hi = eval(p_high);
  D.p_low = p_low;
  D.p_high = p_high;
  D.R_low = lo.R;
  D.R_high = hi.R;
  if (lo.all_zero && hi.all_zero) {
    D.degenerate = true;
    D.p_star = p_low;
    return D;
  }
  if (lo.R < 1) throw BracketInvalid("R at p_low = " + fmt_double(p_low) + " is " + fmt_double(lo.R) + " < 1");
  if (hi.R > 1) throw BracketInvalid("R at p_high = " + fmt_double(p_high) + " is " + fmt_double(hi.R) + " > 1");
  while (D.p_high - D.p_low > tol) {
    BisectionStep s;
    s.p_low = D.p_low;
    s.p_high = D.p_high;
    s.p_mid = (D.p_low + D.p_high) / 2;
    auto m = eval(s.p_mid);
    s.R_mid = m.R;
    D.trace.push_back(s);
    if (m.R >= 1) D.p_low = s.p_mid, D.R_low = m.R;
    else D.p_high = s.p_mid, D.R_high = m.R;
  }
  D.p_star = (D.p_low + D.p_high) / 2;
  return D;
}

double spectral_dimension(double p, double R, double N_bar) {
  if (!(p > 0) || !(R > 0) || !(N_bar > 1))
    throw std::invalid_argument("spectral dimension needs p > 0, R > 0, N > 1");
  if (R >= N_bar) throw DivergentRate("R = " + fmt_double(R) + " is not below N = " + fmt_double(N_bar));
  return p * std::log(N_bar) / (std::log(N_bar) - std::log(R));
}

double spectral_identity_residual(double p, double R, double N_bar, double d) {
  return std::fabs(N_bar * std::pow(R / N_bar, d / p) - 1);
}

std::string to_string(DichotomyBranch b) {
  switch (b) {
    case DichotomyBranch::UpperBound: return "upper-bound";
    case DichotomyBranch::LowerBound: return "lower-bound";
    default: return "boundary";
  }
}

DichotomyReport dichotomy_report(double p, double R, double d, double tol) {
  DichotomyReport r;
  r.p = p;
  r.R = R;
  r.d = d;
  if (std::fabs(R - 1) <= tol) {
    r.branch = DichotomyBranch::Boundary;
    r.consistent = std::fabs(d - p) <= 1e-9 * std::max(1.0, p);
    r.statement = "R_p = 1: d_p = p";
  } else if (R < 1) {
    r.branch = DichotomyBranch::UpperBound;
    r.consistent = d < p;
    r.statement = "R_p < 1: dim_AR <= d_p < p";
  } else {
    r.branch = DichotomyBranch::LowerBound;
    r.consistent = d > p;
    r.statement = "R_p > 1: dim_AR >= d_p > p";
  }
  return r;
}

PositivityReport positivity_diagnostic(const EnergySweep& sweep, double p, double floor, double rate_slack) {
  PositivityReport P;
  P.p = p;
  P.window = sweep.depths;
  P.floor = floor;
  P.E = sweep.energy_series(p);
  P.M = sweep.modulus_series(p);
  auto min_of = [](const std::vector<double>& v) {
    double m = std::numeric_limits<double>::infinity();
    for (double x : v) m = std::min(m, x);  // NaN compares false and is skipped
    return std::isinf(m) ? std::numeric_limits<double>::quiet_NaN() : m;
  };
  P.min_E = min_of(P.E);
  P.min_M = min_of(P.M);
  bool above = true;
  if (sweep.has_energy) above = above && P.min_E > floor;
  if (sweep.has_modulus) above = above && P.min_M > floor;
  if (sweep.has_energy && P.window.size() >= 2 && P.min_E > 0) {
    P.R = rate(sweep, p).R;
    P.stays_positive = above && P.R >= 1 - rate_slack;
  } else {
    P.stays_positive = above;
  }
  return P;
}

}  // namespace confdim
