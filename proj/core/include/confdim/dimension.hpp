#pragma once

#include <string>
#include <vector>

#include "confdim/sweep.hpp"

namespace confdim {

// Least-squares fit of log E_{p,k} against k; R_p = exp(slope).
struct RateEstimate {
  double p = 0;
  std::vector<int> window;
  std::vector<double> values;
  double slope = 0, R = 0;
  double residual = 0;           // root mean square of the fit
  std::vector<double> ratios;    // E_{k+1} / E_k along the window
  bool monotone_ratios = true;   // ratios non-increasing
  bool all_zero = false;         // E vanishes on the window; R reported as 0
};

// Throws std::invalid_argument for fewer than two points, or a mix of zero
// and positive values (the log fit is undefined).
RateEstimate rate_from_values(double p, const std::vector<int>& ks, const std::vector<double>& values);
// Empty window: every depth of the sweep.
RateEstimate rate(const EnergySweep& sweep, double p, const std::vector<int>& k_window = {});

// -log N / log r.
double volume_bound(double N_bar, double r);

struct BisectionStep {
  double p_low = 0, p_high = 0, p_mid = 0, R_mid = 0;
};

struct DimensionEstimate {
  double p_low = 0, p_high = 0, p_star = 0;
  double R_low = 0, R_high = 0;  // rates at the final bracket ends
  std::vector<BisectionStep> trace;
  double N_bar = 0, r = 0, upper_bound_volume = 0;
  bool degenerate = false;  // every rate vanishes: dimension below the bracket
  std::vector<EnergySweep> sweeps;  // one per evaluated p, in evaluation order
};

// Contraction ratio and volume growth used for the volume bound.
double family_ratio(const PartitionFamily& family);
double family_volume_growth(const PartitionFamily& family);

// Bisection on R_p = 1 using energy sweeps of `base` (its p grid is ignored).
// Throws BracketInvalid when R at p_low is below 1 or R at p_high above 1,
// unless every rate vanishes (degenerate report).
DimensionEstimate conformal_dimension(const PartitionFamily& family, const SweepConfig& base,
                                      const std::vector<int>& k_window, double p_low, double p_high, double tol);

// d = p log N / (log N - log R).  Throws DivergentRate when R >= N and
// std::invalid_argument unless R > 0, N > 1, p > 0.
double spectral_dimension(double p, double R, double N_bar);
// |N (R/N)^(d/p) - 1|.
double spectral_identity_residual(double p, double R, double N_bar, double d);

enum class DichotomyBranch { UpperBound, LowerBound, Boundary };
std::string to_string(DichotomyBranch b);

struct DichotomyReport {
  double p = 0, R = 0, d = 0;
  DichotomyBranch branch = DichotomyBranch::Boundary;
  bool consistent = true;  // sign(d - p) agrees with sign(1 - R)
  std::string statement;
};

// R < 1: dim_AR <= d < p.  R > 1: dim_AR >= d > p.  |R - 1| <= tol: d = p.
DichotomyReport dichotomy_report(double p, double R, double d, double tol = 1e-12);

struct PositivityReport {
  double p = 0;
  std::vector<int> window;
  std::vector<double> E, M;
  double min_E = 0, min_M = 0;
  double floor = 0;
  double R = 0;             // energy rate over the window
  bool stays_positive = false;  // min values above the floor and R >= 1 - rate_slack
};

PositivityReport positivity_diagnostic(const EnergySweep& sweep, double p, double floor = 1e-3,
                                       double rate_slack = 0.05);

}  // namespace confdim
