#pragma once

#include <cstddef>
#include <utility>
#include <vector>

namespace confdim {

// Undirected simple graph; every edge stored once.
struct Graph {
  int n = 0;
  std::vector<std::pair<int, int>> edges;

  std::vector<std::vector<int>> adjacency() const;
  int max_degree() const;  // L(V,E)
};

struct BoundaryValueProblem {
  Graph graph;
  std::vector<int> U1, U2;  // disjoint
  double p = 2;
};

struct EnergyOptions {
  double tol = 1e-9;                       // relative Newton decrement
  int max_newton = 100;                    // per smoothing stage
  std::vector<double> eps{1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8};
  const std::vector<double>* warm = nullptr;  // starting values, size n
};

struct EnergyResult {
  double value = 0;
  std::vector<double> minimizer;  // 1 on U1, 0 on U2, within [0,1]
  double residual = 0;            // max |gradient| of the unsmoothed functional at free vertices
  bool exact_zero = false;        // no U1-U2 path (or no edges)
  bool converged = true;
  int newton_steps = 0;
};

double holder_constant(double p, double n);  // max{n^{p-1}, 1}

// Sum over stored edges of |f(x) - f(y)|^p.
double energy_eval(const std::vector<double>& f, const Graph& g, double p);

// Throws InvalidP unless 1 < p <= 20, InadmissibleInput when U1 and U2 meet.
EnergyResult solve_energy(const BoundaryValueProblem& bvp, const EnergyOptions& opt = {});

enum class ModulusMethod { Auto, ConstraintGeneration, Potential };

struct ModulusOptions {
  ModulusMethod method = ModulusMethod::Auto;
  double tol = 1e-7;           // curve constraint tolerance
  std::size_t auto_limit = 64;  // Auto uses constraint generation up to this many free vertices
  int max_rounds = 2000;
};

struct ModulusResult {
  double value = 0;
  std::vector<double> density;                 // zero on U1 and U2
  std::vector<std::vector<int>> active_curves;  // each with density sum >= 1 - tol
  double residual = 0;    // 1 - (least curve sum), clipped at 0
  bool infinite = false;  // an edge joins U1 and U2 directly
  bool no_curve = false;  // U1 and U2 not connected: value 0
  bool converged = true;
  ModulusMethod used = ModulusMethod::ConstraintGeneration;
};

// Curves are vertex sequences x(1..m) with x(0) in U1 and x(m+1) in U2
// adjacent; only x(1..m) are charged.
ModulusResult solve_modulus(const Graph& g, const std::vector<int>& U1, const std::vector<int>& U2, double p,
                            const ModulusOptions& opt = {});

// Least density sum over curves, or +inf when none exists.
double min_curve_sum(const Graph& g, const std::vector<int>& U1, const std::vector<int>& U2,
                     const std::vector<double>& f, std::vector<int>* curve = nullptr);

// F(f)(x): least density sum over paths from U2 to x, the starting U2 vertex
// not charged.  Throws InadmissibleInput when f is not admissible.
std::vector<double> transfer_F(const std::vector<double>& f, const Graph& g, const std::vector<int>& U1,
                               const std::vector<int>& U2, double tol = 1e-9);
// G(g)(x) = sum over neighbours y of |g(x) - g(y)|.  Throws InadmissibleInput
// unless g >= 0, g >= 1 on U1 and g = 0 on U2.
std::vector<double> transfer_G(const std::vector<double>& g, const Graph& graph, const std::vector<int>& U1,
                               const std::vector<int>& U2, double tol = 1e-9);

}  // namespace confdim
