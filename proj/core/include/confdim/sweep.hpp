#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "confdim/energy.hpp"
#include "confdim/network.hpp"

namespace confdim {

// The energy/modulus problem of one w restricted to Omega(S^k(Gamma_N2(w)))
// plus the vertices one edge outside it.  f vanishes outside the region, so
// values agree with the problem on the whole level graph.
struct LocalProblem {
  Graph graph;
  std::vector<int> U1, U2;
  std::vector<int> global;  // local vertex -> vertex of the level network
};

// net must be the level |w| + k network of `family`; its adjacency may be
// passed in to avoid rebuilding it per call.
LocalProblem local_problem(const HorizontalNetwork& net, const PartitionFamily& family, const Address& w, int N1,
                           int N2, int k, const std::vector<std::vector<int>>* adjacency = nullptr);

enum class WitnessPolicy { AllAtLevel, SymmetryReduced };
std::string to_string(WitnessPolicy p);
WitnessPolicy parse_witness_policy(const std::string& s);  // "all" | "symmetry"

struct WitnessClass {
  Address representative;        // smallest member
  std::vector<Address> members;  // sorted
};

// Cells of `level` grouped by the presence pattern of the surrounding cells
// within `radius`, up to the symmetries of the family (dihedral group of the
// square for carpet and square-full, reflection for interval and Cantor).
// Families without a declared symmetry get singleton classes.
std::vector<WitnessClass> witness_classes(const PartitionFamily& family, int level, int radius,
                                          WitnessPolicy policy);

struct SweepConfig {
  ProperSystem system = ProperSystem::cell_graph(1);
  int N1 = 0, N2 = 2;
  std::vector<double> p_grid{2.0};
  std::vector<int> k_list{1};
  int level = 2;  // candidate w are the cells of this level
  WitnessPolicy policy = WitnessPolicy::SymmetryReduced;
  bool energy = true, modulus = false;
  unsigned threads = 0;  // 0: CONFDIM_THREADS, else hardware concurrency
  bool keep_minimizers = false;
  EnergyOptions energy_options;
  ModulusOptions modulus_options;
};

struct WitnessValue {
  double p = 0;
  int k = 0;
  Address w;                  // class representative
  std::size_t multiplicity = 1;
  double E = 0, M = 0;        // NaN when not computed or failed
  double E_residual = 0, M_residual = 0;
  bool converged = true;
  int L = 0;                  // max degree of the local graph
  std::size_t vertices = 0, edges = 0;
  std::string error;          // error code of a failed solve
  std::vector<double> minimizer;  // with keep_minimizers, indexed by local vertex
};

struct SweepCell {
  double p = 0;
  int k = 0;
  Address witness_E, witness_M;  // smallest address attaining the max
  double E = 0, M = 0;
  double residual = 0;
  std::size_t candidates = 0, errors = 0;
};

struct EnergySweep {
  ProperSystem system;
  std::string family;
  int N1 = 0, N2 = 0, N = 1, level = 0;
  std::vector<double> grid;
  std::vector<int> depths;
  bool has_energy = false, has_modulus = false;
  std::vector<SweepCell> cells;        // p-major, then k, in grid order
  std::vector<WitnessValue> details;   // per class representative

  const SweepCell& cell(double p, int k) const;
  std::vector<double> energy_series(double p) const;   // over depths
  std::vector<double> modulus_series(double p) const;
  void write_csv(std::ostream& out) const;  // p,k,witness_w,E_value,M_value,solver_residual
  void write_json(std::ostream& out, bool with_minimizers = false) const;
};

unsigned resolve_threads(unsigned requested);

// Throws std::invalid_argument for N2 <= N1, N1 < 0, an empty grid or depth
// list; DepthExceeded when level + k passes the family horizon.  Solver
// errors of single cells are recorded in the details, not thrown.
EnergySweep run_sweep(const PartitionFamily& family, const SweepConfig& config);
EnergySweep energy_sweep(const PartitionFamily& family, SweepConfig config);
EnergySweep modulus_sweep(const PartitionFamily& family, SweepConfig config);

}  // namespace confdim
