#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "confdim/family_io.hpp"
#include "confdim/sweep.hpp"
#include "json.hpp"

namespace confdim::cli {

inline constexpr const char* kVersion = CONFDIM_VERSION;

// Everything a subcommand needs, resolved and validated up front.  Built from
// a key = value file plus overrides; unknown keys are rejected.
struct RunConfig {
  KeyValues family_keys;  // kind, max_depth, removed, ... or loaded from family_file
  std::string weight = "";  // empty: geometric 1/base
  std::string system = "cells";
  int N = 1, N1 = 0, N2 = 2;
  std::vector<double> p_grid{2.0};
  std::vector<int> k_list{1};
  int level = 2;
  std::string policy = "symmetry";
  std::string modulus_method = "auto";
  int depth = -1;          // partition/resolution depth, -1: family default
  int network_level = 2;
  int M = 1;
  std::string pairs;       // metric pairs file
  std::uint64_t seed = 1;
  std::size_t samples = 200;
  double p_low = 1.5, p_high = 2.5, tol = 0.01;
  std::string out = "confdim-out";
  unsigned threads = 0;
  bool minimizers = false;

  // Canonical text of every setting that influences results.
  std::string canonical() const;
  std::string hash() const;  // 16 hex digits of FNV-1a over canonical()
};

// Applies the file (if any) and then the overrides in order.  Throws
// std::invalid_argument or ParseError on anything malformed.
RunConfig load_config(const std::optional<std::string>& path, const std::vector<std::string>& overrides);

// Family and weight built from a config; throw on invalid input.
PartitionFamily build_family(const RunConfig& c);
WeightFunction build_weight(const RunConfig& c, const PartitionFamily& f);
SweepConfig sweep_config(const RunConfig& c, bool energy, bool modulus);

// Depth caps relevant to a subcommand, checked against max_depth.
struct DepthCaps {
  int max_depth = 0;
  std::vector<std::pair<std::string, int>> used;
};
DepthCaps check_caps(const RunConfig& c, const PartitionFamily& f, const std::string& command);

// "# tool=confdim version=... config=... caps=max_depth:6,level:2" line for
// text outputs, and the same data as a JSON object.
std::string header_line(const RunConfig& c, const DepthCaps& caps);
nlohmann::ordered_json header_json(const RunConfig& c, const DepthCaps& caps);

}  // namespace confdim::cli
