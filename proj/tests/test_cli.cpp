#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "json.hpp"

namespace fs = std::filesystem;

namespace {

const fs::path& scratch() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / "confdim_cli_test";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

struct Run {
  int code = 0;
  std::string err;
};

Run run(const std::string& args, const std::string& env = "") {
  fs::path err = scratch() / "stderr.txt";
  std::string cmd = env + " " + CONFDIM_CLI + std::string(" ") + args + " > /dev/null 2> " + err.string();
  int status = std::system(cmd.c_str());
  Run r;
  r.code = WEXITSTATUS(status);
  std::ifstream in(err);
  std::ostringstream s;
  s << in.rdbuf();
  r.err = s.str();
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

std::string out_dir(const std::string& name) { return (scratch() / name).string(); }

}  // namespace

TEST_CASE("partition table and adjacency") {
  auto r = run("partition -s kind=carpet -s max_depth=2 -o " + out_dir("part"));
  REQUIRE(r.code == 0);
  auto cells = lines(slurp(scratch() / "part" / "cells.csv"));
  REQUIRE(cells.size() == 66);
  CHECK(cells[0].rfind("# tool=confdim version=", 0) == 0);
  CHECK(cells[1] == "address,level,lo0,hi0,lo0_f,hi0_f,lo1,hi1,lo1_f,hi1_f");
  CHECK(cells[2] == "1.1,2,0,1/9,0,0.111111111111,0,1/9,0,0.111111111111");
  auto rep = nlohmann::json::parse(slurp(scratch() / "part" / "minimality.json"));
  CHECK(rep["cells"] == 64);
  CHECK(rep["all_minimal"] == true);
  CHECK(rep["header"]["caps"]["max_depth"] == 2);
}

TEST_CASE("overlapping rectangles are a configuration error") {
  auto r = run("partition -s kind=square-with-holes -s max_depth=3 -s 'removed=0 2/3 0 2/3' "
               "-s 'removed=1/3 1 1/3 1' -o " +
               out_dir("bad"));
  CHECK(r.code == 2);
  auto j = nlohmann::json::parse(r.err);
  CHECK(j["error"] == "InvalidFamily");
  CHECK(j["message"].get<std::string>().find("(SQ2)") != std::string::npos);
}

TEST_CASE("dyadic cube table") {
  fs::path conf = scratch() / "dyadic.conf";
  {
    std::ofstream f(conf);
    f << "kind = dyadic-cubes\nmax_depth = 4\n";
    for (int i = 0; i < 100; ++i) f << "point = (" << (i * 37) % 101 << "/101," << (i * 53) % 97 << "/97)\n";
  }
  REQUIRE(run("partition -c " + conf.string() + " -o " + out_dir("dy")).code == 0);
  auto cells = lines(slurp(scratch() / "dy" / "cells.csv"));
  REQUIRE(cells.size() > 3);
  for (std::size_t i = 2; i < cells.size(); ++i) CHECK(cells[i].find(",4,") != std::string::npos);
}

TEST_CASE("metric rows") {
  fs::path pairs = scratch() / "pairs.txt";
  std::ofstream(pairs) << "# x y\n0 1/2\n1/3 1/3\n";
  REQUIRE(run("metric -s kind=interval -s max_depth=6 -s M=1 -s pairs=" + pairs.string() + " -o " +
              out_dir("met"))
              .code == 0);
  auto rows = lines(slurp(scratch() / "met" / "metric.csv"));
  REQUIRE(rows.size() == 4);
  CHECK(rows[2] == "\"(0)\",\"(1/2)\",1,1/4,0.25,1/2,0.5,1/2,0.5,ok");
  CHECK(rows[3] == "\"(1/3)\",\"(1/3)\",1,0,0,0,0,0,0,ok");
  REQUIRE(run("metric -s kind=interval -s max_depth=2 -s pairs=" + pairs.string() + " -o " + out_dir("met2"))
              .code == 0);
  rows = lines(slurp(scratch() / "met2" / "metric.csv"));
  CHECK(rows[2].find("unresolved") != std::string::npos);
  std::ofstream(pairs) << "0 3/2\n";
  CHECK(run("metric -s kind=interval -s max_depth=4 -s pairs=" + pairs.string() + " -o " + out_dir("met3")).code ==
        2);
}

TEST_CASE("configuration errors exit 2, computation errors exit 3") {
  CHECK(run("energy -s kind=nothing").code == 2);
  CHECK(run("energy -s kind=carpet -s max_depth=3 -s k=2 -o " + out_dir("e")).code == 2);
  CHECK(run("energy -s kind=carpet -s max_depth=3 -s colour=blue -o " + out_dir("e")).code == 2);
  CHECK(run("energy -s kind=carpet -s max_depth=3 -s p=1 -o " + out_dir("e")).code == 2);
  CHECK(run("energy -s kind=carpet -s max_depth=3 -s N1=2 -o " + out_dir("e")).code == 2);
  CHECK(run("energy").code == 2);
  CHECK(run("frobnicate").code == 2);
  auto r = run("energy -s kind=interval -s max_depth=4 -s system=carpet-edges -o " + out_dir("e"));
  CHECK(r.code == 3);
  CHECK(nlohmann::json::parse(r.err)["error"] == "UnsupportedFamily");
}

TEST_CASE("sweeps are reproducible across thread counts") {
  std::string args = "modulus -s kind=carpet -s max_depth=4 -s k=1,2 -s p=1.5,2 ";
  REQUIRE(run(args + "-t 1 -o " + out_dir("s1")).code == 0);
  REQUIRE(run(args + "-o " + out_dir("s3"), "CONFDIM_THREADS=3").code == 0);
  for (auto f : {"modulus_sweep.csv", "modulus_sweep.json"})
    CHECK(slurp(scratch() / "s1" / f) == slurp(scratch() / "s3" / f));
  auto rows = lines(slurp(scratch() / "s1" / "modulus_sweep.csv"));
  CHECK(rows.size() == 6);
  CHECK(rows[1] == "p,k,witness_w,E_value,M_value,solver_residual");
}

TEST_CASE("dimension outputs") {
  REQUIRE(run("dimension -s kind=cantor -s max_depth=5 -s k=1..3 -o " + out_dir("cantor")).code == 0);
  auto j = nlohmann::json::parse(slurp(scratch() / "cantor" / "dimension.json"));
  CHECK(j["degenerate"] == true);
  CHECK(j["p_star"].is_null());
  REQUIRE(run("dimension -s kind=square-full -s max_depth=4 -s k=1,2 -s p_low=1.5 -s p_high=3 -s tol=0.1 -o " +
              out_dir("sq"))
              .code == 0);
  j = nlohmann::json::parse(slurp(scratch() / "sq" / "dimension.json"));
  CHECK(j["p_star"].get<double>() > 1.5);
  CHECK(j["p_star"].get<double>() < 3.0);
  CHECK(j["volume_bound"].get<double>() == doctest::Approx(2.0));
  CHECK(j["d_spectral"]["consistent"] == true);
  auto plot = lines(slurp(scratch() / "sq" / "dimension_plot.csv"));
  CHECK(plot[1] == "p,k,log_E");
  auto sweep = lines(slurp(scratch() / "sq" / "dimension_sweep.csv"));
  CHECK(sweep.size() == plot.size());
}

TEST_CASE("validate, resolution and network") {
  CHECK(run("validate -s kind=carpet -s max_depth=3 -o " + out_dir("v")).code == 0);
  CHECK(nlohmann::json::parse(slurp(scratch() / "v" / "validate.json"))["valid"] == true);
  CHECK(run("resolution -s kind=carpet -s max_depth=3 -o " + out_dir("r")).code == 0);
  auto r = nlohmann::json::parse(slurp(scratch() / "r" / "resolution.json"));
  CHECK(r["per_level"][2]["vertices"] == 64);
  CHECK(lines(slurp(scratch() / "r" / "resolution_edges.txt"))[0].rfind("# tool=confdim", 0) == 0);
  CHECK(run("network -s kind=carpet -s max_depth=3 -s system=carpet-corners -o " + out_dir("n")).code == 0);
  CHECK(nlohmann::json::parse(slurp(scratch() / "n" / "network.json"))["proper"] == true);
}
