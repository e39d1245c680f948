#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "common.hpp"
#include "vfpk/config.hpp"
#include "vfpk/diagnostics.hpp"
#include "vfpk/errors.hpp"
#include "vfpk/experiments.hpp"
#include "vfpk/snapshot.hpp"

using namespace vfpk;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("vfpk_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const char* kSmall = R"(
seed = 7
[potential]
family = Quadratic
[kernel]
family = Synchrotron
strength = 0.2   # weak
[grid]
n_x = 64
half_width = 9
[velocity]
n_v = 6
nu = 1.5
[evolve]
dt = 0.01
t_end = 0.2
output_stride = 5
[perturb]
mode = bump
amplitude = 0.01
)";

}  // namespace

TEST_CASE("config parse, serialize and round-trip") {
  const RunConfig c = parse_config(kSmall);
  CHECK(c.seed == 7);
  CHECK(c.kernel.family == "Synchrotron");
  CHECK(c.kernel.strength == 0.2);
  CHECK(c.grid.n_x == 64);
  CHECK(c.velocity.nu == 1.5);
  CHECK(c.evolve.output_stride == 5);
  CHECK(c.steady.tol == RunConfig{}.steady.tol);
  RunConfig d = c;
  d.experiment.hs = {0.25, 1.0 / 3.0};
  set_config_value(d, "sweep.kernel.strength", "0.1, 0.2");
  const RunConfig back = parse_config(serialize_config(d));
  CHECK(back == d);
  CHECK(serialize_config(back) == serialize_config(d));
}

TEST_CASE("config errors name the offending key") {
  auto path_of = [](const std::string& text) {
    try {
      parse_config(text);
    } catch (const ConfigError& e) {
      return std::string(e.what());
    }
    return std::string("no error");
  };
  CHECK(path_of("[kernel]\nfamliy = Zero\n").find("kernel.famliy") != std::string::npos);
  CHECK(path_of("[kernel]\nfamily = Yukawa\n").find("kernel.family") != std::string::npos);
  CHECK(path_of("[grid]\nn_x = 12.5\n").find("grid.n_x") != std::string::npos);
  CHECK(path_of("[velocity]\nnu = -1\n").find("velocity.nu") != std::string::npos);
  CHECK(path_of("[evolve]\nlimiter = superbee\n").find("evolve.limiter") != std::string::npos);
  CHECK(path_of("[sweep]\nkernel.strength = 0.1, abc\n").find("kernel.strength") != std::string::npos);
  CHECK(path_of("[sweep]\nnot.a.key = 1\n").find("sweep.not.a.key") != std::string::npos);
  CHECK(path_of("[perturb]\nmode = wiggle\n").find("perturb.mode") != std::string::npos);
  CHECK(path_of("just words\n").find("line 1") != std::string::npos);
}

TEST_CASE("sweep points: product, duplicates, empty") {
  RunConfig c;
  CHECK(sweep_points(c).size() == 1);
  CHECK(sweep_points(c).front().empty());
  set_config_value(c, "sweep.kernel.strength", "0.1, 0.2, 1e-1");
  set_config_value(c, "sweep.velocity.nu", "1, 2");
  std::vector<std::string> warnings;
  const auto pts = sweep_points(c, &warnings);
  CHECK(pts.size() == 4);
  REQUIRE(warnings.size() == 1);
  CHECK(warnings[0].find("1e-1") != std::string::npos);
  CHECK(pts[0] == std::vector<std::pair<std::string, std::string>>{{"kernel.strength", "0.1"}, {"velocity.nu", "1"}});
  RunConfig big;
  set_config_value(big, "sweep.grid.n_x", "2,3,4,5,6,7,8,9,10,11,12");
  set_config_value(big, "sweep.velocity.n_v", "1,2,3,4,5,6,7,8,9,10,11");
  set_config_value(big, "sweep.seed", "1,2,3,4,5,6,7,8,9,10,11,12,13,14,15,16,17,18,19,20,21,22,23,24,25,26,27,28,29,30,31,32,33,34,35,36,37,38,39,40,41,42,43,44,45,46,47,48,49,50,51,52,53,54,55,56,57,58,59,60,61,62,63,64,65,66,67,68,69,70,71,72,73,74,75,76,77,78,79,80,81,82,83,84");
  CHECK_THROWS_AS(validate_config(big), ConfigError);
}

TEST_CASE("density snapshot round-trip is byte-identical") {
  const auto g = SpatialGrid::uniform(2, 12, 3.0);
  std::mt19937_64 rng(2);
  DensitySnapshot s{g, testing::random_density(g, rng), testing::random_field(g.size(), rng)};
  std::stringstream a;
  write_density_snapshot(a, s);
  const std::string bytes = a.str();
  CHECK(bytes.substr(0, 9) == "VFPK-RHO1");
  CHECK(bytes.size() == 9 + 4 + 2 * 4 + 2 * 8 + 2 * 144 * 8);
  std::stringstream in(bytes);
  const auto r = read_density_snapshot(in);
  CHECK(r.grid.dim() == 2);
  CHECK(r.grid.nodes(1) == 12);
  CHECK(r.rho == s.rho);
  CHECK(r.v_star == s.v_star);
  std::stringstream b;
  write_density_snapshot(b, r);
  CHECK(b.str() == bytes);
  std::stringstream bad("VFPK-XXX1");
  CHECK_THROWS_AS(read_density_snapshot(bad), IoError);
}

TEST_CASE("state snapshot round-trip is byte-identical") {
  const auto g = SpatialGrid::uniform(1, 20, 5.0);
  std::mt19937_64 rng(6);
  PhaseSpaceState s(g, 5);
  s.coeffs = testing::random_coeffs(5, 20, rng);
  s.time = 0.375;
  std::stringstream a;
  write_state_snapshot(a, s, 2.5);
  const std::string bytes = a.str();
  CHECK(bytes.size() == 9 + 8 + 3 * 8 + 100 * 8);
  std::stringstream in(bytes);
  const auto r = read_state_snapshot(in);
  CHECK(r.nu == 2.5);
  CHECK(r.state.time == 0.375);
  CHECK(r.state.coeffs == s.coeffs);
  std::stringstream b;
  write_state_snapshot(b, r.state, r.nu);
  CHECK(b.str() == bytes);
  std::stringstream truncated(bytes.substr(0, bytes.size() - 3));
  CHECK_THROWS_AS(read_state_snapshot(truncated), IoError);
}

TEST_CASE("run_steady with the zero kernel") {
  RunConfig c;
  c.grid.n_x = 128;
  c.output_dir = scratch("steady").string();
  CHECK(run_steady(c, {true, 1}) == kExitOk);
  const auto snap = read_density_snapshot((fs::path(c.output_dir) / "steady.rho").string());
  CHECK(snap.grid.size() == 128);
  const std::string conv = slurp(fs::path(c.output_dir) / "convergence.csv");
  CHECK(conv.rfind("iteration,residual,contraction_factor,zeta,free_energy\n", 0) == 0);
  CHECK(std::count(conv.begin(), conv.end(), '\n') == 2);  // header + one iteration
}

TEST_CASE("evolve outputs are deterministic and rectangular") {
  RunConfig c = parse_config(kSmall);
  c.perturb.mode = "rough";
  c.output_dir = scratch("det_a").string();
  CHECK(run_linear(c, {true, 1}) == kExitOk);
  RunConfig c2 = c;
  c2.output_dir = scratch("det_b").string();
  CHECK(run_linear(c2, {true, 1}) == kExitOk);
  const std::string a = slurp(fs::path(c.output_dir) / "series.csv");
  CHECK(a == slurp(fs::path(c2.output_dir) / "series.csv"));
  CHECK(slurp(fs::path(c.output_dir) / "final.pss") == slurp(fs::path(c2.output_dir) / "final.pss"));
  std::istringstream is(a);
  const auto s = DiagnosticSeries::read_csv(is);
  CHECK(s.rows.size() == 5);  // t = 0, 0.05, ..., 0.2
  CHECK(std::isnan(s.values("h1x_fstar")[0]));
  CHECK(std::isfinite(s.values("h1x_fstar")[1]));
  // A different seed gives different rough data.
  RunConfig c3 = c;
  c3.seed = 8;
  c3.output_dir = scratch("det_c").string();
  CHECK(run_linear(c3, {true, 1}) == kExitOk);
  CHECK(a != slurp(fs::path(c3.output_dir) / "series.csv"));

  RunConfig n = parse_config(kSmall);
  n.perturb.mode = "shifted_gaussian";
  n.perturb.center = 0.5;
  n.perturb.velocity_shift = 0.3;
  n.output_dir = scratch("nl").string();
  CHECK(run_evolve(n, {true, 1}) == kExitOk);
  std::ifstream ns(fs::path(n.output_dir) / "series.csv");
  const auto nsr = DiagnosticSeries::read_csv(ns);
  CHECK(nsr.column("moment_x") >= 0);
  CHECK(nsr.values("moment_x")[0] == doctest::Approx(0.5).epsilon(1e-6));
}

TEST_CASE("exit codes") {
  CHECK(exit_code_for(ConfigError("kernel.family", "bad")) == kExitConfig);
  CHECK(exit_code_for(CflError(1.0, 0.5)) == kExitCfl);
  RunConfig c;
  c.grid.dim = 2;
  c.grid.n_x = 16;
  c.output_dir = scratch("dim2").string();
  CHECK_THROWS_AS(run_evolve(c, {true, 1}), ConfigError);
  RunConfig s = parse_config(kSmall);
  s.evolve.dt = 1.0;
  s.output_dir = scratch("cfl").string();
  int code = -1;
  try {
    code = run_linear(s, {true, 1});
  } catch (const std::exception& e) {
    code = exit_code_for(e);
  }
  CHECK(code == kExitCfl);
}

TEST_CASE("sweep writes a manifest") {
  RunConfig c = parse_config(kSmall);
  c.evolve.t_end = 0.05;
  set_config_value(c, "sweep.kernel.strength", "0.1, 0.2, 0.2");
  c.output_dir = scratch("sweep").string();
  CHECK(run_sweep(c, {true, 2}) == kExitOk);
  const std::string m = slurp(fs::path(c.output_dir) / "manifest.csv");
  CHECK(m.rfind("point,kernel.strength,status", 0) == 0);
  CHECK(std::count(m.begin(), m.end(), '\n') == 3);
  CHECK(fs::exists(fs::path(c.output_dir) / "point_0001" / "config.ini"));
  CHECK(load_config((fs::path(c.output_dir) / "point_0001" / "config.ini").string()).kernel.strength == 0.2);
}
