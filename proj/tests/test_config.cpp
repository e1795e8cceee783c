#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "twisttube/commands.hpp"
#include "twisttube/config.hpp"
#include "twisttube/errors.hpp"

using namespace twisttube;

namespace {

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::filesystem::path scratch(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / "twisttube_tests" / name;
  std::filesystem::remove_all(p);
  return p;
}

}  // namespace

TEST_CASE("defaults") {
  const RunConfig c = parse_config("");
  CHECK(std::holds_alternative<shape::Disc>(c.shape));
  CHECK(c.seed == 42);
  CHECK(c.n_q == 33);
  CHECK(c.sigma == 1.5);
  CHECK_FALSE(c.c.has_value());
}

TEST_CASE("full document") {
  const RunConfig c = parse_config(R"(
shape:
  type: ribbon
  level: 2
  width: 0.15
grid: {h: 0.015625, boundary: staircase, resolutions: [0.03125, 0.015625]}
profile: {beta0: 2, amplitude: 0.01, half_width: 1.5}
bound: {sigma: 2.5, c: 0.001, n_q: 17, cap: 32}
solver: {tol: 1.0e-9, max_iterations: 100, seed: 7}
direct: {enabled: true, half_length: 4, n_s: 64, cap: 8, memory_budget_gib: 1}
sweep: {axis: ribbon-k, values: [1, 2]}
output: {dir: results}
run: {workers: 3, verbosity: 1}
)");
  const auto* r = std::get_if<shape::Ribbon>(&c.shape);
  REQUIRE(r != nullptr);
  CHECK(r->level == 2);
  CHECK(r->width == 0.15);
  CHECK(c.h == 0.015625);
  CHECK(c.boundary == BoundaryTreatment::staircase);
  CHECK(c.resolutions.size() == 2);
  CHECK(c.beta0 == 2.0);
  CHECK(*c.c == 0.001);
  CHECK(c.n_q == 17);
  CHECK(c.seed == 7);
  CHECK(c.direct_enabled);
  CHECK(c.direct_n_s == 64);
  CHECK(*c.sweep_axis == SweepAxis::ribbon_k);
  CHECK(c.output_dir == "results");
  CHECK(c.workers == 3);
}

TEST_CASE("errors carry positions") {
  try {
    parse_config("shape: {type: disc}\ngrid:\n  h: -0.1\n");
    FAIL("accepted a negative h");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("grid.h") != std::string::npos);
    CHECK(e.line() == 3);
    CHECK(e.column() == 6);
  }
  try {
    parse_config("grid:\n  h: 0.1\n  spacing: 2\n");
    FAIL("accepted an unknown key");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("grid.spacing") != std::string::npos);
    CHECK(e.line() == 3);
    CHECK(e.column() == 3);
  }
  CHECK_THROWS_AS(parse_config("bound: {n_q: 4}"), ConfigError);
  CHECK_THROWS_AS(parse_config("bound: {sigma: 0.25}"), ConfigError);
  CHECK_THROWS_AS(parse_config("shape: {type: ribbon, width: 1.5}"), ConfigError);
  CHECK_THROWS_AS(parse_config("shape: {type: square}"), ConfigError);
  CHECK_THROWS_AS(parse_config("grid: {h: abc}"), ConfigError);
  CHECK_THROWS_AS(parse_config("grid: [1, 2"), ConfigError);
  CHECK_THROWS_AS(parse_config("sweep: {axis: sideways}"), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/config.yaml"), ConfigError);
}

TEST_CASE("log-log slope") {
  CHECK(loglog_slope({1, 2, 4}, {3, 12, 48}) == doctest::Approx(2.0));
  CHECK(std::isnan(loglog_slope({1}, {1})));
  CHECK(loglog_slope({0, 1, 2}, {5, 1, 8}) == doctest::Approx(3.0));
}

TEST_CASE("cross-section command writes the field and spectrum") {
  RunConfig c;
  c.h = 1.0 / 16;
  c.output_dir = scratch("xs").string();
  std::ostringstream out;
  std::ostringstream err;
  CHECK(run_command("cross-section", c, out, err) == kExitOk);
  CHECK(out.str().find("E = 5.7") != std::string::npos);
  const std::string field = read_file(std::filesystem::path(c.output_dir) / "field_f.csv");
  CHECK(field.rfind("i,j,t2,t3,f,h\n", 0) == 0);
  CHECK(std::filesystem::exists(std::filesystem::path(c.output_dir) / "spectrum.csv"));
  CHECK(std::filesystem::exists(std::filesystem::path(c.output_dir) / "report.json"));
}

TEST_CASE("bound command with zero amplitude") {
  RunConfig c;
  c.shape = shape::Ellipse{0.3};
  c.h = 0.125;
  c.n_q = 9;
  c.output_dir = scratch("bound0").string();
  std::ostringstream out;
  std::ostringstream err;
  CHECK(run_command("bound", c, out, err) == kExitOk);
  const std::string report = read_file(std::filesystem::path(c.output_dir) / "report.json");
  CHECK(report.find("\"bound\": 0.0") != std::string::npos);
  const std::string per_s = read_file(std::filesystem::path(c.output_dir) / "per_s.csv");
  CHECK(per_s.rfind("s,n_neg,trace_power,h\n", 0) == 0);
}

TEST_CASE("exit codes") {
  std::ostringstream out;
  std::ostringstream err;
  RunConfig c;
  c.h = 0.125;
  c.output_dir = scratch("codes").string();
  c.c = 1.0;  // outside (0, gamma/3)
  CHECK(run_command("bound", c, out, err) == kExitConfig);
  c.c.reset();
  c.direct_enabled = false;
  CHECK(run_command("verify", c, out, err) == kExitConfig);
  CHECK(run_command("teleport", c, out, err) == kExitConfig);
  c.direct_enabled = true;
  c.direct_half_length = 1.0;
  c.amplitude = 0.001;
  CHECK(run_command("direct", c, out, err) == kExitConfig);
}

TEST_CASE("sweep with one value has no slope") {
  RunConfig c;
  c.shape = shape::Ellipse{0.1};
  c.h = 0.125;
  c.n_q = 5;
  c.amplitude = 0.002;
  c.sweep_axis = SweepAxis::ellipse_eps;
  c.sweep_values = {0.2};
  c.output_dir = scratch("sweep1").string();
  std::ostringstream out;
  std::ostringstream err;
  CHECK(run_command("sweep", c, out, err) == kExitOk);
  std::istringstream csv(read_file(std::filesystem::path(c.output_dir) / "sweep.csv"));
  std::string header;
  std::string row;
  std::getline(csv, header);
  std::getline(csv, row);
  CHECK(header == "value,bound,n_neg_s0,E,d,angular_energy_ratio,h,slope,status");
  CHECK(row.find(",,ok") != std::string::npos);
  std::string extra;
  CHECK_FALSE(std::getline(csv, extra));
}

TEST_CASE("sweep fails only when every row fails") {
  RunConfig c;
  c.shape = shape::Ellipse{0.1};
  c.h = 0.125;
  c.n_q = 5;
  c.sweep_axis = SweepAxis::resolution;
  c.sweep_values = {-1.0, 0.125};
  c.output_dir = scratch("sweep2").string();
  std::ostringstream out;
  std::ostringstream err;
  CHECK(run_command("sweep", c, out, err) == kExitOk);
  c.sweep_values = {-1.0, -2.0};
  CHECK(run_command("sweep", c, out, err) == kExitFailure);
}
