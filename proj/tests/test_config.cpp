#include "doctest.h"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cascade/cli.hpp"
#include "cascade/io.hpp"

using namespace cascade;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream f(path);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

const char* kChannelConfig = R"(
# minimal channel setup
[geometry]
d = 1.0
tau = 1.0
profile = none
gamma0 = line
gamma0_params = 0

[physics]
nu = 1.0

[data]
inflow = constant
inflow_params = 1 0

[discretization]
target_h = 0.25
levels = 2

[solver]
method = schur

[output]
directory = out_test
fields = false
)";

}  // namespace

TEST_CASE("minimal config parses with defaults") {
  const RunConfig cfg = parse_config(kChannelConfig);
  CHECK(cfg.d == 1.0);
  CHECK(cfg.inflow == "constant");
  CHECK(cfg.inflow_params.size() == 2);
  CHECK(cfg.levels == 2);
  CHECK(cfg.linear_method() == LinearMethod::Schur);
}

TEST_CASE("negative viscosity fails validation naming the field") {
  std::string text = kChannelConfig;
  const auto pos = text.find("nu = 1.0");
  text.replace(pos, 8, "nu = -1 ");
  try {
    parse_config(text);
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("nu") != std::string::npos);
  }
}

TEST_CASE("unknown keys are errors naming the key and line") {
  std::string text = kChannelConfig;
  const auto pos = text.find("nu = 1.0");
  text.replace(pos, 8, "viscocity = 1");
  try {
    parse_config(text);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    const std::string what = e.what();
    CHECK(what.find("viscocity") != std::string::npos);
    CHECK(what.find("line") != std::string::npos);
  }
}

TEST_CASE("malformed syntax and unknown sections are rejected") {
  CHECK_THROWS_AS(parse_config("[geometry]\nd 1.0\n"), ParseError);
  CHECK_THROWS_AS(parse_config("[nope]\na = 1\n"), ParseError);
  CHECK_THROWS_AS(parse_config("d = 1.0\n"), ParseError);
  CHECK_THROWS_AS(parse_config("[physics]\nnu = abc\n"), ParseError);
  CHECK_THROWS_AS(parse_config("[geometry]\nprofile = decagon\n"), ValidationError);
}

TEST_CASE("solve command produces artifacts and passes its gates") {
  RunConfig cfg = parse_config(kChannelConfig);
  cfg.fields = true;
  cfg.vtk = true;
  cfg.directory = "out_test_solve";
  const int status = dispatch("solve", cfg);
  CHECK(status == 0);

  // every artifact begins with a version header line
  const std::string csv = read_file("out_test_solve/summary.csv");
  CHECK(csv.rfind("# cascade-csv v1\n", 0) == 0);
  CHECK(csv.find(kCsvHeader) != std::string::npos);
  CHECK(read_file("out_test_solve/velocity.field").rfind("cascade-field v1", 0) == 0);
  CHECK(read_file("out_test_solve/pressure.field").rfind("cascade-field v1", 0) == 0);
  CHECK(read_file("out_test_solve/solution.vtk").rfind("# vtk DataFile", 0) == 0);

  // field file round trip is bit exact
  std::string kind;
  const auto vals = load_field_values("out_test_solve/velocity.field", &kind);
  CHECK(kind == "velocity");
  CHECK(vals.size() > 0);
  std::filesystem::remove_all("out_test_solve");
}

TEST_CASE("mesh and convergence commands run end to end") {
  RunConfig cfg = parse_config(kChannelConfig);
  cfg.directory = "out_test_cmd";
  cfg.case_id = "constant-flow";
  cfg.levels = 3;
  CHECK(dispatch("mesh", cfg, 0) == 0);
  CHECK(dispatch("convergence", cfg) == 0);
  const std::string csv = read_file("out_test_cmd/convergence.csv");
  int rows = 0;
  for (char ch : csv) rows += ch == '\n';
  CHECK(rows == 2 + cfg.levels);  // version line + header + one row per level
  std::filesystem::remove_all("out_test_cmd");
}

TEST_CASE("single-thread reruns are byte identical") {
  RunConfig cfg = parse_config(kChannelConfig);
  cfg.case_id = "stream";
  cfg.levels = 3;
  cfg.directory = "out_det_a";
  REQUIRE(dispatch("convergence", cfg) == 0);
  cfg.directory = "out_det_b";
  REQUIRE(dispatch("convergence", cfg) == 0);
  CHECK(read_file("out_det_a/convergence.csv") == read_file("out_det_b/convergence.csv"));
  std::filesystem::remove_all("out_det_a");
  std::filesystem::remove_all("out_det_b");
}

TEST_CASE("dq-check runs the solve first, then reports") {
  RunConfig cfg = parse_config(kChannelConfig);
  cfg.case_id = "stream";
  cfg.directory = "out_dq";
  cfg.target_h = 0.15;
  cfg.levels = 2;
  CHECK(dispatch("dq-check", cfg) == 0);
  CHECK(read_file("out_dq/dq.csv").rfind("# cascade-csv v1", 0) == 0);
  std::filesystem::remove_all("out_dq");
}

TEST_CASE("coordinate matrix export carries a version header") {
  const auto dom = build_domain(1.0, 1.0, ProfileCurve::empty(), Gamma0Curve::line(0.0, 0.0));
  const Discretization disc{generate_mesh(dom, 0.4)};
  save_matrix_coo(disc.divergence, "coo_test.txt");
  const std::string text = read_file("coo_test.txt");
  CHECK(text.rfind("cascade-coo v1", 0) == 0);
  std::remove("coo_test.txt");
}

TEST_CASE("unknown command is an error") {
  const RunConfig cfg = parse_config(kChannelConfig);
  CHECK_THROWS_AS(dispatch("frobnicate", cfg), ValidationError);
}
