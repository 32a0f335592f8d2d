#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "test_util.hpp"
#include "upplane/cli.hpp"
#include "upplane/sample_io.hpp"

using namespace upplane;
using namespace upplane::cli;

namespace {

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(static_cast<bool>(in));
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_binary(const std::string& args) {
  const std::string cmd =
      std::string(UPPLANE_BIN) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  REQUIRE(status != -1);
  return WEXITSTATUS(status);
}

std::vector<std::vector<std::string>> parse_csv(const std::string& body) {
  std::vector<std::vector<std::string>> rows;
  std::stringstream ss(body);
  std::string line;
  while (std::getline(ss, line)) {
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    rows.push_back(std::move(cells));
  }
  return rows;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("bounds command writes the curve table and plane") {
  testutil::TempDir tmp("cli_bounds");
  GlobalOptions g;
  g.out_dir = tmp.path();
  g.no_timestamp = true;

  BoundsArgs args;
  args.dims = {1, 10, 100};
  args.p_min = 0.0;
  args.p_max = 5.0;
  args.p_count = 101;
  CHECK(cmd_bounds(args, g) == 0);

  double prev_eta_at_one = 0.0;
  for (int d : args.dims) {
    const auto csv = parse_csv(
        slurp(tmp.path() / ("bounds_d" + std::to_string(d) + ".csv")));
    REQUIRE(csv.size() == 102);  // header + grid
    CHECK(csv[0] == std::vector<std::string>{"P", "eta", "lower", "upper"});
    CHECK(std::stod(csv[1][1]) == doctest::Approx(2.0));  // eta(0) = 2
    // Row at P = 1 (grid step 0.05 -> index 20, +1 for the header).
    const double eta_at_one = std::stod(csv[21][1]);
    CHECK(eta_at_one > prev_eta_at_one);
    prev_eta_at_one = eta_at_one;
    CHECK(std::filesystem::exists(
        tmp.path() / ("plane_d" + std::to_string(d) + ".svg")));
  }
}

TEST_CASE("bounds command validates its grid") {
  GlobalOptions g;
  BoundsArgs args;
  args.p_min = 2.0;
  args.p_max = 1.0;
  CHECK_THROWS_WITH_AS(cmd_bounds(args, g), doctest::Contains("UsageError"),
                       Error);
}

TEST_CASE("verify-example1 command passes at its tolerance") {
  testutil::TempDir tmp("cli_ex1");
  GlobalOptions g;
  g.out_dir = tmp.path();
  VerifyExample1Args args;
  args.grid = 400000;  // keep the unit suite quick; acceptance uses more
  CHECK(cmd_verify_example1(args, g) == 0);
  const auto csv = parse_csv(slurp(tmp.path() / "verify_example1.csv"));
  CHECK(csv.size() == 1 + 18);
  CHECK(csv[0][0] == "P");
}

TEST_CASE("entropy and divergence commands emit JSON") {
  testutil::TempDir tmp("cli_entropy");
  GlobalOptions g;
  g.out_dir = tmp.path();

  const auto p_path = tmp.path() / "p.f32";
  const auto q_path = tmp.path() / "q.f32";
  sample_io::save_samples_f32(p_path, testutil::standard_gaussian(500, 1, 1));
  sample_io::save_samples_f32(q_path, testutil::standard_gaussian(500, 1, 2));

  EntropyArgs en;
  en.input = p_path;
  CHECK(cmd_entropy(en, g) == 0);
  CHECK(slurp(tmp.path() / "entropy.json").find("entropy_power") !=
        std::string::npos);

  DivergenceArgs dv;
  dv.p_input = p_path;
  dv.q_input = q_path;
  CHECK(cmd_divergence(dv, g) == 0);
  CHECK(slurp(tmp.path() / "divergence.json").find("renyi_half") !=
        std::string::npos);
}

TEST_CASE("deterministic outputs for a fixed config and seed") {
  testutil::TempDir tmp_a("cli_det_a");
  testutil::TempDir tmp_b("cli_det_b");
  GlobalOptions g;
  g.seed = 41;
  g.no_timestamp = true;

  BoundsArgs args;
  args.dims = {2};
  g.out_dir = tmp_a.path();
  CHECK(cmd_bounds(args, g) == 0);
  g.out_dir = tmp_b.path();
  CHECK(cmd_bounds(args, g) == 0);
  CHECK(slurp(tmp_a.path() / "bounds_d2.csv") ==
        slurp(tmp_b.path() / "bounds_d2.csv"));
  CHECK(slurp(tmp_a.path() / "plane_d2.svg") ==
        slurp(tmp_b.path() / "plane_d2.svg"));
}

TEST_CASE("binary exit codes") {
  testutil::TempDir tmp("cli_bin");
  const std::string out = " --out-dir " + tmp.path().string();

  SUBCASE("success path") {
    CHECK(run_binary("bounds --dims 1 --p-count 16" + out) == 0);
  }
  SUBCASE("usage errors exit 2") {
    CHECK(run_binary("bounds --p-min 2 --p-max 1" + out) == 2);
    CHECK(run_binary("definitely-not-a-command" + out) == 2);
    CHECK(run_binary("verify-gaussian --dims 16 --seeds 1" + out) == 2);
  }
  SUBCASE("runtime failures exit 1") {
    CHECK(run_binary("entropy --input " +
                     (tmp.path() / "missing.f32").string() + out) == 1);
  }
  SUBCASE("help exits 0") { CHECK(run_binary("--help") == 0); }
}

TEST_CASE("config file values apply beneath command-line flags") {
  testutil::TempDir tmp("cli_cfg");
  const auto cfg_path = tmp.path() / "cfg.json";
  std::ofstream(cfg_path) << R"({"p_count": 33, "dims": [3]})";

  const std::string out = " --out-dir " + tmp.path().string();
  CHECK(run_binary("--config " + cfg_path.string() + " bounds" + out) == 0);
  const auto rows = parse_csv(slurp(tmp.path() / "bounds_d3.csv"));
  CHECK(rows.size() == 34);  // config p_count respected

  CHECK(run_binary("--config " + cfg_path.string() +
                   " bounds --p-count 11" + out) == 0);
  const auto rows2 = parse_csv(slurp(tmp.path() / "bounds_d3.csv"));
  CHECK(rows2.size() == 12);  // flag wins over config
}

}  // TEST_SUITE
