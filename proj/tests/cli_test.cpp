// SPDX-License-Identifier: Apache-2.0
//
// End-to-end tests of the pumpmap binary: exit codes, file outputs, and the
// reproducibility contract, all through the public command line.
#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "pumpmap/voxelgrid.hpp"
#include "test_util.hpp"

namespace fs = std::filesystem;
using Catch::Approx;
using pumpmap::testutil::repo_path;

namespace {

const std::string kCli = PUMPMAP_CLI_PATH;
const std::string kDir = "/tmp/pumpmap_cli_test";

int run(const std::string& args, const std::string& stdout_file = "") {
  fs::create_directories(kDir);
  std::string cmd = kCli + " " + args;
  cmd += stdout_file.empty() ? " >/dev/null 2>&1" : " >" + stdout_file + " 2>&1";
  int rc = std::system(cmd.c_str());
  REQUIRE(WIFEXITED(rc));
  return WEXITSTATUS(rc);
}

int run_raw(const std::string& full_cmd) {
  fs::create_directories(kDir);
  int rc = std::system((full_cmd + " >/dev/null 2>&1").c_str());
  REQUIRE(WIFEXITED(rc));
  return WEXITSTATUS(rc);
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) out.push_back(line);
  return out;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream in(line);
  std::string cell;
  while (std::getline(in, cell, ',')) out.push_back(cell);
  return out;
}

std::string trace_args(const std::string& cfg, const std::string& out,
                       const std::string& extra = "") {
  return "trace --config " + repo_path(cfg) + " --rays 20000 --pitch 0.4 --out " + out + " " +
         extra;
}

} // namespace

TEST_CASE("cli: trace is reproducible and conserves energy") {
  std::string g1 = kDir + "/t1.vgd", g2 = kDir + "/t2.vgd", log = kDir + "/t1.log";
  REQUIRE(run(trace_args("configs/butt.cfg", g1, "--seed 7"), log) == 0);
  REQUIRE(run(trace_args("configs/butt.cfg", g2, "--seed 7")) == 0);
  CHECK(slurp(g1) == slurp(g2)); // byte-identical grids for a fixed seed

  // Budget printed on stdout: conservation residual at double precision.
  std::string text = slurp(log);
  auto pos = text.find("conservation");
  REQUIRE(pos != std::string::npos);
  double resid = 1.0;
  REQUIRE(std::sscanf(text.c_str() + pos, "conservation %lf", &resid) == 1);
  CHECK(std::abs(resid) <= 1e-9);

  // Manifest records the run and digests the outputs.
  std::string man = slurp(g1 + ".manifest.json");
  CHECK(man.find("\"subcommand\": \"trace\"") != std::string::npos);
  CHECK(man.find("\"sha256\"") != std::string::npos);

  // PUMPMAP_SEED is the fallback when --seed is absent.
  std::string g3 = kDir + "/t3.vgd";
  REQUIRE(run_raw("PUMPMAP_SEED=7 " + kCli + " " + trace_args("configs/butt.cfg", g3)) == 0);
  CHECK(slurp(g3) == slurp(g1));
}

TEST_CASE("cli: projection csv integrates back to the grid total") {
  std::string g = kDir + "/proj.vgd";
  REQUIRE(run(trace_args("configs/butt.cfg", g, "--seed 3 --project z --project y")) == 0);
  pumpmap::VoxelGrid grid = pumpmap::VoxelGrid::read(g);
  double total = grid.total(); // crystal region is exactly 1 W; boundary
                               // voxels outside the tag add a little more
  CHECK(grid.total_in_region(pumpmap::Region::Crystal) == Approx(1.0).margin(1e-12));
  CHECK(total == Approx(1.0).margin(1e-3));
  double pitch = grid.pitch;
  for (const std::string& ax : {"z", "y"}) {
    double sum = 0.0;
    for (const auto& line : lines_of(slurp(g + ".proj_" + ax + ".csv")))
      for (const auto& cell : split_csv(line)) sum += std::stod(cell);
    CHECK(sum * pitch * pitch * pitch == Approx(total).epsilon(1e-9));
  }
}

TEST_CASE("cli: argument and input failures map to distinct exit codes") {
  CHECK(run("trace --config " + repo_path("configs/butt.cfg")) == 2); // missing --out
  CHECK(run(trace_args("configs/butt.cfg", kDir + "/x.vgd", "--rays 0")) == 2);
  CHECK(run(trace_args("configs/butt.cfg", kDir + "/x.vgd", "--rays 1.5")) == 2);
  CHECK(run("nonsense --config a") == 2);
  CHECK(run(trace_args("configs/does_not_exist.cfg", kDir + "/x.vgd")) == 4);

  std::string bad = kDir + "/bad.cfg";
  {
    std::ofstream o(bad);
    o << "[scene]\ntip_style = banana\n";
  }
  CHECK(run("trace --config " + bad + " --out " + kDir + "/x.vgd") == 3);

  std::string junk = kDir + "/junk.bin";
  {
    std::ofstream o(junk);
    o << "not a grid";
  }
  CHECK(run("inspect " + junk) == 4);
}

TEST_CASE("cli: mode solve, inspect, overlap chain") {
  std::string fmp = kDir + "/mode.fmp", log = kDir + "/mode.log";
  REQUIRE(run("mode --config " + repo_path("configs/cavity.cfg") + " --out " + fmp, log) == 0);
  std::string text = slurp(log);
  CHECK(text.find("eigenfrequency_ghz") != std::string::npos);
  CHECK(text.find("ring_energy_frac") != std::string::npos);

  // Too-coarse mesh cannot resolve the ring wall: numeric failure.
  CHECK(run("mode --config " + repo_path("configs/cavity.cfg") + " --pitch 0.5 --out " + kDir +
            "/coarse.fmp") == 5);

  std::string ins = kDir + "/inspect.log";
  REQUIRE(run("inspect " + fmp, ins) == 0);
  std::string itext = slurp(ins);
  CHECK(itext.find("FMP1") != std::string::npos);
  CHECK(itext.find("energy_J") != std::string::npos);

  std::string g = kDir + "/ov.vgd";
  REQUIRE(run(trace_args("configs/butt.cfg", g, "--seed 5")) == 0);
  std::string rep = kDir + "/ov.csv";
  REQUIRE(run("overlap --grid " + g + " --field " + fmp + " --constants " +
              repo_path("configs/spin.cfg") + " --q-loaded 6000 --out " + rep) == 0);
  auto rows = lines_of(slurp(rep));
  REQUIRE(rows.size() == 2);
  auto hdr = split_csv(rows[0]);
  auto val = split_csv(rows[1]);
  REQUIRE(hdr.size() >= 7);
  CHECK(hdr[0] == "delta_T2W");
  double delta = std::stod(val[0]);
  double delta_u = std::stod(val[1]);
  CHECK(delta > 0.0);
  CHECK(delta_u > 0.0);
  CHECK(std::stod(val[2]) == Approx(delta / delta_u).epsilon(1e-9));
  CHECK(std::stod(val[3]) > 0.0); // gamma present when constants are given

  // Bad physics parameters surface as config errors.
  CHECK(run("overlap --grid " + g + " --field " + fmp + " --constants " +
            repo_path("configs/spin.cfg") + " --q-loaded -5") == 3);
  // No detector deposition in this grid: region integral is empty.
  CHECK(run("overlap --grid " + g + " --field " + fmp + " --region detector") == 5);
}

TEST_CASE("cli: sweep emits one row per point with derived seeds") {
  std::string out = kDir + "/sweep.csv";
  REQUIRE(run("sweep --config " + repo_path("configs/invasive.cfg") +
              " --param tip_full_angle_deg --from 40 --to 80 --steps 5 --rays 5000 "
              "--pitch 0.8 --seed 11 --out " +
              out) == 0);
  auto rows = lines_of(slurp(out));
  REQUIRE(rows.size() == 6);
  CHECK(split_csv(rows[0])[0] == "tip_full_angle_deg");
  double prev = -1.0;
  std::vector<std::string> seeds;
  for (size_t i = 1; i < rows.size(); ++i) {
    auto cells = split_csv(rows[i]);
    REQUIRE(cells.size() >= 5);
    double v = std::stod(cells[0]);
    CHECK(v > prev);
    prev = v;
    seeds.push_back(cells[1]);
    CHECK(std::stod(cells[2]) > 0.0); // absorbed fraction
    CHECK(std::stod(cells[3]) > 0.0); // mean depth
  }
  std::sort(seeds.begin(), seeds.end());
  CHECK(std::adjacent_find(seeds.begin(), seeds.end()) == seeds.end());

  CHECK(run("sweep --config " + repo_path("configs/invasive.cfg") +
            " --param rod_length_mm --from 10 --to 20 --steps 2") == 2);
}
