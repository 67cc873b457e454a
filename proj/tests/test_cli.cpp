#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "fermobius/cli.hpp"

namespace fs = std::filesystem;
using namespace fm;

namespace {

int run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "fermobius");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  return cli::main_entry(int(argv.size()), argv.data());
}

fs::path scratch(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("fermobius_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::vector<std::string> lines(const fs::path& p) {
  std::ifstream is(p);
  std::vector<std::string> out;
  for (std::string l; std::getline(is, l);) out.push_back(l);
  return out;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

const std::string chains = FERMOBIUS_CHAINS_DIR;

}  // namespace

TEST_CASE("argument parsers") {
  auto z = cli::parse_zeta_grid("-0.2:0.2:0.1");
  REQUIRE(z.size() == 5);
  CHECK(z[0] == doctest::Approx(-0.2));
  CHECK(z[4] == doctest::Approx(0.2));
  CHECK(cli::parse_zeta_grid("0.3").size() == 1);
  auto iv = cli::parse_intervals("1:100,201:300");
  REQUIRE(iv.size() == 2);
  CHECK(iv[1].first == 201);
  CHECK(cli::parse_mode("finite:512", 1e-10).N == 512);
  CHECK(cli::parse_mode("thermo", 1e-9).kind == Mode::Thermodynamic);
  CHECK_THROWS_AS(cli::parse_mode("finite:x", 1e-10), cli::UsageError);
  CHECK_THROWS_AS(cli::parse_intervals("5:2"), cli::UsageError);
  CHECK_THROWS_AS(cli::parse_zeta_grid("0:1:0"), cli::UsageError);
}

TEST_CASE("usage errors exit with 2") {
  CHECK(run_cli({}) == 2);
  CHECK(run_cli({"bogus"}) == 2);
  CHECK(run_cli({"entropy"}) == 2);
  CHECK(run_cli({"entropy", "--xydm", "1,0"}) == 2);
  CHECK(run_cli({"entropy", "--xydm", "1,0,4", "--alpha", "-1"}) == 2);
  CHECK(run_cli({"classify", "--xydm", "1,0,4", "--which", "3"}) == 2);
  CHECK(run_cli({"classify", "--chain", "/nonexistent/chain.json"}) == 2);
}

TEST_CASE("computation errors exit with 1") {
  auto dir = scratch("err");
  // the theta route needs real couplings
  CHECK(run_cli({"theta-entropy", "--xydm", "0.5,0.3,3", "--X", "20", "--out", dir.string()}) == 1);
}

TEST_CASE("classify writes a provenance line and a header") {
  auto dir = scratch("classify");
  REQUIRE(run_cli({"classify", "--xydm", "0,1,0", "--out", dir.string()}) == 0);
  auto l = lines(dir / "classify.csv");
  REQUIRE(l.size() == 3);
  CHECK(l[0].rfind("# fermobius", 0) == 0);
  CHECK(l[0].find("chain_hash=") != std::string::npos);
  CHECK(l[1] == "class,R,Q,pinch_angles,fermi_angles,dirac_arcs");
  CHECK(l[2].rfind("CriticalDiracSea,0,4", 0) == 0);
}

TEST_CASE("entropy output is deterministic") {
  auto a = scratch("det_a"), b = scratch("det_b");
  for (const auto& d : {a, b})
    REQUIRE(run_cli({"entropy", "--chain", chains + "/gapped_l2.json", "--alpha", "1,2", "--X", "10,20", "--out",
                     d.string(), "--mode", "finite:256"}) == 0);
  CHECK(slurp(a / "entropy.csv") == slurp(b / "entropy.csv"));
  auto l = lines(a / "entropy.csv");
  CHECK(l.size() == 2 + 4);
  CHECK(fs::exists(a / "spectrum_X10_0.csv"));
}

TEST_CASE("theta-entropy checks against the direct value") {
  auto dir = scratch("theta");
  REQUIRE(run_cli({"theta-entropy", "--chain", chains + "/gapped_xy.json", "--alpha", "2", "--X", "40", "--check-direct",
                   "--out", dir.string()}) == 0);
  auto l = lines(dir / "theta_entropy.csv");
  REQUIRE(l.size() == 3);
  std::stringstream row(l[2]);
  std::vector<std::string> cells;
  for (std::string c; std::getline(row, c, ',');) cells.push_back(c);
  REQUIRE(cells.size() == 6);
  CHECK(std::abs(std::stod(cells[5])) < 1e-6);
}

TEST_CASE("json dump and config file") {
  auto dir = scratch("json");
  auto cfg = dir / "cfg.json";
  std::ofstream(cfg) << R"({"chain": {"xydm": [0, 0, 0.5]}, "alpha": [2], "X": [30]})";
  auto js = dir / "out.json";
  REQUIRE(run_cli({"asym", "--config", cfg.string(), "--out", dir.string(), "--json", js.string()}) == 0);
  auto text = slurp(js);
  CHECK(text.find("\"command\"") != std::string::npos);
  CHECK(text.find("crit_xx") != std::string::npos);
}

TEST_CASE("mobius flag transforms the chain first") {
  auto dir = scratch("mobius");
  double ch = std::cosh(0.3), sh = std::sinh(0.3);
  std::ostringstream m;
  m.precision(17);
  m << ch << ",0," << sh << ",0," << sh << ",0," << ch << ",0";
  REQUIRE(run_cli({"classify", "--xydm", "0,0,0", "--mobius", m.str(), "--out", dir.string()}) == 0);
  auto l = lines(dir / "classify.csv");
  CHECK(l[0].find("mobius=") != std::string::npos);
  CHECK(run_cli({"classify", "--xydm", "0,0,0", "--mobius", "1,0,1,0,1,0,1,0", "--out", dir.string()}) == 2);
}
