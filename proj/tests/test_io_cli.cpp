#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "modnls/cli.hpp"
#include "modnls/io.hpp"
#include "modnls/rng.hpp"

using namespace modnls;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result run_cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string last_line(const std::string& s) {
  auto end = s.find_last_not_of('\n');
  auto start = s.find_last_of('\n', end);
  return s.substr(start == std::string::npos ? 0 : start + 1, end - (start == std::string::npos ? 0 : start + 1) + 1);
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("modnls_unit_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("derived seeds differ per component and are stable") {
  CHECK(derive_seed(1, "modulation") == derive_seed(1, "modulation"));
  CHECK(derive_seed(1, "modulation") != derive_seed(1, "initial"));
  CHECK(derive_seed(1, "modulation") != derive_seed(2, "modulation"));
}

TEST_CASE("doubles are written with 17 significant digits") {
  CHECK(io::format_double(0.1) == "0.10000000000000001");
  CHECK(io::format_double(2.0) == "2");
}

TEST_CASE("path and state files round-trip") {
  const auto dir = scratch("roundtrip");
  const auto p = gen_fbm(0.3, 33, 1.0 / 32, 4);
  io::write_path(p, dir / "w.csv");
  const auto q = io::read_path(dir / "w.csv");
  CHECK(std::equal(p.values().begin(), p.values().end(), q.values().begin()));
  CHECK(q.seed() == p.seed());
  CHECK(q.hurst() == p.hurst());

  FourierState f(3);
  for (int k = -3; k <= 3; ++k) f[k] = {0.1 * k, 1.0 / (k + 7)};
  io::write_state(f, dir / "s.csv");
  const auto g = io::read_state(dir / "s.csv");
  CHECK(g.coeffs() == f.coeffs());
  const auto side = nlohmann::json::parse(slurp(dir / "s.csv.json"));
  CHECK(side["N"] == 3);
  CHECK(side["alpha_norms"].size() == 3);
}

TEST_CASE("sha256 of a known string") {
  const auto dir = scratch("sha");
  std::ofstream(dir / "abc.txt") << "abc";
  CHECK(io::sha256_file(dir / "abc.txt") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("gen-path linear prints the grid to standard output") {
  const auto r = run_cli({"gen-path", "--kind", "linear", "--slope", "1", "--n", "3", "--dt", "1"});
  CHECK(r.code == 0);
  CHECK(r.out == "t,w\n0,0\n1,1\n2,2\n");
  CHECK(last_line(r.err) == "status=ok");
}

TEST_CASE("unknown flag is a usage error") {
  const auto r = run_cli({"gen-path", "--bogus", "1"});
  CHECK(r.code == 1);
  CHECK(r.err.find("Usage") != std::string::npos);
  CHECK(last_line(r.err) == "status=usage_error");
  CHECK(run_cli({}).code == 1);
  CHECK(run_cli({"gen-path", "--kind", "spiral"}).code == 1);
}

TEST_CASE("solve with huge data reports divergence") {
  const auto dir = scratch("diverge");
  std::ofstream(dir / "cfg.json") << R"({"N": 4, "T": 1, "scheme": {"euler": 64},
    "modulation": {"kind": "fbm", "hurst": 0.35, "n": 1025},
    "initial": {"kind": "random", "norm": 10000}})";
  const auto r = run_cli({"solve", "--config", (dir / "cfg.json").string(), "--out", (dir / "out").string()});
  CHECK(r.code == 2);
  CHECK(last_line(r.err).rfind("status=diverged t=", 0) == 0);
}

TEST_CASE("solve writes trajectories, a report and exactly one manifest") {
  const auto dir = scratch("solve");
  std::ofstream(dir / "cfg.json") << R"({"N": 4, "T": 0.5, "alpha": 0.5, "scheme": {"euler": 64},
    "modulation": {"kind": "fbm", "hurst": 0.35, "n": 257},
    "initial": {"kind": "random", "norm": 0.5}})";
  for (int rep = 0; rep < 2; ++rep) {
    const auto r = run_cli({"--seed", "3", "solve", "--config", (dir / "cfg.json").string(), "--N", "5", "--out",
                            (dir / "out").string()});
    REQUIRE(r.code == 0);
  }
  int manifests = 0;
  for (const auto& e : fs::directory_iterator(dir / "out")) manifests += e.path().filename() == "manifest.json";
  CHECK(manifests == 1);
  const auto manifest = nlohmann::json::parse(slurp(dir / "out" / "manifest.json"));
  CHECK(manifest["config"]["N"] == 5);  // the flag wins over the file
  CHECK(manifest["config"]["seed"] == 3);
  CHECK(manifest["inputs"].size() == 1);
  CHECK(manifest["outputs"].size() >= 5);
  const auto header = slurp(dir / "out" / "trajectory_psi.csv").substr(0, 20);
  CHECK(header.rfind("t,re_0,im_0,re_1", 0) == 0);
  const auto report = nlohmann::json::parse(slurp(dir / "out" / "report.json"));
  CHECK(report["max_l2_drift"].get<double>() < 1e-2);
}

TEST_CASE("euler-rate writes rows and a slope footer") {
  const auto dir = scratch("euler");
  const auto r = run_cli({"euler-rate", "--gamma", "0.75", "--n", "64,128,256", "--out", (dir / "rate.csv").string()});
  REQUIRE(r.code == 0);
  const auto text = slurp(dir / "rate.csv");
  CHECK(text.rfind("n,max_error\n64,", 0) == 0);
  CHECK(text.find("\nslope,") != std::string::npos);
  CHECK(fs::exists(dir / "manifest.json"));
}
