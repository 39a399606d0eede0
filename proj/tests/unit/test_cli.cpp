#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <sstream>
#include <string>

#include "doctest.h"
#include "tbound/cli/commands.hpp"
#include "tbound/cli/manifest.hpp"
#include "tbound/errors.hpp"
#include "tbound/selftest.hpp"
#include "tbound/variance_beta.hpp"

using namespace tbound;
using namespace tbound::cli;
namespace fs = std::filesystem;

namespace {

// Runs the built executable and returns its exit status; stdout goes to `out`.
int run_cli(const std::string& args, std::string* out = nullptr) {
  const fs::path capture = fs::temp_directory_path() / "tbound_cli_capture.txt";
  const std::string cmd =
      std::string(TBOUND_CLI_PATH) + " " + args + " > " + capture.string() + " 2>/dev/null";
  const int status = std::system(cmd.c_str());
  if (out) *out = read_file(capture.string());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "tbound_unit";
  fs::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_CASE("bounds command") {
  std::ostringstream os;
  BoundsArgs a;
  a.N = 16;
  a.which = "bcrb";
  a.csv = true;
  CHECK(cmd_bounds(a, os) == kOk);
  CHECK(os.str() == "bound,value,sqrt_value,rel_err\nbcrb," + fmt_csv(1.0 / 120.0) + "," +
                        fmt_csv(std::sqrt(1.0 / 120.0)) + ",0\n");
  a.which = "median";
  CHECK_THROWS_AS(cmd_bounds(a, os), DomainError);
  a.which = "bcrb";
  a.a = 2.0;
  CHECK_THROWS_AS(cmd_bounds(a, os), UnsupportedRegime);
}

TEST_CASE("estimate command") {
  std::ostringstream os;
  EstimateArgs e;
  e.N = 16;
  e.t = 4;
  e.estimator = "map";
  cmd_estimate(e, os);
  CHECK(os.str() == "0.5\n");
  os.str("");
  e.N = 8;
  e.t = 2;
  e.estimator = "ml";
  cmd_estimate(e, os);
  CHECK(os.str() == "0.5\n");
  os.str("");
  e.estimator = "mmse";
  e.csv = true;
  cmd_estimate(e, os);
  CHECK(os.str() == "estimator,a,N,t,estimate\nmmse,3,8,2," +
                        fmt_csv(variance_beta::mmse_estimate(variance_beta::CaseParams(3.0, 8), 2.0)) +
                        "\n");
}

TEST_CASE("check-efficiency verdicts") {
  EfficiencyArgs g;
  g.model = "gaussian-conjugate";
  g.N = 4;
  const auto gs = check_efficiency(g);
  CHECK(gs.efficient);
  CHECK(gs.verdict == "efficient; TBCRB=BCRB=MMSE");
  CHECK(gs.tbcrb == doctest::Approx(0.2).epsilon(1e-8));

  EfficiencyArgs c;
  c.N = 8;
  const auto cs = check_efficiency(c);
  CHECK_FALSE(cs.efficient);
  CHECK(cs.verdict == "not efficient; TBCRB>BCRB");

  c.N = 4096;
  const auto big = check_efficiency(c);
  CHECK(big.verdict == "not efficient; TBCRB>BCRB");
  for (std::size_t i = 0; i < cs.deviations.size(); ++i) CHECK(big.deviations[i] < cs.deviations[i]);

  c.probes = {0.5};
  CHECK(check_efficiency(c).deviations.size() == 1);
  c.model = "poisson";
  CHECK_THROWS_AS(check_efficiency(c), DomainError);
}

TEST_CASE("selftest command and fault injection") {
  std::ostringstream os;
  CHECK(cmd_selftest({}, os) == kOk);
  CHECK(os.str().find("selftest passed") != std::string::npos);
  os.str("");
  CHECK(cmd_selftest({"bfim"}, os) == kSelftestFailed);
  CHECK(os.str().find("FAIL case-study/bfim") != std::string::npos);
  CHECK_THROWS_AS(cmd_selftest({"no_such_check"}, os), DomainError);
  CHECK_THROWS_AS(cmd_selftest({"workers_invariant"}, os), DomainError);
}

TEST_CASE("every injectable fault fails exactly its own check") {
  for (const auto& name : tbound::selftest::fault_names()) {
    const auto rep = tbound::selftest::run({name});
    for (const auto& c : rep.checks) {
      INFO(name << " -> " << c.name);
      CHECK(c.passed == (c.name != name));
    }
  }
}

TEST_CASE("manifest round trip") {
  RunManifest m;
  m.command = "fig1";
  m.params = {{"a", "3"}, {"trials", "100"}, {"out", "x.csv"}};
  m.seed = 42;
  m.wall_seconds = 1.5;
  m.checksum = hex64(fnv1a64("abc"));
  const auto back = RunManifest::parse(m.to_text());
  CHECK(back.command == "fig1");
  CHECK(back.params == m.params);
  CHECK(back.seed == 42);
  CHECK(back.version == kArtifactVersion);
  CHECK(back.checksum == m.checksum);
  REQUIRE(back.find("trials") != nullptr);
  CHECK(*back.find("trials") == "100");
  CHECK(back.find("missing") == nullptr);
  // FNV-1a 64 test vector
  CHECK(hex64(fnv1a64("a")) == "af63dc4c8601ec8c");
  CHECK_THROWS_AS(read_file("/nonexistent/dir/file"), IoError);
}

TEST_CASE("fig1 output is reproducible") {
  const auto p1 = scratch("fig1_a.csv"), p2 = scratch("fig1_b.csv");
  std::ostringstream os;
  Fig1Args f;
  f.trials = 100;
  f.seed = 123;
  f.out_path = p1.string();
  CHECK(cmd_fig1(f, os) == kOk);
  f.out_path = p2.string();
  f.workers = 3;
  CHECK(cmd_fig1(f, os) == kOk);
  const auto csv1 = read_file(p1.string());
  CHECK(csv1 == read_file(p2.string()));
  std::size_t lines = 0;
  for (char ch : csv1) lines += ch == '\n';
  CHECK(lines == 14);
  const auto man = RunManifest::parse(read_file(manifest_path(p1.string())));
  CHECK(man.checksum == hex64(fnv1a64(csv1)));
  CHECK(man.seed == 123);
  f.out_path = "/nonexistent/dir/out.csv";
  CHECK_THROWS_AS(cmd_fig1(f, os), IoError);
}

TEST_CASE("executable exit codes") {
  std::string out;
  CHECK(run_cli("bounds --a 3 --N 16 --which bcrb", &out) == 0);
  CHECK(out.find("0.00833333") != std::string::npos);
  CHECK(run_cli("bounds --a 3 --N 100 --which ecrb --csv", &out) == 0);
  CHECK(out.find("0.0057142857142857") != std::string::npos);
  CHECK(run_cli("bounds --a 2 --N 8 --which bcrb") == 2);
  CHECK(run_cli("estimate --a 3 --N 16 --t 4 --estimator map", &out) == 0);
  CHECK(out == "0.5\n");
  CHECK(run_cli("estimate --a 3 --N 8 --t -1") == 2);
  CHECK(run_cli("bounds --no-such-flag") == 2);
  CHECK(run_cli("bounds --config /nonexistent/cfg.txt") == 4);
  CHECK(run_cli("fig1 --trials 100 --out /nonexistent/dir/o.csv") == 4);
  CHECK(run_cli("selftest --inject-fault bfim", &out) == 1);
  CHECK(run_cli("check-efficiency --model gaussian-conjugate --N 4", &out) == 0);
  CHECK(out.rfind("efficient; TBCRB=BCRB=MMSE", 0) == 0);
}

TEST_CASE("manifest feeds back through --config") {
  const auto csv = scratch("fig1_cfg.csv");
  CHECK(run_cli("fig1 --trials 100 --seed 77 --out " + csv.string()) == 0);
  const auto first = read_file(csv.string());
  const auto copy = scratch("fig1_cfg.manifest.txt");
  write_file(copy.string(), read_file(manifest_path(csv.string())));
  fs::remove(csv);
  CHECK(run_cli("fig1 --config " + copy.string()) == 0);
  CHECK(read_file(csv.string()) == first);
}
