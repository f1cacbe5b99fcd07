#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "fedadmm/data.hpp"

using namespace fedadmm;
namespace fs = std::filesystem;

namespace {

const char* cli_binary() { return std::getenv("FEDADMM_BIN"); }

std::string work_dir(const std::string& tag) {
  fs::path p = fs::temp_directory_path() / ("fedadmm_test_cli_" + tag);
  fs::remove_all(p);
  fs::create_directories(p);
  return p.string();
}

struct CliResult {
  int code = -1;
  std::string out, err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

CliResult run_cli(const std::string& args, const std::string& env_prefix = "") {
  std::string dir = work_dir("io");
  fs::path out = fs::path(dir) / "stdout.txt";
  fs::path err = fs::path(dir) / "stderr.txt";
  std::string cmd = env_prefix + "\"" + std::string(cli_binary()) + "\" " + args + " >\"" +
                    out.string() + "\" 2>\"" + err.string() + "\"";
  int status = std::system(cmd.c_str());
  CliResult res;
  res.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  res.out = slurp(out);
  res.err = slurp(err);
  return res;
}

std::vector<std::string> trace_without_wall(const fs::path& p) {
  std::istringstream in(slurp(p));
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cols;
    std::size_t start = 0;
    for (;;) {
      std::size_t comma = line.find(',', start);
      cols.push_back(line.substr(start, comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    std::string joined;
    for (std::size_t c = 0; c < cols.size(); ++c) {
      if (c == 7) continue;
      if (!joined.empty()) joined += ',';
      joined += cols[c];
    }
    lines.push_back(std::move(joined));
  }
  return lines;
}

constexpr const char* kGoldenFlags = "-m 5 -n 8 --d-min 20 --d-max 30 --seed 7 --k0 5 --rho 0.6";

}  // namespace

TEST_CASE("the binary demands a subcommand") {
  if (!cli_binary()) return;
  CHECK(run_cli("").code != 0);
}

TEST_CASE("a config with an unknown key fails with exit 1 naming the key") {
  if (!cli_binary()) return;
  std::string dir = work_dir("badcfg");
  fs::path cfg = fs::path(dir) / "run.json";
  std::ofstream(cfg) << R"({"schema_version": 1, "bogus_key": 3})";
  CliResult res = run_cli("run -c \"" + cfg.string() + "\"");
  CHECK(res.code == 1);
  CHECK(res.err.find("bogus_key") != std::string::npos);
}

TEST_CASE("a full run exits cleanly and writes its three output files") {
  if (!cli_binary()) return;
  std::string dir = work_dir("run");
  CliResult res = run_cli(std::string("run ") + kGoldenFlags + " -o \"" + dir + "\"");
  CHECK(res.code == 0);
  CHECK(res.out.find("fedadmm stopped_by_gradient") != std::string::npos);
  CHECK(fs::exists(fs::path(dir) / "trace.csv"));
  CHECK(fs::exists(fs::path(dir) / "summary.json"));
  CHECK(fs::exists(fs::path(dir) / "omega.json"));
}

TEST_CASE("an exhausted iteration budget is reported as exit 2") {
  if (!cli_binary()) return;
  CliResult res = run_cli(std::string("run ") + kGoldenFlags + " --max-iters 3");
  CHECK(res.code == 2);
  CHECK(res.out.find("iteration_cap") != std::string::npos);
}

TEST_CASE("generated datasets round-trip through the exporter") {
  if (!cli_binary()) return;
  std::string dir = work_dir("gen");
  CliResult res =
      run_cli("generate -m 3 -n 5 --d-min 8 --d-max 12 --seed 11 -o \"" + dir + "\"");
  CHECK(res.code == 0);

  GenSpec spec;
  spec.m = 3;
  spec.n = 5;
  spec.d_min = 8;
  spec.d_max = 12;
  spec.seed = 11;
  FederatedDataset expect = generate_linreg(spec);
  FederatedDataset back = load_dataset(dir);
  REQUIRE(back.m() == expect.m());
  CHECK(back.n == expect.n);
  for (int i = 0; i < expect.m(); ++i) {
    CHECK(back.shards[i].features == expect.shards[i].features);
    CHECK(back.shards[i].labels == expect.shards[i].labels);
  }

  // generate refuses to run without a destination
  CHECK(run_cli("generate -m 3 -n 5 --seed 11").code == 1);
}

TEST_CASE("two invocations leave byte-identical traces apart from timings") {
  if (!cli_binary()) return;
  std::string a = work_dir("rerun_a"), b = work_dir("rerun_b");
  REQUIRE(run_cli(std::string("run ") + kGoldenFlags + " -o \"" + a + "\"").code == 0);
  REQUIRE(run_cli(std::string("run ") + kGoldenFlags + " -o \"" + b + "\"").code == 0);
  CHECK(trace_without_wall(fs::path(a) / "trace.csv") ==
        trace_without_wall(fs::path(b) / "trace.csv"));
  CHECK(slurp(fs::path(a) / "omega.json") == slurp(fs::path(b) / "omega.json"));
}

TEST_CASE("the report command renders both stored summary kinds") {
  if (!cli_binary()) return;
  std::string dir = work_dir("report");
  REQUIRE(run_cli(std::string("run ") + kGoldenFlags + " -o \"" + dir + "\"").code == 0);

  CliResult summary = run_cli("report \"" + (fs::path(dir) / "summary.json").string() + "\"");
  CHECK(summary.code == 0);
  CHECK(summary.out.find("f_final") != std::string::npos);
  CHECK(summary.out.find("final_x") == std::string::npos);

  std::string sweep_dir = work_dir("sweep");
  CliResult sweep = run_cli(
      "sweep -m 3 -n 5 --d-min 8 --d-max 10 --seed 4 --rho 1.0 --grid-k0 1,2 "
      "--instances 1 -a fedadmm --workers 2 -o \"" +
      sweep_dir + "\"");
  CHECK(sweep.code == 0);
  CHECK(fs::exists(fs::path(sweep_dir) / "sweep_summary.csv"));
  CHECK(fs::exists(fs::path(sweep_dir) / "sweep_summary.json"));

  CliResult table =
      run_cli("report \"" + (fs::path(sweep_dir) / "sweep_summary.csv").string() + "\"");
  CHECK(table.code == 0);
  CHECK(table.out.find("median_cr") != std::string::npos);
  CHECK(table.out.find("fedadmm") != std::string::npos);

  CHECK(run_cli("report /nonexistent/summary.json").code == 1);
}

TEST_CASE("the environment can supply the output directory") {
  if (!cli_binary()) return;
  std::string dir = work_dir("envout");
  CliResult res = run_cli(std::string("run ") + kGoldenFlags,
                          "FEDADMM_OUT=\"" + dir + "\" ");
  CHECK(res.code == 0);
  CHECK(fs::exists(fs::path(dir) / "trace.csv"));
  CHECK(fs::exists(fs::path(dir) / "summary.json"));

  // an explicit flag wins over the environment
  std::string env_dir = work_dir("env_lose"), flag_dir = work_dir("flag_win");
  CliResult pick = run_cli(std::string("run ") + kGoldenFlags + " -o \"" + flag_dir + "\"",
                           "FEDADMM_OUT=\"" + env_dir + "\" ");
  CHECK(pick.code == 0);
  CHECK(fs::exists(fs::path(flag_dir) / "trace.csv"));
  CHECK(!fs::exists(fs::path(env_dir) / "trace.csv"));
}
