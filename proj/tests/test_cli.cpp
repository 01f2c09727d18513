#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

struct RunResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

RunResult run(const std::string& args, const fs::path& dir) {
  fs::create_directories(dir);
  const fs::path out = dir / "stdout.txt";
  const fs::path err = dir / "stderr.txt";
  const std::string cmd = std::string(RANNLAB_BINARY) + " " + args + " >" +
                          out.string() + " 2>" + err.string();
  const int status = std::system(cmd.c_str());
  RunResult r;
  r.exit_code = (status >= 0 && WIFEXITED(status)) ? WEXITSTATUS(status) : -1;
  r.out = slurp(out);
  r.err = slurp(err);
  return r;
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("rann_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

int count_data_rows(const fs::path& csv) {
  std::ifstream is(csv);
  std::string line;
  int rows = -1;  // skip header
  while (std::getline(is, line))
    if (!line.empty()) ++rows;
  return rows;
}

}  // namespace

TEST_CASE("missing config file exits 1 and names the path") {
  const fs::path dir = fresh_dir("missing");
  const RunResult r =
      run("cns-wave --config /nonexistent/rann.cfg --out " + (dir / "o").string(),
          dir);
  CHECK(r.exit_code == 1);
  CHECK(r.err.find("/nonexistent/rann.cfg") != std::string::npos);
}

TEST_CASE("malformed config lists offending keys with line numbers") {
  const fs::path dir = fresh_dir("badkey");
  const fs::path cfg = dir / "bad.cfg";
  {
    std::ofstream os(cfg);
    os << "rannlab-config v1\n[cns]\nmu = 1.0\nbogus_key = 3\n";
  }
  const RunResult r = run(
      "cns-wave --config " + cfg.string() + " --out " + (dir / "o").string(), dir);
  CHECK(r.exit_code == 1);
  CHECK(r.err.find("cns.bogus_key") != std::string::npos);
  CHECK(r.err.find(":4") != std::string::npos);
}

TEST_CASE("cns-wave writes the profile with the configured row count") {
  const fs::path dir = fresh_dir("wave");
  const RunResult r = run("cns-wave --out " + (dir / "o").string(), dir);
  REQUIRE(r.exit_code == 0);
  CHECK(count_data_rows(dir / "o" / "wave.csv") == 5000);
  // the effective config is printed before running
  CHECK(r.out.find("rannlab-config v1") != std::string::npos);
  CHECK(r.out.find("v_plus = 1.5") != std::string::npos);
  CHECK(fs::exists(dir / "o" / "effective_config.txt"));
}

TEST_CASE("overrides reach the effective config") {
  const fs::path dir = fresh_dir("override");
  const RunResult r =
      run("cns-wave --out " + (dir / "o").string() +
              " --override cns.grid_points=777 --override cns.v_minus=1.2",
          dir);
  REQUIRE(r.exit_code == 0);
  CHECK(count_data_rows(dir / "o" / "wave.csv") == 777);
  const std::string cfg = slurp(dir / "o" / "effective_config.txt");
  CHECK(cfg.find("v_minus = 1.2") != std::string::npos);
  // unknown override key is a validation error
  const RunResult bad =
      run("cns-wave --out " + (dir / "o2").string() + " --override cns.nope=1", dir);
  CHECK(bad.exit_code == 1);
}

TEST_CASE("pme-sweep is reproducible byte for byte") {
  const fs::path dir = fresh_dir("repro");
  const std::string small =
      " --override pme.widths=4,8 --override sweep.repeats=2"
      " --override sweep.eval_points=500 --seed 321";
  const RunResult r1 = run("pme-sweep --out " + (dir / "a").string() + small, dir);
  const RunResult r2 = run("pme-sweep --out " + (dir / "b").string() + small, dir);
  REQUIRE(r1.exit_code == 0);
  REQUIRE(r2.exit_code == 0);
  CHECK(slurp(dir / "a" / "raw.csv") == slurp(dir / "b" / "raw.csv"));
  CHECK(slurp(dir / "a" / "summary.csv") == slurp(dir / "b" / "summary.csv"));
  CHECK(slurp(dir / "a" / "sweep.svg") == slurp(dir / "b" / "sweep.svg"));
  CHECK(slurp(dir / "a" / "effective_config.txt") ==
        slurp(dir / "b" / "effective_config.txt"));
  CHECK(!slurp(dir / "a" / "raw.csv").empty());
}

TEST_CASE("theory-report emits the coefficient record") {
  const fs::path dir = fresh_dir("theory");
  const RunResult r = run("theory-report --out " + (dir / "o").string(), dir);
  REQUIRE(r.exit_code == 0);
  CHECK(r.out.find("C_pi") != std::string::npos);
  CHECK(r.out.find("M_psi") != std::string::npos);
  CHECK(fs::exists(dir / "o" / "theory_report.txt"));
}
