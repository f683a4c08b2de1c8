#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "fraccm/errors.hpp"
#include "fraccm/scenario.hpp"

using namespace fraccm;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("fraccm_unit_" + name);
  fs::remove_all(dir);
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string first_line(const fs::path& path) {
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  return line;
}

const char* kSmallConfig =
    "model.alpha = 0.6\n"
    "model.kappa = 1.2\n"
    "grid.points = 32\n"
    "chain.N_max = 2\n"
    "chain.times = 0.5, 1\n";

}  // namespace

TEST_CASE("config parsing, defaults and echo") {
  const auto cfg = parse_config(kSmallConfig);
  CHECK(cfg.chain.params.alpha.value() == 0.6);
  CHECK(cfg.chain.params.kappa == 1.2);
  CHECK(cfg.chain.times == std::vector<double>{0.5, 1.0});
  CHECK(std::find(cfg.defaulted.begin(), cfg.defaulted.end(), "kernel.shape") != cfg.defaulted.end());
  CHECK(std::find(cfg.defaulted.begin(), cfg.defaulted.end(), "model.alpha") == cfg.defaulted.end());
  const std::string echo = cfg.echo();
  CHECK(echo.find("model.alpha = 0.6") != std::string::npos);
  CHECK(echo.find("kernel.shape = gaussian  # default") != std::string::npos);
  // The echo parses back to the same configuration.
  std::string plain = echo;
  for (auto pos = plain.find("  # default"); pos != std::string::npos; pos = plain.find("  # default")) {
    plain.erase(pos, 11);
  }
  CHECK(parse_config(echo).echo() == plain);

  const auto defaults = parse_config("");
  CHECK(defaults.chain.params.kappa == 0.5);
}

TEST_CASE("config errors list every violation") {
  try {
    parse_config("model.alpha = 1.5\nmodel.bogus = 1\nmodel.alpha = 0.3\ngrid.points = x\n");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    const auto& v = e.violations();
    CHECK(v.size() >= 3);
    std::string all;
    for (const auto& s : v) all += s + "\n";
    CHECK(all.find("line 1") != std::string::npos);
    CHECK(all.find("line 2") != std::string::npos);
    CHECK(all.find("line 4") != std::string::npos);
    CHECK(all.find("alpha must lie in (0,1]") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_config("chain.times = 2, 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("no equals sign\n"), ConfigError);
  CHECK_THROWS_AS(parse_number_list("1, , 2", "t"), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/fraccm.cfg"), IoError);
}

TEST_CASE("solve writes the locked schema and is deterministic") {
  const auto cfg = parse_config(kSmallConfig);
  const fs::path a = scratch_dir("solve_a"), b = scratch_dir("solve_b");
  RunOptions opts;
  opts.out_dir = a;
  CHECK(run_solve(cfg, opts) == kExitOk);
  opts.out_dir = b;
  CHECK(run_solve(cfg, opts) == kExitOk);
  CHECK(first_line(a / "chain_norms.csv") == "n,t,max_norm,probe_value");
  CHECK(slurp(a / "chain_norms.csv") == slurp(b / "chain_norms.csv"));
  CHECK(slurp(a / "run_meta.txt").find("model.kappa = 1.2") != std::string::npos);
  std::ifstream in(a / "chain_norms.csv");
  std::string line;
  int rows = -1;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 4);

  // An output path that is a regular file is an I/O error.
  const fs::path file = scratch_dir("solve_file");
  std::ofstream(file) << "x";
  opts.out_dir = file;
  try {
    run_solve(cfg, opts);
    FAIL("expected IoError");
  } catch (const IoError& e) {
    CHECK(exit_code_for(e) == kExitIo);
  }
}

TEST_CASE("bounds and verify reports") {
  const auto cfg = parse_config(kSmallConfig);
  const fs::path dir = scratch_dir("reports");
  RunOptions opts;
  opts.out_dir = dir;
  CHECK(run_bounds(cfg, opts) == kExitOk);
  CHECK(first_line(dir / "bound_report.csv") == "regime,n,t,solver_norm,bound,ratio,pass");
  CHECK(slurp(dir / "bound_report.csv").find("supercritical,1,0.5,") != std::string::npos);

  opts.check = "beta";
  CHECK(run_verify(cfg, opts) == kExitOk);
  CHECK(first_line(dir / "identities.csv") == "check,params,residual,tolerance,pass");
  std::ifstream in(dir / "identities.csv");
  std::string line;
  std::getline(in, line);
  int rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    CHECK(line.rfind("beta,", 0) == 0);
    CHECK(line.substr(line.size() - 4) == "true");
  }
  CHECK(rows > 0);
  opts.check = "nope";
  CHECK_THROWS_AS(run_verify(cfg, opts), ConfigError);
  CHECK(std::find(verify_check_names().begin(), verify_check_names().end(), "mild_solution") !=
        verify_check_names().end());
}

TEST_CASE("table output and exit codes") {
  std::ostringstream out;
  CHECK(run_table("E", parse_table_range("0:1:3"), 1.0, 1.0, out) == kExitOk);
  CHECK(out.str().rfind("0\t1\n", 0) == 0);
  CHECK(out.str().find("1\t2.7182818284590") != std::string::npos);
  std::ostringstream bad;
  CHECK_THROWS_AS(run_table("F", TableRange{}, 0.5, 1.0, bad), ConfigError);
  CHECK_THROWS_AS(parse_table_range("0:1"), ConfigError);
  CHECK(exit_code_for(OverflowError("x")) == kExitNumerical);
  CHECK(exit_code_for(ConvergenceError("x")) == kExitNumerical);
  CHECK(exit_code_for(DomainError("x")) == kExitConfig);
  CHECK(format_number(0.1) == "0.1");
  CHECK(std::stod(format_number(1.0 / 3.0)) == 1.0 / 3.0);
}
