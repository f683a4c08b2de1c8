// Command-line driver: solve, bounds, verify, table.

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fraccm/errors.hpp"
#include "fraccm/lattice.hpp"
#include "fraccm/scenario.hpp"

namespace {

struct CommonArgs {
  std::string config_path;
  std::string out_dir;
  std::string times;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "Config file (section.key = value)");
  cmd->add_option("--out", args.out_dir, "Output directory (overrides output.dir)");
  cmd->add_option("--times", args.times, "Comma-separated times (overrides chain.times)");
}

fraccm::ScenarioConfig load(const CommonArgs& args) {
  return args.config_path.empty() ? fraccm::parse_config("") : fraccm::load_config(args.config_path);
}

fraccm::RunOptions options_from(const CommonArgs& args) {
  fraccm::RunOptions options;
  if (!args.out_dir.empty()) options.out_dir = args.out_dir;
  if (!args.times.empty()) options.times = fraccm::parse_number_list(args.times, "--times");
  options.log = &std::cerr;
  return options;
}

void report_config_error(const fraccm::ConfigError& e) {
  std::cerr << "config error:\n";
  for (const auto& v : e.violations()) std::cerr << "  " << v << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fractional contact-model correlation solver"};
  app.require_subcommand(1);
  int threads = 1;
  app.add_option("--threads", threads, "Worker threads for mode-wise evaluation")->check(CLI::Range(1, 256));

  CommonArgs solve_args;
  auto* solve = app.add_subcommand("solve", "Solve the correlation chain, write chain_norms.csv");
  add_common(solve, solve_args);

  CommonArgs bounds_args;
  auto* bounds = app.add_subcommand("bounds", "Compare chain norms with the regime bounds, write bound_report.csv");
  add_common(bounds, bounds_args);

  CommonArgs verify_args;
  std::string check;
  auto* verify = app.add_subcommand("verify", "Run identity and residual checks, write identities.csv");
  add_common(verify, verify_args);
  verify->add_option("--check", check, "Only run this check");

  std::string function;
  std::string range = "0:1:11";
  double alpha = 0.5;
  double beta = 1.0;
  auto* table = app.add_subcommand("table", "Print x<TAB>value rows of E, E2, Phi or Gamma");
  table->add_option("function", function, "E, E2, Phi or Gamma")->required();
  table->add_option("--range", range, "start:stop:count");
  table->add_option("--alpha", alpha, "Order alpha in (0,1]");
  table->add_option("--beta", beta, "Second parameter of E2");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : fraccm::kExitConfig;
  }

  try {
    fraccm::set_thread_count(threads);
    int code = fraccm::kExitOk;
    if (*solve) {
      code = fraccm::run_solve(load(solve_args), options_from(solve_args));
    } else if (*bounds) {
      code = fraccm::run_bounds(load(bounds_args), options_from(bounds_args));
    } else if (*verify) {
      auto options = options_from(verify_args);
      options.check = check;
      code = fraccm::run_verify(load(verify_args), options);
    } else if (*table) {
      code = fraccm::run_table(function, fraccm::parse_table_range(range), alpha, beta, std::cout);
    }
    if (code == fraccm::kExitCheckFailed) std::cerr << "one or more checks failed\n";
    return code;
  } catch (const fraccm::ConfigError& e) {
    report_config_error(e);
    return fraccm::kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return fraccm::exit_code_for(e);
  }
}
