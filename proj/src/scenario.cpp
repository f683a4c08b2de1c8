#include "fraccm/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <ostream>
#include <sstream>

#include "fraccm/errors.hpp"
#include "fraccm/subordination.hpp"

namespace fraccm {

namespace {

namespace fs = std::filesystem;

constexpr double kDefaultKappa = 0.5;

const std::vector<std::string>& known_keys() {
  static const std::vector<std::string> keys = {
      "model.alpha",  "model.kappa",    "model.C",     "kernel.shape", "kernel.width", "kernel.mass",
      "grid.dimension", "grid.length",  "grid.points", "chain.N_max",  "chain.times",  "chain.s_nodes",
      "output.dir",   "run.seed",       "report.probe"};
  return keys;
}

std::string trim(const std::string& text) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return "";
  const auto last = text.find_last_not_of(" \t\r\n");
  return text.substr(first, last - first + 1);
}

bool parse_double(const std::string& text, double& out) {
  const std::string s = trim(text);
  if (s.empty()) return false;
  const char* begin = s.data();
  const char* end = s.data() + s.size();
  if (*begin == '+') ++begin;
  const auto result = std::from_chars(begin, end, out);
  return result.ec == std::errc() && result.ptr == end && std::isfinite(out);
}

bool parse_integer(const std::string& text, long long& out) {
  const std::string s = trim(text);
  if (s.empty()) return false;
  const auto result = std::from_chars(s.data(), s.data() + s.size(), out);
  return result.ec == std::errc() && result.ptr == s.data() + s.size();
}

std::string join_numbers(const std::vector<double>& values) {
  std::string out;
  for (double v : values) {
    if (!out.empty()) out += ", ";
    out += format_number(v);
  }
  return out;
}

std::string short_number(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", value);
  return buf;
}

fs::path prepare_output_dir(const ScenarioConfig& config, const RunOptions& options) {
  const fs::path dir = options.out_dir ? *options.out_dir : fs::path(config.output_dir);
  std::error_code ec;
  if (fs::exists(dir, ec) && !fs::is_directory(dir, ec)) {
    throw IoError("output path " + dir.string() + " exists and is not a directory");
  }
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
  return dir;
}

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  return out;
}

void check_stream(const std::ofstream& out, const fs::path& path) {
  if (!out) throw IoError("write to " + path.string() + " failed");
}

ChainConfig resolved_chain(const ScenarioConfig& config, const RunOptions& options) {
  ChainConfig chain = config.chain;
  if (options.times) {
    chain.times = *options.times;
    try {
      chain.validate();
    } catch (const Error& e) {
      throw ConfigError({std::string("--times: ") + e.what()});
    }
  }
  return chain;
}

void write_meta(const fs::path& dir, const ScenarioConfig& config, const ChainConfig& chain,
                const std::vector<std::string>& extra) {
  ScenarioConfig echoed = config;
  echoed.chain = chain;
  const fs::path path = dir / "run_meta.txt";
  auto out = open_output(path);
  out << echoed.echo();
  for (const auto& line : extra) out << line << '\n';
  check_stream(out, path);
}

void log_line(const RunOptions& options, const std::string& text) {
  if (options.log) *options.log << text << '\n';
}

struct IdentityRow {
  std::string check;
  std::string params;
  double residual;
  double tolerance;
};

using CheckRunner = std::function<void(const ScenarioConfig&, std::vector<IdentityRow>&)>;

void check_djrbashian(const ScenarioConfig&, std::vector<IdentityRow>& rows) {
  for (double a : {0.3, 0.5, 0.8, 1.0}) {
    for (double z : {-2.0, -0.5, 1.0}) {
      for (double lambda : {-1.5, 0.0, 0.7}) {
        for (double t : {0.5, 1.0, 2.0}) {
          rows.push_back({"djrbashian",
                          "alpha=" + short_number(a) + ";z=" + short_number(z) + ";lambda=" + short_number(lambda) +
                              ";t=" + short_number(t),
                          djrbashian_identity_residual(Alpha(a), z, lambda, t), a == 1.0 ? 1e-10 : 1e-6});
        }
      }
    }
  }
}

void check_djrbashian_limit(const ScenarioConfig&, std::vector<IdentityRow>& rows) {
  for (double a : {0.3, 0.5, 0.8}) {
    for (double gap : {1e-4, 1e-7}) {
      const double lambda = -1.0;
      rows.push_back({"djrbashian_limit",
                      "alpha=" + short_number(a) + ";z=lambda+" + short_number(gap) + ";lambda=-1;t=1",
                      djrbashian_identity_residual(Alpha(a), lambda + gap, lambda, 1.0), 1e-4});
    }
  }
}

void check_beta(const ScenarioConfig&, std::vector<IdentityRow>& rows) {
  for (double a : {0.3, 0.6, 1.0}) {
    for (double b : {0.3, 0.9, 1.0}) {
      rows.push_back({"beta", "alpha=" + short_number(a) + ";beta=" + short_number(b) + ";t=2.5",
                      beta_identity_residual(a, b, 2.5), a == 1.0 && b == 1.0 ? 1e-10 : 1e-8});
    }
  }
}

void check_wright_moment(const ScenarioConfig&, std::vector<IdentityRow>& rows) {
  for (double a : {0.3, 0.5, 0.8}) {
    const Alpha alpha(a);
    const auto quad = certify_tau_cutoff(alpha);
    for (int k = 0; k <= 3; ++k) {
      rows.push_back({"wright_moment",
                      "alpha=" + short_number(a) + ";n=" + std::to_string(k) + ";cutoff=" + short_number(quad.tau_cutoff),
                      std::abs(truncated_wright_moment(alpha, k, quad) - wright_moment(alpha, k)), 1e-6});
    }
  }
}

void check_subordination(const ScenarioConfig&, std::vector<IdentityRow>& rows) {
  for (double a : {0.3, 0.6, 0.8}) {
    const Alpha alpha(a);
    const auto quad = certify_tau_cutoff(alpha);
    for (double lambda : {-1.0, -0.2}) {
      const ScalarSemigroup semigroup(lambda);
      for (double t : {0.5, 2.0}) {
        const std::string params =
            "alpha=" + short_number(a) + ";lambda=" + short_number(lambda) + ";t=" + short_number(t);
        rows.push_back({"subordination", "op=S;" + params,
                        std::abs(s_alpha_by_subordination(alpha, semigroup, t, quad) - s_alpha_scalar(alpha, lambda, t)),
                        1e-6});
        rows.push_back({"subordination", "op=P;" + params,
                        std::abs(p_alpha_by_subordination(alpha, semigroup, t, quad) - p_alpha_scalar(alpha, lambda, t)),
                        1e-6});
      }
    }
  }
}

void check_mild_solution(const ScenarioConfig& config, std::vector<IdentityRow>& rows) {
  constexpr int kSteps = 1000;
  constexpr double kEnd = 2.0;
  constexpr double kTol = 2e-3;
  struct Case {
    const char* name;
    double lambda;
    double x0;
    std::function<double(double)> forcing;
  };
  const std::vector<Case> cases = {
      {"f=0", -1.0, 1.0, [](double) { return 0.0; }},
      {"f=0.5", 0.0, 1.0, [](double) { return 0.5; }},
      {"f=sin", -0.5, 1.0, [](double s) { return std::sin(s); }},
  };
  for (double a : {0.3, 0.5, 0.8, 1.0}) {
    for (const auto& c : cases) {
      const auto report = verify_mild_solution_scalar(Alpha(a), c.lambda, c.x0, c.forcing, kEnd, kSteps);
      rows.push_back({"mild_solution",
                      "alpha=" + short_number(a) + ";lambda=" + short_number(c.lambda) + ";" + c.name +
                          ";steps=" + std::to_string(kSteps),
                      report.max_residual, kTol});
    }
  }
  // Order-1 chain equation of the configured model.
  const BoundParams params = BoundParams::from_chain(config.chain);
  const double lambda = params.kappa - 1.0;
  const auto report =
      verify_mild_solution_scalar(params.alpha, lambda, params.C, [](double) { return 0.0; }, kEnd, kSteps);
  rows.push_back({"mild_solution",
                  "config;alpha=" + short_number(params.alpha.value()) + ";lambda=" + short_number(lambda) +
                      ";f=0;steps=" + std::to_string(kSteps),
                  report.max_residual / params.C, kTol});
}

const std::vector<std::pair<std::string, CheckRunner>>& verify_checks() {
  static const std::vector<std::pair<std::string, CheckRunner>> checks = {
      {"djrbashian", check_djrbashian},   {"djrbashian_limit", check_djrbashian_limit},
      {"beta", check_beta},               {"wright_moment", check_wright_moment},
      {"subordination", check_subordination}, {"mild_solution", check_mild_solution},
  };
  return checks;
}

Alpha table_alpha(double value) {
  try {
    return Alpha(value);
  } catch (const DomainError& e) {
    throw ConfigError({e.what()});
  }
}

}  // namespace

std::string format_number(double value) {
  char buf[40];
  const auto result = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, result.ptr);
}

std::vector<double> parse_number_list(const std::string& text, const std::string& what) {
  std::vector<double> out;
  std::vector<std::string> errors;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    double v = 0.0;
    if (!parse_double(item, v)) {
      errors.push_back(what + ": '" + trim(item) + "' is not a finite number");
      continue;
    }
    out.push_back(v);
  }
  if (trim(text).empty()) errors.push_back(what + ": empty list");
  if (!errors.empty()) throw ConfigError(errors);
  return out;
}

std::string ScenarioConfig::echo() const {
  std::map<std::string, std::string> values;
  values["model.alpha"] = format_number(chain.params.alpha.value());
  values["model.kappa"] = format_number(chain.params.kappa);
  values["model.C"] = format_number(chain.params.C);
  values["kernel.shape"] = to_string(chain.kernel_shape);
  values["kernel.width"] = format_number(chain.kernel_width);
  values["kernel.mass"] = format_number(chain.kernel_mass);
  values["grid.dimension"] = std::to_string(chain.grid.dimension);
  values["grid.length"] = format_number(chain.grid.length);
  values["grid.points"] = std::to_string(chain.grid.points);
  values["chain.N_max"] = std::to_string(chain.N_max);
  values["chain.times"] = join_numbers(chain.times);
  values["chain.s_nodes"] = std::to_string(chain.s_nodes);
  values["output.dir"] = output_dir;
  values["run.seed"] = std::to_string(seed);
  values["report.probe"] = chain.probe.empty() ? "origin" : join_numbers(chain.probe);

  std::string out;
  for (const auto& key : known_keys()) {
    out += key + " = " + values[key];
    if (std::find(defaulted.begin(), defaulted.end(), key) != defaulted.end()) out += "  # default";
    out += '\n';
  }
  return out;
}

ScenarioConfig parse_config(const std::string& text) {
  ScenarioConfig config;
  config.chain.params.kappa = kDefaultKappa;
  std::vector<std::string> errors;
  std::map<std::string, int> seen;

  std::stringstream ss(text);
  std::string raw;
  int line_no = 0;
  double alpha_value = config.chain.params.alpha.value();
  while (std::getline(ss, raw)) {
    ++line_no;
    const std::string where = "line " + std::to_string(line_no) + ": ";
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      errors.push_back(where + "expected 'section.key = value'");
      continue;
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (std::find(known_keys().begin(), known_keys().end(), key) == known_keys().end()) {
      errors.push_back(where + "unknown key '" + key + "'");
      continue;
    }
    if (seen.count(key)) {
      errors.push_back(where + "duplicate key '" + key + "' (first set on line " + std::to_string(seen[key]) + ")");
      continue;
    }
    seen[key] = line_no;

    auto number = [&](double& out) {
      if (!parse_double(value, out)) {
        errors.push_back(where + key + ": '" + value + "' is not a finite number");
        return false;
      }
      return true;
    };
    auto integer = [&](long long& out) {
      if (!parse_integer(value, out)) {
        errors.push_back(where + key + ": '" + value + "' is not an integer");
        return false;
      }
      return true;
    };
    auto list = [&](std::vector<double>& out) {
      try {
        out = parse_number_list(value, key);
      } catch (const ConfigError& e) {
        for (const auto& v : e.violations()) errors.push_back(where + v);
      }
    };
    auto positive = [&](double v) {
      if (!(v > 0.0)) errors.push_back(where + key + " must be > 0");
    };

    double v = 0.0;
    long long n = 0;
    if (key == "model.alpha") {
      if (number(v)) {
        alpha_value = v;
        if (!(v > 0.0 && v <= 1.0)) errors.push_back(where + "alpha must lie in (0,1]");
      }
    } else if (key == "model.kappa") {
      if (number(v)) {
        config.chain.params.kappa = v;
        if (!(v > 0.0)) errors.push_back(where + "kappa must be > 0");
      }
    } else if (key == "model.C") {
      if (number(v)) {
        config.chain.params.C = v;
        if (!(v >= 1.0)) errors.push_back(where + "C must be >= 1");
      }
    } else if (key == "kernel.shape") {
      try {
        config.chain.kernel_shape = parse_kernel_shape(value);
      } catch (const Error&) {
        errors.push_back(where + "kernel.shape must be gaussian, tophat or exponential-decay, got '" + value + "'");
      }
    } else if (key == "kernel.width") {
      if (number(v)) {
        config.chain.kernel_width = v;
        positive(v);
      }
    } else if (key == "kernel.mass") {
      if (number(v)) {
        config.chain.kernel_mass = v;
        positive(v);
      }
    } else if (key == "grid.dimension") {
      if (integer(n)) {
        config.chain.grid.dimension = static_cast<int>(n);
        if (n != 1 && n != 2) errors.push_back(where + "grid.dimension must be 1 or 2");
      }
    } else if (key == "grid.length") {
      if (number(v)) {
        config.chain.grid.length = v;
        positive(v);
      }
    } else if (key == "grid.points") {
      if (integer(n)) {
        if (n < 2 || n % 2 != 0 || n > (1 << 24)) {
          errors.push_back(where + "grid.points must be a positive even integer");
        } else {
          config.chain.grid.points = static_cast<int>(n);
        }
      }
    } else if (key == "chain.N_max") {
      if (integer(n)) {
        if (n < 1 || n > 3) {
          errors.push_back(where + "chain.N_max must lie in [1, 3]");
        } else {
          config.chain.N_max = static_cast<int>(n);
        }
      }
    } else if (key == "chain.times") {
      std::vector<double> times;
      list(times);
      double prev = 0.0;
      bool ok = true;
      for (double t : times) {
        if (!(t > prev)) ok = false;
        prev = t;
      }
      if (!ok) errors.push_back(where + "chain.times must be positive and strictly increasing");
      config.chain.times = times;
    } else if (key == "chain.s_nodes") {
      if (integer(n)) {
        if (n < 1 || n > 64) {
          errors.push_back(where + "chain.s_nodes must lie in [1, 64]");
        } else {
          config.chain.s_nodes = static_cast<int>(n);
        }
      }
    } else if (key == "output.dir") {
      if (value.empty()) errors.push_back(where + "output.dir must not be empty");
      config.output_dir = value;
    } else if (key == "run.seed") {
      if (integer(n)) config.seed = n;
    } else if (key == "report.probe") {
      if (value != "origin") list(config.chain.probe);
    }
  }

  for (const auto& key : known_keys()) {
    if (!seen.count(key)) config.defaulted.push_back(key);
  }

  if (errors.empty()) {
    config.chain.params.alpha = Alpha(alpha_value);
    try {
      config.chain.validate();
    } catch (const Error& e) {
      errors.push_back(e.what());
    }
  }
  if (!errors.empty()) throw ConfigError(errors);
  return config;
}

ScenarioConfig load_config(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

int run_solve(const ScenarioConfig& config, const RunOptions& options) {
  const ChainConfig chain = resolved_chain(config, options);
  const fs::path dir = prepare_output_dir(config, options);
  write_meta(dir, config, chain, {});

  const fs::path path = dir / "chain_norms.csv";
  auto out = open_output(path);
  out << "n,t,max_norm,probe_value\n";
  SolveOptions solve;
  solve.on_entry = [&](const ChainEntry& e) {
    out << e.n << ',' << format_number(e.t) << ',' << format_number(e.max_norm) << ',' << format_number(e.probe_value)
        << '\n';
    out.flush();
    check_stream(out, path);
    log_line(options, "solved n=" + std::to_string(e.n) + " t=" + short_number(e.t));
  };
  solve_chain(chain, solve);
  check_stream(out, path);
  return kExitOk;
}

int run_bounds(const ScenarioConfig& config, const RunOptions& options) {
  const ChainConfig chain = resolved_chain(config, options);
  const fs::path dir = prepare_output_dir(config, options);
  const BoundParams params = BoundParams::from_chain(chain);
  const Regime regime = regime_for(params.kappa);

  const fs::path path = dir / "bound_report.csv";
  auto out = open_output(path);
  out << "regime,n,t,solver_norm,bound,ratio,pass\n";
  std::vector<NormRow> norms;
  bool all_pass = true;
  SolveOptions solve;
  solve.on_entry = [&](const ChainEntry& e) {
    const NormRow norm{e.n, e.t, e.max_norm, e.probe_value};
    const auto report = check_solution_against_bounds(std::span<const NormRow>(&norm, 1), params, regime);
    const BoundRow& row = report.rows.front();
    all_pass = all_pass && row.pass;
    norms.push_back(norm);
    out << to_string(row.regime) << ',' << row.n << ',' << format_number(row.t) << ','
        << format_number(row.solver_norm) << ',' << format_number(row.bound) << ',' << format_number(row.ratio)
        << ',' << (row.pass ? "true" : "false") << '\n';
    out.flush();
    check_stream(out, path);
    if (!row.pass) {
      log_line(options, "bound violated at n=" + std::to_string(row.n) + " t=" + short_number(row.t) +
                            " ratio=" + format_number(row.ratio));
    }
  };
  solve_chain(chain, solve);

  const BoundReport report = check_solution_against_bounds(norms, params, regime);
  std::vector<std::string> extra = {
      "bounds.regime = " + to_string(regime),
      "bounds.kappa_eff = " + format_number(params.kappa),
      "bounds.A = " + format_number(params.A),
  };
  if (report.envelope_fit) {
    extra.push_back("bounds.envelope_M = " + format_number(report.envelope_fit->M));
    extra.push_back(std::string(regime == Regime::supercritical ? "bounds.envelope_rate = " : "bounds.envelope_slope = ") +
                    format_number(report.envelope_fit->exponent_or_slope));
    extra.push_back("bounds.envelope_dominance_start = " + format_number(report.envelope_fit->dominance_start));
  }
  write_meta(dir, config, chain, extra);
  return all_pass ? kExitOk : kExitCheckFailed;
}

const std::vector<std::string>& verify_check_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& [name, runner] : verify_checks()) out.push_back(name);
    return out;
  }();
  return names;
}

int run_verify(const ScenarioConfig& config, const RunOptions& options) {
  const auto& names = verify_check_names();
  if (!options.check.empty() && std::find(names.begin(), names.end(), options.check) == names.end()) {
    std::string known;
    for (const auto& n : names) known += (known.empty() ? "" : ", ") + n;
    throw ConfigError({"unknown check '" + options.check + "' (known: " + known + ")"});
  }
  const fs::path dir = prepare_output_dir(config, options);
  write_meta(dir, config, config.chain, {});

  std::vector<IdentityRow> rows;
  for (const auto& [name, runner] : verify_checks()) {
    if (!options.check.empty() && options.check != name) continue;
    log_line(options, "verify " + name);
    runner(config, rows);
  }

  const fs::path path = dir / "identities.csv";
  auto out = open_output(path);
  out << "check,params,residual,tolerance,pass\n";
  bool all_pass = true;
  for (const auto& row : rows) {
    const bool pass = row.residual < row.tolerance;
    all_pass = all_pass && pass;
    out << row.check << ',' << row.params << ',' << format_number(row.residual) << ',' << format_number(row.tolerance)
        << ',' << (pass ? "true" : "false") << '\n';
    if (!pass) log_line(options, "check failed: " + row.check + " " + row.params);
  }
  check_stream(out, path);
  return all_pass ? kExitOk : kExitCheckFailed;
}

TableRange parse_table_range(const std::string& text) {
  TableRange range;
  std::vector<std::string> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ':')) parts.push_back(item);
  long long count = 0;
  if (parts.size() != 3 || !parse_double(parts[0], range.start) || !parse_double(parts[1], range.stop) ||
      !parse_integer(parts[2], count) || count < 1 || count > 1000000) {
    throw ConfigError({"range must be 'start:stop:count' with count >= 1, got '" + text + "'"});
  }
  range.count = static_cast<int>(count);
  return range;
}

int run_table(const std::string& function, const TableRange& range, double alpha, double beta, std::ostream& out) {
  std::function<double(double)> f;
  if (function == "E") {
    const Alpha a = table_alpha(alpha);
    f = [a](double x) { return mittag_leffler(a, x); };
  } else if (function == "E2") {
    const Alpha a = table_alpha(alpha);
    if (!(beta > 0.0)) throw ConfigError({"beta must be > 0"});
    f = [a, beta](double x) { return mittag_leffler_two(a, beta, x); };
  } else if (function == "Phi") {
    const Alpha a = table_alpha(alpha);
    f = [a](double x) { return wright(a, x); };
  } else if (function == "Gamma") {
    f = [](double x) { return gamma(x); };
  } else {
    throw ConfigError({"unknown function '" + function + "' (expected E, E2, Phi or Gamma)"});
  }
  for (int i = 0; i < range.count; ++i) {
    const double x =
        range.count == 1 ? range.start : range.start + (range.stop - range.start) * i / (range.count - 1);
    out << format_number(x) << '\t' << format_number(f(x)) << '\n';
  }
  return kExitOk;
}

int exit_code_for(const std::exception& error) {
  // Domain errors reject an input value (parameter, grid size), not a computation.
  if (dynamic_cast<const ConfigError*>(&error) || dynamic_cast<const DomainError*>(&error)) return kExitConfig;
  if (dynamic_cast<const IoError*>(&error)) return kExitIo;
  return kExitNumerical;
}

}  // namespace fraccm
