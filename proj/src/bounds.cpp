#include "fraccm/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fraccm/errors.hpp"

namespace fraccm {

namespace {

double factorial(int n) {
  double out = 1.0;
  for (int k = 2; k <= n; ++k) out *= k;
  return out;
}

// (n-1)(n-2)...(n-j-1): j + 1 factors.
double falling(int n, int j) {
  double out = 1.0;
  for (int k = 1; k <= j + 1; ++k) out *= n - k;
  return out;
}

void check_order(int n) {
  if (n < 1) throw DomainError("order n must be >= 1");
}

void check_common(int n, double t, double C, double A) {
  check_order(n);
  if (!(t >= 0.0) || !std::isfinite(t)) throw DomainError("t must be finite and >= 0");
  if (!(C >= 1.0)) throw DomainError("C must be >= 1");
  if (!(A >= 1.0)) throw DomainError("A must be >= 1");
}

// log of the t-independent factor M C^n n! (n-1)! base^n [/(q-1)].
double log_prefactor(int n, double C, double base, double M) {
  return std::log(M) + n * std::log(C) + std::log(factorial(n)) + std::log(factorial(n - 1)) + n * std::log(base);
}

double supercritical_q(double kappa, double A) {
  if (!(kappa > 1.0)) throw DomainError("supercritical envelope requires kappa > 1");
  const double q = kappa * A / (kappa - 1.0);
  if (!(q > 1.0)) {
    throw DomainError("supercritical envelope requires q = kappa A / (kappa - 1) > 1, got q = " + std::to_string(q));
  }
  return q;
}

double log_envelope_super(int n, double t, Alpha alpha, double kappa, double A, double C, double M) {
  const double q = supercritical_q(kappa, A);
  const double rate = std::pow(n * (kappa - 1.0), 1.0 / alpha.value());
  return log_prefactor(n, C, q, M) - std::log(q - 1.0) + rate * t;
}

double log_envelope_sub(int n, double t, Alpha alpha, double kappa, double A, double C, double M) {
  if (!(kappa > 0.0 && kappa < 1.0)) throw DomainError("subcritical envelope requires 0 < kappa < 1");
  if (!(t >= 1.0)) throw DomainError("subcritical envelope is defined for t >= 1");
  return log_prefactor(n, C, kappa * A / (1.0 - kappa), M) - alpha.value() * std::log(t);
}

double checked_exp(double log_value) {
  if (log_value > std::log(std::numeric_limits<double>::max())) {
    throw OverflowError("envelope exceeds the double range");
  }
  return std::exp(log_value);
}

// Slope of the least-squares line through (x, y).
double ls_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxx > 0.0 ? sxy / sxx : 0.0;
}

double ml_of(Alpha alpha, double rate, double t) {
  if (t == 0.0) return 1.0;
  return mittag_leffler(alpha, rate * std::pow(t, alpha.value()));
}

}  // namespace

std::string to_string(Regime regime) {
  switch (regime) {
    case Regime::supercritical:
      return "supercritical";
    case Regime::subcritical:
      return "subcritical";
    case Regime::critical:
      return "critical";
  }
  return "unknown";
}

Regime regime_for(double kappa) {
  if (kappa > 1.0) return Regime::supercritical;
  if (kappa < 1.0) return Regime::subcritical;
  return Regime::critical;
}

BoundParams BoundParams::from_chain(const ChainConfig& config) {
  const DispersalKernel kernel = config.make_kernel();
  double peak = 0.0;
  for (double v : kernel.samples()) peak = std::max(peak, v);
  BoundParams out;
  out.alpha = config.params.alpha;
  out.kappa = config.params.kappa * kernel.mass();
  out.C = config.params.C;
  out.A = std::max(1.0, peak / kernel.mass());
  return out;
}

double bound_supercritical(int n, double t, Alpha alpha, double kappa, double C, double A) {
  check_common(n, t, C, A);
  if (!(kappa > 1.0)) throw DomainError("supercritical bound requires kappa > 1");
  const double q = kappa * A / (kappa - 1.0);
  double bracket = std::pow(C, n) * factorial(n);
  double sum = 0.0;
  for (int j = 0; j <= n - 2; ++j) sum += std::pow(q, j + 1) * falling(n, j);
  bracket += std::pow(C, n - 1) * factorial(n) * sum;
  return ml_of(alpha, n * (kappa - 1.0), t) * bracket;
}

double bound_subcritical(int n, double t, Alpha alpha, double kappa, double C, double A) {
  check_common(n, t, C, A);
  if (!(kappa > 0.0 && kappa < 1.0)) throw DomainError("subcritical bound requires 0 < kappa < 1");
  const double p = kappa * A / (1.0 - kappa);
  double out = std::pow(C, n) * factorial(n) * ml_of(alpha, -n * (1.0 - kappa), t);
  double sum = 0.0;
  for (int j = 0; j <= n - 2; ++j) {
    sum += std::pow(p, j + 1) * falling(n, j) / factorial(j + 1) * ml_of(alpha, -(n - j - 1) * (1.0 - kappa), t);
  }
  out += std::pow(C, n - 1) * factorial(n) * sum;
  return out;
}

double bound_critical(int n, double t, Alpha alpha, double C, double A) {
  check_common(n, t, C, A);
  const double a = alpha.value();
  double sum = 0.0;
  for (int j = 0; j <= n - 2; ++j) {
    const double m = j + 1;
    sum += std::pow(A, m) / (m * gamma(m * a)) * falling(n, j) * std::pow(t, m * a);
  }
  return std::pow(C, n) * factorial(n) + std::pow(C, n - 1) * factorial(n) * sum / a;
}

double correlation_bound(int n, double t, const BoundParams& params) {
  switch (regime_for(params.kappa)) {
    case Regime::supercritical:
      return bound_supercritical(n, t, params.alpha, params.kappa, params.C, params.A);
    case Regime::subcritical:
      return bound_subcritical(n, t, params.alpha, params.kappa, params.C, params.A);
    case Regime::critical:
      return bound_critical(n, t, params.alpha, params.C, params.A);
  }
  return 0.0;
}

double envelope_supercritical(int n, double t, Alpha alpha, double kappa, double C, double A, double M) {
  check_common(n, t, C, A);
  if (!(M > 0.0)) throw DomainError("envelope constant M must be positive");
  return checked_exp(log_envelope_super(n, t, alpha, kappa, A, C, M));
}

double envelope_subcritical(int n, double t, Alpha alpha, double kappa, double C, double A, double M) {
  check_common(n, t, C, A);
  if (!(M > 0.0)) throw DomainError("envelope constant M must be positive");
  return checked_exp(log_envelope_sub(n, t, alpha, kappa, A, C, M));
}

EnvelopeFit fit_envelope(Regime regime, int n, std::span<const double> times, std::span<const double> values,
                         const BoundParams& params) {
  check_order(n);
  if (times.size() != values.size()) throw MismatchError("fit_envelope: times and values differ in length");
  if (times.size() < 2) throw DomainError("fit_envelope needs at least two samples");
  if (regime == Regime::critical) throw DomainError("no envelope is defined in the critical regime");
  if (regime != regime_for(params.kappa)) {
    throw MismatchError("fit_envelope: " + to_string(regime) + " envelope requested for kappa = " +
                        std::to_string(params.kappa));
  }

  auto log_unit = [&](double t) {
    return regime == Regime::supercritical ? log_envelope_super(n, t, params.alpha, params.kappa, params.A, params.C, 1.0)
                                           : log_envelope_sub(n, t, params.alpha, params.kappa, params.A, params.C, 1.0);
  };

  std::vector<double> x;
  std::vector<double> logv;
  double log_m = 0.0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (!(values[i] > 0.0)) throw DomainError("fit_envelope needs positive values");
    const double lv = std::log(values[i]);
    log_m += lv - log_unit(times[i]);
    x.push_back(regime == Regime::supercritical ? times[i] : std::log(times[i]));
    logv.push_back(lv);
  }
  EnvelopeFit fit;
  log_m /= static_cast<double>(times.size());
  fit.M = std::exp(log_m);
  fit.exponent_or_slope = ls_slope(x, logv);

  fit.dominance_start = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t i = times.size(); i-- > 0;) {
    if (log_m + log_unit(times[i]) < logv[i]) break;
    fit.dominance_start = times[i];
  }
  return fit;
}

double djrbashian_identity_residual(Alpha alpha, double z, double lambda, double t, const GradedRuleOptions& quadrature) {
  if (!(t > 0.0) || !std::isfinite(t)) throw DomainError("djrbashian identity needs t > 0");
  if (!std::isfinite(z) || !std::isfinite(lambda)) throw DomainError("djrbashian identity needs finite rates");
  const double a = alpha.value();
  const QuadratureRule rule = singular_product_rule(t, 0.0, a - 1.0, quadrature);
  double lhs = 0.0;
  for (std::size_t i = 0; i < rule.size(); ++i) {
    const double s = rule.nodes[i];
    const double u = t - s;
    lhs += rule.weights[i] * mittag_leffler_two(alpha, a, z * std::pow(u, a)) *
           mittag_leffler(alpha, lambda * std::pow(s, a));
  }

  const double ta = std::pow(t, a);
  double rhs;
  if (std::abs(z - lambda) < 1e-5 * std::max({std::abs(z), std::abs(lambda), 1.0})) {
    const double h = lambda != 0.0 ? 1e-6 * std::abs(lambda) : 1e-6;
    rhs = (mittag_leffler(alpha, (lambda + h) * ta) - mittag_leffler(alpha, (lambda - h) * ta)) / (2.0 * h);
  } else {
    rhs = (mittag_leffler(alpha, z * ta) - mittag_leffler(alpha, lambda * ta)) / (z - lambda);
  }
  return std::abs(lhs - rhs);
}

double beta_identity_residual(double alpha, double beta, double t, int nodes) {
  if (!(alpha > 0.0 && alpha <= 1.0) || !(beta > 0.0 && beta <= 1.0)) {
    throw DomainError("beta identity needs alpha, beta in (0, 1]");
  }
  if (!(t > 0.0) || !std::isfinite(t)) throw DomainError("beta identity needs t > 0");
  const QuadratureRule rule = jacobi_product_rule(t, beta - 1.0, alpha - 1.0, nodes);
  const double lhs = rule.integrate([](double) { return 1.0; });
  const double rhs = gamma(alpha) * gamma(beta) / gamma(alpha + beta) * std::pow(t, alpha + beta - 1.0);
  return std::abs(lhs - rhs);
}

bool BoundReport::all_pass() const {
  return std::all_of(rows.begin(), rows.end(), [](const BoundRow& r) { return r.pass; });
}

BoundReport check_solution_against_bounds(std::span<const NormRow> norms, const BoundParams& params, Regime regime) {
  if (regime != regime_for(params.kappa)) {
    throw MismatchError("regime mismatch: " + to_string(regime) + " bound requested for effective kappa = " +
                        std::to_string(params.kappa) + " (" + to_string(regime_for(params.kappa)) + ")");
  }
  BoundReport report;
  report.regime = regime;
  report.params = params;
  for (const NormRow& norm : norms) {
    BoundRow row;
    row.regime = regime;
    row.n = norm.n;
    row.t = norm.t;
    row.solver_norm = norm.max_norm;
    row.bound = correlation_bound(norm.n, norm.t, params);
    row.ratio = row.solver_norm / row.bound;
    row.pass = row.solver_norm <= row.bound * (1.0 + kBoundSlack);
    report.rows.push_back(row);
  }

  if (regime != Regime::critical) {
    std::vector<double> times;
    std::vector<double> values;
    for (const NormRow& norm : norms) {
      if (norm.n != 1) continue;
      if (regime == Regime::subcritical && norm.t < 1.0) continue;
      times.push_back(norm.t);
      values.push_back(norm.max_norm);
    }
    bool q_ok = regime != Regime::supercritical || params.kappa * params.A / (params.kappa - 1.0) > 1.0;
    if (times.size() >= 2 && q_ok) report.envelope_fit = fit_envelope(regime, 1, times, values, params);
  }
  return report;
}

}  // namespace fraccm
