#include "fraccm/subordination.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "fraccm/errors.hpp"

namespace fraccm {

namespace {

GradedRuleOptions mild_rule_options() {
  GradedRuleOptions opt;
  opt.nodes_per_panel = 12;
  opt.levels = 20;
  opt.ratio = 0.25;
  return opt;
}

// int_0^t (t - s)^(a-1) E_{a,a}(lambda (t - s)^a) f(s) ds
double duhamel_integral(Alpha alpha, double lambda, const std::function<double(double)>& forcing, double t,
                        const GradedRuleOptions& opt) {
  if (t == 0.0) return 0.0;
  const double a = alpha.value();
  const auto rule = singular_product_rule(t, 0.0, a - 1.0, opt);
  return rule.integrate([&](double s) {
    const double u = t - s;
    const double kernel = alpha.is_one() ? std::exp(lambda * u)
                                         : mittag_leffler_two(alpha, a, lambda * std::pow(u, a));
    return kernel * forcing(s);
  });
}

template <typename F>
double integrate_panels(double cutoff, int nodes, F&& f) {
  const auto& gl = gauss_legendre(nodes);
  const int panels = static_cast<int>(std::ceil(cutoff));
  double sum = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double lo = cutoff * p / panels;
    const double hi = cutoff * (p + 1) / panels;
    const double half = 0.5 * (hi - lo);
    for (std::size_t i = 0; i < gl.size(); ++i) {
      const double x = lo + half * (1.0 + gl.nodes[i]);
      sum += half * gl.weights[i] * f(x);
    }
  }
  return sum;
}

}  // namespace

ScalarSemigroup::ScalarSemigroup(double rate) : lambda(rate) {
  if (!std::isfinite(rate)) throw DomainError("semigroup rate must be finite");
}

double ScalarSemigroup::operator()(double t) const { return std::exp(lambda * t); }

double s_alpha_scalar(Alpha alpha, double lambda, double t) {
  if (!(t >= 0.0)) throw DomainError("S_alpha(t) requires t >= 0");
  if (!std::isfinite(lambda)) throw DomainError("lambda must be finite");
  if (t == 0.0) return 1.0;
  if (alpha.is_one()) return mittag_leffler(alpha, lambda * t);
  return mittag_leffler(alpha, lambda * std::pow(t, alpha.value()));
}

double p_alpha_scalar(Alpha alpha, double lambda, double t) {
  if (!(t > 0.0)) throw DomainError("P_alpha(t) is singular at t = 0; requires t > 0");
  if (!std::isfinite(lambda)) throw DomainError("lambda must be finite");
  const double a = alpha.value();
  if (alpha.is_one()) return mittag_leffler(alpha, lambda * t);
  const double ta = std::pow(t, a);
  return ta / t * mittag_leffler_two(alpha, a, lambda * ta);
}

void SubordinationQuadrature::validate() const {
  if (node_count < 8) throw DomainError("SubordinationQuadrature.node_count must be >= 8");
  if (!(tau_cutoff > 0.0)) throw DomainError("SubordinationQuadrature.tau_cutoff must be > 0");
}

double truncated_wright_moment(Alpha alpha, int k, const SubordinationQuadrature& quad) {
  quad.validate();
  return integrate_panels(quad.tau_cutoff, quad.node_count,
                          [&](double tau) { return std::pow(tau, k) * wright(alpha, tau); });
}

SubordinationQuadrature certify_tau_cutoff(Alpha alpha, int node_count, double moment_tol) {
  if (alpha.is_one()) throw DomainError("no Wright quadrature for alpha = 1");
  std::array<double, 3> exact{};
  for (int k = 0; k < 3; ++k) exact[k] = wright_moment(alpha, k);
  for (int cutoff = 4; cutoff <= 400; cutoff *= 2) {
    SubordinationQuadrature quad{node_count, static_cast<double>(cutoff)};
    bool ok = true;
    for (int k = 0; k < 3 && ok; ++k) {
      ok = std::abs(truncated_wright_moment(alpha, k, quad) - exact[k]) < moment_tol;
    }
    if (ok) return quad;
  }
  throw ConvergenceError("could not certify a Wright truncation for alpha=" + std::to_string(alpha.value()));
}

double s_alpha_by_subordination(Alpha alpha, const ScalarSemigroup& semigroup, double t,
                                const SubordinationQuadrature& quad) {
  if (!(t >= 0.0)) throw DomainError("S_alpha(t) requires t >= 0");
  if (alpha.is_one()) return semigroup(t);  // Phi_1 is the unit mass at 1
  quad.validate();
  const double ta = std::pow(t, alpha.value());
  return integrate_panels(quad.tau_cutoff, quad.node_count,
                          [&](double tau) { return wright(alpha, tau) * semigroup(tau * ta); });
}

double p_alpha_by_subordination(Alpha alpha, const ScalarSemigroup& semigroup, double t,
                                const SubordinationQuadrature& quad) {
  if (!(t > 0.0)) throw DomainError("P_alpha(t) requires t > 0");
  if (alpha.is_one()) return semigroup(t);
  quad.validate();
  const double a = alpha.value();
  const double ta = std::pow(t, a);
  const double integral = integrate_panels(
      quad.tau_cutoff, quad.node_count, [&](double tau) { return tau * wright(alpha, tau) * semigroup(tau * ta); });
  return a * ta / t * integral;
}

std::vector<double> cd_derivative_l1(std::span<const double> samples, Alpha alpha, double dt) {
  if (samples.size() < 2) throw DomainError("L1 scheme needs at least 2 samples");
  if (!(dt > 0.0)) throw DomainError("L1 scheme needs dt > 0");
  const double a = alpha.value();
  const std::size_t m = samples.size();
  std::vector<double> b(m);
  // b_0 = 1 also at a = 1, where pow(0, 0) would cancel it.
  b[0] = 1.0;
  for (std::size_t j = 1; j < m; ++j) {
    b[j] = std::pow(static_cast<double>(j + 1), 1.0 - a) - std::pow(static_cast<double>(j), 1.0 - a);
  }
  const double scale = std::pow(dt, -a) / std::tgamma(2.0 - a);
  std::vector<double> out(m, 0.0);
  for (std::size_t k = 1; k < m; ++k) {
    double acc = 0.0;
    for (std::size_t j = 0; j < k; ++j) acc += b[j] * (samples[k - j] - samples[k - j - 1]);
    out[k] = scale * acc;
  }
  return out;
}

MildResidualReport verify_mild_solution_scalar(Alpha alpha, double lambda, double x0,
                                               const std::function<double(double)>& forcing,
                                               double t_end, int steps) {
  if (!(t_end > 0.0)) throw DomainError("t_end must be > 0");
  if (steps < 2) throw DomainError("need at least 2 steps");
  MildResidualReport report;
  report.dt = t_end / steps;
  report.window_start = 0.5 * t_end;

  const auto opt = mild_rule_options();
  auto refined = opt;
  refined.nodes_per_panel *= 2;
  const double coarse = duhamel_integral(alpha, lambda, forcing, t_end, opt);
  const double fine = duhamel_integral(alpha, lambda, forcing, t_end, refined);
  if (std::abs(coarse - fine) > 1e-9 * std::max(1.0, std::abs(fine))) {
    throw ConvergenceError("mild-solution quadrature did not converge at t=" + std::to_string(t_end));
  }

  report.times.resize(steps + 1);
  report.solution.resize(steps + 1);
  for (int k = 0; k <= steps; ++k) {
    const double t = k * report.dt;
    report.times[k] = t;
    report.solution[k] = x0 * s_alpha_scalar(alpha, lambda, t) + duhamel_integral(alpha, lambda, forcing, t, opt);
  }
  const auto derivative = cd_derivative_l1(report.solution, alpha, report.dt);
  for (int k = 1; k <= steps; ++k) {
    const double t = report.times[k];
    if (t < report.window_start) continue;
    const double r = std::abs(derivative[k] - lambda * report.solution[k] - forcing(t));
    report.residuals.push_back(r);
    report.max_residual = std::max(report.max_residual, r);
  }
  return report;
}

}  // namespace fraccm
