#include "fraccm/quadrature.hpp"

#include <Eigen/Eigenvalues>
#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <tuple>

#include "fraccm/errors.hpp"

namespace fraccm {

namespace {

QuadratureRule build_gauss_jacobi(int n, double a, double b) {
  // Three-term recurrence of monic Jacobi polynomials.
  Eigen::VectorXd diag(n);
  Eigen::VectorXd sub(std::max(n - 1, 0));
  const double ab = a + b;
  for (int k = 0; k < n; ++k) {
    const double s = 2.0 * k + ab;
    if (k == 0) {
      diag(k) = (b - a) / (ab + 2.0);
    } else {
      diag(k) = (b * b - a * a) / (s * (s + 2.0));
    }
  }
  for (int k = 1; k < n; ++k) {
    const double s = 2.0 * k + ab;
    double beta_k = 0.0;
    if (k == 1) {
      beta_k = 4.0 * (1.0 + a) * (1.0 + b) / ((2.0 + ab) * (2.0 + ab) * (3.0 + ab));
    } else {
      beta_k = 4.0 * k * (k + a) * (k + b) * (k + ab) / (s * s * (s + 1.0) * (s - 1.0));
    }
    sub(k - 1) = std::sqrt(beta_k);
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
  if (solver.info() != Eigen::Success) throw ConvergenceError("Golub-Welsch eigen-solve failed");

  const double mu0 = std::exp((ab + 1.0) * std::log(2.0) + boost::math::lgamma(a + 1.0) + boost::math::lgamma(b + 1.0) -
                              boost::math::lgamma(ab + 2.0));
  QuadratureRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    rule.nodes[i] = solver.eigenvalues()(i);
    const double v0 = solver.eigenvectors()(0, i);
    rule.weights[i] = mu0 * v0 * v0;
  }
  return rule;
}

struct Panel {
  double lo;
  double hi;
};

std::vector<Panel> graded_panels(double t, const GradedRuleOptions& opt) {
  std::vector<double> breaks{0.0};
  const double half = 0.5 * t;
  for (int k = opt.levels; k >= 1; --k) breaks.push_back(half * std::pow(opt.ratio, k));
  breaks.push_back(half);
  for (int k = 1; k <= opt.levels; ++k) breaks.push_back(t - half * std::pow(opt.ratio, k));
  breaks.push_back(t);

  std::vector<Panel> panels;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    const double lo = breaks[i];
    const double hi = breaks[i + 1];
    const double width = hi - lo;
    const int pieces = std::isfinite(opt.max_panel_width)
                           ? std::max(1, static_cast<int>(std::ceil(width / opt.max_panel_width)))
                           : 1;
    for (int p = 0; p < pieces; ++p) {
      const double a = lo + width * p / pieces;
      const double b = (p + 1 == pieces) ? hi : lo + width * (p + 1) / pieces;
      panels.push_back({a, b});
    }
  }
  return panels;
}

void validate_exponents(double left, double right) {
  if (!(left > -1.0) || !(right > -1.0)) {
    throw DomainError("product rule exponents must exceed -1");
  }
}

}  // namespace

const QuadratureRule& gauss_jacobi(int n, double a, double b) {
  if (n < 1) throw DomainError("Gauss-Jacobi rule needs at least one node");
  if (!(a > -1.0) || !(b > -1.0)) throw DomainError("Gauss-Jacobi exponents must exceed -1");
  static std::mutex mutex;
  static std::map<std::tuple<int, double, double>, std::unique_ptr<QuadratureRule>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[{n, a, b}];
  if (!slot) slot = std::make_unique<QuadratureRule>(build_gauss_jacobi(n, a, b));
  return *slot;
}

QuadratureRule singular_product_rule(double t, double left_exponent, double right_exponent,
                                     const GradedRuleOptions& options) {
  validate_exponents(left_exponent, right_exponent);
  if (!(t > 0.0) || !std::isfinite(t)) throw DomainError("product rule needs a finite t > 0");
  if (options.nodes_per_panel < 1) throw DomainError("nodes_per_panel must be >= 1");
  if (options.levels < 0) throw DomainError("levels must be >= 0");
  if (!(options.ratio > 0.0 && options.ratio < 1.0)) throw DomainError("grading ratio must lie in (0,1)");
  if (!(options.max_panel_width > 0.0)) throw DomainError("max_panel_width must be > 0");
  // Deeper grading would place nodes closer to t than double resolution.
  if (options.levels * std::log(options.ratio) < std::log(1e-13)) {
    throw DomainError("graded panels finer than 1e-13 t are not resolvable in double precision");
  }

  if (options.levels == 0 && !std::isfinite(options.max_panel_width)) {
    return jacobi_product_rule(t, left_exponent, right_exponent, options.nodes_per_panel);
  }

  const auto panels = graded_panels(t, options);
  const int p = options.nodes_per_panel;
  QuadratureRule rule;
  rule.nodes.reserve(panels.size() * p);
  rule.weights.reserve(panels.size() * p);

  for (std::size_t k = 0; k < panels.size(); ++k) {
    const bool first = (k == 0);
    const bool last = (k + 1 == panels.size());
    const double lo = panels[k].lo;
    const double hi = panels[k].hi;
    const double half = 0.5 * (hi - lo);
    // The Jacobi weight (1 - x)^ja (1 + x)^jb carries the factors that are
    // singular on this panel.
    const double ja = last ? right_exponent : 0.0;
    const double jb = first ? left_exponent : 0.0;
    const auto& base = gauss_jacobi(p, ja, jb);
    const double scale = std::pow(half, 1.0 + ja + jb);
    for (int i = 0; i < p; ++i) {
      const double x = base.nodes[i];
      const double s = lo + half * (1.0 + x);
      double w = base.weights[i] * scale;
      if (!first) w *= std::pow(s, left_exponent);
      if (!last) w *= std::pow(t - s, right_exponent);
      rule.nodes.push_back(s);
      rule.weights.push_back(w);
    }
  }
  return rule;
}

QuadratureRule jacobi_product_rule(double t, double left_exponent, double right_exponent, int nodes) {
  validate_exponents(left_exponent, right_exponent);
  if (!(t > 0.0) || !std::isfinite(t)) throw DomainError("product rule needs a finite t > 0");
  const auto& base = gauss_jacobi(nodes, right_exponent, left_exponent);
  const double half = 0.5 * t;
  const double scale = std::pow(half, 1.0 + left_exponent + right_exponent);
  QuadratureRule rule;
  rule.nodes.resize(nodes);
  rule.weights.resize(nodes);
  for (int i = 0; i < nodes; ++i) {
    rule.nodes[i] = half * (1.0 + base.nodes[i]);
    rule.weights[i] = base.weights[i] * scale;
  }
  return rule;
}

}  // namespace fraccm
