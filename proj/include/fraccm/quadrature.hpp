#pragma once

#include <limits>
#include <vector>

namespace fraccm {

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;

  std::size_t size() const noexcept { return nodes.size(); }

  template <typename F>
  double integrate(F&& f) const {
    double sum = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) sum += weights[i] * f(nodes[i]);
    return sum;
  }
};

/// Gauss-Jacobi rule on [-1, 1] for the weight (1 - x)^a (1 + x)^b, a, b > -1.
/// Built by Golub-Welsch; results are cached per (n, a, b).
const QuadratureRule& gauss_jacobi(int n, double a, double b);

inline const QuadratureRule& gauss_legendre(int n) { return gauss_jacobi(n, 0.0, 0.0); }

/// Panel layout for singular product rules on [0, t].
struct GradedRuleOptions {
  int nodes_per_panel = 8;
  /// Number of geometrically shrinking panels toward each endpoint.
  int levels = 6;
  /// Ratio between neighbouring graded panels, in (0, 1).
  double ratio = 0.25;
  /// Panels wider than this are split uniformly.
  double max_panel_width = std::numeric_limits<double>::infinity();
};

/// Product-integration rule for
///     int_0^t s^left (t - s)^right g(s) ds  ~  sum_i w_i g(s_i),
/// left, right > -1. The endpoint panels use Gauss-Jacobi rules that absorb
/// the algebraic factors exactly; interior panels are Gauss-Legendre with the
/// weight folded in. Nodes are strictly inside (0, t) and increasing.
QuadratureRule singular_product_rule(double t, double left_exponent, double right_exponent,
                                     const GradedRuleOptions& options);

/// Single-panel Gauss-Jacobi version of the above (no grading).
QuadratureRule jacobi_product_rule(double t, double left_exponent, double right_exponent, int nodes);

}  // namespace fraccm
