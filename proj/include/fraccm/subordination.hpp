#pragma once

#include <functional>
#include <span>
#include <vector>

#include "fraccm/quadrature.hpp"
#include "fraccm/specfun.hpp"

namespace fraccm {

/// Exponential semigroup T(t) = e^{lambda t}.
struct ScalarSemigroup {
  double lambda = 0.0;

  explicit ScalarSemigroup(double rate);
  double operator()(double t) const;
};

/// S_a(t) for T(t) = e^{lambda t}: E_a(lambda t^a).
double s_alpha_scalar(Alpha alpha, double lambda, double t);

/// P_a(t) for T(t) = e^{lambda t}: t^(a-1) E_{a,a}(lambda t^a), t > 0.
double p_alpha_scalar(Alpha alpha, double lambda, double t);

// Subordination integrals against the Wright density. These are independent
// cross-checks of the Mittag-Leffler collapse above, not solver paths.

struct SubordinationQuadrature {
  int node_count = 16;  ///< Gauss-Legendre nodes per unit-width panel
  double tau_cutoff = 0.0;

  void validate() const;
};

/// Smallest integer cutoff whose truncated Wright moments 0..2 agree with
/// wright_moment to within `moment_tol`.
SubordinationQuadrature certify_tau_cutoff(Alpha alpha, int node_count = 16, double moment_tol = 1e-8);

/// int_0^cutoff tau^k Phi_a(tau) dtau.
double truncated_wright_moment(Alpha alpha, int k, const SubordinationQuadrature& quad);

/// int_0^inf Phi_a(tau) T(tau t^a) dtau.
double s_alpha_by_subordination(Alpha alpha, const ScalarSemigroup& semigroup, double t,
                                const SubordinationQuadrature& quad);

/// a t^(a-1) int_0^inf tau Phi_a(tau) T(tau t^a) dtau.
double p_alpha_by_subordination(Alpha alpha, const ScalarSemigroup& semigroup, double t,
                                const SubordinationQuadrature& quad);

/// L1 product-integration approximation of the Caputo-Djrbashian derivative
/// on a uniform grid. Entry k approximates D^a f(k dt); entry 0 is 0.
std::vector<double> cd_derivative_l1(std::span<const double> samples, Alpha alpha, double dt);

struct MildResidualReport {
  double dt = 0.0;
  /// Residuals are reported on nodes with t >= window_start.
  double window_start = 0.0;
  std::vector<double> times;
  std::vector<double> solution;
  std::vector<double> residuals;
  double max_residual = 0.0;
};

/// Builds u(t) = S_a(t) x + int_0^t P_a(t - s) f(s) ds on a uniform grid of
/// `steps` intervals over [0, t_end], differentiates it with the L1 scheme
/// and reports |D^a u - lambda u - f| on the second half of the grid.
MildResidualReport verify_mild_solution_scalar(Alpha alpha, double lambda, double x0,
                                               const std::function<double(double)>& forcing,
                                               double t_end, int steps);

}  // namespace fraccm
