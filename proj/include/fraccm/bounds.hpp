#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fraccm/hierarchy.hpp"
#include "fraccm/quadrature.hpp"
#include "fraccm/specfun.hpp"

namespace fraccm {

enum class Regime { supercritical, subcritical, critical };

std::string to_string(Regime regime);
/// Regime of the effective branching rate: > 1, < 1 or exactly 1.
Regime regime_for(double kappa);

/// Constants entering the correlation bounds. `kappa` is the effective
/// branching rate (kappa * kernel mass) and `A` = max(1, sup a / mass), i.e.
/// the constants of the equivalent unit-mass kernel.
struct BoundParams {
  Alpha alpha{0.5};
  double kappa = 1.0;
  double C = 1.0;
  double A = 1.0;

  static BoundParams from_chain(const ChainConfig& config);
};

/// E_a(n(k-1)t^a) [C^n n! + C^(n-1) n! sum_j q^(j+1) (n-1)...(n-j-1)],
/// q = k A / (k - 1), k > 1.
double bound_supercritical(int n, double t, Alpha alpha, double kappa, double C, double A);

/// C^n n! E_a(-n(1-k)t^a)
///   + C^(n-1) n! sum_j p^(j+1) (n-1)...(n-j-1)/(j+1)! E_a(-(n-j-1)(1-k)t^a),
/// p = k A / (1 - k), 0 < k < 1.
double bound_subcritical(int n, double t, Alpha alpha, double kappa, double C, double A);

/// C^n n! + C^(n-1) n! / a sum_j A^(j+1) (n-1)...(n-j-1) t^((j+1)a) / ((j+1) G((j+1)a)).
double bound_critical(int n, double t, Alpha alpha, double C, double A);

/// Dispatches on regime_for(params.kappa).
double correlation_bound(int n, double t, const BoundParams& params);

/// M C^n n! (n-1)! q^n / (q - 1) exp([n(k-1)]^(1/a) t), q = k A / (k - 1) > 1.
double envelope_supercritical(int n, double t, Alpha alpha, double kappa, double C, double A, double M);

/// M C^n n! (n-1)! (k A / (1 - k))^n t^(-a), t >= 1.
double envelope_subcritical(int n, double t, Alpha alpha, double kappa, double C, double A, double M);

struct EnvelopeFit {
  /// Least-squares estimate of M in log space.
  double M = 0.0;
  /// Fitted growth rate (supercritical) or log-log slope (subcritical) of
  /// the fitted values.
  double exponent_or_slope = 0.0;
  /// First sample time from which the fitted envelope dominates every later
  /// sample; NaN when it never does.
  double dominance_start = 0.0;
};

/// Fits M so that the envelope of `regime` matches `values` (order n) at
/// `times`. Needs at least two samples; subcritical times must be >= 1.
EnvelopeFit fit_envelope(Regime regime, int n, std::span<const double> times, std::span<const double> values,
                         const BoundParams& params);

/// |int_0^t (t-s)^(a-1) E_{a,a}(z (t-s)^a) E_a(lambda s^a) ds
///   - (E_a(z t^a) - E_a(lambda t^a)) / (z - lambda)|.
/// For |z - lambda| < 1e-5 max(|z|, |lambda|, 1) the divided difference is
/// replaced by a central difference in the rate at spacing 1e-6 |lambda|.
double djrbashian_identity_residual(Alpha alpha, double z, double lambda, double t,
                                    const GradedRuleOptions& quadrature = {12, 20, 0.25});

/// |int_0^t (t-s)^(a-1) s^(b-1) ds - G(a) G(b) / G(a+b) t^(a+b-1)|, using a
/// Gauss-Jacobi rule carrying both algebraic weights.
double beta_identity_residual(double alpha, double beta, double t, int nodes = 4);

struct BoundRow {
  Regime regime = Regime::critical;
  int n = 0;
  double t = 0.0;
  double solver_norm = 0.0;
  double bound = 0.0;
  double ratio = 0.0;
  bool pass = false;
};

struct BoundReport {
  Regime regime = Regime::critical;
  BoundParams params;
  std::vector<BoundRow> rows;
  /// Envelope fit of the order-1 norms (super- and subcritical regimes with
  /// at least two usable times).
  std::optional<EnvelopeFit> envelope_fit;

  bool all_pass() const;
};

/// Relative slack of the pass criterion solver_norm <= bound (1 + slack).
inline constexpr double kBoundSlack = 1e-6;

/// Compares each norm row with the bound of `regime`; MismatchError when
/// `regime` does not match the effective kappa of `params`.
BoundReport check_solution_against_bounds(std::span<const NormRow> norms, const BoundParams& params, Regime regime);

}  // namespace fraccm
