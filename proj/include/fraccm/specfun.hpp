#pragma once

// Gamma, Mittag-Leffler and Wright functions on the real line.
//
// Evaluation regimes for E_{a,b}(z):
//   |z| small            Taylor series, compensated summation, certified
//                        against the largest term (cancellation bound)
//   z large positive     exponential asymptotic plus algebraic tail
//   z large negative     algebraic asymptotic series, accepted only when the
//                        first omitted term is below the target
//   otherwise (z < 0)    real-line integral representation with a positive
//                        kernel, valid for 0 < a < 1 and b < 1 + a; larger b is
//                        reduced with E_{a,b}(z) = (E_{a,b-a}(z) - 1/G(b-a))/z
//
// The Wright function Phi_a (M-Wright density) uses its Taylor series near
// the origin and the Kanter integral of the one-sided stable law elsewhere.

namespace fraccm {

struct SeriesPolicy {
  int max_terms = 2000;
  double abs_tol = 1e-15;
  /// |z| above which the raw Taylor series is no longer attempted first.
  double switch_radius = 5.0;

  void validate() const;
};

/// Fractional order in (0, 1].
class Alpha {
 public:
  explicit Alpha(double value);

  double value() const noexcept { return value_; }
  bool is_one() const noexcept { return value_ == 1.0; }

 private:
  double value_;
};

/// Gamma function. Accepts negative non-integers; poles raise DomainError and
/// results beyond the double range raise OverflowError.
double gamma(double x);

/// 1/Gamma(x); exactly zero at the poles, finite everywhere.
double rgamma(double x);

/// E_a(z) = sum z^n / Gamma(1 + a n).
double mittag_leffler(Alpha alpha, double z, const SeriesPolicy& policy = {});

/// E_{a,b}(z) = sum z^n / Gamma(b + a n), b > 0.
double mittag_leffler_two(Alpha alpha, double beta, double z, const SeriesPolicy& policy = {});

/// Wright function Phi_a(z) = sum (-z)^n / (n! Gamma(1 - a - a n)), z >= 0, a < 1.
double wright(Alpha alpha, double z, const SeriesPolicy& policy = {});

/// int_0^inf t^n Phi_a(t) dt = n! / Gamma(1 + a n), a < 1.
double wright_moment(Alpha alpha, int n);

}  // namespace fraccm
