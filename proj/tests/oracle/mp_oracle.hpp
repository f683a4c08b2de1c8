#pragma once

// Arbitrary-precision reference values (MPFR), used only by the tests.
// Series are summed at a working precision sized for their cancellation and
// re-summed at twice that precision until the two results agree.

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <boost/multiprecision/mpfr.hpp>

namespace oracle {

using Real = boost::multiprecision::mpfr_float;

class ScopedDigits {
 public:
  explicit ScopedDigits(unsigned digits) : saved_(Real::default_precision()) { Real::default_precision(digits); }
  ~ScopedDigits() { Real::default_precision(saved_); }
  ScopedDigits(const ScopedDigits&) = delete;
  ScopedDigits& operator=(const ScopedDigits&) = delete;

 private:
  unsigned saved_;
};

inline Real rgamma(const Real& x) {
  if (x <= 0 && x == floor(x)) return Real(0);
  return 1 / boost::multiprecision::tgamma(x);
}

inline double gamma(double x, unsigned digits = 50) {
  ScopedDigits scope(digits);
  return static_cast<double>(boost::multiprecision::tgamma(Real(x)));
}

// sum z^n / Gamma(a n + b) at `digits` digits, stopped once terms are below
// 10^-(digits - 10) of max(1, |sum|) past the largest term.
inline Real ml_series_at(double a, double b, double z, unsigned digits) {
  ScopedDigits scope(digits);
  const Real ra(a), rb(b), rz(z);
  const Real cutoff = pow(Real(10), -static_cast<int>(digits) + 10);
  Real sum = 0, power = 1, peak = 0;
  for (long n = 0; n < 2000000; ++n) {
    const Real term = power * rgamma(ra * n + rb);
    sum += term;
    peak = std::max(peak, Real(abs(term)));
    if (n > 10 && abs(term) < peak && abs(term) < cutoff * std::max(Real(1), Real(abs(sum)))) return sum;
    power *= rz;
  }
  throw std::runtime_error("ml_series_at: no convergence");
}

inline unsigned ml_digits(double a, double z) {
  const double growth = z < 0 ? std::pow(-z, 1.0 / a) / std::log(10.0) : 0.0;
  return 40 + static_cast<unsigned>(growth);
}

/// E_{a,b}(z) to double accuracy.
inline double mittag_leffler(double a, double b, double z) {
  unsigned digits = ml_digits(a, z);
  double prev = static_cast<double>(ml_series_at(a, b, z, digits));
  for (int attempt = 0; attempt < 4; ++attempt) {
    digits *= 2;
    const double next = static_cast<double>(ml_series_at(a, b, z, digits));
    if (next == prev || std::abs(next - prev) <= 1e-17 * std::abs(next)) return next;
    prev = next;
  }
  throw std::runtime_error("mittag_leffler oracle did not stabilise");
}

// sum (-z)^n / (n! Gamma(1 - a - a n)).
inline Real wright_series_at(double a, double z, unsigned digits) {
  ScopedDigits scope(digits);
  const Real ra(a), rz(z);
  const Real cutoff = pow(Real(10), -static_cast<int>(digits) + 10);
  Real sum = 0, power = 1, fact = 1, peak = 0;
  for (long n = 0; n < 2000000; ++n) {
    if (n > 0) fact *= n;
    const Real term = power / fact * rgamma(1 - ra - ra * n);
    sum += term;
    // |1/Gamma(1 - x)| <= Gamma(x) / pi bounds terms that vanish at poles.
    const Real envelope = abs(power) / fact * boost::multiprecision::tgamma(ra * (n + 1));
    if (n > 10 && envelope < peak && envelope < cutoff * std::max(Real(1), Real(abs(sum)))) return sum;
    peak = std::max(peak, envelope);
    power *= -rz;
  }
  throw std::runtime_error("wright_series_at: no convergence");
}

/// Phi_a(z) to double accuracy.
inline double wright(double a, double z) {
  unsigned digits = 40;
  double prev = static_cast<double>(wright_series_at(a, z, digits));
  for (int attempt = 0; attempt < 6; ++attempt) {
    digits *= 2;
    const double next = static_cast<double>(wright_series_at(a, z, digits));
    if (next == prev || std::abs(next - prev) <= 1e-17 * std::abs(next) + 1e-300) return next;
    prev = next;
  }
  throw std::runtime_error("wright oracle did not stabilise");
}

}  // namespace oracle
