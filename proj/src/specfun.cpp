#include "fraccm/specfun.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/special_functions/sin_pi.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <sstream>

#include "fraccm/errors.hpp"

namespace fraccm {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kLogMax = 709.782712893384;
constexpr double kGammaMaxArg = 171.6243769563027;
constexpr double kInf = std::numeric_limits<double>::infinity();

// Relative target used when deciding whether a regime is trustworthy.
constexpr double kCertifyRel = 1e-12;
// Above this value of z^(1/alpha) the exponential asymptotic replaces the
// positive-axis series.
constexpr double kPositiveAsymptoticExponent = 30.0;
constexpr double kWrightSeriesRadius = 1.0;

std::string describe(double alpha, double beta, double z) {
  std::ostringstream os;
  os.precision(17);
  os << "alpha=" << alpha << ", beta=" << beta << ", z=" << z;
  return os.str();
}

bool is_nonpositive_integer(double x) { return x <= 0.0 && std::floor(x) == x; }

// std::lgamma writes the global signgam; boost's version is reentrant.
double log_gamma(double x) { return boost::math::lgamma(x); }

double sin_pi(double x) { return boost::math::sin_pi(x); }

double cos_pi(double x) { return boost::math::cos_pi(x); }

// Neumaier variant of Kahan summation; also tracks sum |term| for the
// rounding-error bound.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
    abs_sum_ += std::abs(x);
  }
  double value() const { return sum_ + comp_; }
  double abs_sum() const { return abs_sum_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
  double abs_sum_ = 0.0;
};

// 1/Gamma(a k + b), k = 0..count-1, for b > 0. Extended precision keeps
// z^k and 1/Gamma in range separately. Cached per (a, b).
class SeriesCoefficients {
 public:
  static std::shared_ptr<const std::vector<long double>> get(double a, double b, int count) {
    thread_local double last_a = -1.0, last_b = -1.0;
    thread_local std::shared_ptr<const std::vector<long double>> last;
    if (last && last_a == a && last_b == b && static_cast<int>(last->size()) >= count) return last;
    static std::mutex mutex;
    static std::map<std::pair<double, double>, std::shared_ptr<const std::vector<long double>>> cache;
    std::lock_guard lock(mutex);
    auto& slot = cache[{a, b}];
    if (!slot || static_cast<int>(slot->size()) < count) slot = build(a, b, count);
    last_a = a;
    last_b = b;
    last = slot;
    return slot;
  }

 private:
  static std::shared_ptr<const std::vector<long double>> build(double a, double b, int count) {
    auto out = std::make_shared<std::vector<long double>>(count);
    for (int k = 0; k < count; ++k) {
      const long double g = static_cast<long double>(a) * k + b;
      (*out)[k] = g < 1700.0L ? 1.0L / std::tgamma(g) : std::exp(-boost::math::lgamma(g));
    }
    return out;
  }
};

struct SeriesOutcome {
  double value = 0.0;
  double error_bound = kInf;
  bool converged = false;
};

// Taylor series of E_{a,b}(z), summed in extended precision. The bound
// covers rounding of z^n, of the coefficients and of the summation.
SeriesOutcome ml_series(double a, double b, double z, const SeriesPolicy& policy) {
  constexpr long double eps_ext = std::numeric_limits<long double>::epsilon();
  // Terms grow until a n ~ |z|^(1/a); stop only past that peak.
  const double peak = std::pow(std::abs(z), 1.0 / a) / a;
  const auto coefficients = SeriesCoefficients::get(a, b, policy.max_terms);
  const auto& c = *coefficients;
  long double power = 1.0L;
  long double sum = 0.0L;
  long double comp = 0.0L;
  long double abs_sum = 0.0L;
  long double prev_nonzero = 0.0L;
  int small_streak = 0;
  for (int n = 0; n < policy.max_terms; ++n) {
    if (n > 0) power *= z;
    const long double term = power * c[n];
    const long double t = sum + term;
    comp += (std::abs(sum) >= std::abs(term)) ? (sum - t) + term : (term - t) + sum;
    sum = t;
    // z^n carries n roundings, the coefficient and the addition a few more.
    abs_sum += (n + 8) * std::abs(term);
    if (term == 0.0L) continue;
    const long double mag = std::abs(term);
    const bool past_peak = n > peak + 2.0;
    // Past the peak the term ratio |z| G(a n + b) / G(a n + a + b) decreases,
    // so the tail is bounded by a geometric series.
    const long double ratio = prev_nonzero > 0.0L ? mag / prev_nonzero : 1.0L;
    prev_nonzero = mag;
    const long double value = sum + comp;
    const long double tail = ratio < 1.0L ? mag * ratio / (1.0L - ratio) : kInf;
    if (past_peak && tail <= 0.25L * eps_ext * std::abs(value)) {
      if (++small_streak >= 2) {
        SeriesOutcome out;
        out.value = static_cast<double>(value);
        out.error_bound = static_cast<double>(eps_ext * abs_sum + 2.0L * (mag + tail)) +
                          0.5 * kEps * std::abs(out.value);
        out.converged = true;
        return out;
      }
    } else {
      small_streak = 0;
    }
    if (!std::isfinite(static_cast<double>(abs_sum))) break;
  }
  return {};
}

// Bound on |1/Gamma(y)|: by reflection |1/Gamma(y)| <= Gamma(1 - y) / pi for
// y < 1. Terms that sit near a pole of Gamma are small by accident, so
// truncation decisions use this envelope instead of the term itself.
double log_rgamma_envelope(double y) {
  if (y >= 1.0) return -std::lgamma(y);
  return std::lgamma(1.0 - y) - std::log(kPi);
}

// E_{a,b}(-x) ~ sum_{k>=1} (-1)^{k+1} x^{-k} / Gamma(b - a k), valid for a < 1.
SeriesOutcome ml_asymptotic_negative(double a, double b, double x) {
  CompensatedSum sum;
  double last_envelope = kInf;
  const double log_x = std::log(x);
  for (int k = 1; k <= 80; ++k) {
    const double y = b - a * k;
    const double envelope = std::exp(-k * log_x + log_rgamma_envelope(y));
    if (envelope >= last_envelope) {
      // Divergent tail starts here; the smallest envelope bounds the error.
      SeriesOutcome out;
      out.value = sum.value();
      out.error_bound = last_envelope;
      out.converged = true;
      return out;
    }
    if (envelope <= 0.1 * kEps * std::abs(sum.value())) {
      SeriesOutcome out;
      out.value = sum.value();
      out.error_bound = envelope;
      out.converged = true;
      return out;
    }
    const double r = rgamma(y);
    if (r != 0.0) {
      const double term = ((k % 2 == 1) ? 1.0 : -1.0) * std::copysign(std::exp(-k * log_x + std::log(std::abs(r))), r);
      sum.add(term);
    }
    last_envelope = envelope;
  }
  SeriesOutcome out;
  out.value = sum.value();
  out.error_bound = last_envelope;
  out.converged = true;
  return out;
}

boost::math::quadrature::tanh_sinh<double>& tanh_sinh_rule() {
  thread_local boost::math::quadrature::tanh_sinh<double> rule;
  return rule;
}

boost::math::quadrature::exp_sinh<double>& exp_sinh_rule() {
  thread_local boost::math::quadrature::exp_sinh<double> rule;
  return rule;
}

// E_{a,b}(-x) for 0 < a < 1, 0 < b < 1 + a:
//   (1/pi) int_0^inf u^(a-b) e^-u [u^a sin(pi b) + x sin(pi (b - a))]
//          / (u^(2a) + 2 u^a x cos(pi a) + x^2) du
double ml_integral_negative(double a, double b, double x) {
  const double s_b = sin_pi(b);
  const double s_ba = sin_pi(b - a);
  // 1 + cos(pi a) without cancellation near a = 1.
  const double one_plus_cos = 2.0 * std::pow(cos_pi(0.5 * a), 2);
  auto integrand = [=](double u) -> double {
    if (u <= 0.0) return 0.0;
    const double ua = std::pow(u, a);
    const double diff = ua - x;
    const double denom = diff * diff + 2.0 * ua * x * one_plus_cos;
    const double numer = ua * s_b + x * s_ba;
    const double front = std::exp((a - b) * std::log(u) - u);
    if (front == 0.0) return 0.0;
    return front * numer / denom;
  };

  const double peak = std::min(std::pow(x, 1.0 / a), 60.0);
  constexpr double tol = 1e-12;
  double err_lo = 0.0, err_hi = 0.0, l1_lo = 0.0, l1_hi = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  try {
    lo = tanh_sinh_rule().integrate(integrand, 0.0, peak, tol, &err_lo, &l1_lo);
    hi = exp_sinh_rule().integrate(integrand, peak, kInf, tol, &err_hi, &l1_hi);
  } catch (const std::exception& e) {
    throw ConvergenceError("Mittag-Leffler integral failed (" + describe(a, b, -x) + "): " + e.what());
  }
  const double value = (lo + hi) / kPi;
  const double err = (err_lo + err_hi) / kPi;
  if (!std::isfinite(value) || err > 1e-11 * std::abs(value) + 1e-300) {
    throw ConvergenceError("Mittag-Leffler integral not certified (" + describe(a, b, -x) + ")");
  }
  return value;
}

double ml_positive_asymptotic(double a, double b, double z) {
  const double log_z = std::log(z);
  const double y = std::exp(log_z / a);
  const double log_mag = y + ((1.0 - b) / a) * log_z - std::log(a);
  if (log_mag > kLogMax) {
    throw OverflowError("Mittag-Leffler value exceeds double range (" + describe(a, b, z) +
                        ", log magnitude " + std::to_string(log_mag) + ")");
  }
  double value = std::exp(log_mag);
  // Algebraic correction; negligible unless y is moderate.
  double last = kInf;
  for (int k = 1; k <= 20; ++k) {
    const double envelope = std::exp(-k * log_z + log_rgamma_envelope(b - a * k));
    if (envelope >= last) break;
    value -= std::pow(z, -k) * rgamma(b - a * k);
    last = envelope;
  }
  return value;
}

double ml_alpha_one(double beta, double z, const SeriesPolicy& policy);

double ml_negative(double a, double b, double z, const SeriesPolicy& policy) {
  const double x = -z;
  // sum |t_n| ~ E_a(x) ~ e^(x^(1/a)); past this the rounding bound cannot certify.
  const bool series_feasible = std::pow(x, 1.0 / a) <= 12.0;
  if (x <= policy.switch_radius && series_feasible) {
    const auto s = ml_series(a, b, z, policy);
    if (s.converged && s.error_bound <= std::max(policy.abs_tol, kCertifyRel * std::abs(s.value))) {
      return s.value;
    }
  }
  if (x > 1.0) {
    const auto s = ml_asymptotic_negative(a, b, x);
    if (s.converged && s.value != 0.0 && s.error_bound <= 1e-14 * std::abs(s.value)) {
      return s.value;
    }
  }
  if (b >= 1.0 + a) {
    // E_{a,b}(z) = (E_{a,b-a}(z) - 1/Gamma(b-a)) / z
    const double lower = ml_negative(a, b - a, z, policy);
    return (lower - rgamma(b - a)) / z;
  }
  return ml_integral_negative(a, b, x);
}

double ml_alpha_one(double beta, double z, const SeriesPolicy& policy) {
  if (beta == 1.0) {
    if (z > kLogMax) throw OverflowError("exp overflow (" + describe(1.0, beta, z) + ")");
    return std::exp(z);
  }
  if (beta == 2.0) {
    if (z > kLogMax) throw OverflowError("exp overflow (" + describe(1.0, beta, z) + ")");
    return std::expm1(z) / z;
  }
  if (z > 0.0) {
    if (z > kPositiveAsymptoticExponent) return ml_positive_asymptotic(1.0, beta, z);
  } else if (-z > policy.switch_radius && beta == std::floor(beta) && beta > 2.0) {
    const double lower = ml_alpha_one(beta - 1.0, z, policy);
    return (lower - rgamma(beta - 1.0)) / z;
  }
  const auto s = ml_series(1.0, beta, z, policy);
  if (s.converged && s.error_bound <= std::max(policy.abs_tol, kCertifyRel * std::abs(s.value))) {
    return s.value;
  }
  throw ConvergenceError("Mittag-Leffler series not certified (" + describe(1.0, beta, z) + ")");
}

}  // namespace

void SeriesPolicy::validate() const {
  if (max_terms < 1) throw DomainError("SeriesPolicy.max_terms must be >= 1");
  if (!(abs_tol > 0.0)) throw DomainError("SeriesPolicy.abs_tol must be > 0");
  if (!(switch_radius > 0.0)) throw DomainError("SeriesPolicy.switch_radius must be > 0");
}

Alpha::Alpha(double value) : value_(value) {
  if (!(value > 0.0 && value <= 1.0)) {
    throw DomainError("alpha must lie in (0,1], got " + std::to_string(value));
  }
}

double gamma(double x) {
  if (std::isnan(x)) throw DomainError("gamma of NaN");
  if (is_nonpositive_integer(x)) {
    throw DomainError("gamma has a pole at " + std::to_string(x));
  }
  if (x > kGammaMaxArg) throw OverflowError("gamma(" + std::to_string(x) + ") exceeds double range");
  return std::tgamma(x);
}

double rgamma(double x) {
  if (std::isnan(x)) throw DomainError("rgamma of NaN");
  if (is_nonpositive_integer(x)) return 0.0;
  if (x > kGammaMaxArg) return 0.0;
  if (x > -170.0) return 1.0 / std::tgamma(x);
  // Reflection: 1/Gamma(x) = sin(pi x) Gamma(1 - x) / pi, in log form.
  const double log_mag = log_gamma(1.0 - x) - std::log(kPi);
  const double s = sin_pi(x);
  if (log_mag + std::log(std::abs(s)) > kLogMax) {
    return std::copysign(std::numeric_limits<double>::max(), s);
  }
  return s * std::exp(log_mag);
}

double mittag_leffler(Alpha alpha, double z, const SeriesPolicy& policy) {
  return mittag_leffler_two(alpha, 1.0, z, policy);
}

double mittag_leffler_two(Alpha alpha, double beta, double z, const SeriesPolicy& policy) {
  policy.validate();
  if (!(beta > 0.0) || !std::isfinite(beta)) throw DomainError("beta must be a positive finite number");
  if (!std::isfinite(z)) throw DomainError("Mittag-Leffler argument must be finite");
  const double a = alpha.value();
  if (z == 0.0) return rgamma(beta);
  if (alpha.is_one()) return ml_alpha_one(beta, z, policy);

  if (z > 0.0) {
    const double y = std::pow(z, 1.0 / a);
    if (y > kPositiveAsymptoticExponent) return ml_positive_asymptotic(a, beta, z);
    const auto s = ml_series(a, beta, z, policy);
    if (s.converged) return s.value;
    throw ConvergenceError("Mittag-Leffler series did not converge (" + describe(a, beta, z) + ")");
  }
  return ml_negative(a, beta, z, policy);
}

double wright(Alpha alpha, double z, const SeriesPolicy& policy) {
  policy.validate();
  if (alpha.is_one()) throw DomainError("Wright function is a point mass for alpha = 1");
  if (!(z >= 0.0) || !std::isfinite(z)) throw DomainError("Wright function requires finite z >= 0");
  const double a = alpha.value();

  if (z <= kWrightSeriesRadius) {
    CompensatedSum sum;
    double power = 1.0;  // (-z)^n / n!
    int small_streak = 0;
    for (int n = 0; n < policy.max_terms; ++n) {
      if (n > 0) power *= -z / n;
      const double term = power * rgamma(1.0 - a - a * n);
      sum.add(term);
      // |1/Gamma(1 - a - a n)| <= Gamma(a + a n)/pi, so this bounds later terms.
      const double envelope = std::abs(power) * std::max(1.0, std::exp(log_gamma(a + a * n)));
      if (envelope <= 0.1 * kEps * std::max(std::abs(sum.value()), policy.abs_tol)) {
        if (++small_streak >= 3) {
          const double err = 8.0 * kEps * sum.abs_sum();
          if (err > std::max(policy.abs_tol, kCertifyRel * std::abs(sum.value()))) break;
          return sum.value();
        }
      } else {
        small_streak = 0;
      }
    }
    throw ConvergenceError("Wright series not certified at z=" + std::to_string(z));
  }

  // Kanter representation of the one-sided stable density, mapped to Phi_a:
  //   Phi_a(z) = z^(a/(1-a)) / ((1-a) pi) int_0^pi A(p) exp(-A(p) z^(1/(1-a))) dp
  //   A(p) = (sin(a p)/sin p)^(1/(1-a)) sin((1-a) p)/sin(a p)
  const double c = 1.0 / (1.0 - a);
  const double big_z = std::pow(z, c);
  auto integrand = [=](double p) -> double {
    const double sp = std::sin(p);
    const double sap = std::sin(a * p);
    const double s1ap = std::sin((1.0 - a) * p);
    if (sp <= 0.0 || sap <= 0.0 || s1ap <= 0.0) return 0.0;
    const double log_a = c * (std::log(sap) - std::log(sp)) + std::log(s1ap) - std::log(sap);
    const double big_a = std::exp(log_a);
    return std::exp(log_a - big_a * big_z);
  };
  double err = 0.0, l1 = 0.0;
  double integral = 0.0;
  try {
    integral = tanh_sinh_rule().integrate(integrand, 0.0, kPi, 1e-14, &err, &l1);
  } catch (const std::exception& e) {
    throw ConvergenceError(std::string("Wright integral failed: ") + e.what());
  }
  const double prefactor = std::exp(a * c * std::log(z)) / ((1.0 - a) * kPi);
  const double value = prefactor * integral;
  if (!std::isfinite(value) || err > 1e-10 * std::abs(integral) + 1e-300) {
    throw ConvergenceError("Wright integral not certified at z=" + std::to_string(z));
  }
  return value;
}

double wright_moment(Alpha alpha, int n) {
  if (alpha.is_one()) throw DomainError("Wright moments require alpha < 1");
  if (n < 0) throw DomainError("moment order must be nonnegative");
  const double a = alpha.value();
  if (n + 1 < kGammaMaxArg && 1.0 + a * n < kGammaMaxArg) {
    return std::tgamma(n + 1.0) / std::tgamma(1.0 + a * n);
  }
  const double log_value = log_gamma(n + 1.0) - log_gamma(1.0 + a * n);
  if (log_value > kLogMax) throw OverflowError("Wright moment overflows for n=" + std::to_string(n));
  return std::exp(log_value);
}

}  // namespace fraccm
