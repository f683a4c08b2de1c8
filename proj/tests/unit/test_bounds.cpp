#include <cmath>
#include <vector>

#include "doctest.h"
#include "fraccm/bounds.hpp"
#include "fraccm/errors.hpp"

using namespace fraccm;

TEST_CASE("bounds match hand-expanded low orders") {
  const Alpha a(0.6);
  const double C = 1.3, A = 1.7, t = 2.2;
  const double ta = std::pow(t, 0.6);

  CHECK(bound_critical(1, t, a, C, A) == doctest::Approx(C).epsilon(1e-15));
  const double crit2 = 2 * C * C + 2 * C * A * ta / (0.6 * std::tgamma(0.6));
  CHECK(bound_critical(2, t, a, C, A) == doctest::Approx(crit2).epsilon(1e-14));
  const double crit3 =
      6 * C * C * C + 6 * C * C / 0.6 * (A * 2 * ta / std::tgamma(0.6) + A * A * 2 * ta * ta / (2 * std::tgamma(1.2)));
  CHECK(bound_critical(3, t, a, C, A) == doctest::Approx(crit3).epsilon(1e-14));

  const double k = 1.4, q = k * A / (k - 1);
  CHECK(bound_supercritical(1, t, a, k, C, A) == doctest::Approx(C * mittag_leffler(a, 0.4 * ta)).epsilon(1e-14));
  const double sup3 = mittag_leffler(a, 3 * 0.4 * ta) * (6 * C * C * C + C * C * 6 * (q * 2 + q * q * 2));
  CHECK(bound_supercritical(3, t, a, k, C, A) == doctest::Approx(sup3).epsilon(1e-14));

  const double s = 0.45, p = s * A / (1 - s);
  const double sub2 = 2 * C * C * mittag_leffler(a, -2 * 0.55 * ta) + 2 * C * p * mittag_leffler(a, -0.55 * ta);
  CHECK(bound_subcritical(2, t, a, s, C, A) == doctest::Approx(sub2).epsilon(1e-14));
  const double sub3 = 6 * C * C * C * mittag_leffler(a, -3 * 0.55 * ta) +
                      6 * C * C * (2 * p * mittag_leffler(a, -2 * 0.55 * ta) + 2 * p * p / 2 * mittag_leffler(a, -0.55 * ta));
  CHECK(bound_subcritical(3, t, a, s, C, A) == doctest::Approx(sub3).epsilon(1e-14));

  CHECK_THROWS_AS(bound_supercritical(2, t, a, 0.9, C, A), DomainError);
  CHECK_THROWS_AS(bound_subcritical(2, t, a, 1.1, C, A), DomainError);
  CHECK_THROWS_AS(bound_critical(0, t, a, C, A), DomainError);
}

TEST_CASE("regime dispatch and effective parameters") {
  CHECK(regime_for(1.0) == Regime::critical);
  CHECK(regime_for(0.999) == Regime::subcritical);
  CHECK(regime_for(1.2) == Regime::supercritical);
  CHECK(to_string(Regime::supercritical) == "supercritical");
  ChainConfig c;
  c.params.kappa = 0.8;
  c.kernel_mass = 1.25;
  const auto p = BoundParams::from_chain(c);
  CHECK(p.kappa == doctest::Approx(1.0));
  CHECK(p.A >= 1.0);
  BoundParams crit{Alpha(0.5), 1.0, 1.0, 1.0};
  CHECK(correlation_bound(2, 1.0, crit) == bound_critical(2, 1.0, Alpha(0.5), 1.0, 1.0));
}

TEST_CASE("envelopes and their fit") {
  const Alpha a(0.5);
  const double k = 1.5, C = 1.0, A = 1.0;
  const std::vector<double> times{1.0, 2.0, 4.0, 8.0};
  std::vector<double> values;
  for (double t : times) values.push_back(envelope_supercritical(1, t, a, k, C, A, 3.0));
  const BoundParams params{a, k, C, A};
  const auto fit = fit_envelope(Regime::supercritical, 1, times, values, params);
  CHECK(fit.M == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(fit.exponent_or_slope == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(fit.dominance_start == 1.0);

  const BoundParams sub{a, 0.5, C, A};
  values.clear();
  for (double t : times) values.push_back(envelope_subcritical(1, t, a, 0.5, C, A, 2.0));
  const auto sfit = fit_envelope(Regime::subcritical, 1, times, values, sub);
  CHECK(sfit.M == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(sfit.exponent_or_slope == doctest::Approx(-0.5).epsilon(1e-12));
  CHECK_THROWS_AS(envelope_subcritical(1, 0.5, a, 0.5, C, A, 1.0), DomainError);
  CHECK_THROWS_AS(envelope_supercritical(1, 1e6, a, 1.5, C, A, 1.0), OverflowError);
  CHECK_THROWS(fit_envelope(Regime::supercritical, 1, std::vector<double>{1.0}, std::vector<double>{2.0}, params));
}

TEST_CASE("integral identities") {
  for (double alpha : {0.3, 0.7, 1.0}) {
    for (double z : {-2.0, 0.5}) {
      for (double lam : {-1.0, 0.0, 0.5}) {
        CAPTURE(alpha);
        CAPTURE(z);
        CAPTURE(lam);
        CHECK(djrbashian_identity_residual(Alpha(alpha), z, lam, 1.5) < 1e-6);
      }
    }
  }
  CHECK(djrbashian_identity_residual(Alpha(0.5), -1.0, -1.0 + 1e-8, 1.0) < 1e-4);
  for (double alpha : {0.3, 0.8}) {
    for (double beta : {0.4, 1.0}) CHECK(beta_identity_residual(alpha, beta, 2.0) < 1e-12);
  }
}

TEST_CASE("solutions satisfy their bounds and mismatches are rejected") {
  for (double kappa : {0.6, 1.0, 1.4}) {
    ChainConfig c;
    c.N_max = 3;
    c.times = {0.5, 1.0, 2.0, 4.0};
    c.params.kappa = kappa;
    c.grid.points = 32;
    const auto norms = chain_norms(solve_chain(c));
    const auto params = BoundParams::from_chain(c);
    const auto report = check_solution_against_bounds(norms, params, regime_for(params.kappa));
    CAPTURE(kappa);
    CHECK(report.all_pass());
    CHECK(report.rows.size() == 12);
    for (const auto& r : report.rows) CHECK(r.ratio <= 1.0 + kBoundSlack);
    if (kappa != 1.0) CHECK(report.envelope_fit.has_value());
    const Regime wrong = kappa > 1.0 ? Regime::subcritical : Regime::supercritical;
    CHECK_THROWS_AS(check_solution_against_bounds(norms, params, wrong), MismatchError);
  }
}
