#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include <unsupported/Eigen/MatrixFunctions>

#include "dense_oracle.hpp"
#include "doctest.h"
#include "fraccm/errors.hpp"
#include "fraccm/lattice.hpp"
#include "fraccm/subordination.hpp"

using namespace fraccm;

namespace {

TorusGrid small_grid(int points = 8, int dimension = 1) {
  TorusGrid g;
  g.dimension = dimension;
  g.points = points;
  g.length = 8.0;
  return g;
}

CorrelationTensor random_field(int order, const TorusGrid& grid, unsigned seed, double lo = 0.0, double hi = 1.0) {
  CorrelationTensor f = CorrelationTensor::constant(order, 0.0, grid);
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> dist(lo, hi);
  for (auto& v : f.values) v = dist(rng);
  return f;
}

Eigen::VectorXd as_vector(const CorrelationTensor& f) {
  return Eigen::Map<const Eigen::VectorXd>(f.values.data(), static_cast<Eigen::Index>(f.values.size()));
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double out = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) out = std::max(out, std::abs(a[i] - b[i]));
  return out;
}

}  // namespace

TEST_CASE("torus grid invariants") {
  TorusGrid g;
  CHECK_NOTHROW(g.validate());
  CHECK(g.cell_volume() == doctest::Approx(40.0 / 256));
  CHECK(g.wave_number(0) == 0);
  CHECK(g.wave_number(127) == 127);
  CHECK(g.wave_number(128) == -128);
  CHECK(g.frequency(1) == doctest::Approx(2 * std::numbers::pi / 40));
  g.points = 7;
  CHECK_THROWS_AS(g.validate(), DomainError);
  g = TorusGrid{};
  g.dimension = 3;
  CHECK_THROWS_AS(g.validate(), DomainError);
}

TEST_CASE("kernel sampling invariants") {
  for (auto shape : {KernelShape::gaussian, KernelShape::tophat, KernelShape::exponential_decay}) {
    for (int d : {1, 2}) {
      TorusGrid g;
      g.dimension = d;
      g.points = d == 1 ? 256 : 64;
      const DispersalKernel k(shape, 1.0, 0.7, g);
      double sum = 0.0, peak = 0.0;
      for (double v : k.samples()) {
        CHECK(v >= 0.0);
        sum += v;
        peak = std::max(peak, v);
      }
      CHECK(std::abs(sum * g.cell_volume() - 0.7) < 1e-10);
      CHECK(k.sup_norm_A() == std::max(1.0, peak));
      for (int i = 0; i < g.points; ++i) {
        std::vector<int> plus(d, 0), minus(d, 0);
        plus[0] = i;
        minus[0] = -i;
        CHECK(k.at(plus) == k.at(minus));
      }
    }
  }
  CHECK(parse_kernel_shape("exponential-decay") == KernelShape::exponential_decay);
  CHECK_THROWS(parse_kernel_shape("cauchy"));
  TorusGrid g;
  CHECK_THROWS_AS(DispersalKernel(KernelShape::gaussian, 3.0, 1.0, g), DomainError);
}

TEST_CASE("kernel_fourier") {
  TorusGrid g;
  for (auto shape : {KernelShape::gaussian, KernelShape::tophat, KernelShape::exponential_decay}) {
    const DispersalKernel k(shape, 1.0, 1.3, g);
    const auto ahat = kernel_fourier(k, g);
    CHECK(ahat[0] == 1.3);
    for (double v : ahat) CHECK(std::abs(v) <= 1.3 * (1.0 + 1e-14));
    if (shape == KernelShape::gaussian) {
      for (double v : ahat) CHECK(v > -1e-15);
    }
  }
  // Tophat of half-width 1 on spacing h samples 2M+1 nodes: its discrete
  // transform is the Dirichlet kernel, and the continuous sinc of the
  // effective half-width (2M+1)h/2 up to O((xi h)^2).
  const DispersalKernel top(KernelShape::tophat, 1.0, 1.0, g);
  const auto ahat = kernel_fourier(top, g);
  int nodes = 0;
  for (double v : top.samples()) nodes += v > 0.0;
  const double h = g.spacing();
  const double half_width = nodes * h / 2.0;
  for (int k : {1, 2, 3, 5, 8}) {
    const double xi = g.frequency(k);
    const double dirichlet = std::sin(nodes * xi * h / 2.0) / (nodes * std::sin(xi * h / 2.0));
    const double sinc = std::sin(xi * half_width) / (xi * half_width);
    CAPTURE(k);
    CHECK(std::abs(ahat[k] - dirichlet) < 1e-13);
    CHECK(std::abs(ahat[k] - sinc) < 0.02 * std::abs(sinc) + 1e-3);
  }
}

TEST_CASE("generator multiplier values") {
  const TorusGrid g = small_grid();
  const DispersalKernel k(KernelShape::gaussian, 0.4, 1.0, g);
  const auto ahat = kernel_fourier(k, g);
  const auto m1 = generator_multiplier(1, 1.7, ahat, g);
  CHECK(m1.zero_mode() == doctest::Approx(0.7).epsilon(1e-15));
  const auto m2 = generator_multiplier(2, 1.0, ahat, g);
  for (double v : m2.values()) CHECK(v <= 1e-15);
  const auto m3 = generator_multiplier(3, 2.0, ahat, g);
  const auto v3 = m3.values();
  CHECK(v3[0] == doctest::Approx(3.0).epsilon(1e-15));
  CHECK(*std::max_element(v3.begin(), v3.end()) == v3[0]);
  for (std::size_t i = 1; i < v3.size(); ++i) CHECK(v3[i] < v3[0]);

  // The dense n = 3 generator is symmetric with the same spectrum.
  const Eigen::MatrixXd dense = oracle::generator_matrix(3, 2.0, k);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(dense);
  std::vector<double> sorted(v3.begin(), v3.end());
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < sorted.size(); ++i) CHECK(std::abs(eig.eigenvalues()[i] - sorted[i]) < 1e-10);
}

TEST_CASE("multiplier action equals the dense operator") {
  for (int d : {1, 2}) {
    const TorusGrid g = d == 1 ? small_grid(8) : small_grid(4, 2);
    const DispersalKernel k(KernelShape::exponential_decay, 0.4, 0.8, g);
    const auto ahat = kernel_fourier(k, g);
    for (int n : {1, 2}) {
      const auto m = generator_multiplier(n, 1.3, ahat, g);
      const auto f = random_field(n, g, 7 + n);
      auto spectrum = forward_transform(f);
      const auto lambda = m.values();
      for (std::size_t i = 0; i < spectrum.size(); ++i) spectrum[i] *= lambda[i];
      const auto via_fft = inverse_transform_real(spectrum, f.shape());
      const Eigen::VectorXd dense = oracle::generator_matrix(n, 1.3, k) * as_vector(f);
      std::vector<double> dv(dense.data(), dense.data() + dense.size());
      CAPTURE(d);
      CAPTURE(n);
      CHECK(max_abs_diff(via_fft, dv) < 1e-10);
    }
  }
}

TEST_CASE("transform round trip") {
  TorusGrid g;
  g.points = 32;
  for (int n : {1, 2, 3}) {
    const auto f = random_field(n, g, 11 + n, -1.0, 1.0);
    const auto back = inverse_transform_real(forward_transform(f), f.shape());
    CHECK(max_abs_diff(back, f.values) < 1e-12);
  }
}

TEST_CASE("apply_s_alpha") {
  TorusGrid g;
  g.points = 64;
  const DispersalKernel k(KernelShape::gaussian, 1.0, 1.0, g);
  const auto ahat = kernel_fourier(k, g);
  const Alpha alpha(0.6);

  SUBCASE("identity at t = 0") {
    const auto m = generator_multiplier(2, 1.4, ahat, g);
    const auto f = random_field(2, g, 3);
    const auto out = apply_s_alpha(f, m, alpha, 0.0);
    CHECK(max_abs_diff(out.values, f.values) < 1e-12);
  }
  SUBCASE("constant field carries the zero-mode factor") {
    for (int n : {1, 2}) {
      const auto m = generator_multiplier(n, 1.4, ahat, g);
      const auto out = apply_s_alpha(CorrelationTensor::constant(n, 2.5, g), m, alpha, 1.7);
      const double want = 2.5 * mittag_leffler(alpha, n * 0.4 * std::pow(1.7, 0.6));
      for (double v : out.values) CHECK(std::abs(v - want) < 1e-12 * want);
      CHECK(out.time == 1.7);
    }
  }
  SUBCASE("positivity and contraction of the fluctuating part") {
    for (int n : {1, 2}) {
      const auto f = random_field(n, g, 21 + n);
      const auto m = generator_multiplier(n, 0.8, ahat, g);
      for (double t : {0.1, 1.0, 5.0}) {
        const auto out = apply_s_alpha(f, m, alpha, t);
        CHECK(out.min_value() >= -1e-9 * f.max_value());
        auto fluct = [](const std::vector<double>& v) {
          double mean = 0.0;
          for (double x : v) mean += x;
          mean /= static_cast<double>(v.size());
          double sup = 0.0;
          for (double x : v) sup = std::max(sup, std::abs(x - mean));
          return sup;
        };
        CHECK(fluct(out.values) <= fluct(f.values) * (1.0 + 1e-12));
      }
    }
  }
  SUBCASE("overflow names the time") {
    const auto m = generator_multiplier(1, 3.0, ahat, g);
    try {
      apply_s_alpha(CorrelationTensor::constant(1, 1.0, g), m, Alpha(0.5), 1e4);
      FAIL("expected overflow");
    } catch (const OverflowError& e) {
      CHECK(std::string(e.what()).find("t=") != std::string::npos);
      CHECK(std::string(e.what()).find("mode") != std::string::npos);
    }
  }
}

TEST_CASE("alpha = 1 equals the dense matrix exponential") {
  const TorusGrid g = small_grid();
  const DispersalKernel k(KernelShape::gaussian, 0.4, 1.0, g);
  const auto ahat = kernel_fourier(k, g);
  for (int n : {1, 2}) {
    const auto f = random_field(n, g, 5 + n);
    const auto m = generator_multiplier(n, 1.2, ahat, g);
    const double t = 0.9;
    const auto out = apply_s_alpha(f, m, Alpha(1.0), t);
    const Eigen::MatrixXd expo = (t * oracle::generator_matrix(n, 1.2, k)).exp();
    const Eigen::VectorXd want = expo * as_vector(f);
    for (Eigen::Index i = 0; i < want.size(); ++i) CHECK(std::abs(out.values[i] - want[i]) < 1e-8 * std::abs(want[i]));
  }
}

TEST_CASE("apply_p_alpha") {
  TorusGrid g;
  g.points = 32;
  const DispersalKernel k(KernelShape::tophat, 1.0, 1.0, g);
  const auto ahat = kernel_fourier(k, g);
  const auto f = random_field(2, g, 99);
  const auto m = generator_multiplier(2, 0.9, ahat, g);
  CHECK_THROWS_AS(apply_p_alpha(f, m, Alpha(0.5), 0.0), DomainError);

  const auto p1 = apply_p_alpha(f, m, Alpha(1.0), 0.8);
  const auto s1 = apply_s_alpha(f, m, Alpha(1.0), 0.8);
  CHECK(max_abs_diff(p1.values, s1.values) < 1e-13);

  const Alpha alpha(0.35);
  const double u = 1.3;
  const auto pc = apply_p_alpha(CorrelationTensor::constant(2, 3.0, g), m, alpha, u);
  const double want = 3.0 * std::pow(u, -0.65) * mittag_leffler_two(alpha, 0.35, 2 * (0.9 - 1.0) * std::pow(u, 0.35));
  for (double v : pc.values) CHECK(std::abs(v - want) < 1e-12 * want);

  // Critical zero mode: lambda = 0 gives u^(a-1) / Gamma(a).
  const auto mc = generator_multiplier(1, 1.0, ahat, g);
  const auto p0 = apply_p_alpha(CorrelationTensor::constant(1, 1.0, g), mc, alpha, u);
  CHECK(std::abs(p0.values[0] - std::pow(u, -0.65) / std::tgamma(0.35)) < 1e-13);
}

TEST_CASE("parallel evaluation does not change results") {
  TorusGrid g;
  g.points = 64;
  const DispersalKernel k(KernelShape::gaussian, 1.0, 1.0, g);
  const auto m = generator_multiplier(2, 1.1, kernel_fourier(k, g), g);
  const auto f = random_field(2, g, 42);
  set_thread_count(1);
  const auto a = apply_p_alpha(f, m, Alpha(0.55), 2.0);
  set_thread_count(3);
  const auto b = apply_p_alpha(f, m, Alpha(0.55), 2.0);
  set_thread_count(1);
  CHECK(a.values == b.values);
}

TEST_CASE("tensor guards and symmetry") {
  TorusGrid g;
  CHECK_THROWS_AS(CorrelationTensor::constant(4, 1.0, g), DomainError);
  auto f = CorrelationTensor::constant(2, 1.0, small_grid());
  CHECK(f.symmetry_defect() == 0.0);
  f.values[1] = 2.0;  // (0, 1) differs from (1, 0)
  CHECK(f.symmetry_defect() > 0.1);
}
