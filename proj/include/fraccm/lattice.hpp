#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "fraccm/specfun.hpp"

namespace fraccm {

/// Periodic box [-L/2, L/2)^d sampled with `points` nodes per axis.
struct TorusGrid {
  int dimension = 1;
  double length = 40.0;
  int points = 256;

  void validate() const;
  double spacing() const { return length / points; }
  double cell_volume() const;
  double volume() const;
  /// Number of grid nodes, points^dimension.
  std::size_t size() const;
  /// Signed integer wave number of DFT index k: k for k < points/2, k - points otherwise.
  int wave_number(int k) const;
  /// Physical coordinate of axis index k in the minimal-image convention.
  double coordinate(int k) const;
  /// Angular frequency 2 pi wave_number(k) / length.
  double frequency(int k) const;
};

enum class KernelShape { gaussian, tophat, exponential_decay };

KernelShape parse_kernel_shape(const std::string& name);
std::string to_string(KernelShape shape);

/// Even, nonnegative dispersal kernel sampled on a grid and renormalized so
/// that sum(samples) * cell_volume == mass.
class DispersalKernel {
 public:
  DispersalKernel(KernelShape shape, double width, double mass, const TorusGrid& grid);

  KernelShape shape() const { return shape_; }
  double width() const { return width_; }
  double mass() const { return mass_; }
  /// max(1, max sample).
  double sup_norm_A() const { return sup_norm_A_; }
  const TorusGrid& grid() const { return grid_; }
  /// Samples in row-major grid order (axis 0 slowest).
  const std::vector<double>& samples() const { return samples_; }
  /// Sample at a grid offset given per axis (indices taken modulo points).
  double at(std::span<const int> offset) const;

 private:
  KernelShape shape_;
  double width_;
  double mass_;
  TorusGrid grid_;
  std::vector<double> samples_;
  double sup_norm_A_ = 1.0;
};

/// a_hat(xi) = cell_volume * DFT(samples), real because the kernel is even.
/// Indexed like the grid; entry 0 equals the kernel mass.
std::vector<double> kernel_fourier(const DispersalKernel& kernel, const TorusGrid& grid);

/// Multi-index over n coordinate blocks of a grid, flattened row-major with
/// block 0 slowest and, inside a block, axis 0 slowest.
class TensorShape {
 public:
  TensorShape(int order, const TorusGrid& grid);

  int order() const { return order_; }
  const TorusGrid& grid() const { return grid_; }
  int rank() const { return order_ * grid_.dimension; }
  std::size_t block_size() const { return block_size_; }
  std::size_t size() const { return size_; }
  /// Flat index of block b inside flat index `flat`.
  std::size_t block(std::size_t flat, int b) const;
  std::size_t compose(std::span<const std::size_t> blocks) const;
  /// Flat index of the block whose per-axis wave numbers are negated.
  std::size_t negate_block(std::size_t block) const;
  /// Block index of (p + q) per axis, modulo points.
  std::size_t add_blocks(std::size_t p, std::size_t q) const;
  std::size_t subtract_blocks(std::size_t p, std::size_t q) const;

 private:
  int order_;
  TorusGrid grid_;
  std::size_t block_size_;
  std::size_t size_;
};

/// Largest tensor (in entries) the solver will allocate.
inline constexpr std::size_t kMaxTensorEntries = std::size_t{1} << 25;

/// Fourier symbol of the order-n generator,
///   lambda(xi_1..xi_n) = n (kappa m - 1) + kappa sum_i (a_hat(xi_i) - m),
/// m = a_hat(0) = kernel mass. Values are real since a_hat is real.
class MultiplierField {
 public:
  MultiplierField(int order, double kappa, std::vector<double> ahat, const TorusGrid& grid);

  int order() const { return shape_.order(); }
  double kappa() const { return kappa_; }
  double mass() const { return ahat_[0]; }
  const TensorShape& shape() const { return shape_; }
  const std::vector<double>& ahat() const { return ahat_; }
  /// Eigenvalue at a flat frequency index; invariant under block permutation.
  double value(std::size_t flat) const;
  double zero_mode() const;
  /// Materialized values over the whole frequency tensor.
  std::vector<double> values() const;

 private:
  double kappa_;
  std::vector<double> ahat_;
  TensorShape shape_;
};

MultiplierField generator_multiplier(int order, double kappa, std::vector<double> ahat, const TorusGrid& grid);

/// Sampled k^(n) on grid^n at a given time.
struct CorrelationTensor {
  int order = 0;
  double time = 0.0;
  TorusGrid grid;
  std::vector<double> values;

  static CorrelationTensor constant(int order, double value, const TorusGrid& grid, double time = 0.0);
  TensorShape shape() const { return TensorShape(order, grid); }
  double max_value() const;
  double min_value() const;
  /// Largest relative deviation between the tensor and its block permutations.
  double symmetry_defect() const;
};

/// Forward (unnormalized, e^{-i}) and inverse (normalized, e^{+i}) DFT over
/// all axes of a tensor. Plans are cached per shape; thread-safe.
std::vector<std::complex<double>> forward_transform(const CorrelationTensor& field);
std::vector<double> inverse_transform_real(std::vector<std::complex<double>> coefficients, const TensorShape& shape);

/// Deterministic fork-join loop; each index is visited exactly once.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& body);

/// Global worker count used by the multiplier operations (default 1).
void set_thread_count(int threads);
int thread_count();

/// E_a(lambda t^a) for every mode, as in S_a(t) applied mode-wise.
CorrelationTensor apply_s_alpha(const CorrelationTensor& field, const MultiplierField& multiplier, Alpha alpha,
                                double t);

/// u^(a-1) E_{a,a}(lambda u^a) for every mode.
CorrelationTensor apply_p_alpha(const CorrelationTensor& field, const MultiplierField& multiplier, Alpha alpha,
                                double u);

/// Distinct entries of a rate list and the slot of every entry.
class RateTable {
 public:
  RateTable() = default;
  explicit RateTable(std::span<const double> rates);

  const std::vector<double>& distinct() const { return distinct_; }
  const std::vector<std::uint32_t>& slots() const { return slots_; }
  std::size_t size() const { return slots_.size(); }
  /// g at each distinct rate, evaluated in parallel. On failure the error
  /// names the first entry (in list order) whose rate fails.
  std::vector<double> evaluate(const std::function<double(double)>& g) const;

 private:
  std::vector<double> distinct_;
  std::vector<std::uint32_t> slots_;
};

/// Evaluates g at every distinct entry of `lambdas` (in parallel) and maps the
/// results back. Each distinct value is evaluated once, so the output does not
/// depend on the thread count. An exception names the first offending index.
std::vector<double> map_unique(std::span<const double> lambdas, const std::function<double(double)>& g);

}  // namespace fraccm
