#include "fraccm/lattice.hpp"

#include <fftw3.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <map>
#include <mutex>
#include <numeric>
#include <thread>

#include "fraccm/errors.hpp"
#include "fraccm/subordination.hpp"

namespace fraccm {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

std::atomic<int> g_threads{1};

std::size_t checked_power(std::size_t base, int exponent) {
  std::size_t out = 1;
  for (int i = 0; i < exponent; ++i) {
    if (out > kMaxTensorEntries / base + 1) return kMaxTensorEntries + 1;
    out *= base;
  }
  return out;
}

double radial_profile(KernelShape shape, double r, double width) {
  switch (shape) {
    case KernelShape::gaussian:
      return std::exp(-0.5 * (r / width) * (r / width));
    case KernelShape::tophat:
      return r <= width * (1.0 + 1e-12) ? 1.0 : 0.0;
    case KernelShape::exponential_decay:
      return std::exp(-r / width);
  }
  return 0.0;
}

// One cached in-place plan per (dims, direction).
fftw_plan plan_for(const std::vector<int>& dims, int sign, fftw_complex* data) {
  static std::mutex mutex;
  static std::map<std::pair<std::vector<int>, int>, fftw_plan> plans;
  std::lock_guard lock(mutex);
  auto key = std::make_pair(dims, sign);
  auto it = plans.find(key);
  if (it != plans.end()) return it->second;
  fftw_plan plan = fftw_plan_dft(static_cast<int>(dims.size()), dims.data(), data, data, sign,
                                 FFTW_ESTIMATE | FFTW_UNALIGNED);
  if (plan == nullptr) throw Error("FFTW planning failed");
  plans.emplace(key, plan);
  return plan;
}

void transform_in_place(std::vector<std::complex<double>>& data, const TensorShape& shape, int sign) {
  std::vector<int> dims(shape.rank(), shape.grid().points);
  auto* ptr = reinterpret_cast<fftw_complex*>(data.data());
  fftw_plan plan = plan_for(dims, sign, ptr);
  fftw_execute_dft(plan, ptr, ptr);
}

}  // namespace

void TorusGrid::validate() const {
  if (dimension != 1 && dimension != 2) throw DomainError("grid.dimension must be 1 or 2");
  if (!(length > 0.0) || !std::isfinite(length)) throw DomainError("grid.length must be a positive finite number");
  if (points < 2 || points % 2 != 0) throw DomainError("grid.points must be a positive even integer");
}

double TorusGrid::cell_volume() const { return std::pow(spacing(), dimension); }

double TorusGrid::volume() const { return std::pow(length, dimension); }

std::size_t TorusGrid::size() const { return checked_power(static_cast<std::size_t>(points), dimension); }

int TorusGrid::wave_number(int k) const { return k < points / 2 ? k : k - points; }

double TorusGrid::coordinate(int k) const { return wave_number(k) * spacing(); }

double TorusGrid::frequency(int k) const { return kTwoPi * wave_number(k) / length; }

KernelShape parse_kernel_shape(const std::string& name) {
  if (name == "gaussian") return KernelShape::gaussian;
  if (name == "tophat") return KernelShape::tophat;
  if (name == "exponential-decay" || name == "exponential_decay") return KernelShape::exponential_decay;
  throw DomainError("unknown kernel shape '" + name + "' (expected gaussian, tophat, exponential-decay)");
}

std::string to_string(KernelShape shape) {
  switch (shape) {
    case KernelShape::gaussian:
      return "gaussian";
    case KernelShape::tophat:
      return "tophat";
    case KernelShape::exponential_decay:
      return "exponential-decay";
  }
  return "unknown";
}

DispersalKernel::DispersalKernel(KernelShape shape, double width, double mass, const TorusGrid& grid)
    : shape_(shape), width_(width), mass_(mass), grid_(grid) {
  grid_.validate();
  if (!(width > 0.0) || !std::isfinite(width)) throw DomainError("kernel.width must be a positive finite number");
  if (!(mass > 0.0) || !std::isfinite(mass)) throw DomainError("kernel.mass must be a positive finite number");
  if (grid_.length < 20.0 * width) {
    throw DomainError("grid.length must be at least 20 kernel widths to limit wrap-around");
  }
  const int n = grid_.points;
  samples_.resize(grid_.size());
  for (std::size_t flat = 0; flat < samples_.size(); ++flat) {
    double r2 = 0.0;
    std::size_t rest = flat;
    for (int axis = grid_.dimension - 1; axis >= 0; --axis) {
      const double x = grid_.coordinate(static_cast<int>(rest % n));
      rest /= n;
      r2 += x * x;
    }
    samples_[flat] = radial_profile(shape, std::sqrt(r2), width);
  }
  const double total = std::accumulate(samples_.begin(), samples_.end(), 0.0) * grid_.cell_volume();
  if (!(total > 0.0)) throw DomainError("kernel has no mass on this grid; increase points or width");
  const double scale = mass / total;
  double peak = 0.0;
  for (double& v : samples_) {
    v *= scale;
    peak = std::max(peak, v);
  }
  sup_norm_A_ = std::max(1.0, peak);
}

double DispersalKernel::at(std::span<const int> offset) const {
  const int n = grid_.points;
  std::size_t flat = 0;
  for (int axis = 0; axis < grid_.dimension; ++axis) {
    const int k = ((offset[axis] % n) + n) % n;
    flat = flat * n + k;
  }
  return samples_[flat];
}

std::vector<double> kernel_fourier(const DispersalKernel& kernel, const TorusGrid& grid) {
  if (grid.dimension != kernel.grid().dimension || grid.points != kernel.grid().points ||
      grid.length != kernel.grid().length) {
    throw MismatchError("kernel was sampled on a different grid");
  }
  CorrelationTensor field;
  field.order = 1;
  field.grid = grid;
  field.values = kernel.samples();
  const auto spectrum = forward_transform(field);
  std::vector<double> out(spectrum.size());
  const double h = grid.cell_volume();
  for (std::size_t i = 0; i < spectrum.size(); ++i) out[i] = h * spectrum[i].real();
  out[0] = kernel.mass();
  return out;
}

TensorShape::TensorShape(int order, const TorusGrid& grid) : order_(order), grid_(grid) {
  if (order < 1) throw DomainError("tensor order must be >= 1");
  grid_.validate();
  block_size_ = grid_.size();
  size_ = checked_power(block_size_, order);
}

std::size_t TensorShape::block(std::size_t flat, int b) const {
  for (int k = order_ - 1; k > b; --k) flat /= block_size_;
  return flat % block_size_;
}

std::size_t TensorShape::compose(std::span<const std::size_t> blocks) const {
  std::size_t flat = 0;
  for (std::size_t b : blocks) flat = flat * block_size_ + b;
  return flat;
}

std::size_t TensorShape::negate_block(std::size_t block) const {
  const std::size_t n = grid_.points;
  if (grid_.dimension == 1) return (n - block) % n;
  const std::size_t i = block / n, j = block % n;
  return ((n - i) % n) * n + (n - j) % n;
}

std::size_t TensorShape::add_blocks(std::size_t p, std::size_t q) const {
  const std::size_t n = grid_.points;
  if (grid_.dimension == 1) return (p + q) % n;
  return ((p / n + q / n) % n) * n + (p % n + q % n) % n;
}

std::size_t TensorShape::subtract_blocks(std::size_t p, std::size_t q) const { return add_blocks(p, negate_block(q)); }

MultiplierField::MultiplierField(int order, double kappa, std::vector<double> ahat, const TorusGrid& grid)
    : kappa_(kappa), ahat_(std::move(ahat)), shape_(order, grid) {
  if (!(kappa > 0.0) || !std::isfinite(kappa)) throw DomainError("kappa must be a positive finite number");
  if (ahat_.size() != grid.size()) throw MismatchError("kernel transform size does not match the grid");
}

double MultiplierField::value(std::size_t flat) const {
  const int n = shape_.order();
  const double m = ahat_[0];
  double parts[8];
  for (int b = 0; b < n; ++b) parts[b] = ahat_[shape_.block(flat, b)] - m;
  // Sorting makes the sum independent of the block order.
  std::sort(parts, parts + n);
  double sum = 0.0;
  for (int b = 0; b < n; ++b) sum += parts[b];
  return n * (kappa_ * m - 1.0) + kappa_ * sum;
}

double MultiplierField::zero_mode() const { return value(0); }

std::vector<double> MultiplierField::values() const {
  if (shape_.size() > kMaxTensorEntries) throw DomainError("multiplier tensor exceeds the storage guard");
  std::vector<double> out(shape_.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = value(i);
  return out;
}

MultiplierField generator_multiplier(int order, double kappa, std::vector<double> ahat, const TorusGrid& grid) {
  if (order > 7) throw DomainError("generator order above 7 is not supported");
  return MultiplierField(order, kappa, std::move(ahat), grid);
}

CorrelationTensor CorrelationTensor::constant(int order, double value, const TorusGrid& grid, double time) {
  const TensorShape shape(order, grid);
  if (shape.size() > kMaxTensorEntries) {
    throw DomainError("order-" + std::to_string(order) + " tensor on this grid exceeds the storage guard of " +
                      std::to_string(kMaxTensorEntries) + " entries");
  }
  CorrelationTensor out;
  out.order = order;
  out.time = time;
  out.grid = grid;
  out.values.assign(shape.size(), value);
  return out;
}

double CorrelationTensor::max_value() const { return *std::max_element(values.begin(), values.end()); }

double CorrelationTensor::min_value() const { return *std::min_element(values.begin(), values.end()); }

double CorrelationTensor::symmetry_defect() const {
  if (order < 2) return 0.0;
  const TensorShape s = shape();
  double scale = 0.0;
  for (double v : values) scale = std::max(scale, std::abs(v));
  if (scale == 0.0) return 0.0;
  std::vector<std::size_t> blocks(order), permuted(order);
  std::vector<int> perm(order);
  double worst = 0.0;
  for (std::size_t flat = 0; flat < values.size(); ++flat) {
    for (int b = 0; b < order; ++b) blocks[b] = s.block(flat, b);
    std::iota(perm.begin(), perm.end(), 0);
    while (std::next_permutation(perm.begin(), perm.end())) {
      for (int b = 0; b < order; ++b) permuted[b] = blocks[perm[b]];
      worst = std::max(worst, std::abs(values[flat] - values[s.compose(permuted)]));
    }
  }
  return worst / scale;
}

std::vector<std::complex<double>> forward_transform(const CorrelationTensor& field) {
  const TensorShape shape(field.order, field.grid);
  if (field.values.size() != shape.size()) throw MismatchError("tensor values do not match its shape");
  std::vector<std::complex<double>> data(field.values.begin(), field.values.end());
  transform_in_place(data, shape, FFTW_FORWARD);
  return data;
}

std::vector<double> inverse_transform_real(std::vector<std::complex<double>> coefficients, const TensorShape& shape) {
  if (coefficients.size() != shape.size()) throw MismatchError("coefficient array does not match the shape");
  transform_in_place(coefficients, shape, FFTW_BACKWARD);
  const double scale = 1.0 / static_cast<double>(shape.size());
  std::vector<double> out(coefficients.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = coefficients[i].real() * scale;
  return out;
}

void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& body) {
  const std::size_t workers = std::min<std::size_t>(std::max(threads, 1), count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::size_t> error_index(workers, count);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < count; i += workers) {
        try {
          body(i);
        } catch (...) {
          errors[w] = std::current_exception();
          error_index[w] = i;
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  // Rethrow the failure with the smallest index so errors are schedule-independent.
  std::size_t best = workers;
  for (std::size_t w = 0; w < workers; ++w) {
    if (errors[w] && (best == workers || error_index[w] < error_index[best])) best = w;
  }
  if (best != workers) std::rethrow_exception(errors[best]);
}

void set_thread_count(int threads) {
  if (threads < 1) throw DomainError("thread count must be >= 1");
  g_threads = threads;
}

int thread_count() { return g_threads; }

RateTable::RateTable(std::span<const double> rates) {
  distinct_.assign(rates.begin(), rates.end());
  std::sort(distinct_.begin(), distinct_.end());
  distinct_.erase(std::unique(distinct_.begin(), distinct_.end()), distinct_.end());
  slots_.resize(rates.size());
  for (std::size_t i = 0; i < rates.size(); ++i) {
    slots_[i] = static_cast<std::uint32_t>(std::lower_bound(distinct_.begin(), distinct_.end(), rates[i]) -
                                           distinct_.begin());
  }
}

std::vector<double> RateTable::evaluate(const std::function<double(double)>& g) const {
  std::vector<double> results(distinct_.size());
  try {
    parallel_for(distinct_.size(), thread_count(), [&](std::size_t i) { results[i] = g(distinct_[i]); });
  } catch (const OverflowError& e) {
    std::size_t first = 0;
    for (std::size_t i = 0; i < slots_.size(); ++i) {
      try {
        g(distinct_[slots_[i]]);
      } catch (const OverflowError&) {
        first = i;
        break;
      }
    }
    throw OverflowError(std::string(e.what()) + " [mode " + std::to_string(first) + ", rate " +
                        std::to_string(distinct_[slots_[first]]) + "]");
  }
  return results;
}

std::vector<double> map_unique(std::span<const double> lambdas, const std::function<double(double)>& g) {
  const RateTable table(lambdas);
  const auto values = table.evaluate(g);
  std::vector<double> out(lambdas.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = values[table.slots()[i]];
  return out;
}

namespace {

CorrelationTensor apply_multiplier(const CorrelationTensor& field, const MultiplierField& multiplier, double time,
                                   const std::function<double(double)>& factor) {
  if (field.order != multiplier.order()) throw MismatchError("field and multiplier orders differ");
  const TensorShape shape(field.order, field.grid);
  if (shape.size() != multiplier.shape().size() || field.grid.points != multiplier.shape().grid().points ||
      field.grid.dimension != multiplier.shape().grid().dimension) {
    throw MismatchError("field and multiplier grids differ");
  }
  if (shape.size() > kMaxTensorEntries) throw DomainError("tensor exceeds the storage guard");
  auto spectrum = forward_transform(field);
  const auto lambdas = multiplier.values();
  std::vector<double> factors;
  try {
    factors = map_unique(lambdas, factor);
  } catch (const OverflowError& e) {
    throw OverflowError(std::string(e.what()) + " at t=" + std::to_string(time));
  }
  for (std::size_t i = 0; i < spectrum.size(); ++i) spectrum[i] *= factors[i];
  CorrelationTensor out;
  out.order = field.order;
  out.grid = field.grid;
  out.time = field.time + time;
  out.values = inverse_transform_real(std::move(spectrum), shape);
  return out;
}

}  // namespace

CorrelationTensor apply_s_alpha(const CorrelationTensor& field, const MultiplierField& multiplier, Alpha alpha,
                                double t) {
  if (!(t >= 0.0)) throw DomainError("apply_s_alpha requires t >= 0");
  return apply_multiplier(field, multiplier, t, [&](double lambda) { return s_alpha_scalar(alpha, lambda, t); });
}

CorrelationTensor apply_p_alpha(const CorrelationTensor& field, const MultiplierField& multiplier, Alpha alpha,
                                double u) {
  if (!(u > 0.0)) throw DomainError("apply_p_alpha requires u > 0");
  return apply_multiplier(field, multiplier, u, [&](double lambda) { return p_alpha_scalar(alpha, lambda, u); });
}

}  // namespace fraccm
