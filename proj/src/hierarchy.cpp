#include "fraccm/hierarchy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "fraccm/errors.hpp"
#include "fraccm/subordination.hpp"

namespace fraccm {

namespace {

constexpr int kGradeLevels = 5;
constexpr double kGradeRatio = 0.2;
// Panels per e-fold of the supercritical growth.
constexpr double kPanelsPerEfold = 0.25;
constexpr std::size_t kMaxScatterEntries = std::size_t{1} << 26;

double factorial(int n) {
  double out = 1.0;
  for (int k = 2; k <= n; ++k) out *= k;
  return out;
}

// Drops the smallest coefficients while their total magnitude stays below
// 1e-12 of the largest one.
void threshold_support(std::vector<std::size_t>& modes, std::vector<std::complex<double>>& values) {
  double peak = 0.0;
  for (const auto& v : values) peak = std::max(peak, std::abs(v));
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return std::abs(values[a]) < std::abs(values[b]); });
  std::vector<bool> keep(values.size(), true);
  double dropped = 0.0;
  for (std::size_t idx : order) {
    const double mag = std::abs(values[idx]);
    if (dropped + mag > 1e-12 * peak) break;
    dropped += mag;
    keep[idx] = false;
  }
  std::vector<std::size_t> m2;
  std::vector<std::complex<double>> v2;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (keep[i]) {
      m2.push_back(modes[i]);
      v2.push_back(values[i]);
    }
  }
  modes.swap(m2);
  values.swap(v2);
}

std::vector<double> probe_coordinates(const ChainConfig& config, int n) {
  const int d = config.grid.dimension;
  std::vector<double> out(static_cast<std::size_t>(n) * d, 0.0);
  if (config.probe.empty()) return out;
  if (static_cast<int>(config.probe.size()) == d) {
    for (int b = 0; b < n; ++b) {
      for (int k = 0; k < d; ++k) out[b * d + k] = config.probe[k];
    }
    return out;
  }
  for (int i = 0; i < n * d; ++i) out[i] = config.probe[i];
  return out;
}

}  // namespace

void FractionalParams::validate() const {
  if (!(kappa > 0.0) || !std::isfinite(kappa)) throw DomainError("kappa must be a positive finite number");
  if (!(C >= 1.0) || !std::isfinite(C)) throw DomainError("C must be a finite number >= 1");
}

void ChainConfig::validate() const {
  params.validate();
  grid.validate();
  if (N_max < 1) throw DomainError("chain.N_max must be >= 1");
  if (grid.dimension == 1 && N_max > 3) throw DomainError("chain.N_max must be <= 3 for dimension 1");
  if (grid.dimension == 2 && N_max > 2) throw DomainError("chain.N_max must be <= 2 for dimension 2");
  if (TensorShape(N_max, grid).size() > kMaxTensorEntries) {
    throw DomainError("order-" + std::to_string(N_max) + " tensors on this grid exceed the storage guard");
  }
  if (s_nodes < 1) throw DomainError("chain.s_nodes must be >= 1");
  double prev = 0.0;
  for (double t : times) {
    if (!std::isfinite(t) || !(t > prev)) throw DomainError("chain.times must be finite, positive and strictly increasing");
    prev = t;
  }
  const int d = grid.dimension;
  if (!probe.empty() && static_cast<int>(probe.size()) != d && static_cast<int>(probe.size()) != N_max * d) {
    throw DomainError("report.probe must have dimension or N_max * dimension entries");
  }
  for (double x : probe) {
    if (!std::isfinite(x)) throw DomainError("report.probe entries must be finite");
  }
  if (static_cast<int>(initial_data.size()) > N_max) throw DomainError("more initial data than chain orders");
  for (std::size_t i = 0; i < initial_data.size(); ++i) {
    const auto& datum = initial_data[i];
    if (datum.order != static_cast<int>(i) + 1) throw MismatchError("initial datum order does not match its slot");
    if (datum.grid.points != grid.points || datum.grid.dimension != grid.dimension || datum.grid.length != grid.length) {
      throw MismatchError("initial datum grid differs from the chain grid");
    }
    check_initial_datum(datum, params.C);
  }
  make_kernel();
}

DispersalKernel ChainConfig::make_kernel() const { return DispersalKernel(kernel_shape, kernel_width, kernel_mass, grid); }

CorrelationTensor initial_datum(int n, double C, const TorusGrid& grid) {
  if (!(C >= 1.0)) throw DomainError("C must be >= 1");
  return CorrelationTensor::constant(n, std::pow(C, n), grid);
}

void check_initial_datum(const CorrelationTensor& datum, double C) {
  const double bound = std::pow(C, datum.order) * factorial(datum.order);
  const double hi = datum.max_value();
  const double lo = datum.min_value();
  if (hi > bound) {
    throw DomainError("initial datum of order " + std::to_string(datum.order) + " exceeds C^n n! = " +
                      std::to_string(bound) + " (max " + std::to_string(hi) + ")");
  }
  if (lo < 0.0) throw DomainError("initial datum of order " + std::to_string(datum.order) + " is negative");
}

CorrelationTensor source_term(int n, const CorrelationTensor& k_prev, const DispersalKernel& kernel, double kappa) {
  if (n < 2) throw DomainError("source term is defined for n >= 2");
  if (k_prev.order != n - 1) throw MismatchError("source term needs a tensor of order n - 1");
  const TorusGrid& grid = k_prev.grid;
  if (grid.points != kernel.grid().points || grid.dimension != kernel.grid().dimension) {
    throw MismatchError("kernel and tensor grids differ");
  }
  const TensorShape out_shape(n, grid);
  const TensorShape prev_shape(n - 1, grid);
  if (out_shape.size() > kMaxTensorEntries) throw DomainError("source tensor exceeds the storage guard");
  const int d = grid.dimension;
  const int pts = grid.points;
  CorrelationTensor out;
  out.order = n;
  out.time = k_prev.time;
  out.grid = grid;
  out.values.assign(out_shape.size(), 0.0);

  std::vector<std::size_t> blocks(n), rest(n - 1);
  std::vector<int> offset(d);
  for (std::size_t flat = 0; flat < out.values.size(); ++flat) {
    for (int b = 0; b < n; ++b) blocks[b] = out_shape.block(flat, b);
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
      int r = 0;
      for (int b = 0; b < n; ++b) {
        if (b != i) rest[r++] = blocks[b];
      }
      const double k = k_prev.values[prev_shape.compose(rest)];
      double a_sum = 0.0;
      for (int j = 0; j < n; ++j) {
        if (j == i) continue;
        std::size_t bi = blocks[i], bj = blocks[j];
        for (int axis = d - 1; axis >= 0; --axis) {
          offset[axis] = static_cast<int>(bi % pts) - static_cast<int>(bj % pts);
          bi /= pts;
          bj /= pts;
        }
        a_sum += kernel.at(offset);
      }
      total += k * a_sum;
    }
    out.values[flat] = kappa * total;
  }
  return out;
}

SpectralChain::SpectralChain(const ChainConfig& config, const SolveOptions& options)
    : config_(config), options_(options), kernel_(config.make_kernel()) {
  config_.validate();
  ahat_ = kernel_fourier(kernel_, config_.grid);
  const double volume = config_.grid.volume();
  const double kappa = config_.params.kappa;

  levels_.resize(config_.N_max);
  for (int n = 1; n <= config_.N_max; ++n) {
    Level& level = levels_[n - 1];
    const TensorShape shape(n, config_.grid);

    // Initial coefficients.
    std::vector<std::size_t> init_modes;
    std::vector<std::complex<double>> init_values;
    if (n <= static_cast<int>(config_.initial_data.size())) {
      auto spectrum = forward_transform(config_.initial_data[n - 1]);
      const double scale = 1.0 / static_cast<double>(shape.size());
      for (std::size_t i = 0; i < spectrum.size(); ++i) {
        init_modes.push_back(i);
        init_values.push_back(spectrum[i] * scale);
      }
      threshold_support(init_modes, init_values);
    } else {
      init_modes.push_back(0);
      init_values.push_back(std::pow(config_.params.C, n));
    }

    // Source scatter from level n - 1, generated in a fixed order.
    struct Raw {
      std::size_t out;
      std::uint32_t in;
      double weight;
    };
    std::vector<Raw> raw;
    if (n >= 2) {
      const Level& prev = levels_[n - 2];
      const TensorShape prev_shape(n - 1, config_.grid);
      const std::size_t block_count = shape.block_size();
      const std::size_t planned = prev.modes.size() * n * (n - 1) * block_count;
      if (planned > kMaxScatterEntries) {
        throw DomainError("spectral support of order " + std::to_string(n) +
                          " is too large for this grid; use a smaller grid or constant initial data");
      }
      raw.reserve(planned);
      std::vector<std::size_t> eta(n - 1), xi(n);
      for (std::size_t p = 0; p < prev.modes.size(); ++p) {
        for (int b = 0; b < n - 1; ++b) eta[b] = prev_shape.block(prev.modes[p], b);
        for (int i = 0; i < n; ++i) {
          for (int j = 0; j < n; ++j) {
            if (j == i) continue;
            const int jp = j < i ? j : j - 1;
            for (std::size_t zeta = 0; zeta < block_count; ++zeta) {
              int r = 0;
              for (int b = 0; b < n; ++b) {
                if (b == i) {
                  xi[b] = zeta;
                } else {
                  xi[b] = eta[r++];
                }
              }
              xi[j] = shape.subtract_blocks(eta[jp], zeta);
              raw.push_back({shape.compose(xi), static_cast<std::uint32_t>(p), kappa * ahat_[zeta] / volume});
            }
          }
        }
      }
    }

    // Support = initial modes plus scatter targets.
    std::vector<std::size_t> modes = init_modes;
    for (const auto& r : raw) modes.push_back(r.out);
    std::sort(modes.begin(), modes.end());
    modes.erase(std::unique(modes.begin(), modes.end()), modes.end());
    if (modes.size() > std::numeric_limits<std::uint32_t>::max()) throw DomainError("spectral support too large");
    level.modes = modes;
    auto position = [&](std::size_t mode) {
      return static_cast<std::uint32_t>(std::lower_bound(modes.begin(), modes.end(), mode) - modes.begin());
    };
    level.initial.assign(modes.size(), 0.0);
    for (std::size_t i = 0; i < init_modes.size(); ++i) level.initial[position(init_modes[i])] = init_values[i];
    level.scatter.reserve(raw.size());
    for (const auto& r : raw) level.scatter.push_back({position(r.out), r.in, r.weight});
    // Accumulate per output mode in generation order.
    std::stable_sort(level.scatter.begin(), level.scatter.end(),
                     [](const ScatterEntry& a, const ScatterEntry& b) { return a.out < b.out; });

    const MultiplierField multiplier(n, kappa, ahat_, config_.grid);
    level.rates.resize(modes.size());
    for (std::size_t i = 0; i < modes.size(); ++i) level.rates[i] = multiplier.value(modes[i]);
    level.rate_table = RateTable(level.rates);
  }
}

GradedRuleOptions SpectralChain::rule_options(int n, double t, int s_nodes) const {
  GradedRuleOptions opt;
  opt.nodes_per_panel = s_nodes;
  opt.levels = kGradeLevels;
  opt.ratio = kGradeRatio;
  const double growth = n * (config_.params.kappa * kernel_.mass() - 1.0);
  if (growth > 0.0) {
    const double rate = std::pow(growth, 1.0 / config_.params.alpha.value());
    if (rate * t > 1.0) opt.max_panel_width = 1.0 / (kPanelsPerEfold * rate);
  }
  return opt;
}

std::vector<std::complex<double>> SpectralChain::source(int n, const std::vector<std::complex<double>>& prev) const {
  const Level& level = levels_[n - 1];
  std::vector<std::complex<double>> out(level.modes.size(), 0.0);
  for (const auto& e : level.scatter) out[e.out] += e.weight * prev[e.in];
  return out;
}

std::vector<std::complex<double>> SpectralChain::level(int n, double t, int s_nodes) const {
  if (n < 1 || n > config_.N_max) throw DomainError("chain level out of range");
  if (!(t >= 0.0)) throw DomainError("chain time must be >= 0");
  const Alpha alpha = config_.params.alpha;
  const double a = alpha.value();
  const Level& lv = levels_[n - 1];
  std::vector<std::complex<double>> out = lv.initial;
  if (t == 0.0) return out;

  // S_a(t) k_0 on the modes that carry initial data.
  std::vector<std::size_t> carried;
  std::vector<double> carried_rates;
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (out[i] != 0.0) {
      carried.push_back(i);
      carried_rates.push_back(lv.rates[i]);
    }
  }
  const auto s_factor = map_unique(carried_rates, [&](double lambda) { return s_alpha_scalar(alpha, lambda, t); });
  for (std::size_t k = 0; k < carried.size(); ++k) out[carried[k]] *= s_factor[k];
  if (n == 1) return out;

  // Volterra term with the (t - s)^(a-1) factor carried by the rule.
  const auto rule = singular_product_rule(t, 0.0, a - 1.0, rule_options(n, t, s_nodes));
  for (std::size_t j = 0; j < rule.size(); ++j) {
    const double s = rule.nodes[j];
    auto prev = level(n - 1, s, s_nodes);
    if (options_.lower_level_hook) options_.lower_level_hook(n, s, prev);
    const auto f = source(n, prev);
    const double u = t - s;
    const double ua = std::pow(u, a);
    const auto p_factor =
        lv.rate_table.evaluate([&](double lambda) { return mittag_leffler_two(alpha, a, lambda * ua); });
    const auto& slot = lv.rate_table.slots();
    const double w = rule.weights[j];
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += w * p_factor[slot[i]] * f[i];
  }
  return out;
}

CorrelationTensor SpectralChain::to_physical(int n, const std::vector<std::complex<double>>& coefficients,
                                             double t) const {
  const Level& lv = levels_[n - 1];
  const TensorShape shape(n, config_.grid);
  std::vector<std::complex<double>> dense(shape.size(), 0.0);
  for (std::size_t i = 0; i < lv.modes.size(); ++i) dense[lv.modes[i]] = coefficients[i];
  CorrelationTensor out;
  out.order = n;
  out.time = t;
  out.grid = config_.grid;
  out.values = inverse_transform_real(std::move(dense), shape);
  // inverse_transform_real normalizes by the size; coefficients are already normalized.
  const double scale = static_cast<double>(shape.size());
  for (double& v : out.values) v *= scale;
  return out;
}

double SpectralChain::probe_value(int n, const std::vector<std::complex<double>>& coefficients) const {
  const Level& lv = levels_[n - 1];
  const TensorShape shape(n, config_.grid);
  const auto x = probe_coordinates(config_, n);
  const int d = config_.grid.dimension;
  const int pts = config_.grid.points;
  std::complex<double> sum = 0.0;
  for (std::size_t i = 0; i < lv.modes.size(); ++i) {
    double phase = 0.0;
    for (int b = 0; b < n; ++b) {
      std::size_t blk = shape.block(lv.modes[i], b);
      for (int axis = d - 1; axis >= 0; --axis) {
        phase += config_.grid.frequency(static_cast<int>(blk % pts)) * x[b * d + axis];
        blk /= pts;
      }
    }
    sum += coefficients[i] * std::complex<double>(std::cos(phase), std::sin(phase));
  }
  return sum.real();
}

ChainSolution solve_chain(const ChainConfig& config, const SolveOptions& options) {
  const SpectralChain chain(config, options);
  ChainSolution solution;
  for (double t : config.times) {
    for (int n = 1; n <= config.N_max; ++n) {
      ChainEntry entry;
      entry.n = n;
      entry.t = t;
      auto coeffs = chain.level(n, t, config.s_nodes);
      auto tensor = chain.to_physical(n, coeffs, t);
      entry.max_norm = tensor.max_value();
      entry.min_value = tensor.min_value();
      entry.probe_value = chain.probe_value(n, coeffs);

      if (n >= 2 && options.refinement_check) {
        const auto fine = chain.level(n, t, 2 * config.s_nodes);
        auto fine_tensor = chain.to_physical(n, fine, t);
        const double fine_max = fine_tensor.max_value();
        const double fine_probe = chain.probe_value(n, fine);
        const double scale = std::max(std::abs(fine_max), std::numeric_limits<double>::min());
        entry.refinement_change =
            std::max(std::abs(fine_max - entry.max_norm), std::abs(fine_probe - entry.probe_value)) / scale;
        entry.max_norm = fine_max;
        entry.min_value = fine_tensor.min_value();
        entry.probe_value = fine_probe;
        tensor = std::move(fine_tensor);
        if (entry.refinement_change > options.refinement_tol) {
          throw ConvergenceError("Volterra quadrature not converged at n=" + std::to_string(n) +
                                 ", t=" + std::to_string(t) + ": doubling s_nodes changed the norm by " +
                                 std::to_string(entry.refinement_change) + " (relative)");
        }
      }
      if (n >= 2 && tensor.values.size() <= (std::size_t{1} << 16)) entry.symmetry_defect = tensor.symmetry_defect();
      if (options.keep_tensors) entry.tensor = std::move(tensor);
      if (options.on_entry) options.on_entry(entry);
      solution.entries.push_back(std::move(entry));
    }
  }
  return solution;
}

std::vector<NormRow> chain_norms(const ChainSolution& solution) {
  std::vector<NormRow> rows;
  rows.reserve(solution.entries.size());
  for (const auto& e : solution.entries) {
    const double max_norm = e.tensor ? e.tensor->max_value() : e.max_norm;
    rows.push_back({e.n, e.t, max_norm, e.probe_value});
  }
  return rows;
}

}  // namespace fraccm
