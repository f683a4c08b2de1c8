#pragma once

#include <complex>
#include <functional>
#include <optional>
#include <vector>

#include "fraccm/lattice.hpp"
#include "fraccm/quadrature.hpp"
#include "fraccm/specfun.hpp"

namespace fraccm {

struct FractionalParams {
  Alpha alpha{0.5};
  double kappa = 1.0;
  double C = 1.0;

  void validate() const;
};

struct ChainConfig {
  int N_max = 2;
  std::vector<double> times{0.5, 1.0, 2.0};
  /// Quadrature nodes per panel of each Volterra integral.
  int s_nodes = 8;
  FractionalParams params;
  KernelShape kernel_shape = KernelShape::gaussian;
  double kernel_width = 1.0;
  double kernel_mass = 1.0;
  TorusGrid grid;
  /// Probe coordinates: either one d-tuple shared by every block or
  /// N_max * d values. Empty means the origin.
  std::vector<double> probe;
  /// Optional initial data per order (index n - 1). Missing orders use the
  /// constant datum C^n.
  std::vector<CorrelationTensor> initial_data;

  void validate() const;
  DispersalKernel make_kernel() const;
};

/// Constant datum k_0^(n) = C^n.
CorrelationTensor initial_datum(int n, double C, const TorusGrid& grid);

/// Throws DomainError if the datum is negative or exceeds C^n n! anywhere.
void check_initial_datum(const CorrelationTensor& datum, double C);

/// f^(n)(x) = kappa sum_i k^(n-1)(x without x_i) sum_{j != i} a(x_i - x_j),
/// evaluated by direct summation in physical space.
CorrelationTensor source_term(int n, const CorrelationTensor& k_prev, const DispersalKernel& kernel, double kappa);

struct ChainEntry {
  int n = 0;
  double t = 0.0;
  double max_norm = 0.0;
  double min_value = 0.0;
  double probe_value = 0.0;
  /// Largest relative change of the reported norms between s_nodes and
  /// 2 * s_nodes (0 when no Volterra term is present).
  double refinement_change = 0.0;
  double symmetry_defect = 0.0;
  std::optional<CorrelationTensor> tensor;
};

struct ChainSolution {
  std::vector<ChainEntry> entries;
};

struct SolveOptions {
  bool keep_tensors = false;
  bool refinement_check = true;
  double refinement_tol = 1e-3;
  /// Called after each (n, t) row is final; rows arrive ordered by t, then n.
  std::function<void(const ChainEntry&)> on_entry;
  /// Test hook: sees (and may modify) the spectral coefficients of level n - 1
  /// at each Volterra node s before they enter the level-n source.
  std::function<void(int n, double s, std::vector<std::complex<double>>& coefficients)> lower_level_hook;
};

/// Solves the chain for every (t, n). Throws OverflowError / ConvergenceError
/// after having delivered all completed rows to `on_entry`.
ChainSolution solve_chain(const ChainConfig& config, const SolveOptions& options = {});

struct NormRow {
  int n;
  double t;
  double max_norm;
  double probe_value;
};

std::vector<NormRow> chain_norms(const ChainSolution& solution);

/// Spectral chain solver exposed for tests: coefficients of k_t^(n) in the
/// basis e^{i xi . x}, on a fixed sparse support.
class SpectralChain {
 public:
  SpectralChain(const ChainConfig& config, const SolveOptions& options = {});

  const std::vector<std::size_t>& support(int n) const { return levels_.at(n - 1).modes; }
  std::vector<std::complex<double>> level(int n, double t, int s_nodes) const;
  CorrelationTensor to_physical(int n, const std::vector<std::complex<double>>& coefficients, double t) const;
  double probe_value(int n, const std::vector<std::complex<double>>& coefficients) const;
  const DispersalKernel& kernel() const { return kernel_; }
  /// Graded rule used for the level-n Volterra integral on [0, t].
  GradedRuleOptions rule_options(int n, double t, int s_nodes) const;

 private:
  struct ScatterEntry {
    std::uint32_t out;
    std::uint32_t in;
    double weight;
  };
  struct Level {
    std::vector<std::size_t> modes;
    std::vector<double> rates;
    RateTable rate_table;
    std::vector<std::complex<double>> initial;
    std::vector<ScatterEntry> scatter;  // from level n - 1
  };

  std::vector<std::complex<double>> source(int n, const std::vector<std::complex<double>>& prev) const;

  ChainConfig config_;
  SolveOptions options_;
  DispersalKernel kernel_;
  std::vector<double> ahat_;
  std::vector<Level> levels_;
};

}  // namespace fraccm
