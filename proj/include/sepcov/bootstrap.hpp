#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "sepcov/covariance.hpp"
#include "sepcov/errors.hpp"
#include "sepcov/separable.hpp"
#include "sepcov/statistic.hpp"

namespace sepcov {

struct BootstrapConfig {
  std::size_t replicates = 400;
  std::size_t block_length = 1;
  double alpha = 0.05;
  std::uint64_t seed = 0;
  ApproxKind kind = ApproxKind::trace();
  std::size_t block_size = kDefaultBlockSize;
  int threads = 0;  // 0: OpenMP default
  std::size_t memory_budget = kDefaultMemoryBudget;
};

// Block lengths used in the simulation design for N = 50, 100, 150, 200;
// otherwise max(1, ceil(N^(1/4))), a heuristic that grows slower than sqrt(N).
std::size_t default_block_length(std::size_t sample_size);

// Stream for bootstrap replicate k: seeded from seed ^ k. `attempt` > 0
// gives an unrelated stream for regenerated replicates.
std::mt19937_64 replicate_stream(std::uint64_t seed, std::size_t k, unsigned attempt = 0);
std::uint64_t mix_seed(std::uint64_t value);

// w_i = l^(-1/2) * sum_{m < l} xi_{i+m}, xi iid N(0, 1). Gaussian with unit
// variance and Cov(w_i, w_j) = max(0, 1 - |i - j| / l).
std::vector<double> gen_weights(std::size_t n, std::size_t block_length, std::mt19937_64& rng);

// w_n - mean(w); exactly zero for constant weights.
std::vector<double> centered_weights(std::span<const double> weights);

// B(i, j) = (1/N) sum_n w_n (Xc_n(i) Xc_n(j) - C_N(i, j))
Matrix bootstrap_process_block(const LazyCovariance& cov, std::span<const double> weights,
                               std::span<const std::size_t> rows,
                               std::span<const std::size_t> cols);

/// Evaluates ||B - ([C^x + B]^x - C^x)|| for a fixed covariance and its
/// separable approximation C^x. The trace map only needs the marginals of B
/// (partial traces are linear); B itself is formed densely when it fits a
/// quarter of the memory budget and streamed in tiles otherwise. Product
/// and SPCA always work on the dense perturbed kernel.
class BootstrapEngine {
 public:
  BootstrapEngine(const LazyCovariance& cov, SeparableKernel approx, ApproxKind kind,
                  std::size_t block_size = kDefaultBlockSize,
                  std::size_t memory_budget = kDefaultMemoryBudget);

  double statistic(std::span<const double> weights) const;
  // Dense evaluation of every display, for any kind.
  double statistic_dense(std::span<const double> weights) const;

 private:
  double statistic_trace_streaming(std::span<const double> weights) const;
  double statistic_trace_dense(std::span<const double> weights) const;

  const LazyCovariance& cov_;
  SeparableKernel approx_;
  ApproxKind kind_;
  std::size_t block_size_;
  std::size_t memory_budget_;
  bool dense_fits_ = false;
  std::optional<Matrix> approx_dense_;
};

double bootstrap_statistic(const LazyCovariance& cov, const SeparableKernel& approx,
                           std::span<const double> weights, const ApproxKind& kind,
                           std::size_t block_size = kDefaultBlockSize);

// Order statistic ceil((1 - alpha) * r) of the ascending values.
double empirical_quantile(std::span<const double> values, double alpha);
// (1 + #{b >= stat}) / (r + 1)
double bootstrap_p_value(std::span<const double> boot_values, double stat);

struct TestReport {
  DeviationResult statistic;
  std::vector<double> boot_values;
  double quantile = 0.0;
  double p_value = 1.0;
  bool reject = false;
  std::size_t regenerated_replicates = 0;
  BootstrapConfig config;
  std::size_t sample_size = 0;
  std::size_t spatial_points = 0;
  std::size_t temporal_points = 0;
  std::optional<SpcaDiagnostics> spca;
  double wall_time_s = 0.0;
};

// A bootstrap replicate stayed degenerate after regeneration.
class BootstrapFailure : public DegenerateKernelError {
 public:
  BootstrapFailure(const std::string& what, std::size_t replicate)
      : DegenerateKernelError(what), replicate_(replicate) {}
  std::size_t replicate() const { return replicate_; }

 private:
  std::size_t replicate_;
};

TestReport run_test(const FunctionalSample& sample, const BootstrapConfig& config);

}  // namespace sepcov
