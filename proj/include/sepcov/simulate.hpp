#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "sepcov/bootstrap.hpp"
#include "sepcov/covariance.hpp"

namespace sepcov {

/// Space-time kernel
///   C(s,t,s',t') = (a|t-t'| + 1)^(-1/2) exp(-b^2 |s-s'|^2 / (a|t-t'| + 1)^c).
/// Separable for c = 0.
struct SimKernelParams {
  double a = 3.0;
  double b = 2.0;
  double c = 0.0;
};

double sim_kernel(const SimKernelParams& p, double s, double t, double s2, double t2);

// Spatial axis 1/S..S/S, or 1/S..(S-1)/S with `paper_grid`; temporal 1/T..T/T.
ProductGrid simulation_grid(std::size_t spatial, std::size_t temporal, bool paper_grid);

DenseKernel build_sim_cov(const SimKernelParams& params, const ProductGrid& grid);

/// Draws Gaussian surfaces with a fixed covariance via a clipped
/// eigen square root computed once.
class InnovationSampler {
 public:
  explicit InnovationSampler(const DenseKernel& cov);
  // `count` draws, one per row.
  RowMatrix draw(std::size_t count, std::mt19937_64& rng) const;
  const Matrix& factor() const { return factor_; }

 private:
  Matrix factor_;
};

RowMatrix sample_innovations(const DenseKernel& cov, std::size_t count, std::mt19937_64& rng);

enum class Ma1Sites {
  Grid,     // s' ranges over the spatial grid points
  Integer,  // literal reading: weight exp(-b^2 (s - j)^2) for the j-th site, j = 1..S
};

// X_n(s, t) = sum_{s'} exp(-b^2 (s - s')^2) [e_n(t, s') + e_{n-1}(t, s')],
// n = 1..N, from N + 1 innovations e_0..e_N (rows).
FunctionalSample ma1_process(const RowMatrix& innovations, const SimKernelParams& params,
                             const ProductGrid& grid, Ma1Sites sites = Ma1Sites::Grid);

struct SimConfig {
  SimKernelParams params;
  std::size_t spatial = 4;
  std::size_t temporal = 50;
  std::size_t sample_size = 100;
  std::size_t runs = 1000;
  bool paper_grid = true;
  Ma1Sites sites = Ma1Sites::Grid;
  BootstrapConfig bootstrap;  // bootstrap.seed is ignored; runs derive their own
  std::uint64_t seed = 0;
  int threads = 0;
};

// Seed for Monte-Carlo run `run`.
std::uint64_t run_seed(std::uint64_t seed, std::size_t run);

// One MA(1) sample of `config.sample_size` surfaces.
FunctionalSample simulate_sample(const SimConfig& config, std::uint64_t seed);
FunctionalSample simulate_sample(const SimConfig& config, const InnovationSampler& sampler,
                                 std::uint64_t seed);

struct RunOutcome {
  bool reject = false;
  double p_value = 1.0;
  double statistic = 0.0;
  std::optional<std::string> error;
};

struct ExperimentResult {
  double rejection_rate = 0.0;
  std::size_t failures = 0;
  std::vector<RunOutcome> runs;
  double wall_time_s = 0.0;
  SimConfig config;
};

// Aborts with DegenerateKernelError when more than 1% of runs fail.
ExperimentResult run_experiment(const SimConfig& config);

}  // namespace sepcov
