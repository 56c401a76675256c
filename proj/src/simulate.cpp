#include "sepcov/simulate.hpp"

#include <chrono>
#include <cmath>
#include <string>

#include <omp.h>

#include "sepcov/errors.hpp"
#include "sepcov/numerics.hpp"

namespace sepcov {

double sim_kernel(const SimKernelParams& p, double s, double t, double s2, double t2) {
  const double lag = p.a * std::abs(t - t2) + 1.0;
  const double ds = s - s2;
  return std::exp(-p.b * p.b * ds * ds / std::pow(lag, p.c)) / std::sqrt(lag);
}

ProductGrid simulation_grid(std::size_t spatial, std::size_t temporal, bool paper_grid) {
  if (spatial == 0 || temporal == 0) throw DomainError("simulation_grid: empty axis");
  const std::size_t s_points = paper_grid ? spatial - 1 : spatial;
  if (s_points == 0) throw DomainError("simulation_grid: paper grid needs S >= 2");
  return ProductGrid(AxisGrid::fractions(s_points, static_cast<double>(spatial)),
                     AxisGrid::fractions(temporal, static_cast<double>(temporal)));
}

DenseKernel build_sim_cov(const SimKernelParams& params, const ProductGrid& grid) {
  const std::size_t p = grid.size();
  Matrix values(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p));
  for (std::size_t i = 0; i < p; ++i) {
    const double s = grid.spatial.point(grid.spatial_of(i));
    const double t = grid.temporal.point(grid.temporal_of(i));
    for (std::size_t j = 0; j <= i; ++j) {
      const double v = sim_kernel(params, s, t, grid.spatial.point(grid.spatial_of(j)),
                                  grid.temporal.point(grid.temporal_of(j)));
      values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
      values(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = v;
    }
  }
  return DenseKernel{grid, std::move(values)};
}

InnovationSampler::InnovationSampler(const DenseKernel& cov)
    : factor_(psd_factor(SymmetricMatrix::from_dense(cov.values))) {}

RowMatrix InnovationSampler::draw(std::size_t count, std::mt19937_64& rng) const {
  std::normal_distribution<double> normal(0.0, 1.0);
  const Eigen::Index p = factor_.rows();
  Matrix z(p, static_cast<Eigen::Index>(count));
  for (Eigen::Index c = 0; c < z.cols(); ++c)
    for (Eigen::Index i = 0; i < p; ++i) z(i, c) = normal(rng);
  return RowMatrix((factor_ * z).transpose());
}

RowMatrix sample_innovations(const DenseKernel& cov, std::size_t count, std::mt19937_64& rng) {
  return InnovationSampler(cov).draw(count, rng);
}

FunctionalSample ma1_process(const RowMatrix& innovations, const SimKernelParams& params,
                             const ProductGrid& grid, Ma1Sites sites) {
  const auto p = static_cast<Eigen::Index>(grid.size());
  if (innovations.cols() != p) throw DomainError("ma1_process: innovations do not match grid");
  if (innovations.rows() < 2) throw DomainError("ma1_process: need N + 1 >= 2 innovations");
  const auto s_n = static_cast<Eigen::Index>(grid.spatial_size());
  const auto t_n = static_cast<Eigen::Index>(grid.temporal_size());

  Matrix smoother(s_n, s_n);
  for (Eigen::Index i = 0; i < s_n; ++i) {
    const double s = grid.spatial.point(static_cast<std::size_t>(i));
    for (Eigen::Index j = 0; j < s_n; ++j) {
      const double site = sites == Ma1Sites::Grid ? grid.spatial.point(static_cast<std::size_t>(j))
                                                  : static_cast<double>(j + 1);
      smoother(i, j) = std::exp(-params.b * params.b * (s - site) * (s - site));
    }
  }

  const Eigen::Index n = innovations.rows() - 1;
  RowMatrix out(n, p);
  for (Eigen::Index k = 0; k < n; ++k) {
    const RowMatrix sum = innovations.row(k + 1) + innovations.row(k);
    const Eigen::Map<const RowMatrix> e(sum.data(), s_n, t_n);
    const RowMatrix x = smoother * e;
    out.row(k) = Eigen::Map<const Eigen::RowVectorXd>(x.data(), p);
  }
  return FunctionalSample(grid, std::move(out));
}

std::uint64_t run_seed(std::uint64_t seed, std::size_t run) {
  return mix_seed(mix_seed(seed) + static_cast<std::uint64_t>(run));
}

FunctionalSample simulate_sample(const SimConfig& config, const InnovationSampler& sampler,
                                 std::uint64_t seed) {
  const ProductGrid grid = simulation_grid(config.spatial, config.temporal, config.paper_grid);
  std::mt19937_64 rng(mix_seed(seed));
  const RowMatrix innovations = sampler.draw(config.sample_size + 1, rng);
  return ma1_process(innovations, config.params, grid, config.sites);
}

FunctionalSample simulate_sample(const SimConfig& config, std::uint64_t seed) {
  const ProductGrid grid = simulation_grid(config.spatial, config.temporal, config.paper_grid);
  const InnovationSampler sampler(build_sim_cov(config.params, grid));
  return simulate_sample(config, sampler, seed);
}

ExperimentResult run_experiment(const SimConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  if (config.runs == 0) throw DomainError("run_experiment: need at least one run");
  if (config.sample_size < 2) throw DomainError("run_experiment: N must be at least 2");
  const ProductGrid grid = simulation_grid(config.spatial, config.temporal, config.paper_grid);
  const InnovationSampler sampler(build_sim_cov(config.params, grid));

  ExperimentResult result;
  result.config = config;
  result.runs.resize(config.runs);
  const int threads = config.threads > 0 ? config.threads : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic) num_threads(threads)
  for (std::size_t run = 0; run < config.runs; ++run) {
    RunOutcome& outcome = result.runs[run];
    try {
      const std::uint64_t seed = run_seed(config.seed, run);
      const FunctionalSample sample = simulate_sample(config, sampler, seed);
      BootstrapConfig boot = config.bootstrap;
      boot.seed = seed;
      boot.threads = 1;
      const TestReport report = run_test(sample, boot);
      outcome.reject = report.reject;
      outcome.p_value = report.p_value;
      outcome.statistic = report.statistic.sup_dev;
    } catch (const std::exception& e) {
      outcome.error = e.what();
    }
  }

  std::size_t rejections = 0;
  for (const auto& r : result.runs) {
    if (r.error) {
      ++result.failures;
    } else if (r.reject) {
      ++rejections;
    }
  }
  if (static_cast<double>(result.failures) > 0.01 * static_cast<double>(config.runs)) {
    throw DegenerateKernelError("run_experiment: " + std::to_string(result.failures) + " of " +
                                std::to_string(config.runs) +
                                " runs failed; first error: " + [&] {
                                  for (const auto& r : result.runs)
                                    if (r.error) return *r.error;
                                  return std::string();
                                }());
  }
  const std::size_t ok = config.runs - result.failures;
  result.rejection_rate = ok > 0 ? static_cast<double>(rejections) / static_cast<double>(ok) : 0.0;
  result.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

}  // namespace sepcov
