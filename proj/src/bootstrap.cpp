#include "sepcov/bootstrap.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <string>

#include <omp.h>

namespace sepcov {
namespace {

double trace_of(const MarginalKernel& k) {
  double acc = 0.0;
  for (std::size_t i = 0; i < k.size(); ++i) acc += k.axis().weight(i) * k(i, i);
  return acc;
}

double sup_of(const SeparableKernel& sep) {
  return sup_norm(sep.factor1()) * sup_norm(sep.factor2()) / std::abs(sep.normalizer());
}

void check_weights(const LazyCovariance& cov, std::span<const double> weights) {
  if (weights.size() != cov.sample_size()) {
    throw DomainError("bootstrap: " + std::to_string(weights.size()) + " weights for " +
                      std::to_string(cov.sample_size()) + " observations");
  }
}

}  // namespace

std::size_t default_block_length(std::size_t sample_size) {
  switch (sample_size) {
    case 50: return 2;
    case 100: return 2;
    case 150: return 3;
    case 200: return 4;
    default: break;
  }
  const double l = std::ceil(std::pow(static_cast<double>(sample_size), 0.25));
  return std::max<std::size_t>(1, static_cast<std::size_t>(l));
}

std::uint64_t mix_seed(std::uint64_t value) {
  std::uint64_t z = value + 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::mt19937_64 replicate_stream(std::uint64_t seed, std::size_t k, unsigned attempt) {
  std::uint64_t s = mix_seed(seed ^ static_cast<std::uint64_t>(k));
  for (unsigned a = 0; a < attempt; ++a) s = mix_seed(s ^ 0xA5A5A5A5DEADBEEFULL);
  return std::mt19937_64(s);
}

std::vector<double> gen_weights(std::size_t n, std::size_t block_length, std::mt19937_64& rng) {
  if (block_length == 0 || block_length > n) {
    throw DomainError("gen_weights: block length " + std::to_string(block_length) +
                      " must lie in [1, " + std::to_string(n) + "]");
  }
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> xi(n + block_length - 1);
  for (double& x : xi) x = normal(rng);
  const double scale = 1.0 / std::sqrt(static_cast<double>(block_length));
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (std::size_t m = 0; m < block_length; ++m) acc += xi[i + m];
    w[i] = scale * acc;
  }
  return w;
}

std::vector<double> centered_weights(std::span<const double> weights) {
  std::vector<double> d(weights.begin(), weights.end());
  if (d.empty()) return d;
  const bool constant =
      std::all_of(d.begin(), d.end(), [&](double v) { return v == weights.front(); });
  if (constant) {
    std::fill(d.begin(), d.end(), 0.0);
    return d;
  }
  double mean = 0.0;
  for (double v : weights) mean += v;
  mean /= static_cast<double>(weights.size());
  for (double& v : d) v -= mean;
  return d;
}

Matrix bootstrap_process_block(const LazyCovariance& cov, std::span<const double> weights,
                               std::span<const std::size_t> rows,
                               std::span<const std::size_t> cols) {
  check_weights(cov, weights);
  // sum_n w_n (x x^T - C) = sum_n (w_n - mean w) x x^T
  const auto d = centered_weights(weights);
  return weighted_outer_block(cov.centered().data(), d,
                              1.0 / static_cast<double>(cov.sample_size()), rows, cols);
}

BootstrapEngine::BootstrapEngine(const LazyCovariance& cov, SeparableKernel approx,
                                 ApproxKind kind, std::size_t block_size,
                                 std::size_t memory_budget)
    : cov_(cov),
      approx_(std::move(approx)),
      kind_(std::move(kind)),
      block_size_(block_size),
      memory_budget_(memory_budget) {
  if (!(approx_.grid() == cov_.grid())) {
    throw DomainError("BootstrapEngine: approximation lives on a different grid");
  }
  dense_fits_ = dense_bytes(cov_.grid()) <= memory_budget_ / 4;
  if (kind_.tag != ApproxKind::Tag::Trace) {
    require_budget(cov_.grid(), memory_budget_ / 4, "bootstrap (dense path)");
    approx_dense_ = to_dense(approx_).values;
  }
}

double BootstrapEngine::statistic(std::span<const double> weights) const {
  if (kind_.tag == ApproxKind::Tag::Trace) {
    return dense_fits_ ? statistic_trace_dense(weights) : statistic_trace_streaming(weights);
  }
  return statistic_dense(weights);
}

double BootstrapEngine::statistic_trace_dense(std::span<const double> weights) const {
  check_weights(cov_, weights);
  const auto& g = cov_.grid();
  const auto d = centered_weights(weights);
  const Matrix b = weighted_gram(cov_.centered().data(), d,
                                 1.0 / static_cast<double>(cov_.sample_size()));
  const auto s_n = static_cast<Eigen::Index>(g.spatial_size());
  const auto t_n = static_cast<Eigen::Index>(g.temporal_size());
  const Vector ws = g.spatial.weight_vector();
  const Vector wt = g.temporal.weight_vector();

  Matrix b1(s_n, s_n);
  Matrix b2 = Matrix::Zero(t_n, t_n);
  double b_trace = 0.0;
  for (Eigen::Index s = 0; s < s_n; ++s) {
    for (Eigen::Index s2 = 0; s2 < s_n; ++s2)
      b1(s, s2) = b.block(s * t_n, s2 * t_n, t_n, t_n).diagonal().dot(wt);
    b2 += ws(s) * b.block(s * t_n, s * t_n, t_n, t_n);
    b_trace += ws(s) * b1(s, s);
  }

  const double tr1 = trace_of(approx_.factor1());
  const double tr2 = trace_of(approx_.factor2());
  const double norm = approx_.normalizer();
  const SeparableKernel perturbed = trace_approximation(
      MarginalKernel(g.spatial, approx_.factor1().values() * (tr2 / norm) + b1),
      MarginalKernel(g.temporal, approx_.factor2().values() * (tr1 / norm) + b2),
      tr1 * tr2 / norm + b_trace, sup_of(approx_));

  const Matrix& p1 = perturbed.factor1().values();
  const Matrix& p2 = perturbed.factor2().values();
  const Matrix& a1 = approx_.factor1().values();
  const Matrix& a2 = approx_.factor2().values();
  double best = 0.0;
  for (Eigen::Index s = 0; s < s_n; ++s) {
    for (Eigen::Index s2 = 0; s2 < s_n; ++s2) {
      const double cp = p1(s, s2) / perturbed.normalizer();
      const double ca = a1(s, s2) / norm;
      const double v =
          (b.block(s * t_n, s2 * t_n, t_n, t_n) - (cp * p2 - ca * a2)).cwiseAbs().maxCoeff();
      best = std::max(best, v);
    }
  }
  return best;
}

double BootstrapEngine::statistic_trace_streaming(std::span<const double> weights) const {
  check_weights(cov_, weights);
  const auto& sample = cov_.centered();
  const auto d = centered_weights(weights);
  const double inv_n = 1.0 / static_cast<double>(cov_.sample_size());

  // Marginals of C^x (separable, so they factor) plus those of B.
  const double tr1 = trace_of(approx_.factor1());
  const double tr2 = trace_of(approx_.factor2());
  const double norm = approx_.normalizer();
  const MarginalKernel b1 = weighted_partial_trace_spatial(sample, d, inv_n);
  const MarginalKernel b2 = weighted_partial_trace_temporal(sample, d, inv_n);
  const double b_trace = weighted_trace(sample, d, inv_n);

  const SeparableKernel perturbed = trace_approximation(
      MarginalKernel(b1.axis(), approx_.factor1().values() * (tr2 / norm) + b1.values()),
      MarginalKernel(b2.axis(), approx_.factor2().values() * (tr1 / norm) + b2.values()),
      tr1 * tr2 / norm + b_trace, sup_of(approx_));

  const auto& data = sample.data();
  return blockwise_sup(cov_.grid(), block_size_,
                       [&](std::size_t r0, std::size_t c0, Matrix& out) {
                         const auto rows =
                             index_range(r0, r0 + static_cast<std::size_t>(out.rows()));
                         const auto cols =
                             index_range(c0, c0 + static_cast<std::size_t>(out.cols()));
                         out = weighted_outer_block(data, d, inv_n, rows, cols) -
                               (eval_separable(perturbed, rows, cols) -
                                eval_separable(approx_, rows, cols));
                       })
      .sup_dev;
}

double BootstrapEngine::statistic_dense(std::span<const double> weights) const {
  check_weights(cov_, weights);
  require_budget(cov_.grid(), memory_budget_ / 4, "bootstrap (dense path)");
  const Matrix b = weighted_gram(cov_.centered().data(), centered_weights(weights),
                                 1.0 / static_cast<double>(cov_.sample_size()));
  const Matrix approx = approx_dense_ ? *approx_dense_ : to_dense(approx_).values;
  const DenseKernel perturbed{cov_.grid(), approx + b};
  const DenseKernel reapprox = to_dense(approximate(perturbed, kind_));
  return sup_norm(b - (reapprox.values - approx));
}

double bootstrap_statistic(const LazyCovariance& cov, const SeparableKernel& approx,
                           std::span<const double> weights, const ApproxKind& kind,
                           std::size_t block_size) {
  return BootstrapEngine(cov, approx, kind, block_size).statistic(weights);
}

double empirical_quantile(std::span<const double> values, double alpha) {
  if (values.empty()) throw DomainError("empirical_quantile: no values");
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("empirical_quantile: alpha outside (0,1)");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double r = static_cast<double>(sorted.size());
  // Guard against (1 - alpha) * r landing a rounding error above an integer.
  auto rank = static_cast<std::size_t>(std::ceil((1.0 - alpha) * r - 1e-9));
  rank = std::clamp<std::size_t>(rank, 1, sorted.size());
  return sorted[rank - 1];
}

double bootstrap_p_value(std::span<const double> boot_values, double stat) {
  std::size_t count = 0;
  for (double b : boot_values)
    if (b >= stat) ++count;
  return static_cast<double>(1 + count) / static_cast<double>(boot_values.size() + 1);
}

TestReport run_test(const FunctionalSample& sample, const BootstrapConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  if (config.replicates == 0) throw DomainError("run_test: need at least one replicate");
  if (!(config.alpha > 0.0 && config.alpha < 1.0)) throw DomainError("run_test: alpha outside (0,1)");
  if (config.block_length == 0) throw DomainError("run_test: block length must be positive");
  if (sample.size() < std::max<std::size_t>(2, config.block_length)) {
    throw DomainError("run_test: sample size " + std::to_string(sample.size()) +
                      " is below max(2, block length)");
  }

  const LazyCovariance cov(sample);
  TestReport report;
  report.config = config;
  report.sample_size = sample.size();
  report.spatial_points = sample.grid().spatial_size();
  report.temporal_points = sample.grid().temporal_size();

  std::optional<SeparableKernel> approx;
  if (config.kind.tag == ApproxKind::Tag::Spca) {
    SpcaResult res = approx_spca(materialize(cov, config.memory_budget));
    report.spca = res.diagnostics;
    approx.emplace(std::move(res.kernel));
  } else {
    approx.emplace(approximate(cov, config.kind, config.memory_budget));
  }
  report.statistic = sup_deviation(cov, *approx, config.block_size);

  const BootstrapEngine engine(cov, *approx, config.kind, config.block_size,
                               config.memory_budget);
  const std::size_t r = config.replicates;
  std::vector<double> values(r, 0.0);
  std::vector<unsigned char> regenerated(r, 0);
  std::vector<std::string> failures(r);

  const int threads = config.threads > 0 ? config.threads : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic) num_threads(threads)
  for (std::size_t k = 0; k < r; ++k) {
    for (unsigned attempt = 0; attempt < 2; ++attempt) {
      try {
        auto rng = replicate_stream(config.seed, k, attempt);
        const auto w = gen_weights(sample.size(), config.block_length, rng);
        values[k] = engine.statistic(w);
        failures[k].clear();
        break;
      } catch (const DegenerateKernelError& e) {
        failures[k] = e.what();
      } catch (const NumericError& e) {
        failures[k] = e.what();
      }
      regenerated[k] = 1;
    }
  }
  for (std::size_t k = 0; k < r; ++k) {
    if (!failures[k].empty()) {
      throw BootstrapFailure(
          "bootstrap replicate " + std::to_string(k) + " degenerate after regeneration: " +
              failures[k],
          k);
    }
    report.regenerated_replicates += regenerated[k];
  }

  report.boot_values = std::move(values);
  report.quantile = empirical_quantile(report.boot_values, config.alpha);
  report.p_value = bootstrap_p_value(report.boot_values, report.statistic.sup_dev);
  report.reject = report.statistic.sup_dev > report.quantile;
  report.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

}  // namespace sepcov
