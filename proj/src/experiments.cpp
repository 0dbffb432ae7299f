#include "mbm/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mbm/parallel.hpp"
#include "mbm/quadrature.hpp"
#include "mbm/random.hpp"

namespace mbm {

void validate_config(const ExperimentConfig& c) {
  if (c.n_grid.empty()) throw std::invalid_argument("n_grid must not be empty");
  for (std::size_t k = 0; k < c.n_grid.size(); ++k) {
    if (c.n_grid[k] < 2) throw std::invalid_argument("n_grid entries must be >= 2");
    if (k > 0 && c.n_grid[k] <= c.n_grid[k - 1]) throw std::invalid_argument("n_grid must be strictly ascending");
  }
  if (c.replications < 100) throw std::invalid_argument("replications must be >= 100");
  if (c.oversample < 1) throw std::invalid_argument("oversample must be >= 1");
  if (!(c.truncation >= 1.0)) throw std::invalid_argument("truncation must be >= 1");
  if (!(c.slope_tol > 0.0) || !(c.const_tol > 0.0)) throw std::invalid_argument("tolerances must be positive");
  if (c.threads < 1) throw std::invalid_argument("threads must be >= 1");
}

void RunningMoments::add(double x) {
  ++count;
  const double d = x - mean;
  mean += d / static_cast<double>(count);
  m2 += d * (x - mean);
}

RunningMoments RunningMoments::combine(const RunningMoments& a, const RunningMoments& b) {
  if (a.count == 0) return b;
  if (b.count == 0) return a;
  RunningMoments r;
  r.count = a.count + b.count;
  const double na = static_cast<double>(a.count);
  const double nb = static_cast<double>(b.count);
  const double d = b.mean - a.mean;
  r.mean = a.mean + d * nb / static_cast<double>(r.count);
  r.m2 = a.m2 + b.m2 + d * d * na * nb / static_cast<double>(r.count);
  return r;
}

double RunningMoments::standard_error() const {
  return count > 1 ? std::sqrt(variance() / static_cast<double>(count)) : 0.0;
}

RunningMoments reduce_moments(std::span<const RunningMoments> parts) {
  if (parts.empty()) return {};
  if (parts.size() == 1) return parts.front();
  const std::size_t half = parts.size() / 2;
  return RunningMoments::combine(reduce_moments(parts.first(half)), reduce_moments(parts.subspan(half)));
}

namespace {

struct ChunkResult {
  RunningMoments moments;
  double min_gap = std::numeric_limits<double>::infinity();
};

// Fills `paths` with the chunk's paths, one column per path index.
void sample_chunk(const PathSampler& sampler, std::uint64_t seed, std::uint64_t stream_n, std::size_t first,
                  std::size_t count, Eigen::MatrixXd& paths) {
  std::vector<NormalStream> streams;
  streams.reserve(count);
  for (std::size_t k = 0; k < count; ++k) streams.emplace_back(derive_seed(seed, stream_n, first + k));
  std::vector<GaussianSource*> sources;
  for (auto& s : streams) sources.push_back(&s);
  sampler.sample_batch(sources, paths);
}

}  // namespace

ErrorEstimate estimate_l1_error(const ExperimentConfig& config, const PathSampler& sampler) {
  validate_config(config);
  const std::size_t total = static_cast<std::size_t>(config.replications);
  const std::size_t chunks = (total + kPathsPerChunk - 1) / kPathsPerChunk;
  std::vector<ChunkResult> results(chunks);
  const int n = sampler.n();
  parallel_for(chunks, config.threads, [&](std::size_t c) {
    const std::size_t first = c * kPathsPerChunk;
    const std::size_t count = std::min<std::size_t>(kPathsPerChunk, total - first);
    Eigen::MatrixXd paths;
    sample_chunk(sampler, config.master_seed, static_cast<std::uint64_t>(n), first, count, paths);
    ChunkResult& r = results[c];
    for (Eigen::Index b = 0; b < paths.cols(); ++b) {
      const double gap =
          discretization_gap(std::span<const double>(paths.col(b).data(), static_cast<std::size_t>(paths.rows())),
                             config.payoff);
      r.moments.add(gap);
      r.min_gap = std::min(r.min_gap, gap);
    }
  });
  std::vector<RunningMoments> parts;
  parts.reserve(chunks);
  ErrorEstimate e;
  e.n = n;
  e.min_gap = std::numeric_limits<double>::infinity();
  for (const auto& r : results) {
    parts.push_back(r.moments);
    e.min_gap = std::min(e.min_gap, r.min_gap);
  }
  const RunningMoments all = reduce_moments(parts);
  e.mean = all.mean;
  e.std_error = all.standard_error();
  e.paths = all.count;
  e.diagnostics = sampler.diagnostics();
  return e;
}

ErrorEstimate estimate_l1_error(const ExperimentConfig& config, int n) {
  validate_config(config);
  SamplerOptions options;
  options.oversample = config.oversample;
  options.truncation = config.truncation;
  options.threads = config.threads;
  const PathSampler sampler = PathSampler::create(config.simulator, config.hurst, n, options);
  return estimate_l1_error(config, sampler);
}

double fit_rate(std::span<const double> n, std::span<const double> mean) {
  if (n.size() != mean.size()) throw std::invalid_argument("fit_rate: size mismatch");
  if (n.size() < 3) throw std::invalid_argument("fit_rate needs at least three points");
  std::vector<double> x, y;
  for (std::size_t k = 0; k < n.size(); ++k) {
    if (!(n[k] > 0.0) || !(mean[k] > 0.0)) throw std::invalid_argument("fit_rate needs positive n and means");
    x.push_back(std::log(n[k]));
    y.push_back(std::log(mean[k]));
  }
  const double count = static_cast<double>(x.size());
  const double mx = pairwise_sum(x) / count;
  const double my = pairwise_sum(y) / count;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sxx += (x[k] - mx) * (x[k] - mx);
    sxy += (x[k] - mx) * (y[k] - my);
  }
  if (sxx == 0.0) throw std::invalid_argument("fit_rate needs distinct grid sizes");
  return sxy / sxx;
}

bool RateReport::all_passed() const {
  return std::all_of(verdicts.begin(), verdicts.end(),
                     [](const auto& kv) { return !kv.second.applicable || kv.second.passed; });
}

RateReport run_convergence(const ExperimentConfig& config) {
  validate_config(config);
  RateReport report;
  report.hurst_id = config.hurst.id();
  report.payoff_id = config.payoff.id();
  report.simulator = std::string(to_string(config.simulator));
  report.replications = config.replications;
  report.master_seed = config.master_seed;
  report.oversample = config.oversample;
  report.exponents = rate_exponents(config.hurst, config.delta_htilde);
  report.theoretical_slope = config.theoretical_slope_override.value_or(-report.exponents.leading_exponent);
  report.leading_constant_theory = leading_constant(config.payoff, config.hurst);
  report.min_gap = std::numeric_limits<double>::infinity();

  std::vector<double> ns, means;
  for (int n : config.n_grid) {
    const ErrorEstimate e = estimate_l1_error(config, n);
    RateRow row;
    row.n = n;
    row.mean = e.mean;
    row.std_error = e.std_error;
    row.normalized = std::pow(static_cast<double>(n), report.exponents.leading_exponent) * e.mean;
    row.min_gap = e.min_gap;
    row.diagnostics = e.diagnostics;
    report.per_n.push_back(row);
    report.min_gap = std::min(report.min_gap, e.min_gap);
    report.total_paths += e.paths;
    ns.push_back(n);
    means.push_back(e.mean);
  }

  Verdict slope;
  slope.target = report.theoretical_slope;
  slope.tolerance = config.slope_tol;
  if (ns.size() >= 3 && std::all_of(means.begin(), means.end(), [](double m) { return m > 0.0; })) {
    report.fitted_slope = fit_rate(ns, means);
    slope.value = report.fitted_slope;
    if (report.exponents.lower_bound_applicable) {
      slope.rule = "two_sided";
      slope.passed = std::abs(report.fitted_slope - report.theoretical_slope) <= config.slope_tol;
    } else {
      slope.rule = "upper_bound";
      slope.passed = report.fitted_slope <= report.theoretical_slope + config.slope_tol;
    }
  } else {
    report.fitted_slope = std::numeric_limits<double>::quiet_NaN();
    slope.value = report.fitted_slope;
    slope.rule = "insufficient_data";
    slope.passed = false;
  }
  report.verdicts["slope"] = slope;

  Verdict constant;
  constant.target = report.leading_constant_theory;
  constant.tolerance = config.const_tol;
  constant.value = report.per_n.back().normalized;
  constant.applicable = report.exponents.lower_bound_applicable &&
                        report.exponents.lower_leading_exponent == report.exponents.leading_exponent;
  constant.rule = constant.applicable ? "relative" : "not_applicable";
  constant.passed = constant.applicable &&
                    std::abs(constant.value / report.leading_constant_theory - 1.0) <= config.const_tol;
  report.verdicts["constant"] = constant;

  Verdict gap;
  gap.value = report.min_gap;
  gap.target = 0.0;
  gap.tolerance = 1e-12;
  gap.rule = "min_gap >= -tolerance";
  gap.passed = report.min_gap >= -1e-12;
  report.verdicts["gap"] = gap;
  return report;
}

std::vector<VarianceEstimate> estimate_marginal_variances(const PathSampler& sampler, const HurstFunction& h,
                                                          std::span<const int> indices, int replications,
                                                          std::uint64_t master_seed, int threads) {
  const int n = sampler.n();
  for (int i : indices) {
    if (i < 0 || i > n) throw std::invalid_argument("grid index out of range");
  }
  const std::size_t total = static_cast<std::size_t>(replications);
  const std::size_t chunks = (total + kPathsPerChunk - 1) / kPathsPerChunk;
  std::vector<std::vector<RunningMoments>> parts(indices.size(), std::vector<RunningMoments>(chunks));
  parallel_for(chunks, threads, [&](std::size_t c) {
    const std::size_t first = c * kPathsPerChunk;
    const std::size_t count = std::min<std::size_t>(kPathsPerChunk, total - first);
    Eigen::MatrixXd paths;
    sample_chunk(sampler, master_seed, static_cast<std::uint64_t>(n), first, count, paths);
    for (std::size_t k = 0; k < indices.size(); ++k) {
      for (Eigen::Index b = 0; b < paths.cols(); ++b) {
        const double x = paths(indices[k], b);
        parts[k][c].add(x * x);
      }
    }
  });
  std::vector<VarianceEstimate> out;
  for (std::size_t k = 0; k < indices.size(); ++k) {
    const RunningMoments m = reduce_moments(parts[k]);
    VarianceEstimate v;
    v.t = static_cast<double>(indices[k]) / n;
    v.target = std::pow(v.t, 2.0 * h(v.t));
    v.variance = m.mean;
    v.std_error = m.standard_error();
    out.push_back(v);
  }
  return out;
}

}  // namespace mbm
