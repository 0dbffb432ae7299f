#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mbm/drivers.hpp"
#include "mbm/hurst.hpp"
#include "mbm/payoff.hpp"
#include "mbm/theory.hpp"

namespace mbm {

struct ExperimentConfig {
  HurstFunction hurst = HurstFunction::constant(0.75);
  ConvexPayoff payoff = make_call_payoff(0.0);
  SimulatorKind simulator = SimulatorKind::cholesky;
  std::vector<int> n_grid{64, 128, 256, 512};
  int replications = 5000;
  std::uint64_t master_seed = 20240601;
  int oversample = kDefaultOversample;
  double truncation = kDefaultTruncation;
  double delta_htilde = kDefaultDelta;
  double slope_tol = 0.10;
  double const_tol = 0.25;
  /// Replaces the theoretical slope in the verdicts (test hook).
  std::optional<double> theoretical_slope_override;
  /// Worker cap; results do not depend on it.
  int threads = 1;
};

/// Throws std::invalid_argument unless n_grid is strictly ascending with all
/// entries >= 2, replications >= 100 and the remaining knobs are positive.
void validate_config(const ExperimentConfig& config);

/// Paths per work item; fixed so that results do not depend on the worker count.
inline constexpr int kPathsPerChunk = 32;

struct RunningMoments {
  std::size_t count = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x);
  /// Chan et al. pairwise update.
  static RunningMoments combine(const RunningMoments& a, const RunningMoments& b);
  double variance() const { return count > 1 ? m2 / static_cast<double>(count - 1) : 0.0; }
  double standard_error() const;
};

/// Combines per-chunk moments along a fixed binary tree.
RunningMoments reduce_moments(std::span<const RunningMoments> parts);

struct ErrorEstimate {
  int n = 0;
  double mean = 0.0;
  double std_error = 0.0;
  double min_gap = 0.0;
  std::size_t paths = 0;
  std::map<std::string, double> diagnostics;
};

/// Monte Carlo mean and standard error of the discretization gap at grid size
/// n. Path k uses the stream seeded by derive_seed(master_seed, n, k).
ErrorEstimate estimate_l1_error(const ExperimentConfig& config, int n);
ErrorEstimate estimate_l1_error(const ExperimentConfig& config, const PathSampler& sampler);

/// OLS slope of log(mean) against log(n). std::invalid_argument on fewer than
/// three points, mismatched sizes, or nonpositive entries.
double fit_rate(std::span<const double> n, std::span<const double> mean);

struct Verdict {
  bool applicable = true;
  bool passed = false;
  double value = 0.0;
  double target = 0.0;
  double tolerance = 0.0;
  std::string rule;
};

struct RateRow {
  int n = 0;
  double mean = 0.0;
  double std_error = 0.0;
  double normalized = 0.0;
  double min_gap = 0.0;
  std::map<std::string, double> diagnostics;
};

struct RateReport {
  std::string hurst_id;
  std::string payoff_id;
  std::string simulator;
  int replications = 0;
  std::uint64_t master_seed = 0;
  int oversample = 0;
  RateExponents exponents;
  std::vector<RateRow> per_n;
  double fitted_slope = 0.0;
  double theoretical_slope = 0.0;
  double leading_constant_theory = 0.0;
  double min_gap = 0.0;
  std::size_t total_paths = 0;
  std::map<std::string, Verdict> verdicts;

  bool all_passed() const;
};

/// Runs every grid size and judges:
///  slope     two-sided |fitted - theoretical| <= slope_tol when the lower-bound
///            conditions hold, otherwise one-sided fitted <= theoretical + slope_tol;
///  constant  |n^{2H̃-1} mean / leading constant - 1| <= const_tol at the largest
///            n, only when the lower-bound conditions hold and 2H_max - 1 = 2H̃ - 1;
///  gap       every per-path gap >= -1e-12.
/// Throws AssumptionViolation if the Hurst function fails validation.
RateReport run_convergence(const ExperimentConfig& config);

struct VarianceEstimate {
  double t = 0.0;
  double target = 0.0;
  double variance = 0.0;
  double std_error = 0.0;
};

/// Monte Carlo E X_t² at grid indices `indices` (E X_t = 0 is known, so the
/// second moment is used as the variance), with its standard error.
std::vector<VarianceEstimate> estimate_marginal_variances(const PathSampler& sampler, const HurstFunction& h,
                                                          std::span<const int> indices, int replications,
                                                          std::uint64_t master_seed, int threads = 1);

}  // namespace mbm
