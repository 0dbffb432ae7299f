#pragma once

#include <Eigen/Dense>

#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "mbm/hurst.hpp"
#include "mbm/random.hpp"

namespace mbm {

/// Raised when a covariance matrix stays indefinite after maximal jitter.
class FactorizationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One trajectory on the grid t_k = k/n, k = 0..n, with values[0] == 0.
struct SamplePath {
  std::vector<double> values;
  std::string hurst_id;
  std::string simulator_id;

  int n() const { return static_cast<int>(values.size()) - 1; }
  double time(int k) const { return static_cast<double>(k) / n(); }
};

enum class SimulatorKind { volterra, cholesky, moving_average };

std::string_view to_string(SimulatorKind kind);
/// Accepts "volterra", "cholesky", "moving_average"; throws std::invalid_argument otherwise.
SimulatorKind parse_simulator(std::string_view name);

// Normalization constants.

/// (2H Γ(2H) sin(πH))^{1/2} / Γ(H + 1/2), H in (0, 1).
double c1(double H);
/// (2H Γ(3/2 - H) / (Γ(H + 1/2) Γ(2 - 2H)))^{1/2}; equal to c1 on (0, 1).
double c1_gamma_ratio_form(double H);
/// c1(H) (H - 1/2), H in (1/2, 1).
double c2(double H);
/// (H Γ(2H) sin(πH) / π)^{1/2}, H in (0, 1).
double c3(double H);

/// Molchan kernel K_H(t, s) = c2(H) s^{1/2-H} ∫_s^t (v-s)^{H-3/2} v^{H-1/2} dv for a fixed H.
///
/// With u = (v-s)^{H-1/2} and u = (t-s)^{H-1/2} y the inner integral becomes
///   K_H(t, s) = c1(H) (t-s)^{H-1/2} J(ρ),   J(ρ) = ∫_0^1 (1 + ρ y^p)^{H-1/2} dy,
/// with ρ = (t-s)/s and p = 1/(H-1/2), whose integrand is bounded. J is
/// evaluated by Gauss–Legendre panels (order 32 on [0, 1] when ρ <= 1; panels
/// refined around the transition point y = ρ^{-1/p} otherwise).
class MolchanKernel {
 public:
  explicit MolchanKernel(double H);

  /// Unchecked K_H(t, s) for 0 < s < t; returns 0 for s >= t.
  double operator()(double t, double s) const;
  /// c1(H) J(ρ) = K_H(t, s) / (t - s)^{H-1/2}.
  double regular_part(double t, double s) const;

  double hurst() const { return H_; }

 private:
  double H_;
  double gamma_;
  double power_;
  double c1_;
  std::vector<double> base_weights_;
  std::vector<double> base_powers_;
};

/// Checked K_H(t, s); std::domain_error unless 1/2 < H < 1 and 0 < s < t <= 1.
double molchan_kernel(double H, double t, double s);

/// Same kernel, with J computed by adaptive bisection instead of the fixed
/// panel rule. Used as a build-time cross-check.
double molchan_kernel_adaptive(double H, double t, double s, double rel_tol = 1e-12);

/// Quadrature weights of white-noise increments for a linear Gaussian path.
///
/// Column j is a noise cell [cell_left[j], cell_left[j] + cell_width[j]) and
/// weights(i, j) is the cell average of the representation kernel of X_{t_i};
/// X_{t_i} = Σ_j weights(i, j) ΔW_j with Var ΔW_j = cell_width[j]. Columns are
/// ordered by time, so row i only uses the first support[i] columns.
struct KernelWeights {
  int n = 0;
  int oversample = 1;
  Eigen::MatrixXd weights;
  std::vector<double> cell_left;
  std::vector<double> cell_width;
  std::vector<Eigen::Index> support;
  /// Relative isometry error |Σ_j w_ij² Δs_j / V_i - 1| per row (row 0 is 0).
  std::vector<double> isometry_error;
  double max_isometry_error = 0.0;
  std::string hurst_id;
  std::string simulator_id;

  Eigen::Index cells() const { return weights.cols(); }
};

inline constexpr int kDefaultOversample = 8;
inline constexpr int kFirstCellSubdivisions = 16;
inline constexpr double kDefaultTruncation = 1e8;
inline constexpr double kIsometryFailure = 0.05;

/// Cell-averaged Molchan weights for the Volterra representation. The fine grid
/// has n * oversample cells on [0, 1]; the first cell is split into 16
/// geometric sub-cells, each carrying its own noise increment. Throws
/// QuadratureError if some row misses t^{2H_t} by more than 5%.
KernelWeights build_kernel_weights(const HurstFunction& h, int n, int oversample = kDefaultOversample,
                                   int threads = 1);

/// Cell-averaged weights for the moving-average representation on [-T, 1]:
/// uniform cells of width 1/(n oversample) on [-1, 1], geometric cells (ratio
/// 1.05) on [-T, -1]. Cell averages are exact. The isometry is checked against
/// t^{2H_t} minus the truncation variance.
KernelWeights build_moving_average_weights(const HurstFunction& h, int n, double truncation = kDefaultTruncation,
                                           int oversample = kDefaultOversample);

/// Variance lost by truncating the moving-average integral at -T:
/// c1(H)² ∫_T^∞ ((t + x)^{H-1/2} - x^{H-1/2})² dx, which is O(T^{2H-2}).
double moving_average_truncation_variance(double H, double t, double truncation);

/// X_{t_i} = Σ_j w_ij ΔW_j, ΔW_j ~ N(0, cell_width[j]).
SamplePath simulate_volterra(const KernelWeights& weights, GaussianSource& source);

SamplePath simulate_moving_average(const HurstFunction& h, int n, double truncation, GaussianSource& source,
                                   int oversample = kDefaultOversample);

/// ½(t^{2H} + u^{2H} - |t - u|^{2H}).
double fbm_covariance(double H, double t, double u);

/// ∫_0^{t∧u} K_{H_t}(t, s) K_{H_u}(u, s) ds by graded Gauss–Legendre panels
/// with quad_points nodes each; throws QuadratureError if a refined rule
/// disagrees beyond 1e-7 of sqrt(V(t) V(u)).
double covariance_volterra(const HurstFunction& h, double t, double u, int quad_points = 8);

enum class CovarianceRoute {
  automatic,  ///< analytic fBm covariance for constant H, quadrature otherwise
  analytic,
  quadrature,
};

/// Covariance of (X_{t_1}, ..., X_{t_n}).
Eigen::MatrixXd covariance_matrix(const HurstFunction& h, int n, CovarianceRoute route = CovarianceRoute::automatic,
                                  int threads = 1);

struct CholeskyFactor {
  Eigen::MatrixXd lower;
  double jitter = 0.0;

  int n() const { return static_cast<int>(lower.rows()); }
};

/// Lower Cholesky factor, adding ε I with ε escalating 1e-14 .. 1e-10 when the
/// plain factorization fails.
CholeskyFactor factorize_covariance(const Eigen::MatrixXd& covariance);

SamplePath simulate_cholesky(const CholeskyFactor& factor, GaussianSource& source);
SamplePath simulate_cholesky(const HurstFunction& h, int n, GaussianSource& source);

struct SamplerOptions {
  int oversample = kDefaultOversample;
  double truncation = kDefaultTruncation;
  CovarianceRoute covariance = CovarianceRoute::automatic;
  int threads = 1;
};

/// Paths as X = A z with z standard normal and a fixed (n+1) x d matrix A whose
/// row 0 vanishes. Immutable and shareable across threads.
class PathSampler {
 public:
  static PathSampler from_weights(KernelWeights weights);
  static PathSampler from_factor(const CholeskyFactor& factor, std::string hurst_id,
                                 std::string simulator_id = "cholesky");
  static PathSampler create(SimulatorKind kind, const HurstFunction& h, int n, const SamplerOptions& options = {});

  int n() const { return static_cast<int>(matrix_.rows()) - 1; }
  Eigen::Index noise_dimension() const { return matrix_.cols(); }
  const std::string& hurst_id() const { return hurst_id_; }
  const std::string& simulator_id() const { return simulator_id_; }
  /// Build diagnostics, e.g. "max_isometry_error", "jitter".
  const std::map<std::string, double>& diagnostics() const { return diagnostics_; }

  SamplePath sample(GaussianSource& source) const;
  /// Column b of `paths` is drawn from sources[b]; paths is resized to (n+1) x B.
  void sample_batch(std::span<GaussianSource* const> sources, Eigen::MatrixXd& paths) const;

 private:
  PathSampler() = default;

  Eigen::MatrixXd matrix_;
  std::vector<Eigen::Index> support_;
  std::string hurst_id_;
  std::string simulator_id_;
  std::map<std::string, double> diagnostics_;
};

}  // namespace mbm
