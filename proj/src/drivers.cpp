#include "mbm/drivers.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "mbm/parallel.hpp"
#include "mbm/quadrature.hpp"

namespace mbm {
namespace {

void require_unit_open(double H, const char* what) {
  if (!(H > 0.0 && H < 1.0)) {
    throw std::domain_error(std::string(what) + ": H must lie in (0, 1), got " + std::to_string(H));
  }
}

void require_half_open(double H, const char* what) {
  if (!(H > 0.5 && H < 1.0)) {
    throw std::domain_error(std::string(what) + ": H must lie in (1/2, 1), got " + std::to_string(H));
  }
}

// Log-offsets (in units of 1/p) of the panel breakpoints around y* = ρ^{-1/p}.
constexpr std::array<double, 5> kLeftOffsets = {-14.0, -6.0, -2.0, -1.0, 0.0};

}  // namespace

std::string_view to_string(SimulatorKind kind) {
  switch (kind) {
    case SimulatorKind::volterra:
      return "volterra";
    case SimulatorKind::cholesky:
      return "cholesky";
    case SimulatorKind::moving_average:
      return "moving_average";
  }
  return "unknown";
}

SimulatorKind parse_simulator(std::string_view name) {
  if (name == "volterra") return SimulatorKind::volterra;
  if (name == "cholesky") return SimulatorKind::cholesky;
  if (name == "moving_average") return SimulatorKind::moving_average;
  throw std::invalid_argument("unknown simulator '" + std::string(name) +
                              "' (expected volterra, cholesky or moving_average)");
}

double c1(double H) {
  require_unit_open(H, "c1");
  return std::sqrt(2.0 * H * std::tgamma(2.0 * H) * std::sin(std::numbers::pi * H)) / std::tgamma(H + 0.5);
}

double c1_gamma_ratio_form(double H) {
  require_unit_open(H, "c1");
  return std::sqrt(2.0 * H * std::tgamma(1.5 - H) / (std::tgamma(H + 0.5) * std::tgamma(2.0 - 2.0 * H)));
}

double c2(double H) {
  require_half_open(H, "c2");
  return c1(H) * (H - 0.5);
}

double c3(double H) {
  require_unit_open(H, "c3");
  return std::sqrt(H * std::tgamma(2.0 * H) * std::sin(std::numbers::pi * H) / std::numbers::pi);
}

// ---------------------------------------------------------------------------
// Molchan kernel

MolchanKernel::MolchanKernel(double H) : H_(H), gamma_(H - 0.5), power_(0.0), c1_(0.0) {
  require_half_open(H, "Molchan kernel");
  power_ = 1.0 / gamma_;
  c1_ = c1(H);
  const auto& rule = gauss_legendre(32);
  base_weights_.resize(rule.nodes.size());
  base_powers_.resize(rule.nodes.size());
  for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
    const double y = 0.5 * (rule.nodes[q] + 1.0);
    base_weights_[q] = 0.5 * rule.weights[q];
    base_powers_[q] = std::pow(y, power_);
  }
}

double MolchanKernel::regular_part(double t, double s) const {
  const double rho = (t - s) / s;
  if (rho <= 1.0) {
    double sum = 0.0;
    for (std::size_t q = 0; q < base_weights_.size(); ++q) {
      sum += base_weights_[q] * std::pow(1.0 + rho * base_powers_[q], gamma_);
    }
    return c1_ * sum;
  }
  // Transition of (1 + ρ y^p)^γ sits at y* = ρ^{-γ} with width ~ y*/p; place
  // panels at log-offsets k/p around it, widening geometrically away from it.
  const double log_rho = std::log(rho);
  const double log_ystar = -gamma_ * log_rho;
  const double p = power_;
  auto f = [&](double y) { return std::pow(1.0 + std::exp(log_rho + p * std::log(y)), gamma_); };
  const auto& rule = gauss_legendre(16);

  std::array<double, 32> breaks{};
  std::size_t count = 0;
  breaks[count++] = 0.0;
  for (double offset : kLeftOffsets) breaks[count++] = std::exp(log_ystar + offset * gamma_);
  double offset = 1.0;
  double step = 1.0;
  while (count < breaks.size() - 1) {
    const double y = std::exp(log_ystar + offset * gamma_);
    if (y >= 1.0) break;
    breaks[count++] = y;
    offset += step;
    step *= 2.0;
  }
  breaks[count++] = 1.0;
  double sum = 0.0;
  for (std::size_t k = 0; k + 1 < count; ++k) sum += integrate_gl(f, breaks[k], breaks[k + 1], rule);
  return c1_ * sum;
}

double MolchanKernel::operator()(double t, double s) const {
  if (s >= t) return 0.0;
  return std::pow(t - s, gamma_) * regular_part(t, s);
}

double molchan_kernel(double H, double t, double s) {
  require_half_open(H, "molchan_kernel");
  if (!(s > 0.0 && s < t && t <= 1.0)) {
    throw std::domain_error("molchan_kernel needs 0 < s < t <= 1, got t = " + std::to_string(t) +
                            ", s = " + std::to_string(s));
  }
  return MolchanKernel(H)(t, s);
}

double molchan_kernel_adaptive(double H, double t, double s, double rel_tol) {
  require_half_open(H, "molchan_kernel_adaptive");
  if (!(s > 0.0 && s < t)) throw std::domain_error("molchan_kernel_adaptive needs 0 < s < t");
  const double gamma = H - 0.5;
  const double p = 1.0 / gamma;
  const double rho = (t - s) / s;
  auto f = [&](double y) { return std::pow(1.0 + rho * std::pow(y, p), gamma); };
  const double ystar = std::pow(rho, -gamma);
  double j = 0.0;
  if (ystar < 1.0) {
    j = integrate_adaptive(f, 0.0, ystar, rel_tol) + integrate_adaptive(f, ystar, 1.0, rel_tol);
  } else {
    j = integrate_adaptive(f, 0.0, 1.0, rel_tol);
  }
  return c1(H) * std::pow(t - s, gamma) * j;
}

// ---------------------------------------------------------------------------
// Volterra weights

namespace {

// ∫_a^b K(t, s) ds on one noise cell. Cells starting at 0 carry the s^{-γ}
// divergence (handled by z = s^{1-γ}); cells ending at t carry (t-s)^γ
// (handled by x = ((t-s)/(t-a))^{1+γ}).
double kernel_cell_integral(const MolchanKernel& kernel, double t, double a, double b, bool ends_at_t,
                            bool near_singularity) {
  const double gamma = kernel.hurst() - 0.5;
  if (a == 0.0) {
    const double e = 1.0 - gamma;
    const double zmax = std::pow(b, e);
    auto f = [&](double z) {
      const double s = std::pow(z, 1.0 / e);
      return kernel(t, s) * std::pow(s, gamma) / e;
    };
    return integrate_gl(f, 0.0, zmax, 4);
  }
  if (ends_at_t) {
    const double width = t - a;
    auto f = [&](double x) {
      const double r = width * std::pow(x, 1.0 / (1.0 + gamma));
      return kernel.regular_part(t, t - r);
    };
    return std::pow(width, 1.0 + gamma) / (1.0 + gamma) * integrate_gl(f, 0.0, 1.0, 4);
  }
  auto f = [&](double s) { return kernel(t, s); };
  return integrate_gl(f, a, b, near_singularity ? 4 : 2);
}

void finish_isometry(KernelWeights& w, const std::vector<double>& target) {
  w.isometry_error.assign(w.n + 1, 0.0);
  w.max_isometry_error = 0.0;
  for (int i = 1; i <= w.n; ++i) {
    double var = 0.0;
    for (Eigen::Index j = 0; j < w.support[i]; ++j) var += w.weights(i, j) * w.weights(i, j) * w.cell_width[j];
    const double err = std::abs(var / target[i] - 1.0);
    w.isometry_error[i] = err;
    w.max_isometry_error = std::max(w.max_isometry_error, err);
  }
  if (w.max_isometry_error > kIsometryFailure) {
    throw QuadratureError("kernel weights miss the variance law by " + std::to_string(100.0 * w.max_isometry_error) +
                          "% (limit 5%); refine oversample or truncation");
  }
}

}  // namespace

KernelWeights build_kernel_weights(const HurstFunction& h, int n, int oversample, int threads) {
  if (n < 1) throw std::domain_error("build_kernel_weights needs n >= 1");
  if (oversample < 1) throw std::domain_error("build_kernel_weights needs oversample >= 1");
  const int m = n * oversample;
  const double step = 1.0 / m;

  KernelWeights w;
  w.n = n;
  w.oversample = oversample;
  w.hurst_id = h.id();
  w.simulator_id = "volterra";

  // Columns: 16 geometric sub-cells of [0, step], then cells 1..m-1.
  constexpr int sub = kFirstCellSubdivisions;
  for (int k = sub - 1; k >= 0; --k) {
    const double lo = k == sub - 1 ? 0.0 : std::ldexp(step, -(k + 1));
    const double hi = std::ldexp(step, -k);
    w.cell_left.push_back(lo);
    w.cell_width.push_back(hi - lo);
  }
  for (int c = 1; c < m; ++c) {
    w.cell_left.push_back(static_cast<double>(c) / m);
    w.cell_width.push_back(static_cast<double>(c + 1) / m - static_cast<double>(c) / m);
  }
  const Eigen::Index cols = static_cast<Eigen::Index>(w.cell_left.size());
  w.weights = Eigen::MatrixXd::Zero(n + 1, cols);
  w.support.assign(n + 1, 0);
  for (int i = 1; i <= n; ++i) w.support[i] = sub + i * oversample - 1;

  std::vector<double> target(n + 1, 0.0);
  parallel_for(static_cast<std::size_t>(n), threads, [&](std::size_t idx) {
    const int i = static_cast<int>(idx) + 1;
    const double t = static_cast<double>(i * oversample) / m;
    const double H = h(t);
    target[i] = std::pow(t, 2.0 * H);
    const MolchanKernel kernel(H);
    const Eigen::Index last = w.support[i] - 1;
    for (Eigen::Index j = 0; j <= last; ++j) {
      const double a = w.cell_left[j];
      const double b = a + w.cell_width[j];
      const bool near = a < 8.0 * step || t - b < 8.0 * step;
      w.weights(i, j) = kernel_cell_integral(kernel, t, a, b, j == last, near) / w.cell_width[j];
    }
  });

  // Cross-check the fixed panel rule against adaptive bisection.
  {
    const double t = 1.0;
    const double H = h(t);
    const MolchanKernel kernel(H);
    for (double frac : {1e-3, 0.3, 0.9}) {
      const double s = frac * t;
      const double fixed = kernel(t, s);
      const double adaptive = molchan_kernel_adaptive(H, t, s, 1e-13);
      if (std::abs(fixed - adaptive) > 1e-10 * std::abs(adaptive)) {
        throw QuadratureError("Molchan kernel panel rule disagrees with adaptive bisection at H = " +
                              std::to_string(H) + ", s = " + std::to_string(s));
      }
    }
  }

  finish_isometry(w, target);
  return w;
}

// ---------------------------------------------------------------------------
// Moving-average weights

namespace {

// (t + x)^{e} - x^{e} for x >= 0, accurate for x >> t.
double shifted_power_difference(double t, double x, double e) {
  if (x == 0.0) return std::pow(t, e);
  return std::pow(x, e) * std::expm1(e * std::log1p(t / x));
}

}  // namespace

double moving_average_truncation_variance(double H, double t, double truncation) {
  require_unit_open(H, "moving_average_truncation_variance");
  if (!(truncation > 0.0)) throw std::domain_error("truncation must be positive");
  const double gamma = H - 0.5;
  if (gamma == 0.0 || t == 0.0) return 0.0;
  // x = T / y, y = z^κ with κ = 1/(1 - 2γ) makes the integrand bounded.
  const double kappa = 1.0 / (1.0 - 2.0 * gamma);
  auto f = [&](double z) {
    const double y = std::pow(z, kappa);
    const double x = truncation / y;
    const double d = std::pow(x, gamma) * std::expm1(gamma * std::log1p(t / x));
    return d * d * truncation / (y * y) * kappa * std::pow(z, kappa - 1.0);
  };
  std::vector<double> breaks{0.0};
  for (int k = 40; k >= 0; --k) breaks.push_back(std::ldexp(1.0, -k));
  const double c = c1(H);
  return c * c * integrate_panels(f, breaks, gauss_legendre(16));
}

KernelWeights build_moving_average_weights(const HurstFunction& h, int n, double truncation, int oversample) {
  if (n < 1) throw std::domain_error("build_moving_average_weights needs n >= 1");
  if (oversample < 1) throw std::domain_error("build_moving_average_weights needs oversample >= 1");
  if (!(truncation >= 1.0)) throw std::domain_error("moving-average truncation must be >= 1");
  const int m = n * oversample;

  KernelWeights w;
  w.n = n;
  w.oversample = oversample;
  w.hurst_id = h.id();
  w.simulator_id = "moving_average";

  // Geometric cells on [-T, -1], ratio 1.05.
  std::vector<double> far_edges{-1.0};
  while (far_edges.back() > -truncation) far_edges.push_back(std::max(far_edges.back() * 1.05, -truncation));
  for (std::size_t k = far_edges.size() - 1; k >= 1; --k) {
    w.cell_left.push_back(far_edges[k]);
    w.cell_width.push_back(far_edges[k - 1] - far_edges[k]);
  }
  // Uniform cells on [-1, 1].
  for (int c = -m; c < m; ++c) {
    const double lo = static_cast<double>(c) / m;
    w.cell_left.push_back(lo);
    w.cell_width.push_back(static_cast<double>(c + 1) / m - lo);
  }
  const Eigen::Index negative = static_cast<Eigen::Index>(far_edges.size() - 1) + m;
  const Eigen::Index cols = static_cast<Eigen::Index>(w.cell_left.size());
  w.weights = Eigen::MatrixXd::Zero(n + 1, cols);
  w.support.assign(n + 1, 0);
  std::vector<double> target(n + 1, 0.0);

  for (int i = 1; i <= n; ++i) {
    const double t = static_cast<double>(i * oversample) / m;
    const double H = h(t);
    const double gamma = H - 0.5;
    const double e = gamma + 1.0;
    const double scale = c1(H) / e;
    w.support[i] = negative + i * oversample;
    target[i] = std::pow(t, 2.0 * H) - moving_average_truncation_variance(H, t, truncation);
    for (Eigen::Index j = 0; j < w.support[i]; ++j) {
      const double a = w.cell_left[j];
      const double b = j < negative ? std::min(a + w.cell_width[j], 0.0) : a + w.cell_width[j];
      double integral = 0.0;
      if (j < negative) {
        // (t - s)^γ - (-s)^γ vanishes identically at H = 1/2.
        if (gamma != 0.0) {
          integral = shifted_power_difference(t, -a, e) - shifted_power_difference(t, -b, e);
        }
      } else {
        integral = gamma == 0.0 ? (b - a) * e : std::pow(t - a, e) - std::pow(t - b, e);
      }
      w.weights(i, j) = scale * integral / w.cell_width[j];
    }
  }
  finish_isometry(w, target);
  return w;
}

SamplePath simulate_volterra(const KernelWeights& weights, GaussianSource& source) {
  std::vector<double> z(static_cast<std::size_t>(weights.cells()));
  source.fill(z);
  SamplePath path;
  path.values.assign(weights.n + 1, 0.0);
  path.hurst_id = weights.hurst_id;
  path.simulator_id = weights.simulator_id;
  for (int i = 1; i <= weights.n; ++i) {
    double x = 0.0;
    for (Eigen::Index j = 0; j < weights.support[i]; ++j) {
      x += weights.weights(i, j) * std::sqrt(weights.cell_width[j]) * z[j];
    }
    path.values[i] = x;
  }
  return path;
}

SamplePath simulate_moving_average(const HurstFunction& h, int n, double truncation, GaussianSource& source,
                                   int oversample) {
  return simulate_volterra(build_moving_average_weights(h, n, truncation, oversample), source);
}

// ---------------------------------------------------------------------------
// Covariances and Cholesky

double fbm_covariance(double H, double t, double u) {
  return 0.5 * (std::pow(t, 2.0 * H) + std::pow(u, 2.0 * H) - std::pow(std::abs(t - u), 2.0 * H));
}

namespace {

const std::vector<double>& covariance_breaks() {
  static const std::vector<double> breaks = [] {
    std::vector<double> b{0.0};
    for (int k = 12; k >= 1; --k) b.push_back(std::ldexp(1.0, -k));
    for (int k = 1; k <= 30; ++k) b.push_back(1.0 - std::ldexp(1.0, -k));
    b.push_back(1.0);
    return b;
  }();
  return breaks;
}

double covariance_integral(const MolchanKernel& ka, const MolchanKernel& kb, double t, double u, int order) {
  // s = t w^β removes the s^{1 - H_a - H_b} divergence at 0.
  const double beta = 1.0 / (2.0 - ka.hurst() - kb.hurst());
  auto f = [&](double w) {
    const double s = t * std::pow(w, beta);
    if (s <= 0.0 || s >= t) return 0.0;
    return ka(t, s) * kb(u, s) * t * beta * std::pow(w, beta - 1.0);
  };
  return integrate_panels(f, covariance_breaks(), gauss_legendre(order));
}

}  // namespace

double covariance_volterra(const HurstFunction& h, double t, double u, int quad_points) {
  if (!(t >= 0.0 && t <= 1.0 && u >= 0.0 && u <= 1.0)) {
    throw std::domain_error("covariance_volterra needs t, u in [0, 1]");
  }
  if (quad_points < 2 || quad_points > 64) throw std::domain_error("covariance_volterra needs 2 <= quad_points <= 64");
  if (t > u) std::swap(t, u);
  if (t == 0.0) return 0.0;
  const double Ht = h(t);
  const double Hu = h(u);
  const MolchanKernel ka(Ht);
  const MolchanKernel kb(Hu);
  const double coarse = covariance_integral(ka, kb, t, u, quad_points);
  const double fine = covariance_integral(ka, kb, t, u, quad_points + quad_points / 2);
  const double scale = std::pow(t, Ht) * std::pow(u, Hu);
  if (std::abs(fine - coarse) > 1e-7 * scale) {
    throw QuadratureError("covariance quadrature did not converge at t = " + std::to_string(t) +
                          ", u = " + std::to_string(u));
  }
  return fine;
}

Eigen::MatrixXd covariance_matrix(const HurstFunction& h, int n, CovarianceRoute route, int threads) {
  if (n < 1) throw std::domain_error("covariance_matrix needs n >= 1");
  const bool analytic =
      route == CovarianceRoute::analytic || (route == CovarianceRoute::automatic && h.is_constant());
  if (route == CovarianceRoute::analytic && !h.is_constant()) {
    throw std::domain_error("analytic covariance needs a constant Hurst function");
  }
  Eigen::MatrixXd cov(n, n);
  parallel_for(static_cast<std::size_t>(n), threads, [&](std::size_t idx) {
    const int i = static_cast<int>(idx);
    const double t = static_cast<double>(i + 1) / n;
    for (int j = 0; j <= i; ++j) {
      const double u = static_cast<double>(j + 1) / n;
      const double c = analytic ? fbm_covariance(h.h_min(), t, u) : covariance_volterra(h, t, u);
      cov(i, j) = c;
      cov(j, i) = c;
    }
  });
  return cov;
}

CholeskyFactor factorize_covariance(const Eigen::MatrixXd& covariance) {
  if (covariance.rows() != covariance.cols() || covariance.rows() == 0) {
    throw std::invalid_argument("covariance must be a non-empty square matrix");
  }
  const Eigen::Index n = covariance.rows();
  for (double eps : {0.0, 1e-14, 1e-13, 1e-12, 1e-11, 1e-10}) {
    Eigen::MatrixXd a = covariance;
    a.diagonal().array() += eps;
    Eigen::LLT<Eigen::MatrixXd> llt(a);
    if (llt.info() != Eigen::Success) continue;
    CholeskyFactor factor;
    factor.lower = llt.matrixL();
    if (!factor.lower.allFinite() || (factor.lower.diagonal().array() <= 0.0).any()) continue;
    factor.jitter = eps;
    return factor;
  }
  throw FactorizationError("covariance matrix of size " + std::to_string(n) +
                           " is not positive definite after jitter 1e-10");
}

SamplePath simulate_cholesky(const CholeskyFactor& factor, GaussianSource& source) {
  const int n = factor.n();
  std::vector<double> z(n);
  source.fill(z);
  SamplePath path;
  path.values.assign(n + 1, 0.0);
  path.simulator_id = "cholesky";
  for (int k = 1; k <= n; ++k) {
    double x = 0.0;
    for (int j = 0; j < k; ++j) x += factor.lower(k - 1, j) * z[j];
    path.values[k] = x;
  }
  return path;
}

SamplePath simulate_cholesky(const HurstFunction& h, int n, GaussianSource& source) {
  SamplePath path = simulate_cholesky(factorize_covariance(covariance_matrix(h, n)), source);
  path.hurst_id = h.id();
  return path;
}

// ---------------------------------------------------------------------------
// PathSampler

PathSampler PathSampler::from_weights(KernelWeights weights) {
  PathSampler sampler;
  sampler.matrix_ = std::move(weights.weights);
  for (Eigen::Index j = 0; j < sampler.matrix_.cols(); ++j) sampler.matrix_.col(j) *= std::sqrt(weights.cell_width[j]);
  sampler.support_ = std::move(weights.support);
  sampler.hurst_id_ = std::move(weights.hurst_id);
  sampler.simulator_id_ = std::move(weights.simulator_id);
  sampler.diagnostics_["max_isometry_error"] = weights.max_isometry_error;
  sampler.diagnostics_["noise_cells"] = static_cast<double>(sampler.matrix_.cols());
  return sampler;
}

PathSampler PathSampler::from_factor(const CholeskyFactor& factor, std::string hurst_id, std::string simulator_id) {
  PathSampler sampler;
  const int n = factor.n();
  sampler.matrix_ = Eigen::MatrixXd::Zero(n + 1, n);
  sampler.matrix_.bottomRows(n) = factor.lower.triangularView<Eigen::Lower>();
  sampler.support_.resize(n + 1);
  for (int i = 0; i <= n; ++i) sampler.support_[i] = i;
  sampler.hurst_id_ = std::move(hurst_id);
  sampler.simulator_id_ = std::move(simulator_id);
  sampler.diagnostics_["jitter"] = factor.jitter;
  return sampler;
}

PathSampler PathSampler::create(SimulatorKind kind, const HurstFunction& h, int n, const SamplerOptions& options) {
  switch (kind) {
    case SimulatorKind::volterra:
      return from_weights(build_kernel_weights(h, n, options.oversample, options.threads));
    case SimulatorKind::moving_average: {
      PathSampler sampler = from_weights(build_moving_average_weights(h, n, options.truncation, options.oversample));
      sampler.diagnostics_["truncation"] = options.truncation;
      sampler.diagnostics_["truncation_variance_at_1"] =
          moving_average_truncation_variance(h(1.0), 1.0, options.truncation);
      return sampler;
    }
    case SimulatorKind::cholesky:
      return from_factor(factorize_covariance(covariance_matrix(h, n, options.covariance, options.threads)), h.id());
  }
  throw std::invalid_argument("unknown simulator kind");
}

SamplePath PathSampler::sample(GaussianSource& source) const {
  GaussianSource* sources[] = {&source};
  Eigen::MatrixXd paths;
  sample_batch(sources, paths);
  SamplePath path;
  path.values.assign(paths.data(), paths.data() + paths.rows());
  path.hurst_id = hurst_id_;
  path.simulator_id = simulator_id_;
  return path;
}

void PathSampler::sample_batch(std::span<GaussianSource* const> sources, Eigen::MatrixXd& paths) const {
  const Eigen::Index batch = static_cast<Eigen::Index>(sources.size());
  const Eigen::Index dim = matrix_.cols();
  Eigen::MatrixXd z(dim, batch);
  for (Eigen::Index b = 0; b < batch; ++b) sources[b]->fill(std::span<double>(z.col(b).data(), dim));
  const Eigen::Index rows = matrix_.rows();
  paths.setZero(rows, batch);
  // Row blocks only touch the columns their last row depends on.
  constexpr Eigen::Index kBlock = 64;
  for (Eigen::Index r0 = 1; r0 < rows; r0 += kBlock) {
    const Eigen::Index len = std::min(kBlock, rows - r0);
    const Eigen::Index c = support_[r0 + len - 1];
    if (c == 0) continue;
    paths.middleRows(r0, len).noalias() = matrix_.block(r0, 0, len, c) * z.topRows(c);
  }
}

}  // namespace mbm
