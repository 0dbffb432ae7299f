#pragma once

#include <span>
#include <stdexcept>
#include <vector>

#include "mbm/gaussian.hpp"
#include "mbm/hurst.hpp"
#include "mbm/payoff.hpp"

namespace mbm {

/// Raised when a Hurst function fails the standing assumptions where they are required.
class AssumptionViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr double kDefaultRelTol = 1e-8;
inline constexpr double kDefaultDelta = 1e-3;

/// I(a) = ∫_0^1 s^{-H_s} φ(a s^{-H_s}) ds.
///
/// Computed after s = w^β with β = 1/(1 - H_max), which makes the integrand
/// bounded, on dyadic panels in w (Gauss–Legendre 16) walking toward w = 0.
/// Stops once two consecutive panels add less than rel_tol of the total;
/// throws QuadratureError after 60 panels.
double leading_constant_inner(const HurstFunction& h, double a, double rel_tol = kDefaultRelTol);

/// Σ_i w_i I(a_i) + ∫ ρ(a) I(a) da over the declared density support.
double leading_constant(const ConvexPayoff& payoff, const HurstFunction& h, double rel_tol = kDefaultRelTol);

struct RateExponents {
  double h_tilde = 0.0;
  /// The error decays like n^{-leading_exponent}.
  double leading_exponent = 0.0;
  double remainder_exponent = 0.0;
  bool lower_bound_applicable = false;
  double lower_leading_exponent = 0.0;
};

/// H̃ = H_min if α > H_min, else α - delta. Throws AssumptionViolation when
/// validate_assumptions fails and std::domain_error unless 0 < delta < α - 1/2.
RateExponents rate_exponents(const HurstFunction& h, double delta = kDefaultDelta);

/// α > H_max and 3 H_max - 2 H_min < 1.
bool lower_bound_conditions(const HurstFunction& h);

inline const double kBoundednessConstant = 2.0 * std::exp(-0.5);

struct BoundednessReport {
  double constant = 0.0;
  double max_ratio = 0.0;
  double argmax_a = 0.0;
  double argmax_s = 0.0;
  std::size_t points = 0;
  std::size_t violations = 0;

  bool passed() const { return violations == 0; }
};

/// Sweeps φ(a/s^μ) / (a^{-2} s^{2μ} φ(a)) over grid_a x grid_s and counts
/// points where it exceeds `constant` (relative slack 1e-12).
BoundednessReport verify_boundedness_lemma(double mu_exp, std::span<const double> grid_a,
                                           std::span<const double> grid_s,
                                           double constant = kBoundednessConstant);

std::vector<double> default_boundedness_grid_a();
std::vector<double> default_boundedness_grid_s(double mu_exp);

struct IntegralLemmaReport {
  double lambda = 0.0;
  double mu = 0.0;
  std::vector<double> grid_a;
  /// F(a) = ∫_0^1 s^λ φ(a/s^μ) ds / (a^{-2} φ(a)).
  std::vector<double> ratios;
  double sup_ratio = 0.0;
  bool bounded = false;
  double large_a = 0.0;
  double ratio_at_large_a = 0.0;
  double stated_limit = 0.0;      ///< 2^{-(λ+1)/(2μ) - 1}
  double asymptotic_limit = 0.0;  ///< 1/μ
  bool stated_limit_match = false;
  bool asymptotic_limit_match = false;
  double limit_tolerance = 0.05;
};

/// Evaluates F on grid_a (all |a| >= 1) via u = a²(s^{-2μ} - 1)/2, which gives
/// F(a) = μ^{-1} ∫_0^∞ e^{-u} (1 + 2u/a²)^{-(λ+1)/(2μ) - 1} du. Compares F at
/// the largest |a| with both limit values. Requires μ > 0.
IntegralLemmaReport verify_integral_lemma(double lambda, double mu_exp, std::span<const double> grid_a,
                                          double limit_tolerance = 0.05);

std::vector<double> default_integral_grid_a();

}  // namespace mbm
