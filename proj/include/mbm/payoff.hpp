#pragma once

#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mbm/drivers.hpp"

namespace mbm {

/// Raised when a discretization gap is clearly negative (a non-convex payoff or a bug).
class InvariantViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Atom {
  double location = 0.0;
  double weight = 0.0;
};

struct Density {
  std::function<double(double)> value;
  double lo = 0.0;
  double hi = 0.0;
};

/// Convex Ψ with left derivative ψ and measure μ normalized so that
///   Ψ(x) - Ψ(y) - ψ(y)(x - y) = 2 ∫ [(x-a)⁺ - (y-a)⁺ - 1{y>a}(x - y)] μ(da).
struct ConvexPayoff {
  std::string kind;
  std::map<std::string, double> parameters;
  std::function<double(double)> psi;
  std::function<double(double)> psi_left;
  std::vector<Atom> mu_atoms;
  std::optional<Density> mu_density;

  std::string id() const;
};

/// (x - a0)⁺, ψ = 1{x > a0}, μ = ½ δ_{a0}.
ConvexPayoff make_call_payoff(double a0);
/// |x - a0|, ψ = -1 for x <= a0 and 1 above, μ = δ_{a0}.
ConvexPayoff make_abs_payoff(double a0);
/// x²/2, ψ = x, μ with density ½ on [-support, support].
ConvexPayoff make_quadratic_payoff(double support = 8.0);

/// Σ_k ψ(X_{k-1}) (X_k - X_{k-1}), compensated.
double riemann_sum(std::span<const double> path, const ConvexPayoff& payoff);
double riemann_sum(const SamplePath& path, const ConvexPayoff& payoff);

/// Ψ(X_n) - Ψ(X_0).
double exact_integral(std::span<const double> path, const ConvexPayoff& payoff);
double exact_integral(const SamplePath& path, const ConvexPayoff& payoff);

inline constexpr double kGapViolation = -1e-9;

/// Exact integral minus Riemann sum, accumulated as Σ_k [Ψ(X_k) - Ψ(X_{k-1}) - ψ(X_{k-1}) ΔX_k]
/// so every term is individually nonnegative. Throws InvariantViolation below -1e-9.
double discretization_gap(std::span<const double> path, const ConvexPayoff& payoff);
double discretization_gap(const SamplePath& path, const ConvexPayoff& payoff);

/// 2 ∫ [(x-a)⁺ - (y-a)⁺ - 1{y>a}(x - y)] μ(da); atoms exactly, density by quadrature.
double convexity_identity_rhs(const ConvexPayoff& payoff, double x, double y);

/// True when ψ is nondecreasing on `points` equally spaced nodes of [lo, hi].
bool psi_nondecreasing(const ConvexPayoff& payoff, double lo, double hi, int points = 1000);

/// ∫ φ dμ.
double phi_mass(const ConvexPayoff& payoff);

}  // namespace mbm
