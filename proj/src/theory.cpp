#include "mbm/theory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mbm/quadrature.hpp"

namespace mbm {

double leading_constant_inner(const HurstFunction& h, double a, double rel_tol) {
  if (!(rel_tol > 0.0)) throw std::domain_error("rel_tol must be positive");
  const double beta = 1.0 / (1.0 - h.h_max());
  const double log_norm = std::log(kInvSqrt2Pi);
  auto f = [&](double w) {
    const double log_w = std::log(w);
    const double s = std::exp(beta * log_w);
    const double H = h(std::min(s, 1.0));
    const double log_scale = -H * beta * log_w;  // log s^{-H_s}
    const double arg = a * std::exp(log_scale);
    return beta * std::exp(log_scale + (beta - 1.0) * log_w + log_norm - 0.5 * arg * arg);
  };
  CompensatedSum total;
  int quiet = 0;
  double hi = 1.0;
  for (int panel = 0; panel < 60; ++panel) {
    const double lo = 0.5 * hi;
    const double part = integrate_adaptive(f, lo, hi, 0.1 * rel_tol, 16, 30);
    total += part;
    hi = lo;
    quiet = std::abs(part) < rel_tol * std::abs(total.value()) ? quiet + 1 : 0;
    if (quiet == 2) return total.value();
  }
  throw QuadratureError("leading_constant_inner did not converge within 60 panels at a = " + std::to_string(a));
}

double leading_constant(const ConvexPayoff& payoff, const HurstFunction& h, double rel_tol) {
  CompensatedSum total;
  for (const Atom& atom : payoff.mu_atoms) total += atom.weight * leading_constant_inner(h, atom.location, rel_tol);
  if (payoff.mu_density) {
    const Density& d = *payoff.mu_density;
    // I has a cusp at a = 0; grade panels geometrically toward it.
    std::vector<double> breaks{d.lo, d.hi};
    if (d.lo < 0.0 && d.hi > 0.0) breaks.push_back(0.0);
    for (double edge : {d.lo, d.hi}) {
      if (edge == 0.0) continue;
      for (int k = 1; k <= 40; ++k) {
        const double b = std::ldexp(edge, -k);
        if (b > d.lo && b < d.hi) breaks.push_back(b);
      }
    }
    std::sort(breaks.begin(), breaks.end());
    breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
    auto f = [&](double a) { return d.value(a) * leading_constant_inner(h, a, rel_tol); };
    total += integrate_panels(f, breaks, gauss_legendre(16));
  }
  return total.value();
}

RateExponents rate_exponents(const HurstFunction& h, double delta) {
  const ValidationReport report = validate_assumptions(h);
  if (!report.passed()) {
    std::string msg = "Hurst function " + h.id() + " violates the standing assumptions";
    for (const auto& m : report.messages) msg += "; " + m;
    throw AssumptionViolation(msg);
  }
  const double alpha = h.alpha();
  if (!(delta > 0.0 && delta < alpha - 0.5)) {
    throw std::domain_error("delta must lie in (0, alpha - 1/2), got " + std::to_string(delta));
  }
  RateExponents r;
  r.h_tilde = alpha > h.h_min() ? h.h_min() : alpha - delta;
  r.leading_exponent = 2.0 * r.h_tilde - 1.0;
  r.remainder_exponent =
      std::min({2.0 * r.h_tilde - h.h_max(), h.h_min() + alpha - 1.0, 2.0 * alpha - 1.0});
  r.lower_bound_applicable = lower_bound_conditions(h);
  r.lower_leading_exponent = 2.0 * h.h_max() - 1.0;
  if (!(r.h_tilde > 0.5 && r.h_tilde <= h.h_min() && r.h_tilde < alpha) ||
      !(r.remainder_exponent > r.leading_exponent)) {
    throw std::logic_error("rate exponents violate their invariants for " + h.id());
  }
  return r;
}

bool lower_bound_conditions(const HurstFunction& h) {
  return h.alpha() > h.h_max() && 3.0 * h.h_max() - 2.0 * h.h_min() < 1.0;
}

BoundednessReport verify_boundedness_lemma(double mu_exp, std::span<const double> grid_a,
                                           std::span<const double> grid_s, double constant) {
  if (grid_a.empty() || grid_s.empty()) throw std::invalid_argument("boundedness lemma grids must be nonempty");
  BoundednessReport r;
  r.constant = constant;
  for (double a : grid_a) {
    if (!(a != 0.0 && std::abs(a) <= 1.0)) throw std::invalid_argument("grid_a entries must satisfy 0 < |a| <= 1");
  }
  for (double s : grid_s) {
    if (!(s > 0.0)) throw std::invalid_argument("grid_s entries must be positive");
  }
  for (double a : grid_a) {
    for (double s : grid_s) {
      const double x = std::pow(s, -2.0 * mu_exp);
      // log of φ(a/s^μ) / (a^{-2} s^{2μ} φ(a))
      const double log_ratio = -0.5 * a * a * (x - 1.0) + 2.0 * std::log(std::abs(a)) + std::log(x);
      const double ratio = std::exp(log_ratio);
      ++r.points;
      if (ratio > r.max_ratio) {
        r.max_ratio = ratio;
        r.argmax_a = a;
        r.argmax_s = s;
      }
      if (ratio > constant * (1.0 + 1e-12)) ++r.violations;
    }
  }
  return r;
}

std::vector<double> default_boundedness_grid_a() {
  std::vector<double> grid;
  for (int k = 1; k <= 20; ++k) {
    grid.push_back(-k / 20.0);
    grid.push_back(k / 20.0);
  }
  return grid;
}

std::vector<double> default_boundedness_grid_s(double mu_exp) {
  std::vector<double> grid;
  for (int k = 0; k <= 120; ++k) grid.push_back(std::pow(10.0, -6.0 + 6.0 * k / 120.0));
  // Where the ratio peaks at |a| = 1.
  if (mu_exp != 0.0) grid.push_back(std::pow(0.5, 1.0 / (2.0 * mu_exp)));
  std::sort(grid.begin(), grid.end());
  return grid;
}

namespace {

double integral_lemma_ratio(double lambda, double mu, double a) {
  const double c = (lambda + 1.0) / (2.0 * mu) + 1.0;
  const double scale = 2.0 / (a * a);
  auto f = [&](double u) { return std::exp(-u - c * std::log1p(scale * u)); };
  const auto& rule = gauss_legendre(16);
  CompensatedSum total;
  total += integrate_gl(f, 0.0, 1.0, rule);
  int quiet = 0;
  for (double lo = 1.0; lo < 1e6; lo *= 2.0) {
    const double part = integrate_gl(f, lo, 2.0 * lo, rule);
    total += part;
    quiet = part < 1e-17 * total.value() ? quiet + 1 : 0;
    if (quiet == 2) return total.value() / mu;
  }
  throw QuadratureError("integral lemma quadrature did not converge at a = " + std::to_string(a));
}

}  // namespace

IntegralLemmaReport verify_integral_lemma(double lambda, double mu_exp, std::span<const double> grid_a,
                                          double limit_tolerance) {
  if (!(mu_exp > 0.0)) {
    throw std::domain_error("verify_integral_lemma needs mu > 0; for mu < 0 the ratio is unbounded");
  }
  if (grid_a.empty()) throw std::invalid_argument("grid_a must be nonempty");
  for (double a : grid_a) {
    if (!(std::abs(a) >= 1.0) || !std::isfinite(a)) throw std::invalid_argument("grid_a entries must satisfy |a| >= 1");
  }
  IntegralLemmaReport r;
  r.lambda = lambda;
  r.mu = mu_exp;
  r.grid_a.assign(grid_a.begin(), grid_a.end());
  r.limit_tolerance = limit_tolerance;
  r.bounded = true;
  for (double a : grid_a) {
    const double ratio = integral_lemma_ratio(lambda, mu_exp, a);
    r.ratios.push_back(ratio);
    if (!std::isfinite(ratio) || ratio <= 0.0) r.bounded = false;
    r.sup_ratio = std::max(r.sup_ratio, ratio);
    if (std::abs(a) >= r.large_a) {
      r.large_a = std::abs(a);
      r.ratio_at_large_a = ratio;
    }
  }
  r.stated_limit = std::exp2(-(lambda + 1.0) / (2.0 * mu_exp) - 1.0);
  r.asymptotic_limit = 1.0 / mu_exp;
  r.stated_limit_match = std::abs(r.ratio_at_large_a / r.stated_limit - 1.0) <= limit_tolerance;
  r.asymptotic_limit_match = std::abs(r.ratio_at_large_a / r.asymptotic_limit - 1.0) <= limit_tolerance;
  return r;
}

std::vector<double> default_integral_grid_a() { return {1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0}; }

}  // namespace mbm
