#pragma once

#include <cmath>
#include <numbers>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace mbm {

/// Raised when a graded or adaptive quadrature does not reach its tolerance.
class QuadratureError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Gauss–Legendre nodes and weights on [-1, 1].
struct GaussLegendreRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Cached rule of the given order (1..128). Thread-safe.
const GaussLegendreRule& gauss_legendre(int order);

template <class F>
double integrate_gl(F&& f, double a, double b, const GaussLegendreRule& rule) {
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  double sum = 0.0;
  for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
    sum += rule.weights[q] * f(mid + half * rule.nodes[q]);
  }
  return half * sum;
}

template <class F>
double integrate_gl(F&& f, double a, double b, int order) {
  return integrate_gl(f, a, b, gauss_legendre(order));
}

/// Composite rule over consecutive breakpoints.
template <class F>
double integrate_panels(F&& f, std::span<const double> breakpoints, const GaussLegendreRule& rule) {
  double sum = 0.0;
  for (std::size_t k = 0; k + 1 < breakpoints.size(); ++k) {
    sum += integrate_gl(f, breakpoints[k], breakpoints[k + 1], rule);
  }
  return sum;
}

namespace detail {
template <class F>
double bisect(F& f, double a, double b, double whole, double abs_tol, int depth, int max_depth,
              const GaussLegendreRule& rule) {
  const double mid = 0.5 * (a + b);
  const double left = integrate_gl(f, a, mid, rule);
  const double right = integrate_gl(f, mid, b, rule);
  const double refined = left + right;
  if (std::abs(refined - whole) <= abs_tol || depth >= max_depth) {
    if (depth >= max_depth && std::abs(refined - whole) > abs_tol) {
      throw QuadratureError("adaptive bisection reached maximal depth on [" + std::to_string(a) +
                            ", " + std::to_string(b) + "]");
    }
    return refined;
  }
  // Shrinking by sqrt(2) rather than 2 keeps endpoint singularities within reach.
  const double child_tol = abs_tol * std::numbers::sqrt2 * 0.5;
  return bisect(f, a, mid, left, child_tol, depth + 1, max_depth, rule) +
         bisect(f, mid, b, right, child_tol, depth + 1, max_depth, rule);
}
}  // namespace detail

/// Recursive bisection: a panel is accepted when the Gauss–Legendre value on
/// the panel agrees with the sum over its two halves.
template <class F>
double integrate_adaptive(F f, double a, double b, double rel_tol, int order = 8, int max_depth = 50) {
  const auto& rule = gauss_legendre(order);
  const double whole = integrate_gl(f, a, b, rule);
  const double scale = std::max(std::abs(whole), 1e-300);
  return detail::bisect(f, a, b, whole, rel_tol * scale, 0, max_depth, rule);
}

/// Neumaier's compensated summation.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  CompensatedSum& operator+=(double x) {
    add(x);
    return *this;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

/// Fixed-order pairwise summation; the result depends only on the input order.
double pairwise_sum(std::span<const double> values);

}  // namespace mbm
