#include "mbm/payoff.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "mbm/gaussian.hpp"
#include "mbm/quadrature.hpp"

namespace mbm {

std::string ConvexPayoff::id() const {
  std::string out = kind + "(";
  bool first = true;
  for (const auto& [key, value] : parameters) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    out += (first ? "" : ",") + key + "=" + buf;
    first = false;
  }
  return out + ")";
}

ConvexPayoff make_call_payoff(double a0) {
  ConvexPayoff p;
  p.kind = "call";
  p.parameters = {{"a", a0}};
  p.psi = [a0](double x) { return x > a0 ? x - a0 : 0.0; };
  p.psi_left = [a0](double x) { return x > a0 ? 1.0 : 0.0; };
  p.mu_atoms = {{a0, 0.5}};
  return p;
}

ConvexPayoff make_abs_payoff(double a0) {
  ConvexPayoff p;
  p.kind = "abs";
  p.parameters = {{"a", a0}};
  p.psi = [a0](double x) { return std::abs(x - a0); };
  p.psi_left = [a0](double x) { return x > a0 ? 1.0 : -1.0; };
  p.mu_atoms = {{a0, 1.0}};
  return p;
}

ConvexPayoff make_quadratic_payoff(double support) {
  if (!(support > 0.0)) throw std::domain_error("quadratic payoff support must be positive");
  ConvexPayoff p;
  p.kind = "quadratic";
  p.parameters = {{"support", support}};
  p.psi = [](double x) { return 0.5 * x * x; };
  p.psi_left = [](double x) { return x; };
  p.mu_density = Density{[](double) { return 0.5; }, -support, support};
  return p;
}

double riemann_sum(std::span<const double> path, const ConvexPayoff& payoff) {
  CompensatedSum sum;
  for (std::size_t k = 1; k < path.size(); ++k) sum += payoff.psi_left(path[k - 1]) * (path[k] - path[k - 1]);
  return sum.value();
}

double riemann_sum(const SamplePath& path, const ConvexPayoff& payoff) { return riemann_sum(path.values, payoff); }

double exact_integral(std::span<const double> path, const ConvexPayoff& payoff) {
  if (path.empty()) return 0.0;
  return payoff.psi(path.back()) - payoff.psi(path.front());
}

double exact_integral(const SamplePath& path, const ConvexPayoff& payoff) {
  return exact_integral(path.values, payoff);
}

double discretization_gap(std::span<const double> path, const ConvexPayoff& payoff) {
  CompensatedSum sum;
  for (std::size_t k = 1; k < path.size(); ++k) {
    const double y = path[k - 1];
    const double x = path[k];
    sum += payoff.psi(x) - payoff.psi(y) - payoff.psi_left(y) * (x - y);
  }
  const double gap = sum.value();
  if (gap < kGapViolation) {
    throw InvariantViolation("negative discretization gap " + std::to_string(gap) + " for payoff " + payoff.id());
  }
  return gap;
}

double discretization_gap(const SamplePath& path, const ConvexPayoff& payoff) {
  return discretization_gap(path.values, payoff);
}

namespace {

double identity_kernel(double x, double y, double a) {
  return std::max(x - a, 0.0) - std::max(y - a, 0.0) - (y > a ? x - y : 0.0);
}

}  // namespace

double convexity_identity_rhs(const ConvexPayoff& payoff, double x, double y) {
  CompensatedSum sum;
  for (const Atom& atom : payoff.mu_atoms) sum += atom.weight * identity_kernel(x, y, atom.location);
  if (payoff.mu_density) {
    const Density& d = *payoff.mu_density;
    std::vector<double> breaks{d.lo, d.hi};
    for (double kink : {x, y}) {
      if (kink > d.lo && kink < d.hi) breaks.push_back(kink);
    }
    std::sort(breaks.begin(), breaks.end());
    auto f = [&](double a) { return identity_kernel(x, y, a) * d.value(a); };
    sum += integrate_panels(f, breaks, gauss_legendre(8));
  }
  return 2.0 * sum.value();
}

bool psi_nondecreasing(const ConvexPayoff& payoff, double lo, double hi, int points) {
  double prev = payoff.psi_left(lo);
  for (int k = 1; k < points; ++k) {
    const double cur = payoff.psi_left(lo + (hi - lo) * k / (points - 1));
    if (cur < prev) return false;
    prev = cur;
  }
  return true;
}

double phi_mass(const ConvexPayoff& payoff) {
  double total = 0.0;
  for (const Atom& atom : payoff.mu_atoms) total += atom.weight * phi(atom.location);
  if (payoff.mu_density) {
    const Density& d = *payoff.mu_density;
    std::vector<double> breaks;
    const int panels = std::max(1, static_cast<int>(std::ceil(d.hi - d.lo)));
    for (int k = 0; k <= panels; ++k) breaks.push_back(d.lo + (d.hi - d.lo) * k / panels);
    total += integrate_panels([&](double a) { return d.value(a) * phi(a); }, breaks, gauss_legendre(16));
  }
  return total;
}

}  // namespace mbm
