#include "mbm/hurst.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <stdexcept>

namespace mbm {
namespace {

void require_open_unit(double lo, double hi, const std::string& family) {
  if (!(lo > 0.0 && hi < 1.0)) {
    throw std::domain_error(family + " Hurst function leaves (0, 1): range [" + std::to_string(lo) +
                            ", " + std::to_string(hi) + "]");
  }
}

double holder_quotient(double dh, double dt, double alpha) { return std::abs(dh) / std::pow(dt, alpha); }

}  // namespace

HurstFunction::HurstFunction(std::string family, std::map<std::string, double> parameters,
                             Evaluator evaluator, double alpha, double holder_constant, double h_min,
                             double h_max)
    : family_(std::move(family)),
      parameters_(std::move(parameters)),
      evaluator_(std::move(evaluator)),
      alpha_(alpha),
      holder_constant_(holder_constant),
      h_min_(h_min),
      h_max_(h_max) {
  if (!evaluator_) throw std::invalid_argument("Hurst function needs an evaluator");
  if (!(h_min_ <= h_max_)) throw std::invalid_argument("Hurst function: h_min > h_max");
  if (!(alpha_ > 0.0 && alpha_ <= 1.0)) throw std::invalid_argument("Hurst function: alpha must lie in (0, 1]");
  if (!(holder_constant_ >= 0.0)) throw std::invalid_argument("Hurst function: negative Hölder constant");
}

HurstFunction HurstFunction::constant(double h) {
  require_open_unit(h, h, "constant");
  return HurstFunction("constant", {{"h", h}}, [h](double) { return h; }, 1.0, 0.0, h, h);
}

HurstFunction HurstFunction::affine(double h0, double h1) {
  const double lo = std::min(h0, h0 + h1);
  const double hi = std::max(h0, h0 + h1);
  require_open_unit(lo, hi, "affine");
  return HurstFunction("affine", {{"h0", h0}, {"h1", h1}}, [h0, h1](double t) { return h0 + h1 * t; },
                       1.0, std::abs(h1), lo, hi);
}

HurstFunction HurstFunction::sinusoidal(double h0, double h1, double phase) {
  // [0, 1] covers a full period, so both extremes are attained.
  const double amp = std::abs(h1);
  require_open_unit(h0 - amp, h0 + amp, "sin");
  return HurstFunction(
      "sin", {{"h0", h0}, {"h1", h1}, {"phase", phase}},
      [h0, h1, phase](double t) { return h0 + h1 * std::sin(2.0 * std::numbers::pi * t + phase); }, 1.0,
      2.0 * std::numbers::pi * amp, h0 - amp, h0 + amp);
}

HurstFunction HurstFunction::logistic(double lo, double hi, double rate, double midpoint) {
  if (!(rate > 0.0)) throw std::domain_error("logistic Hurst function needs rate > 0");
  auto f = [lo, hi, rate, midpoint](double t) { return lo + (hi - lo) / (1.0 + std::exp(-rate * (t - midpoint))); };
  const double f0 = f(0.0);
  const double f1 = f(1.0);
  const double mn = std::min(f0, f1);
  const double mx = std::max(f0, f1);
  require_open_unit(mn, mx, "logistic");
  // |f'| = |hi - lo| rate sigma (1 - sigma) peaks at the midpoint.
  const double t_star = std::clamp(midpoint, 0.0, 1.0);
  const double sigma = 1.0 / (1.0 + std::exp(-rate * (t_star - midpoint)));
  const double lipschitz = std::abs(hi - lo) * rate * sigma * (1.0 - sigma);
  return HurstFunction("logistic", {{"lo", lo}, {"hi", hi}, {"rate", rate}, {"midpoint", midpoint}}, f, 1.0,
                       lipschitz, mn, mx);
}

double HurstFunction::operator()(double t) const {
  if (!(t >= 0.0 && t <= 1.0)) {
    throw std::domain_error("Hurst function evaluated outside [0, 1] at t = " + std::to_string(t));
  }
  return evaluator_(t);
}

std::string HurstFunction::id() const {
  std::string out = family_ + "(";
  bool first = true;
  for (const auto& [key, value] : parameters_) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    out += (first ? "" : ",") + key + "=" + buf;
    first = false;
  }
  return out + ")";
}

ValidationReport validate_assumptions(const HurstFunction& h, int grid_size, const ValidationOptions& options) {
  if (grid_size < 2) throw std::invalid_argument("validate_assumptions needs grid_size >= 2");
  const double tol = options.tolerance;
  ValidationReport report;

  double mn = h(0.0);
  double mx = mn;
  double quotient = 0.0;
  const double alpha = h.alpha();

  auto sweep_adjacent = [&](int points) {
    double prev = h(0.0);
    for (int k = 1; k < points; ++k) {
      const double t = static_cast<double>(k) / (points - 1);
      const double cur = h(t);
      mn = std::min(mn, cur);
      mx = std::max(mx, cur);
      quotient = std::max(quotient, holder_quotient(cur - prev, 1.0 / (points - 1), alpha));
      prev = cur;
    }
  };
  sweep_adjacent(grid_size);
  for (int level = 7; level <= 12; ++level) sweep_adjacent((1 << level) + 1);
  quotient = std::max(quotient, holder_quotient_all_pairs(h, 129));

  report.measured_min = mn;
  report.measured_max = mx;
  report.holder_quotient = quotient;

  bool a1 = true;
  if (!(h.h_min() > 0.5)) {
    a1 = false;
    report.messages.push_back("(A1) violated: declared h_min = " + std::to_string(h.h_min()) + " is not > 1/2");
  }
  if (!(h.h_max() < 1.0)) {
    a1 = false;
    report.messages.push_back("(A1) violated: declared h_max = " + std::to_string(h.h_max()) + " is not < 1");
  }
  if (mn < h.h_min() - tol || mx > h.h_max() + tol) {
    a1 = false;
    report.messages.push_back("(A1) violated: measured range [" + std::to_string(mn) + ", " + std::to_string(mx) +
                              "] exceeds declared [" + std::to_string(h.h_min()) + ", " +
                              std::to_string(h.h_max()) + "]");
  }
  if (mn <= 0.5 || mx >= 1.0) {
    a1 = false;
    report.messages.push_back("(A1) violated: measured values leave (1/2, 1)");
  }
  report.a1_pass = a1;

  bool a2 = true;
  if (!(alpha > 0.5 && alpha <= 1.0)) {
    a2 = false;
    report.messages.push_back("(A2) violated: alpha = " + std::to_string(alpha) + " is not in (1/2, 1]");
  }
  if (quotient > h.holder_constant() * (1.0 + tol) + 1e-12) {
    a2 = false;
    report.messages.push_back("(A2) violated: measured Hölder quotient " + std::to_string(quotient) +
                              " exceeds declared constant " + std::to_string(h.holder_constant()));
  }
  report.a2_pass = a2;
  if (!a2 && options.force_a2) {
    report.a2_overridden = true;
    report.messages.push_back("(A2) failure overridden by force flag");
  }
  return report;
}

double holder_quotient_all_pairs(const HurstFunction& h, int points) {
  if (points < 2) throw std::invalid_argument("holder_quotient_all_pairs needs at least 2 points");
  std::vector<double> values(points);
  for (int k = 0; k < points; ++k) values[k] = h(static_cast<double>(k) / (points - 1));
  double best = 0.0;
  for (int i = 0; i < points; ++i) {
    for (int j = i + 1; j < points; ++j) {
      best = std::max(best, holder_quotient(values[j] - values[i], static_cast<double>(j - i) / (points - 1),
                                            h.alpha()));
    }
  }
  return best;
}

}  // namespace mbm
