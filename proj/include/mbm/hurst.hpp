#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

namespace mbm {

/// A Hurst function t -> H_t on [0, 1] together with its declared Hölder data
/// (|H_t - H_s| <= holder_constant * |t - s|^alpha) and certified extremes.
///
/// Construction does not enforce the standing assumptions; use
/// validate_assumptions for that. The built-in families compute h_min, h_max
/// and the Hölder constant analytically. Instances are immutable.
class HurstFunction {
 public:
  using Evaluator = std::function<double(double)>;

  HurstFunction(std::string family, std::map<std::string, double> parameters, Evaluator evaluator,
                double alpha, double holder_constant, double h_min, double h_max);

  static HurstFunction constant(double h);
  static HurstFunction affine(double h0, double h1);
  /// h0 + h1 sin(2 pi t + phase)
  static HurstFunction sinusoidal(double h0, double h1, double phase = 0.0);
  /// lo + (hi - lo) / (1 + exp(-rate (t - midpoint))), rate > 0
  static HurstFunction logistic(double lo, double hi, double rate, double midpoint = 0.5);

  /// H_t; throws std::domain_error unless 0 <= t <= 1.
  double operator()(double t) const;

  double alpha() const { return alpha_; }
  double holder_constant() const { return holder_constant_; }
  double h_min() const { return h_min_; }
  double h_max() const { return h_max_; }
  const std::string& family() const { return family_; }
  const std::map<std::string, double>& parameters() const { return parameters_; }
  bool is_constant() const { return h_min_ == h_max_; }
  /// Human-readable identifier, e.g. "sin(h0=0.7,h1=0.1,phase=0)".
  std::string id() const;

 private:
  std::string family_;
  std::map<std::string, double> parameters_;
  Evaluator evaluator_;
  double alpha_;
  double holder_constant_;
  double h_min_;
  double h_max_;
};

inline double evaluate(const HurstFunction& h, double t) { return h(t); }

struct ValidationOptions {
  double tolerance = 1e-6;
  /// Downgrade a failed Hölder check to a warning (grid checks cannot certify
  /// Hölder continuity of arbitrary evaluators).
  bool force_a2 = false;
};

struct ValidationReport {
  bool a1_pass = false;
  bool a2_pass = false;
  bool a2_overridden = false;
  double measured_min = 0.0;
  double measured_max = 0.0;
  double holder_quotient = 0.0;
  std::vector<std::string> messages;

  bool passed() const { return a1_pass && (a2_pass || a2_overridden); }
};

/// Samples H on a uniform grid of grid_size points and on dyadic grids of
/// resolution 2^7..2^12, plus all pairs of a 129-point grid, and compares the
/// measurements with the declared fields. Failures are reported, not thrown.
ValidationReport validate_assumptions(const HurstFunction& h, int grid_size = 10000,
                                      const ValidationOptions& options = {});

/// max |H_t - H_s| / |t - s|^alpha over all pairs of a uniform grid.
double holder_quotient_all_pairs(const HurstFunction& h, int points);

}  // namespace mbm
