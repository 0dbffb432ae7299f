#include "mbm/report_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace mbm {

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

namespace {

void dump(const Json& v, std::string& out, int indent) {
  const std::string pad(static_cast<std::size_t>(indent + 2), ' ');
  const std::string close(static_cast<std::size_t>(indent), ' ');
  switch (v.type()) {
    case Json::value_t::object: {
      if (v.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (const auto& [key, item] : v.items()) {
        if (!first) out += ",\n";
        first = false;
        out += pad + Json(key).dump() + ": ";
        dump(item, out, indent + 2);
      }
      out += "\n" + close + "}";
      return;
    }
    case Json::value_t::array: {
      if (v.empty()) {
        out += "[]";
        return;
      }
      out += "[\n";
      for (std::size_t k = 0; k < v.size(); ++k) {
        if (k) out += ",\n";
        out += pad;
        dump(v[k], out, indent + 2);
      }
      out += "\n" + close + "]";
      return;
    }
    case Json::value_t::number_float: {
      const double x = v.get<double>();
      out += std::isfinite(x) ? format_number(x) : "null";
      return;
    }
    default:
      out += v.dump();
  }
}

Json verdict_json(const Verdict& v) {
  return Json{{"applicable", v.applicable}, {"passed", v.passed}, {"value", v.value},
              {"target", v.target},         {"tolerance", v.tolerance}, {"rule", v.rule}};
}

}  // namespace

std::string dump_json(const Json& value) {
  std::string out;
  dump(value, out, 0);
  out += "\n";
  return out;
}

Json to_json(const RateExponents& r) {
  return Json{{"h_tilde", r.h_tilde},
              {"leading_exponent", r.leading_exponent},
              {"remainder_exponent", r.remainder_exponent},
              {"lower_bound_applicable", r.lower_bound_applicable},
              {"lower_leading_exponent", r.lower_leading_exponent}};
}

Json to_json(const RateReport& r) {
  Json rows = Json::array();
  for (const auto& row : r.per_n) {
    Json diag = Json::object();
    for (const auto& [k, v] : row.diagnostics) diag[k] = v;
    rows.push_back(Json{{"n", row.n},
                        {"mean", row.mean},
                        {"stderr", row.std_error},
                        {"normalized", row.normalized},
                        {"min_gap", row.min_gap},
                        {"diagnostics", diag}});
  }
  Json verdicts = Json::object();
  for (const auto& [k, v] : r.verdicts) verdicts[k] = verdict_json(v);
  return Json{{"hurst", r.hurst_id},
              {"payoff", r.payoff_id},
              {"simulator", r.simulator},
              {"replications", r.replications},
              {"master_seed", r.master_seed},
              {"oversample", r.oversample},
              {"rate_exponents", to_json(r.exponents)},
              {"per_n", rows},
              {"fitted_slope", r.fitted_slope},
              {"theoretical_slope", r.theoretical_slope},
              {"leading_constant_theory", r.leading_constant_theory},
              {"min_gap", r.min_gap},
              {"total_paths", r.total_paths},
              {"verdicts", verdicts},
              {"passed", r.all_passed()}};
}

Json to_json(const BoundednessReport& r) {
  return Json{{"constant", r.constant}, {"max_ratio", r.max_ratio}, {"argmax_a", r.argmax_a},
              {"argmax_s", r.argmax_s}, {"points", r.points},       {"violations", r.violations},
              {"passed", r.passed()}};
}

Json to_json(const IntegralLemmaReport& r) {
  Json rows = Json::array();
  for (std::size_t k = 0; k < r.grid_a.size(); ++k) rows.push_back(Json{{"a", r.grid_a[k]}, {"ratio", r.ratios[k]}});
  return Json{{"lambda", r.lambda},
              {"mu", r.mu},
              {"ratios", rows},
              {"sup_ratio", r.sup_ratio},
              {"bounded", r.bounded},
              {"large_a", r.large_a},
              {"ratio_at_large_a", r.ratio_at_large_a},
              {"stated_limit", r.stated_limit},
              {"stated_limit_match", r.stated_limit_match},
              {"asymptotic_limit", r.asymptotic_limit},
              {"asymptotic_limit_match", r.asymptotic_limit_match},
              {"limit_tolerance", r.limit_tolerance}};
}

Json to_json(const ValidationReport& r) {
  return Json{{"a1_pass", r.a1_pass},
              {"a2_pass", r.a2_pass},
              {"a2_overridden", r.a2_overridden},
              {"measured_min", r.measured_min},
              {"measured_max", r.measured_max},
              {"holder_quotient", r.holder_quotient},
              {"messages", r.messages},
              {"passed", r.passed()}};
}

std::string errors_csv(const RateReport& r) {
  std::string out = "n,mean,stderr,normalized\n";
  for (const auto& row : r.per_n) {
    out += std::to_string(row.n) + "," + format_number(row.mean) + "," + format_number(row.std_error) + "," +
           format_number(row.normalized) + "\n";
  }
  return out;
}

std::string path_csv(const SamplePath& path) {
  std::string out = "t,x\n";
  for (int k = 0; k <= path.n(); ++k) out += format_number(path.time(k)) + "," + format_number(path.values[k]) + "\n";
  return out;
}

void write_text(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

}  // namespace mbm
