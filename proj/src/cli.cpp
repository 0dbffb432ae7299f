#include "mbm/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <iostream>
#include <optional>
#include <thread>

#include "mbm/config.hpp"
#include "mbm/report_io.hpp"
#include "mbm/theory.hpp"

namespace mbm {
namespace {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

int default_threads() { return std::max(1u, std::thread::hardware_concurrency()); }

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  int threads = default_threads();
  std::string out;
  int n = 64;
  bool force_a2 = false;
  int grid = 10000;
  std::optional<int> replications;
  std::optional<double> theoretical_slope;
  std::optional<std::string> a_list;
  double mu = 0.75;
  double lambda = -3.0 * 0.75 - 1e-3;
  std::optional<std::string> grid_a;
  std::optional<std::string> grid_s;
  std::optional<std::string> grid_a_large;
  double lemma_constant = kBoundednessConstant;
};

std::vector<double> grid_flag(const std::optional<std::string>& flag, std::vector<double> fallback,
                              const char* name) {
  if (!flag) return fallback;
  try {
    return parse_number_list(*flag);
  } catch (const std::invalid_argument& e) {
    throw UsageError(std::string(name) + ": " + e.what());
  }
}

int cmd_validate(const Options& o, std::ostream& out) {
  const AppConfig app = load_config(o.config);
  ValidationOptions vo;
  vo.force_a2 = o.force_a2;
  const HurstFunction& h = app.experiment.hurst;
  const ValidationReport r = validate_assumptions(h, o.grid, vo);
  out << "hurst: " << h.id() << "\n"
      << "declared: h_min=" << format_number(h.h_min()) << " h_max=" << format_number(h.h_max())
      << " alpha=" << format_number(h.alpha()) << " C=" << format_number(h.holder_constant()) << "\n"
      << "measured: h_min=" << format_number(r.measured_min) << " h_max=" << format_number(r.measured_max)
      << " holder_quotient=" << format_number(r.holder_quotient) << "\n"
      << "(A1) " << (r.a1_pass ? "pass" : "FAIL") << "\n"
      << "(A2) " << (r.a2_pass ? "pass" : (r.a2_overridden ? "FAIL (overridden)" : "FAIL")) << "\n";
  for (const auto& m : r.messages) out << "  " << m << "\n";
  return r.passed() ? kExitOk : kExitFailure;
}

int cmd_simulate(const Options& o, std::ostream& out, std::ostream& err) {
  const AppConfig app = load_config(o.config);
  const ExperimentConfig& e = app.experiment;
  if (o.n < 1) throw UsageError("--n must be >= 1");
  SamplerOptions so;
  so.oversample = e.oversample;
  so.truncation = e.truncation;
  so.threads = o.threads;
  const PathSampler sampler = PathSampler::create(e.simulator, e.hurst, o.n, so);
  const std::uint64_t seed = o.seed.value_or(e.master_seed);
  NormalStream stream(derive_seed(seed, static_cast<std::uint64_t>(o.n), 0));
  const SamplePath path = sampler.sample(stream);
  const std::string csv = path_csv(path);
  std::ostream& log = o.out == "-" ? err : out;
  log << "simulator=" << sampler.simulator_id() << " hurst=" << sampler.hurst_id() << " n=" << o.n;
  for (const auto& [k, v] : sampler.diagnostics()) log << " " << k << "=" << format_number(v);
  log << "\n";
  if (o.out == "-") {
    out << csv;
  } else {
    const std::string target = o.out.empty() ? "path.csv" : o.out;
    write_text(target, csv);
    log << "wrote " << target << "\n";
  }
  return kExitOk;
}

int cmd_converge(const Options& o, std::ostream& out) {
  AppConfig app = load_config(o.config);
  if (!app.has_section("payoff")) throw ConfigError(o.config + ": converge needs an explicit [payoff] section");
  ExperimentConfig& e = app.experiment;
  if (o.seed) e.master_seed = *o.seed;
  if (o.replications) e.replications = *o.replications;
  if (o.theoretical_slope) e.theoretical_slope_override = *o.theoretical_slope;
  e.threads = o.threads;
  try {
    validate_config(e);
  } catch (const std::invalid_argument& x) {
    throw UsageError(x.what());
  }
  const RateReport report = run_convergence(e);
  const std::filesystem::path dir = o.out.empty() ? app.output_dir : std::filesystem::path(o.out);
  write_text(dir / "report.json", dump_json(to_json(report)));
  write_text(dir / "errors.csv", errors_csv(report));
  out << errors_csv(report);
  out << "fitted_slope=" << format_number(report.fitted_slope)
      << " theoretical_slope=" << format_number(report.theoretical_slope)
      << " leading_constant=" << format_number(report.leading_constant_theory) << "\n";
  for (const auto& [name, v] : report.verdicts) {
    out << "verdict " << name << ": " << (!v.applicable ? "n/a" : (v.passed ? "pass" : "FAIL")) << " (" << v.rule
        << ", value=" << format_number(v.value) << ")\n";
  }
  out << "wrote " << (dir / "report.json").string() << "\n";
  return report.all_passed() ? kExitOk : kExitFailure;
}

int cmd_constant(const Options& o, std::ostream& out) {
  const AppConfig app = load_config(o.config);
  const ExperimentConfig& e = app.experiment;
  std::vector<double> points;
  if (o.a_list) {
    points = grid_flag(o.a_list, {}, "--a");
  } else {
    for (const Atom& atom : e.payoff.mu_atoms) points.push_back(atom.location);
    if (points.empty()) points.push_back(0.0);
  }
  Json inner = Json::array();
  for (double a : points) inner.push_back(Json{{"a", a}, {"value", leading_constant_inner(e.hurst, a)}});
  const Json result{{"hurst", e.hurst.id()},
                    {"payoff", e.payoff.id()},
                    {"inner", inner},
                    {"leading_constant", leading_constant(e.payoff, e.hurst)},
                    {"rate_exponents", to_json(rate_exponents(e.hurst, e.delta_htilde))}};
  out << dump_json(result);
  return kExitOk;
}

int cmd_lemmas(const Options& o, std::ostream& out) {
  const auto grid_a = grid_flag(o.grid_a, default_boundedness_grid_a(), "--grid-a");
  const auto grid_s = grid_flag(o.grid_s, default_boundedness_grid_s(o.mu), "--grid-s");
  const auto grid_large = grid_flag(o.grid_a_large, default_integral_grid_a(), "--grid-a-large");
  const BoundednessReport bounded = verify_boundedness_lemma(o.mu, grid_a, grid_s, o.lemma_constant);
  const IntegralLemmaReport integral = verify_integral_lemma(o.lambda, o.mu, grid_large);
  const Json result{{"boundedness", to_json(bounded)}, {"integral", to_json(integral)}};
  const std::string text = dump_json(result);
  if (!o.out.empty()) write_text(o.out, text);
  out << text;
  return bounded.passed() && integral.bounded ? kExitOk : kExitFailure;
}

}  // namespace

std::vector<double> parse_number_list(const std::string& text) {
  std::vector<double> values;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t comma = std::min(text.find(',', start), text.size());
    std::string item = text.substr(start, comma - start);
    item.erase(std::remove_if(item.begin(), item.end(), [](unsigned char c) { return std::isspace(c); }), item.end());
    if (item.empty()) throw std::invalid_argument("empty entry in number list '" + text + "'");
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (ec != std::errc() || ptr != item.data() + item.size() || !std::isfinite(v)) {
      throw std::invalid_argument("malformed number '" + item + "'");
    }
    values.push_back(v);
    start = comma + 1;
  }
  return values;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Simulation of multifractional Brownian motion and discretization-error studies", "mbm"};
  app.require_subcommand(1);
  Options o;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("config", o.config, "configuration file")->required();
    sub->add_option("--threads", o.threads, "worker cap (results do not depend on it)")->check(CLI::PositiveNumber);
  };
  auto* validate = app.add_subcommand("validate", "check the standing assumptions on the Hurst function");
  add_common(validate);
  validate->add_option("--grid", o.grid, "uniform grid size")->check(CLI::Range(2, 10000000));
  validate->add_flag("--force-a2", o.force_a2, "downgrade a failed Hölder check to a warning");

  auto* simulate = app.add_subcommand("simulate", "write one sample path as CSV");
  add_common(simulate);
  simulate->add_option("--n", o.n, "grid size");
  simulate->add_option("--seed", o.seed, "master seed");
  simulate->add_option("--out", o.out, "output CSV file, '-' for stdout");

  auto* converge = app.add_subcommand("converge", "Monte Carlo convergence study");
  add_common(converge);
  converge->add_option("--seed", o.seed, "master seed");
  converge->add_option("--out", o.out, "output directory");
  converge->add_option("--replications", o.replications, "paths per grid size");
  converge->add_option("--theoretical-slope", o.theoretical_slope, "override the theoretical slope");

  auto* constant = app.add_subcommand("constant", "leading constant and rate exponents as JSON");
  add_common(constant);
  constant->add_option("--a", o.a_list, "comma-separated points for the inner integral");

  auto* lemmas = app.add_subcommand("lemmas", "grid checks of the two auxiliary Gaussian bounds");
  lemmas->add_option("--mu", o.mu, "exponent mu");
  lemmas->add_option("--lambda", o.lambda, "exponent lambda of the integral bound");
  lemmas->add_option("--grid-a", o.grid_a, "comma-separated a values, 0 < |a| <= 1");
  lemmas->add_option("--grid-s", o.grid_s, "comma-separated s values, s > 0");
  lemmas->add_option("--grid-a-large", o.grid_a_large, "comma-separated a values, |a| >= 1");
  lemmas->add_option("--constant", o.lemma_constant, "constant of the boundedness check");
  lemmas->add_option("--out", o.out, "also write the JSON report here");
  lemmas->add_option("--threads", o.threads, "ignored; accepted for uniformity");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (validate->parsed()) return cmd_validate(o, out);
    if (simulate->parsed()) return cmd_simulate(o, out, err);
    if (converge->parsed()) return cmd_converge(o, out);
    if (constant->parsed()) return cmd_constant(o, out);
    if (lemmas->parsed()) return cmd_lemmas(o, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace mbm
