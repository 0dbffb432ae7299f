// Acceptance harness: one PASS/FAIL line per criterion, nonzero exit if any fail.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "mbm/cli.hpp"
#include "mbm/config.hpp"
#include "mbm/experiments.hpp"
#include "mbm/gaussian.hpp"
#include "mbm/theory.hpp"
#include "oracles.hpp"

using namespace mbm;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void report(int id, bool ok, const std::string& detail) {
  std::printf("[%s] criterion %d: %s\n", ok ? "PASS" : "FAIL", id, detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

void note(const std::string& detail) {
  std::printf("       %s\n", detail.c_str());
  std::fflush(stdout);
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

int worker_count() { return std::max(1u, std::thread::hardware_concurrency()); }

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ExperimentConfig preset(const std::string& name) {
  auto cfg = load_config(fs::path(MBM_SOURCE_DIR) / "configs" / name).experiment;
  cfg.threads = worker_count();
  return cfg;
}

struct VarianceCheck {
  int within = 0;
  int total = 0;
  std::string worst;
  double worst_z = 0.0;
};

}  // namespace

int main() {
  const auto start = std::chrono::steady_clock::now();
  double min_gap = 0.0;
  std::size_t gap_paths = 0;

  // 1 and 2: constant H, exact-covariance sampler.
  try {
    const auto cfg = preset("constant_call.toml");
    const auto r = run_convergence(cfg);
    min_gap = r.min_gap;
    gap_paths += r.total_paths;
    const double slope_err = std::abs(r.fitted_slope + 0.5);
    report(1, slope_err <= 0.10, fmt("fitted slope %.4f, target -0.5 +/- 0.10", r.fitted_slope));
    const double target = 0.5 * phi(0.0) / (1.0 - 0.75);
    const double normalized = r.per_n.back().normalized;
    const double rel = std::abs(normalized / target - 1.0);
    report(2, rel <= 0.25,
           fmt("n^0.5 * mean gap at n=512 = %.4f vs %.7f (relative error %.3f, tolerance 0.25)", normalized, target,
               rel));
  } catch (const std::exception& e) {
    report(1, false, std::string("exception: ") + e.what());
    report(2, false, "not evaluated");
  }

  // 3: time-varying H, Volterra sampler, one-sided bound.
  try {
    const auto cfg = preset("sin_volterra.toml");
    const auto r = run_convergence(cfg);
    min_gap = std::min(min_gap, r.min_gap);
    gap_paths += r.total_paths;
    const bool ok = r.fitted_slope <= -0.2 + 0.12 && r.verdicts.at("slope").passed;
    report(3, ok,
           fmt("fitted slope %.4f <= %.4f (theoretical %.4f + 0.12)", r.fitted_slope, r.theoretical_slope + 0.12,
               r.theoretical_slope));
  } catch (const std::exception& e) {
    report(3, false, std::string("exception: ") + e.what());
  }

  // 4: per-path gap sign over every path of 1..3.
  report(4, gap_paths >= 40000 && min_gap >= -1e-12,
         fmt("minimum gap %.3g over %.0f paths", min_gap, static_cast<double>(gap_paths)));

  // 5 and 7c share the marginal-variance estimates.
  std::vector<VarianceEstimate> volterra_const, cholesky_const;
  try {
    const std::vector<int> idx{16, 32, 48, 64};
    VarianceCheck vc;
    std::uint64_t seed = 9000;
    SamplerOptions opts;
    opts.threads = worker_count();
    for (const auto& h : {HurstFunction::constant(0.75), HurstFunction::sinusoidal(0.7, 0.1)}) {
      for (auto kind : {SimulatorKind::volterra, SimulatorKind::moving_average, SimulatorKind::cholesky}) {
        const auto sampler = PathSampler::create(kind, h, 64, opts);
        const auto est = estimate_marginal_variances(sampler, h, idx, 10000, ++seed, worker_count());
        for (const auto& v : est) {
          const double z = (v.variance - v.target) / v.std_error;
          ++vc.total;
          if (std::abs(z) <= 3.0) ++vc.within;
          if (std::abs(z) > std::abs(vc.worst_z)) {
            vc.worst_z = z;
            vc.worst = std::string(to_string(kind)) + " " + h.id() + fmt(" t=%.2f", v.t);
          }
        }
        if (h.is_constant() && kind == SimulatorKind::volterra) volterra_const = est;
        if (h.is_constant() && kind == SimulatorKind::cholesky) cholesky_const = est;
      }
    }
    report(5, vc.within == vc.total,
           fmt("%.0f of %.0f checks within 3 SE; largest |z| = %.2f", vc.within, vc.total, std::abs(vc.worst_z)) +
               " at " + vc.worst);
  } catch (const std::exception& e) {
    report(5, false, std::string("exception: ") + e.what());
  }

  // 6: the two lemma verifiers.
  try {
    const double mu = 0.75;
    const double lambda = -2.251;
    const auto ga = default_boundedness_grid_a();
    const auto gs = default_boundedness_grid_s(mu);
    const auto b = verify_boundedness_lemma(mu, ga, gs);
    const auto ia = default_integral_grid_a();
    const auto l3 = verify_integral_lemma(lambda, mu, ia);
    const bool ok = b.passed() && l3.bounded && l3.stated_limit_match;
    report(6, ok,
           fmt("boundedness: %.0f violations, max ratio %.6f; ", static_cast<double>(b.violations), b.max_ratio) +
               fmt("integral ratio at a=%.0f is %.4f vs limit %.4f", l3.large_a, l3.ratio_at_large_a,
                   l3.stated_limit));
    note(fmt("integral ratio sup %.4f, bounded: ", l3.sup_ratio) + (l3.bounded ? "yes" : "no") +
         fmt("; 1/mu = %.4f, relative distance at a=%.0f is %.4f", l3.asymptotic_limit, l3.large_a,
             std::abs(l3.ratio_at_large_a / l3.asymptotic_limit - 1.0)));
  } catch (const std::exception& e) {
    report(6, false, std::string("exception: ") + e.what());
  }

  // 7: oracle equivalences.
  try {
    double worst_inner = 0.0;
    for (double H : {0.55, 0.6, 0.75, 0.9, 0.95}) {
      const double got = leading_constant_inner(HurstFunction::constant(H), 0.0);
      worst_inner = std::max(worst_inner, std::abs(got / (phi(0.0) / (1.0 - H)) - 1.0));
    }
    double worst_kernel = 0.0;
    const double Hs[] = {0.55, 0.65, 0.75, 0.85, 0.95};
    const double ts[][2] = {{1.0, 0.5}, {1.0, 1e-3}, {0.3, 0.29}, {0.8, 0.01}};
    for (double H : Hs) {
      for (const auto& ts_pair : ts) {
        const double got = molchan_kernel(H, ts_pair[0], ts_pair[1]);
        const double want = oracle::molchan(H, ts_pair[0], ts_pair[1]);
        worst_kernel = std::max(worst_kernel, std::abs(got / want - 1.0));
      }
    }
    double worst_z = 0.0;
    for (std::size_t k = 0; k < volterra_const.size() && k < cholesky_const.size(); ++k) {
      const double z = (volterra_const[k].variance - cholesky_const[k].variance) /
                       std::hypot(volterra_const[k].std_error, cholesky_const[k].std_error);
      worst_z = std::max(worst_z, std::abs(z));
    }
    const bool have_c = !volterra_const.empty() && !cholesky_const.empty();
    report(7, worst_inner <= 1e-8 && worst_kernel <= 1e-8 && have_c && worst_z <= 3.0,
           fmt("inner constant rel err %.2e; kernel rel err %.2e (20 points); Volterra vs Cholesky max |z| %.2f",
               worst_inner, worst_kernel, worst_z));
  } catch (const std::exception& e) {
    report(7, false, std::string("exception: ") + e.what());
  }

  // 8: thread count must not change the report.
  try {
    const fs::path base = fs::temp_directory_path() / ("mbm_acceptance_" + std::to_string(std::chrono::steady_clock::now().time_since_epoch().count()));
    fs::create_directories(base);
    const std::string cfg = (fs::path(MBM_SOURCE_DIR) / "configs" / "constant_call.toml").string();
    std::vector<std::string> bodies;
    bool exits_ok = true;
    for (const char* threads : {"1", "4"}) {
      const fs::path out = base / (std::string("t") + threads);
      std::ostringstream o, e;
      const int code = run_cli({"converge", cfg, "--out", out.string(), "--threads", threads}, o, e);
      exits_ok = exits_ok && code == kExitOk;
      bodies.push_back(read_file(out / "report.json"));
    }
    fs::remove_all(base);
    const bool same = !bodies[0].empty() && bodies[0] == bodies[1];
    report(8, same && exits_ok,
           std::string("report.json with --threads 1 and 4 ") + (same ? "byte-identical" : "differ") +
               fmt(" (%.0f bytes)", static_cast<double>(bodies[0].size())));
  } catch (const std::exception& e) {
    report(8, false, std::string("exception: ") + e.what());
  }

  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::printf("%d of 8 criteria failed (%.1f s)\n", failures, secs);
  return failures == 0 ? 0 : 1;
}
