#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <numbers>

#include "mbm/drivers.hpp"
#include "mbm/experiments.hpp"
#include "oracles.hpp"

using namespace mbm;

namespace {

double sample_var(const std::vector<double>& x) {
  double m = 0.0;
  for (double v : x) m += v;
  m /= static_cast<double>(x.size());
  double s = 0.0;
  for (double v : x) s += (v - m) * (v - m);
  return s / static_cast<double>(x.size() - 1);
}

}  // namespace

TEST_SUITE("drivers") {
  TEST_CASE("c1 values") {
    CHECK(c1(0.5) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(c1(0.75) == doctest::Approx(oracle::c1(0.75)).epsilon(1e-13));
    CHECK(c1(0.75) == doctest::Approx(1.06965).epsilon(1e-5));
    for (double H = 0.05; H < 1.0; H += 0.05) {
      CAPTURE(H);
      CHECK(std::abs(c1(H) / c1_gamma_ratio_form(H) - 1.0) <= 1e-12);
      CHECK(c1(H) == doctest::Approx(oracle::c1(H)).epsilon(1e-12));
    }
    CHECK_THROWS_AS(c1(0.0), std::domain_error);
    CHECK_THROWS_AS(c1(1.0), std::domain_error);
  }

  TEST_CASE("c2 values") {
    CHECK(c2(0.75) == doctest::Approx(0.26741).epsilon(1e-5));
    CHECK(c2(0.75) == doctest::Approx(oracle::c1(0.75) * 0.25).epsilon(1e-13));
    CHECK(c2(0.9) == doctest::Approx(c1(0.9) * 0.4).epsilon(1e-15));
    CHECK(c2(0.5 + 1e-9) < 1e-8);
    CHECK_THROWS_AS(c2(0.5), std::domain_error);
    CHECK_THROWS_AS(c2(0.3), std::domain_error);
  }

  TEST_CASE("c3 values") {
    CHECK(c3(0.5) == doctest::Approx(1.0 / std::sqrt(2.0 * std::numbers::pi)).epsilon(1e-14));
    CHECK(c3(0.5) == doctest::Approx(0.3989423).epsilon(1e-7));
    CHECK(c3(0.75) == doctest::Approx(oracle::c3(0.75)).epsilon(1e-13));
    CHECK(c3(0.25) > 0.0);
    CHECK(c3(0.75) > 0.0);
    CHECK_THROWS_AS(c3(1.2), std::domain_error);
  }

  TEST_CASE("Molchan kernel matches the untransformed integral") {
    CHECK(molchan_kernel(0.75, 1.0, 0.5) == doctest::Approx(oracle::molchan(0.75, 1.0, 0.5)).epsilon(1e-8));
    for (double H : {0.55, 0.7, 0.9}) {
      for (double s : {0.01, 0.2, 0.8}) {
        CAPTURE(H);
        CAPTURE(s);
        CHECK(molchan_kernel(H, 0.9, s) == doctest::Approx(oracle::molchan(H, 0.9, s)).epsilon(1e-8));
      }
    }
  }

  TEST_CASE("Molchan kernel vanishes as s approaches t") {
    double prev = molchan_kernel(0.75, 1.0, 0.9);
    for (double gap : {1e-2, 1e-4, 1e-6, 1e-8}) {
      const double k = molchan_kernel(0.75, 1.0, 1.0 - gap);
      CHECK(k < prev);
      prev = k;
    }
    CHECK(prev < 1e-1);
  }

  TEST_CASE("Molchan kernel follows its small-s asymptote") {
    // The first correction is of relative order s^{2H-1}.
    const double H = 0.75;
    auto rel = [&](double s) {
      const double asymptote = c2(H) * std::pow(s, 0.5 - H) / (2.0 * H - 1.0);
      return std::abs(molchan_kernel(H, 1.0, s) / asymptote - 1.0);
    };
    CHECK(rel(1e-6) < 0.01);
    CHECK(rel(1e-4) / rel(1e-6) == doctest::Approx(std::pow(100.0, 2.0 * H - 1.0)).epsilon(0.05));
  }

  TEST_CASE("Molchan kernel domain errors") {
    CHECK_THROWS_AS(molchan_kernel(0.75, 1.0, 0.0), std::domain_error);
    CHECK_THROWS_AS(molchan_kernel(0.75, 0.5, 0.5), std::domain_error);
    CHECK_THROWS_AS(molchan_kernel(0.75, 1.5, 0.5), std::domain_error);
    CHECK_THROWS_AS(molchan_kernel(0.4, 1.0, 0.5), std::domain_error);
  }

  TEST_CASE("fixed panel rule agrees with adaptive bisection") {
    for (double H : {0.51, 0.6, 0.75, 0.95}) {
      const MolchanKernel k(H);
      for (double s : {1e-9, 1e-5, 0.01, 0.3, 0.7, 0.999}) {
        CHECK(std::abs(k(1.0, s) / molchan_kernel_adaptive(H, 1.0, s, 1e-13) - 1.0) <= 1e-10);
      }
    }
  }

  TEST_CASE("kernel weights are causal") {
    const auto w = build_kernel_weights(HurstFunction::sinusoidal(0.7, 0.1), 16, 4);
    for (int i = 0; i <= w.n; ++i) {
      const double t = static_cast<double>(i) / w.n;
      for (Eigen::Index j = 0; j < w.cells(); ++j) {
        if (w.cell_left[j] >= t) CHECK(w.weights(i, j) == 0.0);
      }
    }
    CHECK(w.weights.row(0).isZero(0.0));
  }

  TEST_CASE("kernel weights reproduce the variance law") {
    const auto w = build_kernel_weights(HurstFunction::constant(0.75), 64, 8);
    CHECK(w.isometry_error[64] < 0.02);
    for (int i = 8; i <= 64; ++i) CHECK(w.isometry_error[i] < 0.02);
    const auto tiny = build_kernel_weights(HurstFunction::constant(0.75), 1, 1);
    CHECK(tiny.isometry_error[1] < 0.05);
  }

  TEST_CASE("kernel weights reject bad sizes") {
    CHECK_THROWS_AS(build_kernel_weights(HurstFunction::constant(0.75), 0, 8), std::domain_error);
    CHECK_THROWS_AS(build_kernel_weights(HurstFunction::constant(0.75), 4, 0), std::domain_error);
  }

  TEST_CASE("zero noise gives the zero path") {
    ZeroSource zero;
    const auto w = build_kernel_weights(HurstFunction::constant(0.75), 8, 2);
    const auto p = simulate_volterra(w, zero);
    CHECK(p.n() == 8);
    for (double v : p.values) CHECK(v == 0.0);
    const auto ma = simulate_moving_average(HurstFunction::constant(0.75), 8, 10.0, zero, 2);
    for (double v : ma.values) CHECK(v == 0.0);
  }

  TEST_CASE("same seed gives the same path") {
    const auto w = build_kernel_weights(HurstFunction::constant(0.75), 32, 4);
    NormalStream a(99), b(99);
    CHECK(simulate_volterra(w, a).values == simulate_volterra(w, b).values);
    const auto sampler = PathSampler::from_weights(w);
    NormalStream c(5), d(5);
    CHECK(sampler.sample(c).values == sampler.sample(d).values);
  }

  TEST_CASE("batched sampler equals the direct weighted sum") {
    const auto w = build_kernel_weights(HurstFunction::sinusoidal(0.7, 0.1), 100, 2);
    const auto sampler = PathSampler::from_weights(w);
    NormalStream a(3), b(3);
    const auto direct = simulate_volterra(w, a);
    const auto batched = sampler.sample(b);
    for (int k = 0; k <= 100; ++k) CHECK(batched.values[k] == doctest::Approx(direct.values[k]).epsilon(1e-12));
    CHECK(batched.values[0] == 0.0);
  }

  TEST_CASE("Volterra variance at t = 1/2") {
    const auto h = HurstFunction::constant(0.75);
    const auto sampler = PathSampler::create(SimulatorKind::volterra, h, 128);
    const std::vector<int> idx{64};
    const auto v = estimate_marginal_variances(sampler, h, idx, 10000, 11)[0];
    CHECK(v.target == doctest::Approx(0.3535533906).epsilon(1e-9));
    CHECK(std::abs(v.variance - v.target) <= 3.0 * v.std_error);
  }

  TEST_CASE("covariance by quadrature") {
    const auto h = HurstFunction::constant(0.75);
    CHECK(covariance_volterra(h, 0.0, 0.5) == 0.0);
    CHECK(covariance_volterra(h, 0.5, 0.0) == 0.0);
    CHECK(covariance_volterra(h, 0.5, 0.5) == doctest::Approx(0.353553).epsilon(1e-4));
    CHECK(covariance_volterra(h, 1.0, 0.5) == doctest::Approx(0.5).epsilon(1e-4));
    CHECK(covariance_volterra(h, 0.3, 0.8) == doctest::Approx(fbm_covariance(0.75, 0.3, 0.8)).epsilon(1e-8));
    const auto hs = HurstFunction::sinusoidal(0.7, 0.1);
    for (double t : {0.1, 0.3, 0.6, 1.0}) {
      CHECK(covariance_volterra(hs, t, t) == doctest::Approx(std::pow(t, 2.0 * hs(t))).epsilon(1e-4));
    }
    CHECK(covariance_volterra(hs, 0.2, 0.9) == doctest::Approx(covariance_volterra(hs, 0.9, 0.2)).epsilon(1e-15));
    CHECK_THROWS_AS(covariance_volterra(h, 1.2, 0.5), std::domain_error);
  }

  TEST_CASE("Cholesky of the identity returns raw normals") {
    const auto f = factorize_covariance(Eigen::MatrixXd::Identity(5, 5));
    CHECK(f.jitter == 0.0);
    CHECK(f.lower.isIdentity(0.0));
    NormalStream a(7), b(7);
    std::vector<double> z(5);
    b.fill(z);
    const auto p = simulate_cholesky(f, a);
    CHECK(p.values[0] == 0.0);
    for (int k = 1; k <= 5; ++k) CHECK(p.values[k] == z[k - 1]);
  }

  TEST_CASE("Cholesky jitter and failure") {
    Eigen::MatrixXd singular = Eigen::MatrixXd::Ones(3, 3);
    const auto f = factorize_covariance(singular);
    CHECK(f.jitter > 0.0);
    Eigen::MatrixXd indefinite = Eigen::MatrixXd::Identity(3, 3);
    indefinite(2, 2) = -1.0;
    CHECK_THROWS_AS(factorize_covariance(indefinite), FactorizationError);
  }

  TEST_CASE("Cholesky sample covariance matches the analytic one") {
    const auto h = HurstFunction::constant(0.75);
    const auto sampler = PathSampler::create(SimulatorKind::cholesky, h, 64);
    const int M = 10000;
    std::vector<double> prod(M);
    for (int k = 0; k < M; ++k) {
      NormalStream s(derive_seed(17, 64, k));
      const auto p = sampler.sample(s);
      prod[k] = p.values[16] * p.values[48];
    }
    double mean = 0.0;
    for (double x : prod) mean += x;
    mean /= M;
    const double se = std::sqrt(sample_var(prod) / M);
    CHECK(std::abs(mean - fbm_covariance(0.75, 0.25, 0.75)) <= 3.0 * se);
  }

  TEST_CASE("Volterra and Cholesky agree on the variance of X_1") {
    const auto h = HurstFunction::constant(0.75);
    const auto vol = PathSampler::create(SimulatorKind::volterra, h, 64);
    const auto chol = PathSampler::create(SimulatorKind::cholesky, h, 64);
    const std::vector<int> idx{64};
    const auto a = estimate_marginal_variances(vol, h, idx, 10000, 1)[0];
    const auto b = estimate_marginal_variances(chol, h, idx, 10000, 2)[0];
    const double z = (a.variance - b.variance) / std::hypot(a.std_error, b.std_error);
    CHECK(std::abs(z) < 1.96);
  }

  TEST_CASE("moving average at H = 1/2 is the discretized Wiener process") {
    const auto w = build_moving_average_weights(HurstFunction::constant(0.5), 8, 10.0, 2);
    for (int i = 1; i <= 8; ++i) {
      const double t = static_cast<double>(i) / 8;
      for (Eigen::Index j = 0; j < w.support[i]; ++j) {
        const double expected = w.cell_left[j] >= 0.0 && w.cell_left[j] < t ? 1.0 : 0.0;
        CHECK(w.weights(i, j) == doctest::Approx(expected).epsilon(1e-14));
      }
    }
    CHECK(w.max_isometry_error < 1e-12);
  }

  TEST_CASE("moving-average truncation variance") {
    CHECK(moving_average_truncation_variance(0.5, 1.0, 10.0) == 0.0);
    const double v10 = moving_average_truncation_variance(0.75, 1.0, 10.0);
    CHECK(v10 > 0.03);
    CHECK(v10 < 0.06);
    // O(T^{2H-2}) decay
    const double ratio = moving_average_truncation_variance(0.75, 1.0, 1e4) / moving_average_truncation_variance(0.75, 1.0, 1e6);
    CHECK(ratio == doctest::Approx(std::pow(100.0, 0.5)).epsilon(1e-3));
  }

  TEST_CASE("moving average with T = 10 has variance near one") {
    const auto h = HurstFunction::constant(0.75);
    SamplerOptions opts;
    opts.truncation = 10.0;
    const auto sampler = PathSampler::create(SimulatorKind::moving_average, h, 64, opts);
    const std::vector<int> idx{64};
    const auto v = estimate_marginal_variances(sampler, h, idx, 10000, 23)[0];
    const double target = 1.0 - moving_average_truncation_variance(0.75, 1.0, 10.0);
    CHECK(std::abs(v.variance - target) <= 3.0 * v.std_error);
    CHECK(std::abs(v.variance - 1.0) <= 0.05);
  }

  TEST_CASE("simulator names") {
    CHECK(parse_simulator("volterra") == SimulatorKind::volterra);
    CHECK(to_string(SimulatorKind::moving_average) == "moving_average");
    CHECK_THROWS_AS(parse_simulator("fft"), std::invalid_argument);
  }
}
