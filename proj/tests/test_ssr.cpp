#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "precipqm/distributions.hpp"
#include "precipqm/ssr.hpp"

using namespace pqm;

namespace {

TransferFunction exp_transfer() {
  // both sides exponential(mean 2) shifted by the 1 mm threshold
  TransferFunction tf;
  tf.model_ref = DistModel{GammaParams{1.0, 2.0, 1.0}};
  tf.obs_ref = DistModel{GammaParams{1.0, 2.0, 1.0}};
  tf.alpha_mod = 0.4;
  tf.alpha_obs = 0.5;
  tf.threshold_mm = 1.0;
  return tf;
}

}  // namespace

TEST_CASE("jitter only touches sub-threshold values") {
  const std::vector<double> series{0.0, 2.0, 0.4, 1.0, 5.5,
                                   std::numeric_limits<double>::quiet_NaN()};
  SSRConfig cfg;
  cfg.threshold_mm = 1.0;
  cfg.seed = 11;
  const auto out = ssr_jitter(series, cfg, 3);
  REQUIRE(out.size() == series.size());
  CHECK(out[1] == 2.0);
  CHECK(out[3] == 1.0);
  CHECK(out[4] == 5.5);
  CHECK(std::isnan(out[5]));
  for (std::size_t k : {0, 2}) {
    CHECK(out[k] > 0.0);
    CHECK(out[k] < 1.0);
  }
}

TEST_CASE("jitter draws are keyed by position, not evaluation order") {
  SSRConfig cfg;
  cfg.threshold_mm = 1.0;
  cfg.seed = 42;
  const std::vector<double> zeros(10, 0.0);
  const auto full = ssr_jitter(zeros, cfg, 7);
  // bit-identical across runs
  CHECK(ssr_jitter(zeros, cfg, 7) == full);
  // a different stream or seed decorrelates
  CHECK(ssr_jitter(zeros, cfg, 8) != full);
  SSRConfig other = cfg;
  other.seed = 43;
  CHECK(ssr_jitter(zeros, other, 7) != full);
}

TEST_CASE("jitter of long dry series has uniform mean") {
  SSRConfig cfg;
  cfg.threshold_mm = 1.0;
  cfg.seed = 5;
  const std::vector<double> zeros(50000, 0.0);
  const auto out = ssr_jitter(zeros, cfg, 0);
  double mean = 0.0;
  for (double v : out) mean += v;
  mean /= static_cast<double>(out.size());
  CHECK(mean == doctest::Approx(0.5).epsilon(0.01));
}

TEST_CASE("extended cdf matches the worked example") {
  TransferFunction tf = exp_transfer();
  // 0.4 + 0.6 * (1 - e^{-1})
  CHECK(extended_cdf(tf, 3.0) == doctest::Approx(0.4 + 0.6 * (1.0 - std::exp(-1.0)))
                                     .epsilon(1e-10));
  CHECK(extended_cdf(tf, 0.0) == 0.0);
  CHECK(extended_cdf(tf, 1.0) == doctest::Approx(0.4));  // branch junction
  CHECK(extended_cdf(tf, 0.5) == doctest::Approx(0.2));  // linear branch
  // nondecreasing across the threshold
  double prev = -1.0;
  for (double x = 0.0; x <= 10.0; x += 0.01) {
    const double p = extended_cdf(tf, x);
    CHECK(p >= prev);
    prev = p;
  }
}

TEST_CASE("extended inverse matches the worked example") {
  TransferFunction tf = exp_transfer();
  // F^{-1}((0.75-0.5)/0.5) with exponential(mean 2) shifted 1: 1 + 2 ln 2
  CHECK(extended_inverse(tf, 0.75) ==
        doctest::Approx(1.0 + 2.0 * std::log(2.0)).epsilon(1e-10));
  CHECK(extended_inverse(tf, 0.0) == 0.0);
  CHECK(extended_inverse(tf, 0.5) == doctest::Approx(1.0));  // p = alpha_obs -> th
  CHECK(extended_inverse(tf, 0.25) == doctest::Approx(0.5));  // linear branch
}

TEST_CASE("extended transforms are mutually inverse above the threshold") {
  TransferFunction tf = exp_transfer();
  tf.alpha_obs = tf.alpha_mod = 0.45;
  for (double x : {1.0, 1.3, 2.0, 4.7, 11.0})
    CHECK(extended_inverse(tf, extended_cdf(tf, x)) == doctest::Approx(x).epsilon(1e-8));
}

TEST_CASE("identity transfer maps wet days to themselves and zeroes drizzle") {
  TransferFunction tf = exp_transfer();
  tf.alpha_obs = tf.alpha_mod = 0.5;
  SSRConfig cfg;
  cfg.threshold_mm = 1.0;
  cfg.seed = 3;
  const std::vector<double> jittered{2.5, 0.7, 8.0, 0.01, 1.5,
                                     std::numeric_limits<double>::quiet_NaN()};
  const auto out = quantile_map(tf, jittered, cfg);
  CHECK(out[0] == doctest::Approx(2.5).epsilon(1e-8));
  CHECK(out[2] == doctest::Approx(8.0).epsilon(1e-8));
  CHECK(out[4] == doctest::Approx(1.5).epsilon(1e-8));
  CHECK(out[1] == 0.0);  // stays below th, re-zeroed
  CHECK(out[3] == 0.0);
  CHECK(std::isnan(out[5]));
}

TEST_CASE("mapping preserves order") {
  TransferFunction tf = exp_transfer();
  tf.model_ref = DistModel{GammaParams{1.0, 3.0, 1.0}};
  std::vector<double> jittered;
  for (int i = 0; i < 200; ++i) jittered.push_back(0.05 + i * 0.11);
  SSRConfig cfg;
  const auto out = quantile_map(tf, jittered, cfg);
  for (std::size_t i = 1; i < out.size(); ++i) CHECK(out[i] >= out[i - 1]);
}

TEST_CASE("corrected reference period reproduces the target dry fraction") {
  // mod days: alpha_mod dry + wet from the model law; after SSR mapping the
  // dry fraction must land on alpha_obs within 1/n
  const double alpha_mod = 0.4, alpha_obs = 0.55;
  const std::size_t n = 20000;
  TransferFunction tf;
  tf.model_ref = DistModel{GammaParams{1.0, 3.0, 1.0}};
  tf.obs_ref = DistModel{GammaParams{1.0, 2.0, 1.0}};
  tf.alpha_mod = alpha_mod;
  tf.alpha_obs = alpha_obs;
  tf.threshold_mm = 1.0;

  std::vector<double> series;
  const auto wet = sample(tf.model_ref, n, 17);
  for (std::size_t i = 0; i < n; ++i) {
    const double u = static_cast<double>(i) / n;
    series.push_back(u < alpha_mod ? 0.0 : wet[i]);
  }
  SSRConfig cfg;
  cfg.seed = 2;
  const auto jittered = ssr_jitter(series, cfg, 0);
  const auto out = quantile_map(tf, jittered, cfg);
  const double dry = static_cast<double>(std::count(out.begin(), out.end(), 0.0)) / n;
  CHECK(std::abs(dry - alpha_obs) < 0.01);

  // corrected wet-day mean approaches the observation wet-day mean (3 mm
  // intensity above the 1 mm threshold -> mean 3)
  double wsum = 0.0;
  std::size_t wcount = 0;
  for (double v : out)
    if (v > 0.0) {
      wsum += v;
      ++wcount;
    }
  CHECK(wsum / static_cast<double>(wcount) == doctest::Approx(3.0).epsilon(0.02));
}

TEST_CASE("a future drier than the reference stays drier than the target") {
  TransferFunction tf = exp_transfer();
  tf.alpha_mod = 0.3;
  tf.alpha_obs = 0.5;
  const std::size_t n = 10000;
  // future sub-threshold fraction 0.45 > alpha_mod
  std::vector<double> series;
  const auto wet = sample(tf.model_ref, n, 23);
  for (std::size_t i = 0; i < n; ++i)
    series.push_back(static_cast<double>(i) / n < 0.45 ? 0.0 : wet[i]);
  SSRConfig cfg;
  cfg.seed = 9;
  const auto out = quantile_map(tf, ssr_jitter(series, cfg, 0), cfg);
  const double dry = static_cast<double>(std::count(out.begin(), out.end(), 0.0)) / n;
  CHECK(dry > tf.alpha_obs);
}

TEST_CASE("transfer validation flags inconsistent probabilities") {
  TransferFunction tf = exp_transfer();
  tf.alpha_mod = 1.5;
  CHECK_THROWS_AS(tf.validate(), invalid_parameter);
  tf = exp_transfer();
  tf.threshold_mm = 0.0;
  CHECK_THROWS_AS(tf.validate(), invalid_parameter);
}
