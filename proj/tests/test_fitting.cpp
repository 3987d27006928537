#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "precipqm/distributions.hpp"
#include "precipqm/fitting.hpp"

using namespace pqm;

namespace {

// Direct likelihood oracle written independently of the library routine.
double gamma_nll_oracle(double shape, double scale, double shift,
                        const std::vector<double>& wet) {
  double s = 0.0;
  for (double x : wet) {
    const double y = x - shift;
    s -= (shape - 1.0) * std::log(y) - y / scale - std::lgamma(shape) -
         shape * std::log(scale);
  }
  return s;
}

}  // namespace

TEST_CASE("gamma fit recovers generating parameters") {
  const GammaParams truth{0.85, 5.5, 1.0};
  const auto data = sample(DistModel{truth}, 10000, 4242);
  const FitResult fit = fit_gamma(data);
  REQUIRE(fit.model.is<GammaParams>());
  const auto& p = fit.model.as<GammaParams>();
  CHECK(fit.converged);
  CHECK(p.shape == doctest::Approx(truth.shape).epsilon(0.05));
  CHECK(p.scale == doctest::Approx(truth.scale).epsilon(0.05));
  CHECK(p.shift == truth.shift);
  // fitted likelihood can only improve on the truth's for this sample
  CHECK(fit.neg_log_lik <= neg_log_lik(DistModel{truth}, data) + 1e-6);
}

TEST_CASE("gamma likelihood matches a direct oracle") {
  const std::vector<double> wet{2.0, 3.5, 7.1, 1.4, 10.0};
  const GammaParams p{1.3, 2.2, 1.0};
  CHECK(neg_log_lik(DistModel{p}, wet) ==
        doctest::Approx(gamma_nll_oracle(1.3, 2.2, 1.0, wet)).epsilon(1e-12));
}

TEST_CASE("expw fit recovers a Weibull sample with exponent near one") {
  const ExpWParams truth{1.4, 4.0, 1.0, 1.0};
  const auto data = sample(DistModel{truth}, 10000, 99);
  const FitResult fit = fit_expw(data);
  REQUIRE(fit.model.is<ExpWParams>());
  CHECK(fit.converged);
  CHECK(fit.neg_log_lik <= neg_log_lik(DistModel{truth}, data) + 1e-6);
  // ExpW is weakly identified; check the implied distribution, not raw
  // parameters, through a few central quantiles
  for (double p : {0.25, 0.5, 0.75, 0.9})
    CHECK(quantile(fit.model, p) ==
          doctest::Approx(quantile(DistModel{truth}, p)).epsilon(0.05));
}

TEST_CASE("egp fit recovers xi within 0.1 under censoring") {
  const EGPParams truth{3.0, 0.15, 1.2, 1.0, 3.0};
  const auto data = sample(DistModel{truth}, 10000, 2718);
  const FitResult fit = fit_egp(data);
  REQUIRE(fit.model.is<EGPParams>());
  const auto& p = fit.model.as<EGPParams>();
  CHECK(fit.converged);
  CHECK(std::abs(p.xi - truth.xi) < 0.1);
  CHECK(fit.neg_log_lik <=
        neg_log_lik_egp_censored(truth, data) + 1e-6);
}

TEST_CASE("censored egp likelihood matches a hand computation") {
  // two observations below the 3 mm censor contribute mass log F(3), the
  // others contribute log density
  const std::vector<double> wet{1.5, 2.5, 4.0, 9.0};
  const EGPParams p{2.0, 0.2, 1.1, 1.0, 3.0};
  const DistModel m{p};
  const double expected =
      -(2.0 * std::log(cdf(m, 3.0)) + log_pdf(m, 4.0) + log_pdf(m, 9.0));
  CHECK(neg_log_lik_egp_censored(p, wet) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("censored egp likelihood is continuous in the censor level") {
  const std::vector<double> wet{1.5, 2.5, 4.0, 6.0, 9.0, 12.0};
  EGPParams p{2.5, 0.1, 1.0, 1.0, 3.0};
  // vary the censor away from any observation: no term switches branch, so
  // the likelihood moves smoothly
  auto at = [&](double censor) {
    EGPParams q = p;
    q.censor = censor;
    return neg_log_lik_egp_censored(q, wet);
  };
  CHECK(at(3.0) == doctest::Approx(at(3.0 + 1e-7)).epsilon(1e-5));
  CHECK(at(5.0) == doctest::Approx(at(5.0 - 1e-7)).epsilon(1e-5));
}

TEST_CASE("small samples are refused by the parametric fits") {
  const std::vector<double> tiny(kMinParametricSample - 1, 2.0);
  CHECK_THROWS_AS(fit_gamma(tiny), insufficient_sample);
  CHECK_THROWS_AS(fit_expw(tiny), insufficient_sample);
  CHECK_THROWS_AS(fit_egp(tiny), insufficient_sample);
}

TEST_CASE("empirical fit keeps the sample") {
  const std::vector<double> wet{3.0, 1.5, 9.0};
  const FitResult fit = fit_empirical(wet);
  REQUIRE(fit.model.is<EmpiricalModel>());
  CHECK(fit.model.as<EmpiricalModel>().sorted_sample() ==
        std::vector<double>{1.5, 3.0, 9.0});
  CHECK(fit.converged);
  CHECK_THROWS_AS(fit_empirical({}), insufficient_sample);
}

TEST_CASE("fitting is bit-deterministic") {
  const auto data = sample(DistModel{GammaParams{0.9, 4.0, 1.0}}, 500, 5);
  for (auto* fn : {&fit_gamma, &fit_expw, &fit_egp}) {
    const FitResult a = fn(data, {});
    const FitResult b = fn(data, {});
    CHECK(a.neg_log_lik == b.neg_log_lik);
    CHECK(a.iterations == b.iterations);
    for (double p : {0.1, 0.5, 0.9})
      CHECK(quantile(a.model, p) == quantile(b.model, p));
  }
}
