#ifndef PRECIPQM_FITTING_HPP
#define PRECIPQM_FITTING_HPP

#include <cstddef>
#include <span>
#include <stdexcept>

#include "precipqm/distributions.hpp"

namespace pqm {

struct insufficient_sample : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Parametric families are fitted on at least this many wet days; callers
// fall back to the empirical model below it.
inline constexpr std::size_t kMinParametricSample = 20;

struct FitConfig {
  int max_iterations = 2000;
  double tolerance = 1e-9;   // simplex diameter
  int restarts = 3;          // jittered initializations, best likelihood wins
  double censor_mm = 3.0;    // EGP left-censor, raw mm
  double shift_mm = 1.0;     // wet threshold / location shift
};

struct FitResult {
  DistModel model;
  double neg_log_lik = 0.0;
  bool converged = false;
  int iterations = 0;
  std::size_t sample_size = 0;
};

FitResult fit_gamma(std::span<const double> wet, const FitConfig& cfg = {});
FitResult fit_expw(std::span<const double> wet, const FitConfig& cfg = {});
FitResult fit_egp(std::span<const double> wet, const FitConfig& cfg = {});
FitResult fit_empirical(std::span<const double> wet);

// Negative log-likelihoods on the raw (unshifted) sample; exposed for tests.
double neg_log_lik(const DistModel& model, std::span<const double> wet);
// Left-censored EGP likelihood: density above the censor, mass F(censor) at
// or below it.
double neg_log_lik_egp_censored(const EGPParams& params, std::span<const double> wet);

}  // namespace pqm

#endif
