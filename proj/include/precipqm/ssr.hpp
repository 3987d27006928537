#ifndef PRECIPQM_SSR_HPP
#define PRECIPQM_SSR_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "precipqm/distributions.hpp"

namespace pqm {

enum class ThresholdMode { common_threshold, dataset_minimum };

struct SSRConfig {
  double threshold_mm = 1.0;
  std::uint64_t seed = 0;
  ThresholdMode mode = ThresholdMode::common_threshold;
};

// Quantile-mapping transfer with the dry-day extension: the forward CDF of
// the model reference and the inverse CDF of the observation reference, both
// extended linearly below the wet threshold by the dry-day probabilities.
struct TransferFunction {
  DistModel model_ref;
  DistModel obs_ref;
  double alpha_mod = 0.0;  // dry-day probability, model reference
  double alpha_obs = 0.0;  // dry-day probability, observation reference
  double threshold_mm = 1.0;
  // alpha_obs == 0 leaves the linear branch of the inverse empty; such a
  // pixel is flagged so the pipeline can report it.
  bool zero_dry_obs = false;

  void validate() const;
};

// Replaces every value below the threshold by an independent uniform on
// (0, threshold). Draws are keyed by (seed, stream_key, position) so
// evaluation order and parallel scheduling never change the output.
std::vector<double> ssr_jitter(std::span<const double> series, const SSRConfig& cfg,
                               std::uint64_t stream_key = 0);

double extended_cdf(const TransferFunction& tf, double x);
double extended_inverse(const TransferFunction& tf, double p);

// Full SSR quantile mapping of an already-jittered future series; mapped
// values below the threshold are zeroed.
std::vector<double> quantile_map(const TransferFunction& tf,
                                 std::span<const double> future_jittered,
                                 const SSRConfig& cfg);

}  // namespace pqm

#endif
