#include "precipqm/ssr.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "precipqm/rng.hpp"

namespace pqm {

void TransferFunction::validate() const {
  if (!(threshold_mm > 0.0))
    throw invalid_parameter("transfer: threshold must be > 0");
  if (!(alpha_mod >= 0.0 && alpha_mod <= 1.0) || !(alpha_obs >= 0.0 && alpha_obs <= 1.0))
    throw invalid_parameter("transfer: dry-day probabilities must be in [0,1]");
  model_ref.validate();
  obs_ref.validate();
}

std::vector<double> ssr_jitter(std::span<const double> series, const SSRConfig& cfg,
                               std::uint64_t stream_key) {
  if (!(cfg.threshold_mm > 0.0))
    throw invalid_parameter("ssr_jitter: threshold must be > 0");
  std::vector<double> out(series.begin(), series.end());
  for (std::size_t t = 0; t < out.size(); ++t) {
    if (std::isnan(out[t])) continue;
    if (out[t] < cfg.threshold_mm)
      out[t] = cfg.threshold_mm * keyed_uniform(cfg.seed, stream_key, t);
  }
  return out;
}

double extended_cdf(const TransferFunction& tf, double x) {
  if (x < 0.0) throw std::domain_error("extended_cdf: x must be >= 0");
  const double th = tf.threshold_mm;
  if (x < th) return tf.alpha_mod / th * x;
  return cdf(tf.model_ref, x) * (1.0 - tf.alpha_mod) + tf.alpha_mod;
}

double extended_inverse(const TransferFunction& tf, double p) {
  if (!(p >= 0.0 && p <= 1.0))
    throw std::domain_error("extended_inverse: p outside [0,1]");
  const double a = tf.alpha_obs;
  if (p < a) return tf.threshold_mm / a * p;
  if (a >= 1.0) return tf.threshold_mm;  // all-dry reference
  return quantile(tf.obs_ref, (p - a) / (1.0 - a));
}

std::vector<double> quantile_map(const TransferFunction& tf,
                                 std::span<const double> future_jittered,
                                 const SSRConfig& cfg) {
  tf.validate();
  std::vector<double> out;
  out.reserve(future_jittered.size());
  for (double x : future_jittered) {
    if (std::isnan(x)) {
      out.push_back(x);
      continue;
    }
    // keep strictly below 1 so parametric inverses stay finite
    const double p = std::min(extended_cdf(tf, x), 1.0 - 1e-12);
    double y = extended_inverse(tf, p);
    if (y < cfg.threshold_mm) y = 0.0;
    out.push_back(y);
  }
  return out;
}

}  // namespace pqm
