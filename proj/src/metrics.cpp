#include "precipqm/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pqm {

QuantileGrid::QuantileGrid(std::size_t n_quantiles) {
  if (n_quantiles < 1) throw std::invalid_argument("QuantileGrid: n must be >= 1");
  probs.resize(n_quantiles);
  for (std::size_t i = 1; i <= n_quantiles; ++i)
    probs[i - 1] = static_cast<double>(i) / static_cast<double>(n_quantiles);
}

std::vector<double> sample_quantiles(std::span<const double> sample,
                                     const QuantileGrid& grid) {
  if (sample.empty()) throw std::invalid_argument("sample_quantiles: empty sample");
  std::vector<double> sorted(sample.begin(), sample.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  std::vector<double> q(grid.n());
  for (std::size_t i = 0; i < grid.n(); ++i) {
    auto k = static_cast<std::size_t>(std::ceil(grid.probs[i] * static_cast<double>(n)));
    k = std::min(std::max<std::size_t>(k, 1), n);
    q[i] = sorted[k - 1];
  }
  return q;
}

double mae(std::span<const double> corrected_wet, std::span<const double> target_wet,
           const QuantileGrid& grid) {
  const auto qc = sample_quantiles(corrected_wet, grid);
  const auto qt = sample_quantiles(target_wet, grid);
  double sum = 0.0;
  for (std::size_t i = 0; i < grid.n(); ++i) sum += std::abs(qc[i] - qt[i]);
  return sum / static_cast<double>(grid.n());
}

double mae95sup(std::span<const double> corrected_wet,
                std::span<const double> target_wet, const QuantileGrid& grid) {
  if (grid.n() < 20) throw std::invalid_argument("mae95sup: needs at least 20 quantiles");
  const auto qc = sample_quantiles(corrected_wet, grid);
  const auto qt = sample_quantiles(target_wet, grid);
  const auto i0 = static_cast<std::size_t>(
      std::ceil(0.95 * static_cast<double>(grid.n())));
  double sum = 0.0;
  // normalized by the number of included terms (indices i0..n)
  for (std::size_t i = i0; i <= grid.n(); ++i) sum += std::abs(qc[i - 1] - qt[i - 1]);
  return sum / static_cast<double>(grid.n() - i0 + 1);
}

double rmse(std::span<const double> corrected_wet, std::span<const double> target_wet,
            const QuantileGrid& grid) {
  const auto qc = sample_quantiles(corrected_wet, grid);
  const auto qt = sample_quantiles(target_wet, grid);
  double sum = 0.0;
  for (std::size_t i = 0; i < grid.n(); ++i) {
    const double d = qc[i] - qt[i];
    sum += d * d;
  }
  return std::sqrt(sum / static_cast<double>(grid.n()));
}

double dry_prob_diff(double target_alpha, double model_alpha) {
  if (!(target_alpha >= 0.0 && target_alpha <= 1.0) ||
      !(model_alpha >= 0.0 && model_alpha <= 1.0))
    throw std::domain_error("dry_prob_diff: probabilities outside [0,1]");
  return target_alpha - model_alpha;
}

PixelMetrics compute_pixel_metrics(std::span<const double> corrected_wet,
                                   std::span<const double> target_wet,
                                   double target_alpha, double model_alpha,
                                   const QuantileGrid& grid) {
  PixelMetrics m;
  m.mae = mae(corrected_wet, target_wet, grid);
  m.mae95sup = mae95sup(corrected_wet, target_wet, grid);
  m.rmse = rmse(corrected_wet, target_wet, grid);
  m.dry_prob_diff = dry_prob_diff(target_alpha, model_alpha);
  return m;
}

PixelMetrics metric_diff(const PixelMetrics& f, const PixelMetrics& g) {
  return {f.mae - g.mae, f.mae95sup - g.mae95sup, f.rmse - g.rmse,
          f.dry_prob_diff - g.dry_prob_diff};
}

BoxStats aggregate(std::span<const double> values) {
  std::vector<double> clean;
  clean.reserve(values.size());
  std::size_t n_nan = 0;
  for (double v : values) {
    if (std::isnan(v))
      ++n_nan;
    else
      clean.push_back(v);
  }
  if (clean.empty()) throw std::invalid_argument("aggregate: no finite values");
  std::sort(clean.begin(), clean.end());

  const std::size_t n = clean.size();
  auto step_q = [&](double p) {
    auto k = static_cast<std::size_t>(std::ceil(p * static_cast<double>(n)));
    k = std::min(std::max<std::size_t>(k, 1), n);
    return clean[k - 1];
  };

  BoxStats s;
  s.n = n;
  s.n_nan = n_nan;
  s.median = step_q(0.5);
  s.q1 = step_q(0.25);
  s.q3 = step_q(0.75);
  const double iqr = s.q3 - s.q1;
  const double lo_fence = s.q1 - 1.5 * iqr;
  const double hi_fence = s.q3 + 1.5 * iqr;
  s.whisker_low = s.median;
  s.whisker_high = s.median;
  bool first = true;
  for (double v : clean) {
    if (v < lo_fence || v > hi_fence) {
      s.outliers.push_back(v);
    } else if (first) {
      s.whisker_low = s.whisker_high = v;
      first = false;
    } else {
      s.whisker_low = std::min(s.whisker_low, v);
      s.whisker_high = std::max(s.whisker_high, v);
    }
  }
  return s;
}

}  // namespace pqm
