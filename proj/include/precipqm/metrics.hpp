#ifndef PRECIPQM_METRICS_HPP
#define PRECIPQM_METRICS_HPP

#include <cstddef>
#include <span>
#include <vector>

namespace pqm {

// Evaluation quantile grid p_i = i/n, i = 1..n; p = 1 maps to the sample
// maximum through the step inverse.
struct QuantileGrid {
  explicit QuantileGrid(std::size_t n_quantiles = 50);
  std::size_t n() const { return probs.size(); }
  std::vector<double> probs;
};

// Empirical step-inverse quantiles of a sample at the grid's probabilities.
std::vector<double> sample_quantiles(std::span<const double> sample,
                                     const QuantileGrid& grid);

double mae(std::span<const double> corrected_wet, std::span<const double> target_wet,
           const QuantileGrid& grid);
double mae95sup(std::span<const double> corrected_wet,
                std::span<const double> target_wet, const QuantileGrid& grid);
double rmse(std::span<const double> corrected_wet, std::span<const double> target_wet,
            const QuantileGrid& grid);

double dry_prob_diff(double target_alpha, double model_alpha);

struct PixelMetrics {
  double mae = 0.0;
  double mae95sup = 0.0;
  double rmse = 0.0;
  double dry_prob_diff = 0.0;
};

PixelMetrics compute_pixel_metrics(std::span<const double> corrected_wet,
                                   std::span<const double> target_wet,
                                   double target_alpha, double model_alpha,
                                   const QuantileGrid& grid);

// Signed per-metric differences; negative favors f.
PixelMetrics metric_diff(const PixelMetrics& f, const PixelMetrics& g);

// Boxplot summary (median, quartiles, 1.5 IQR whiskers, outliers); NaN
// entries are excluded and counted.
struct BoxStats {
  double median = 0.0;
  double q1 = 0.0;
  double q3 = 0.0;
  double whisker_low = 0.0;
  double whisker_high = 0.0;
  std::vector<double> outliers;
  std::size_t n = 0;
  std::size_t n_nan = 0;
};

BoxStats aggregate(std::span<const double> values);

}  // namespace pqm

#endif
