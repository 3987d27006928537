#ifndef PRECIPQM_STITCH_HPP
#define PRECIPQM_STITCH_HPP

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "precipqm/distributions.hpp"
#include "precipqm/fitting.hpp"

namespace pqm {

// Per-order-statistic goodness-of-fit profile. k_values[i] is the two-sided
// Beta order-statistic p-value of u_(i+1) = F(x_(i+1)); an index is rejected
// when its p-value falls below the per-index threshold.
struct GofProfile {
  std::vector<double> k_values;
  std::vector<double> threshold;
  std::vector<bool> rejected;

  std::size_t size() const { return k_values.size(); }
  bool any_rejected() const;
  // rejection anywhere in the bulk, indices in (n/4, 3n/4)
  bool bulk_rejected() const;
  // rejection restricted to a 1-based index range [lo, hi]
  bool rejected_in(std::size_t lo, std::size_t hi) const;
};

// 1-based order-statistic indices bounding the rejected tails.
struct RejectionIndices {
  std::optional<std::size_t> lower;  // i_l: largest rejected index in the lower half
  std::optional<std::size_t> upper;  // i_u: smallest rejected index in the upper half
};

struct StitchCandidate {
  std::string tag;
  std::size_t rejection_count = 0;
  double tail_error_mm = 0.0;  // max |model quantile - sample quantile|, top 5%
};

struct StitchDecision {
  StitchModel chosen;
  std::string label;
  RejectionIndices indices;  // of the adopted core's profile
  std::vector<StitchCandidate> candidates;
};

struct missing_candidate : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Two-sided Beta(i, n-i+1) p-values of the probability-integral transforms,
// against the penalized per-index threshold at `level`.
GofProfile bj_pvalues(std::span<const double> wet, const DistModel& model,
                      double level = 0.05);

// Per-index thresholds t_i = C * level / (n * w_i) with tail-emphasis
// weights w_i = 1 / (1 + log(n / min(i, n-i+1))). The constant C is
// Monte-Carlo calibrated (memoized per (n, level)) so the family-wise
// false-rejection rate under the null equals `level`.
std::vector<double> pbj_threshold(std::size_t n, double level);

RejectionIndices rejection_indices(const GofProfile& profile);

// Worst absolute quantile error over the top 5% of plotting positions
// i/(n+1), model against the sorted sample.
double upper_tail_error(std::span<const double> sorted_wet, const DistModel& model);

// Candidate selection: EGP core when accepted, tail replacement by ExpW or
// the empirical distribution at i_l/n and i_u/n, ExpW core when the EGP
// misbehaves, empirical fallback when every parametric core fails its bulk.
// `fits` must contain "egp", "expw" and "emp" entries.
StitchDecision build_stitch(std::span<const double> wet,
                            const std::map<std::string, FitResult>& fits,
                            double level = 0.05);

struct ReplacementSummary {
  // season label -> stitch label -> count
  std::map<std::string, std::map<std::string, std::size_t>> counts;
  // season label -> replaced fractions (p_lower resp. 1 - p_upper), only for
  // decisions that actually replaced that tail
  std::map<std::string, std::vector<double>> lower_fractions;
  std::map<std::string, std::vector<double>> upper_fractions;
};

ReplacementSummary replacement_stats(
    const std::vector<std::pair<std::string, const StitchDecision*>>& decisions);

}  // namespace pqm

#endif
