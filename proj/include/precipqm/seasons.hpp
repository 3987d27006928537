#ifndef PRECIPQM_SEASONS_HPP
#define PRECIPQM_SEASONS_HPP

#include <array>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "precipqm/grid_io.hpp"

namespace pqm {

// Meteorological seasons; DJF groups December with the following
// January-February.
enum class Season { DJF, MAM, JJA, SON };

inline constexpr std::array<Season, 4> kAllSeasons{Season::DJF, Season::MAM,
                                                   Season::JJA, Season::SON};

Season season_of_month(unsigned month);
std::string season_name(Season s);
Season season_from_name(const std::string& name);

// Days of the stack belonging to each season, in date order. The first
// partial DJF (no preceding December) keeps its available days.
std::map<Season, std::vector<std::size_t>> season_day_indices(const GridStack& stack);

// Seasonal sub-stacks; the union of the four outputs is the input, each day
// assigned exactly once. Sub-stacks keep their day list because seasonal
// dates are not contiguous.
struct SeasonalSlice {
  std::vector<std::size_t> day_indices;  // into the parent stack
  std::vector<float> values;             // time-major, same grid as parent
};

std::map<Season, SeasonalSlice> split_seasons(const GridStack& stack);

struct SeasonalSample {
  std::size_t lat_idx = 0;
  std::size_t lon_idx = 0;
  Season season = Season::DJF;
  std::vector<double> wet;  // values strictly above the threshold
  double alpha = 1.0;       // dry-day probability
  std::size_t n_days = 0;   // non-missing days in the season
};

// Wet-day extraction for one pixel; NaN days are excluded from both the
// numerator and the denominator.
SeasonalSample extract_sample(const GridStack& stack, std::size_t lat_idx,
                              std::size_t lon_idx, Season season,
                              double threshold_mm = 1.0);

struct TTestReport {
  double statistic = 0.0;
  double p_value = 1.0;
  bool rejected_at_5pct = false;
};

// Two-sample Student's t with pooled variance (Welch behind the flag);
// two-sided p-value.
TTestReport ttest_means(std::span<const double> a, std::span<const double> b,
                        bool welch = false);

// Fraction of pixel pairs rejected at the 5% level.
double rejection_proportion(
    const std::vector<std::pair<std::vector<double>, std::vector<double>>>& pairs,
    bool welch = false);

}  // namespace pqm

#endif
