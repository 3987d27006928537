#include "precipqm/seasons.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <cmath>
#include <stdexcept>

namespace pqm {

Season season_of_month(unsigned month) {
  switch (month) {
    case 12: case 1: case 2: return Season::DJF;
    case 3: case 4: case 5: return Season::MAM;
    case 6: case 7: case 8: return Season::JJA;
    case 9: case 10: case 11: return Season::SON;
    default: throw std::domain_error("month outside 1..12");
  }
}

std::string season_name(Season s) {
  switch (s) {
    case Season::DJF: return "DJF";
    case Season::MAM: return "MAM";
    case Season::JJA: return "JJA";
    case Season::SON: return "SON";
  }
  throw std::logic_error("unreachable season");
}

Season season_from_name(const std::string& name) {
  for (Season s : kAllSeasons)
    if (season_name(s) == name) return s;
  throw std::domain_error("unknown season name: " + name);
}

std::map<Season, std::vector<std::size_t>> season_day_indices(const GridStack& stack) {
  std::map<Season, std::vector<std::size_t>> out;
  for (Season s : kAllSeasons) out[s];
  for (std::size_t t = 0; t < stack.n_time; ++t) {
    const std::chrono::year_month_day ymd{stack.date(t)};
    out[season_of_month(static_cast<unsigned>(ymd.month()))].push_back(t);
  }
  return out;
}

std::map<Season, SeasonalSlice> split_seasons(const GridStack& stack) {
  stack.validate();
  const auto indices = season_day_indices(stack);
  const std::size_t plane = stack.n_lat() * stack.n_lon();
  std::map<Season, SeasonalSlice> out;
  for (const auto& [season, days] : indices) {
    SeasonalSlice slice;
    slice.day_indices = days;
    slice.values.reserve(days.size() * plane);
    for (std::size_t t : days)
      slice.values.insert(slice.values.end(), stack.values.begin() + t * plane,
                          stack.values.begin() + (t + 1) * plane);
    out.emplace(season, std::move(slice));
  }
  return out;
}

SeasonalSample extract_sample(const GridStack& stack, std::size_t lat_idx,
                              std::size_t lon_idx, Season season, double threshold_mm) {
  if (lat_idx >= stack.n_lat() || lon_idx >= stack.n_lon())
    throw std::out_of_range("extract_sample: pixel out of bounds");

  SeasonalSample sample;
  sample.lat_idx = lat_idx;
  sample.lon_idx = lon_idx;
  sample.season = season;
  for (std::size_t t = 0; t < stack.n_time; ++t) {
    const std::chrono::year_month_day ymd{stack.date(t)};
    if (season_of_month(static_cast<unsigned>(ymd.month())) != season) continue;
    const float v = stack.at(t, lat_idx, lon_idx);
    if (std::isnan(v)) continue;
    ++sample.n_days;
    if (v > threshold_mm) sample.wet.push_back(v);
  }
  sample.alpha = sample.n_days == 0
                     ? 1.0
                     : 1.0 - static_cast<double>(sample.wet.size()) /
                                 static_cast<double>(sample.n_days);
  return sample;
}

TTestReport ttest_means(std::span<const double> a, std::span<const double> b, bool welch) {
  if (a.size() < 2 || b.size() < 2)
    throw std::invalid_argument("ttest_means: each sample needs at least 2 values");
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());

  double ma = 0.0, mb = 0.0;
  for (double x : a) ma += x;
  for (double x : b) mb += x;
  ma /= na;
  mb /= nb;

  double va = 0.0, vb = 0.0;
  for (double x : a) va += (x - ma) * (x - ma);
  for (double x : b) vb += (x - mb) * (x - mb);
  va /= na - 1.0;
  vb /= nb - 1.0;

  double stat = 0.0, df = 0.0;
  if (welch) {
    const double se2 = va / na + vb / nb;
    if (se2 <= 0.0) {
      if (ma == mb) throw std::invalid_argument("ttest_means: both samples constant and equal");
      stat = std::numeric_limits<double>::infinity();
      df = na + nb - 2.0;
    } else {
      stat = (ma - mb) / std::sqrt(se2);
      df = se2 * se2 /
           (va * va / (na * na * (na - 1.0)) + vb * vb / (nb * nb * (nb - 1.0)));
    }
  } else {
    const double pooled = ((na - 1.0) * va + (nb - 1.0) * vb) / (na + nb - 2.0);
    df = na + nb - 2.0;
    if (pooled <= 0.0) {
      if (ma == mb) throw std::invalid_argument("ttest_means: both samples constant and equal");
      stat = std::numeric_limits<double>::infinity();
    } else {
      stat = (ma - mb) / std::sqrt(pooled * (1.0 / na + 1.0 / nb));
    }
  }

  TTestReport report;
  report.statistic = stat;
  if (std::isinf(stat)) {
    report.p_value = 0.0;
  } else if (stat == 0.0) {
    report.p_value = 1.0;
  } else {
    const boost::math::students_t dist(df);
    report.p_value = 2.0 * boost::math::cdf(dist, -std::abs(stat));
  }
  report.rejected_at_5pct = report.p_value < 0.05;
  return report;
}

double rejection_proportion(
    const std::vector<std::pair<std::vector<double>, std::vector<double>>>& pairs,
    bool welch) {
  if (pairs.empty()) throw std::invalid_argument("rejection_proportion: empty grid");
  std::size_t rejected = 0;
  for (const auto& [a, b] : pairs)
    if (ttest_means(a, b, welch).rejected_at_5pct) ++rejected;
  return static_cast<double>(rejected) / static_cast<double>(pairs.size());
}

}  // namespace pqm
