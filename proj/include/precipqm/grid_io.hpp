#ifndef PRECIPQM_GRID_IO_HPP
#define PRECIPQM_GRID_IO_HPP

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "precipqm/distributions.hpp"

namespace pqm {

struct malformed_header : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct truncated_payload : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct dimension_mismatch : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct parse_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Dated daily precipitation cube, time-major then lat then lon.
// Missing values are NaN.
struct GridStack {
  std::vector<double> lats;
  std::vector<double> lons;
  std::chrono::sys_days start_date{};
  std::size_t n_time = 0;
  std::vector<float> values;

  std::size_t n_lat() const { return lats.size(); }
  std::size_t n_lon() const { return lons.size(); }
  std::size_t index(std::size_t t, std::size_t i, std::size_t j) const {
    return (t * n_lat() + i) * n_lon() + j;
  }
  float at(std::size_t t, std::size_t i, std::size_t j) const {
    return values[index(t, i, j)];
  }
  float& at(std::size_t t, std::size_t i, std::size_t j) {
    return values[index(t, i, j)];
  }
  std::chrono::sys_days date(std::size_t t) const {
    return start_date + std::chrono::days(static_cast<long>(t));
  }
  std::size_t pixel_key(std::size_t i, std::size_t j) const { return i * n_lon() + j; }

  void validate() const;
};

// GSF: one JSON header line, then the raw little-endian float32 payload.
GridStack read_gsf(const std::filesystem::path& path);
void write_gsf(const GridStack& stack, const std::filesystem::path& path);

// Strict grid equality between two stacks (tolerance 1e-9 degrees).
void require_same_grid(const GridStack& a, const GridStack& b);

struct PixelSeries {
  std::vector<std::chrono::sys_days> dates;
  std::vector<double> values;  // NaN = missing
};

// Two columns: ISO date, value in mm/day; a blank value is missing.
PixelSeries read_pixel_csv(const std::filesystem::path& path);

struct FitDiagnostics {
  double neg_log_lik = 0.0;
  bool converged = false;
  int iterations = 0;
};

struct ModelRecord {
  int lat_idx = 0;
  int lon_idx = 0;
  std::string season;     // "DJF", "MAM", "JJA", "SON"
  std::string model_tag;  // requested family: gamma/expw/egp/emp/stitchbj
  DistModel model;
  double alpha = 0.0;  // dry-day probability of the pixel-season
  std::size_t n_days = 0;
  std::size_t n_wet = 0;
  FitDiagnostics diagnostics;
  std::string stitch_label;  // empty unless model_tag == "stitchbj"
  std::optional<std::size_t> i_lower;
  std::optional<std::size_t> i_upper;
  bool empirical_fallback = false;  // true when the wet sample was too small
};

struct ModelStore {
  static constexpr int kVersion = 1;
  std::vector<ModelRecord> records;

  const ModelRecord* find(int lat_idx, int lon_idx, const std::string& season,
                          const std::string& model_tag) const;
};

void save_models(const ModelStore& store, const std::filesystem::path& path);
ModelStore load_models(const std::filesystem::path& path);

// JSON (de)serialization of a distribution model; used by the model store
// and the diagnostics export.
std::string model_to_json(const DistModel& model);
DistModel model_from_json(const std::string& json_text);

}  // namespace pqm

#endif
