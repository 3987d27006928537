#ifndef PRECIPQM_PIPELINE_HPP
#define PRECIPQM_PIPELINE_HPP

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "precipqm/grid_io.hpp"
#include "precipqm/seasons.hpp"

namespace pqm {

struct usage_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct RunConfig {
  std::filesystem::path obs_path;      // observation reference stack
  std::filesystem::path mod_ref_path;  // model reference stack
  std::filesystem::path mod_fut_path;  // model future stack (to correct)
  std::filesystem::path target_path;   // validation target stack (evaluate)
  std::filesystem::path output_dir = "out";
  std::vector<Season> seasons{kAllSeasons.begin(), kAllSeasons.end()};
  std::vector<std::string> models{"gamma", "expw", "egp", "emp", "stitchbj"};
  std::string baseline = "stitchbj";
  double wet_threshold_mm = 1.0;
  double egp_censor_mm = 3.0;
  double bj_level = 0.05;
  std::size_t n_quantiles = 50;
  std::uint64_t seed = 42;
  unsigned threads = 0;  // 0 = number of available processors
  bool welch = false;

  unsigned effective_threads() const;
  void validate() const;
};

// Every key accepted in the config file and as a CLI override.
const std::vector<std::string>& config_keys();

// Flat key=value config file; '#' starts a comment. Unknown keys are errors.
RunConfig load_config(const std::filesystem::path& path);
void apply_setting(RunConfig& cfg, const std::string& key, const std::string& value);

// Pipeline stages; all are deterministic given config and seed.
void run_stationarity(const RunConfig& cfg);
void run_fit(const RunConfig& cfg);
void run_correct(const RunConfig& cfg);
void run_evaluate(const RunConfig& cfg);
void run_diagnose(const RunConfig& cfg, std::size_t lat_idx, std::size_t lon_idx);

// Paths of the artifacts each stage writes, relative to output_dir.
std::filesystem::path model_store_path(const RunConfig& cfg, const std::string& dataset,
                                       Season season);
std::filesystem::path corrected_stack_path(const RunConfig& cfg,
                                           const std::string& model);

}  // namespace pqm

#endif
