// Command-line front end for the seasonal precipitation bias-correction
// pipeline. Exit codes: 0 success, 1 usage, 2 I/O or format error,
// 3 numerical failure.
#include <CLI11.hpp>

#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include "precipqm/grid_io.hpp"
#include "precipqm/pipeline.hpp"

namespace {

struct CliOverrides {
  std::string config_path;
  std::vector<std::pair<std::string, std::string>> settings;
};

void add_common(CLI::App* cmd, CliOverrides& ov) {
  cmd->add_option("--config", ov.config_path, "flat key=value config file");
  auto remember = [&ov](const std::string& key) {
    return [&ov, key](const std::string& value) {
      ov.settings.emplace_back(key, value);
    };
  };
  for (const auto& key : pqm::config_keys())
    cmd->add_option_function<std::string>("--" + key, remember(key))
        ->type_name("VALUE");
}

pqm::RunConfig resolve(const CliOverrides& ov) {
  pqm::RunConfig cfg;
  if (!ov.config_path.empty()) cfg = pqm::load_config(ov.config_path);
  for (const auto& [key, value] : ov.settings) pqm::apply_setting(cfg, key, value);
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Seasonal quantile-mapping bias correction for gridded daily "
               "precipitation"};
  app.require_subcommand(1);

  CliOverrides ov;
  std::size_t lat_idx = 0, lon_idx = 0;

  auto* stationarity = app.add_subcommand(
      "stationarity", "seasonal and monthly mean-stationarity tests");
  auto* fit = app.add_subcommand("fit", "fit wet-day models per pixel and season");
  auto* correct = app.add_subcommand("correct", "quantile-map the future stack");
  auto* evaluate = app.add_subcommand("evaluate", "quantile skill metrics vs target");
  auto* diagnose = app.add_subcommand("diagnose", "per-pixel fit diagnostics JSON");
  diagnose->add_option("--lat-idx", lat_idx, "pixel latitude index")->required();
  diagnose->add_option("--lon-idx", lon_idx, "pixel longitude index")->required();
  for (auto* cmd : {stationarity, fit, correct, evaluate, diagnose})
    add_common(cmd, ov);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    const pqm::RunConfig cfg = resolve(ov);
    if (stationarity->parsed()) pqm::run_stationarity(cfg);
    if (fit->parsed()) pqm::run_fit(cfg);
    if (correct->parsed()) pqm::run_correct(cfg);
    if (evaluate->parsed()) pqm::run_evaluate(cfg);
    if (diagnose->parsed()) pqm::run_diagnose(cfg, lat_idx, lon_idx);
  } catch (const pqm::usage_error& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 1;
  } catch (const pqm::malformed_header& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return 2;
  } catch (const pqm::truncated_payload& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return 2;
  } catch (const pqm::dimension_mismatch& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return 2;
  } catch (const pqm::parse_error& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return 2;
  } catch (const std::ios_base::failure& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return 2;
  } catch (const std::runtime_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
