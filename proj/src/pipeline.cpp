#include "precipqm/pipeline.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <iostream>
#include <map>
#include <sstream>
#include <thread>
#include <tuple>

#include "precipqm/fitting.hpp"
#include "precipqm/metrics.hpp"
#include "precipqm/parallel.hpp"
#include "precipqm/rng.hpp"
#include "precipqm/ssr.hpp"
#include "precipqm/stitch.hpp"

namespace pqm {

using ordered_json = nlohmann::ordered_json;

namespace {

const std::vector<std::string> kKnownModels{"gamma", "expw", "egp", "emp", "stitchbj"};

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

bool parse_bool(const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw usage_error("expected a boolean, got '" + v + "'");
}

std::size_t season_index(Season s) {
  return static_cast<std::size_t>(std::find(kAllSeasons.begin(), kAllSeasons.end(), s) -
                                  kAllSeasons.begin());
}

// month slot 1..3 within its season (DJF: December=1, January=2, February=3)
unsigned month_slot(unsigned month) {
  switch (month) {
    case 12: case 3: case 6: case 9: return 1;
    case 1: case 4: case 7: case 10: return 2;
    default: return 3;
  }
}

FitConfig make_fit_config(const RunConfig& cfg) {
  FitConfig fc;
  fc.censor_mm = cfg.egp_censor_mm;
  fc.shift_mm = cfg.wet_threshold_mm;
  return fc;
}

// All family fits needed for the requested model list (stitchbj pulls in
// its three candidates).
std::map<std::string, FitResult> fit_candidates(const SeasonalSample& sample,
                                                const RunConfig& cfg,
                                                const std::vector<std::string>& tags) {
  const FitConfig fc = make_fit_config(cfg);
  std::map<std::string, FitResult> fits;
  auto need = [&](const std::string& t) {
    return std::find(tags.begin(), tags.end(), t) != tags.end() ||
           (std::find(tags.begin(), tags.end(), "stitchbj") != tags.end() &&
            (t == "egp" || t == "expw" || t == "emp"));
  };
  const bool enough = sample.wet.size() >= kMinParametricSample;
  if (!sample.wet.empty()) fits.emplace("emp", fit_empirical(sample.wet));
  if (enough) {
    if (need("gamma")) fits.emplace("gamma", fit_gamma(sample.wet, fc));
    if (need("expw")) fits.emplace("expw", fit_expw(sample.wet, fc));
    if (need("egp")) fits.emplace("egp", fit_egp(sample.wet, fc));
  }
  return fits;
}

std::vector<ModelRecord> fit_pixel(const SeasonalSample& sample, const RunConfig& cfg,
                                   std::atomic<std::size_t>& fallback_count) {
  const auto fits = fit_candidates(sample, cfg, cfg.models);
  std::vector<ModelRecord> records;

  for (const std::string& tag : cfg.models) {
    ModelRecord r;
    r.lat_idx = static_cast<int>(sample.lat_idx);
    r.lon_idx = static_cast<int>(sample.lon_idx);
    r.season = season_name(sample.season);
    r.model_tag = tag;
    r.alpha = sample.alpha;
    r.n_days = sample.n_days;
    r.n_wet = sample.wet.size();

    const bool parametric = tag == "gamma" || tag == "expw" || tag == "egp";
    const bool enough = sample.wet.size() >= kMinParametricSample;

    if ((parametric || tag == "stitchbj") && !enough) {
      r.empirical_fallback = true;
      r.model = DistModel{EmpiricalModel{sample.wet}};
      r.diagnostics.converged = !sample.wet.empty();
      ++fallback_count;
    } else if (tag == "emp") {
      if (sample.wet.empty()) {
        r.empirical_fallback = true;
        r.model = DistModel{EmpiricalModel{}};
        r.diagnostics.converged = false;
        ++fallback_count;
      } else {
        const auto& f = fits.at("emp");
        r.model = f.model;
        r.diagnostics = {f.neg_log_lik, f.converged, f.iterations};
      }
    } else if (tag == "stitchbj") {
      const StitchDecision decision = build_stitch(sample.wet, fits, cfg.bj_level);
      r.model = DistModel{decision.chosen};
      r.stitch_label = decision.label;
      r.i_lower = decision.indices.lower;
      r.i_upper = decision.indices.upper;
      const auto& f = fits.at("egp");
      r.diagnostics = {f.neg_log_lik, f.converged, f.iterations};
    } else {
      const auto& f = fits.at(tag);
      r.model = f.model;
      r.diagnostics = {f.neg_log_lik, f.converged, f.iterations};
    }
    records.push_back(std::move(r));
  }
  return records;
}

struct StoreIndex {
  std::map<std::tuple<int, int, std::string>, const ModelRecord*> by_pixel;

  explicit StoreIndex(const ModelStore& store) {
    for (const auto& r : store.records)
      by_pixel[{r.lat_idx, r.lon_idx, r.model_tag}] = &r;
  }
  const ModelRecord* find(int i, int j, const std::string& tag) const {
    auto it = by_pixel.find({i, j, tag});
    return it == by_pixel.end() ? nullptr : it->second;
  }
};

void write_csv_matrix(std::ostream& out, const std::vector<std::string>& labels,
                      const std::vector<std::vector<std::string>>& cells) {
  for (const auto& l : labels) out << ',' << l;
  out << '\n';
  for (std::size_t r = 0; r < labels.size(); ++r) {
    out << labels[r];
    for (std::size_t c = 0; c < labels.size(); ++c) out << ',' << cells[r][c];
    out << '\n';
  }
}

std::vector<double> pixel_season_values(const GridStack& stack,
                                        const std::vector<std::size_t>& days,
                                        std::size_t i, std::size_t j) {
  std::vector<double> out;
  out.reserve(days.size());
  for (std::size_t t : days) {
    const float v = stack.at(t, i, j);
    if (!std::isnan(v)) out.push_back(v);
  }
  return out;
}

}  // namespace

unsigned RunConfig::effective_threads() const {
  if (threads > 0) return threads;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? hw : 1;
}

void RunConfig::validate() const {
  if (!(wet_threshold_mm > 0.0)) throw usage_error("wet_threshold_mm must be > 0");
  if (!(egp_censor_mm >= 0.0)) throw usage_error("egp_censor_mm must be >= 0");
  if (!(bj_level > 0.0 && bj_level < 1.0)) throw usage_error("bj_level must be in (0,1)");
  if (n_quantiles < 1) throw usage_error("n_quantiles must be >= 1");
  if (models.empty()) throw usage_error("models must be nonempty");
  if (seasons.empty()) throw usage_error("seasons must be nonempty");
  for (const auto& m : models)
    if (std::find(kKnownModels.begin(), kKnownModels.end(), m) == kKnownModels.end())
      throw usage_error("unknown model '" + m + "'");
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys{
      "obs_path",   "mod_ref_path",     "mod_fut_path", "target_path",
      "output_dir", "seasons",          "models",       "baseline",
      "wet_threshold_mm", "egp_censor_mm", "bj_level",  "n_quantiles",
      "seed",       "threads",          "welch"};
  return keys;
}

void apply_setting(RunConfig& cfg, const std::string& key, const std::string& value) {
  try {
    if (key == "obs_path") cfg.obs_path = value;
    else if (key == "mod_ref_path") cfg.mod_ref_path = value;
    else if (key == "mod_fut_path") cfg.mod_fut_path = value;
    else if (key == "target_path") cfg.target_path = value;
    else if (key == "output_dir") cfg.output_dir = value;
    else if (key == "seasons") {
      cfg.seasons.clear();
      for (const auto& s : split_csv(value)) cfg.seasons.push_back(season_from_name(s));
    } else if (key == "models") {
      cfg.models = split_csv(value);
    } else if (key == "baseline") cfg.baseline = value;
    else if (key == "wet_threshold_mm") cfg.wet_threshold_mm = std::stod(value);
    else if (key == "egp_censor_mm") cfg.egp_censor_mm = std::stod(value);
    else if (key == "bj_level") cfg.bj_level = std::stod(value);
    else if (key == "n_quantiles") cfg.n_quantiles = std::stoul(value);
    else if (key == "seed") cfg.seed = std::stoull(value);
    else if (key == "threads") cfg.threads = static_cast<unsigned>(std::stoul(value));
    else if (key == "welch") cfg.welch = parse_bool(value);
    else throw usage_error("unknown config key '" + key + "'");
  } catch (const usage_error&) {
    throw;
  } catch (const std::exception&) {
    throw usage_error("bad value for config key '" + key + "': '" + value + "'");
  }
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path.string());
  RunConfig cfg;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw usage_error("config line " + std::to_string(line_no) + ": expected key=value");
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
    };
    apply_setting(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return cfg;
}

std::filesystem::path model_store_path(const RunConfig& cfg, const std::string& dataset,
                                       Season season) {
  return cfg.output_dir / ("models_" + dataset + "_" + season_name(season) + ".jsonl");
}

std::filesystem::path corrected_stack_path(const RunConfig& cfg,
                                           const std::string& model) {
  return cfg.output_dir / ("corrected_" + model + ".gsf");
}

void run_stationarity(const RunConfig& cfg) {
  cfg.validate();
  const GridStack obs = read_gsf(cfg.obs_path);
  const GridStack mod = read_gsf(cfg.mod_ref_path);
  require_same_grid(obs, mod);
  std::filesystem::create_directories(cfg.output_dir);

  struct Dataset {
    const GridStack* stack;
    std::map<Season, std::vector<std::size_t>> season_days;
    std::map<std::pair<unsigned, unsigned>, std::vector<std::size_t>> month_days;
  };
  auto prepare = [](const GridStack& s) {
    Dataset d;
    d.stack = &s;
    d.season_days = season_day_indices(s);
    for (std::size_t t = 0; t < s.n_time; ++t) {
      const std::chrono::year_month_day ymd{s.date(t)};
      const auto m = static_cast<unsigned>(ymd.month());
      d.month_days[{season_index(season_of_month(m)), month_slot(m)}].push_back(t);
    }
    return d;
  };
  const Dataset datasets[2] = {prepare(mod), prepare(obs)};  // upper, lower triangle

  const std::size_t n_pix = obs.n_lat() * obs.n_lon();
  auto proportion = [&](const Dataset& d, const std::vector<std::size_t>& days_a,
                        const std::vector<std::size_t>& days_b) {
    std::vector<char> rej(n_pix, 0);
    parallel_for(n_pix, cfg.effective_threads(), [&](std::size_t p) {
      const std::size_t i = p / d.stack->n_lon(), j = p % d.stack->n_lon();
      const auto a = pixel_season_values(*d.stack, days_a, i, j);
      const auto b = pixel_season_values(*d.stack, days_b, i, j);
      if (a.size() < 2 || b.size() < 2) return;
      try {
        rej[p] = ttest_means(a, b, cfg.welch).rejected_at_5pct ? 1 : 0;
      } catch (const std::invalid_argument&) {
        rej[p] = 0;  // degenerate equal-constant pixels count as not rejected
      }
    });
    return static_cast<double>(std::count(rej.begin(), rej.end(), 1)) /
           static_cast<double>(n_pix);
  };

  auto fmt = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4f", v);
    return std::string(buf);
  };

  // seasonal matrix: upper triangle = mod, lower triangle = obs
  {
    std::vector<std::string> labels;
    for (Season s : kAllSeasons) labels.push_back(season_name(s));
    std::vector<std::vector<std::string>> cells(4, std::vector<std::string>(4, "x"));
    for (std::size_t a = 0; a < 4; ++a) {
      for (std::size_t b = 0; b < 4; ++b) {
        if (a == b) continue;
        const Dataset& d = a < b ? datasets[0] : datasets[1];
        cells[a][b] = fmt(proportion(d, d.season_days.at(kAllSeasons[a]),
                                     d.season_days.at(kAllSeasons[b])));
      }
    }
    std::ofstream out(cfg.output_dir / "stationarity_seasonal.csv");
    write_csv_matrix(out, labels, cells);
  }

  // monthly matrices, one 3x3 block per season
  {
    std::ofstream out(cfg.output_dir / "stationarity_monthly.csv");
    out << "season,month_a,month_b,dataset,proportion\n";
    for (std::size_t si = 0; si < 4; ++si) {
      for (unsigned a = 1; a <= 3; ++a) {
        for (unsigned b = 1; b <= 3; ++b) {
          if (a == b) continue;
          const char* names[2] = {"mod", "obs"};
          for (int d = 0; d < 2; ++d) {
            const auto& ds = datasets[d];
            out << season_name(kAllSeasons[si]) << ',' << a << ',' << b << ','
                << names[d] << ','
                << fmt(proportion(ds, ds.month_days.at({si, a}),
                                  ds.month_days.at({si, b})))
                << '\n';
          }
        }
      }
    }
  }
}

void run_fit(const RunConfig& cfg) {
  cfg.validate();
  const GridStack obs = read_gsf(cfg.obs_path);
  const GridStack mod = read_gsf(cfg.mod_ref_path);
  require_same_grid(obs, mod);
  std::filesystem::create_directories(cfg.output_dir);

  const std::pair<std::string, const GridStack*> datasets[2] = {{"obs", &obs},
                                                                {"mod", &mod}};
  for (const auto& [name, stack] : datasets) {
    for (Season season : cfg.seasons) {
      const std::size_t n_pix = stack->n_lat() * stack->n_lon();
      std::vector<std::vector<ModelRecord>> per_pixel(n_pix);
      std::atomic<std::size_t> fallbacks{0};
      parallel_for(n_pix, cfg.effective_threads(), [&](std::size_t p) {
        const std::size_t i = p / stack->n_lon(), j = p % stack->n_lon();
        const SeasonalSample sample =
            extract_sample(*stack, i, j, season, cfg.wet_threshold_mm);
        per_pixel[p] = fit_pixel(sample, cfg, fallbacks);
      });
      ModelStore store;
      for (auto& recs : per_pixel)
        for (auto& r : recs) store.records.push_back(std::move(r));
      save_models(store, model_store_path(cfg, name, season));
      if (fallbacks > 0)
        std::cerr << "warning: " << fallbacks << " pixel-model records fell back to "
                  << "the empirical model (" << name << ", " << season_name(season)
                  << ")\n";
    }
  }
}

void run_correct(const RunConfig& cfg) {
  cfg.validate();
  const GridStack fut = read_gsf(cfg.mod_fut_path);
  std::filesystem::create_directories(cfg.output_dir);
  const auto season_days = season_day_indices(fut);

  const std::size_t n_pix = fut.n_lat() * fut.n_lon();
  std::map<std::string, GridStack> corrected;
  for (const auto& model : cfg.models) {
    GridStack out = fut;
    std::fill(out.values.begin(), out.values.end(),
              std::numeric_limits<float>::quiet_NaN());
    corrected.emplace(model, std::move(out));
  }

  for (Season season : cfg.seasons) {
    const ModelStore obs_store = load_models(model_store_path(cfg, "obs", season));
    const ModelStore mod_store = load_models(model_store_path(cfg, "mod", season));
    const StoreIndex obs_index(obs_store);
    const StoreIndex mod_index(mod_store);
    const auto& days = season_days.at(season);
    if (days.empty()) continue;
    const std::size_t s_idx = season_index(season);

    for (const auto& model : cfg.models) {
      GridStack& out = corrected.at(model);
      std::atomic<std::size_t> unusable{0};
      parallel_for(n_pix, cfg.effective_threads(), [&](std::size_t p) {
        const std::size_t i = p / fut.n_lon(), j = p % fut.n_lon();
        const ModelRecord* mr = mod_index.find(static_cast<int>(i),
                                               static_cast<int>(j), model);
        const ModelRecord* orc = obs_index.find(static_cast<int>(i),
                                                static_cast<int>(j), model);
        if (!mr || !orc)
          throw std::runtime_error("missing model for pixel (" + std::to_string(i) +
                                   "," + std::to_string(j) + "), season " +
                                   season_name(season) + ", model " + model);
        if (mr->n_wet == 0 || orc->n_wet == 0) {
          // no usable wet-day model on one side; the pixel stays dry
          for (std::size_t t : days)
            if (!std::isnan(fut.at(t, i, j))) out.at(t, i, j) = 0.0f;
          ++unusable;
          return;
        }

        TransferFunction tf;
        tf.model_ref = mr->model;
        tf.obs_ref = orc->model;
        tf.alpha_mod = mr->alpha;
        tf.alpha_obs = orc->alpha;
        tf.threshold_mm = cfg.wet_threshold_mm;
        tf.zero_dry_obs = orc->alpha == 0.0;

        SSRConfig ssr;
        ssr.threshold_mm = cfg.wet_threshold_mm;
        ssr.seed = cfg.seed;
        const std::uint64_t stream = fut.pixel_key(i, j) * 8 + s_idx;

        for (std::size_t t : days) {
          const float raw = fut.at(t, i, j);
          if (std::isnan(raw)) continue;
          double x = raw;
          if (x < cfg.wet_threshold_mm)
            x = cfg.wet_threshold_mm * keyed_uniform(cfg.seed, stream, t);
          const double pmap =
              std::min(extended_cdf(tf, x), 1.0 - 1e-12);
          double y = extended_inverse(tf, pmap);
          if (y < cfg.wet_threshold_mm) y = 0.0;
          out.at(t, i, j) = static_cast<float>(y);
        }
      });
      if (unusable > 0)
        std::cerr << "warning: " << unusable << " pixels had no wet-day model ("
                  << model << ", " << season_name(season) << "); left dry\n";
    }
  }

  for (const auto& model : cfg.models)
    write_gsf(corrected.at(model), corrected_stack_path(cfg, model));
}

void run_evaluate(const RunConfig& cfg) {
  cfg.validate();
  const GridStack target = read_gsf(cfg.target_path);
  const QuantileGrid grid(cfg.n_quantiles);
  std::filesystem::create_directories(cfg.output_dir);

  std::vector<std::pair<std::string, GridStack>> candidates;
  for (const auto& model : cfg.models)
    candidates.emplace_back(model, read_gsf(corrected_stack_path(cfg, model)));
  if (!cfg.mod_fut_path.empty())
    candidates.emplace_back("uncorrected", read_gsf(cfg.mod_fut_path));
  for (const auto& [name, stack] : candidates) require_same_grid(target, stack);

  const std::size_t n_pix = target.n_lat() * target.n_lon();
  const double nan = std::numeric_limits<double>::quiet_NaN();

  // results[candidate][season][pixel]
  std::map<std::string, std::map<std::string, std::vector<PixelMetrics>>> results;
  for (Season season : cfg.seasons) {
    for (const auto& [name, stack] : candidates) {
      auto& res = results[name][season_name(season)];
      res.assign(n_pix, PixelMetrics{nan, nan, nan, nan});
      parallel_for(n_pix, cfg.effective_threads(), [&, &stack = stack](std::size_t p) {
        const std::size_t i = p / target.n_lon(), j = p % target.n_lon();
        const auto tgt = extract_sample(target, i, j, season, cfg.wet_threshold_mm);
        const auto cor = extract_sample(stack, i, j, season, cfg.wet_threshold_mm);
        if (tgt.wet.empty() || cor.wet.empty()) return;
        res[p] = compute_pixel_metrics(cor.wet, tgt.wet, tgt.alpha, cor.alpha, grid);
      });
    }
  }

  auto season_names = [&] {
    std::vector<std::string> v;
    for (Season s : cfg.seasons) v.push_back(season_name(s));
    return v;
  }();

  {
    std::ofstream out(cfg.output_dir / "metrics.csv");
    out << "lat,lon,season,model,mae,mae95sup,rmse,dry_prob_diff\n";
    for (const auto& [name, per_season] : results) {
      for (const auto& sname : season_names) {
        const auto& res = per_season.at(sname);
        for (std::size_t p = 0; p < n_pix; ++p) {
          const std::size_t i = p / target.n_lon(), j = p % target.n_lon();
          const auto& m = res[p];
          out << target.lats[i] << ',' << target.lons[j] << ',' << sname << ','
              << name << ',' << m.mae << ',' << m.mae95sup << ',' << m.rmse << ','
              << m.dry_prob_diff << '\n';
        }
      }
    }
  }

  if (results.count(cfg.baseline)) {
    std::ofstream out(cfg.output_dir / "metrics_diff.csv");
    out << "lat,lon,season,model,baseline,mae_diff,mae95sup_diff,rmse_diff\n";
    for (const auto& [name, per_season] : results) {
      if (name == cfg.baseline) continue;
      for (const auto& sname : season_names) {
        const auto& res = per_season.at(sname);
        const auto& base = results.at(cfg.baseline).at(sname);
        for (std::size_t p = 0; p < n_pix; ++p) {
          const std::size_t i = p / target.n_lon(), j = p % target.n_lon();
          const auto d = metric_diff(base[p], res[p]);
          out << target.lats[i] << ',' << target.lons[j] << ',' << sname << ','
              << name << ',' << cfg.baseline << ',' << d.mae << ',' << d.mae95sup
              << ',' << d.rmse << '\n';
        }
      }
    }
  }

  {
    std::ofstream out(cfg.output_dir / "summary.csv");
    out << "season,model,metric,median,q1,q3,whisker_low,whisker_high,n,n_missing,"
           "n_outliers\n";
    for (const auto& [name, per_season] : results) {
      for (const auto& sname : season_names) {
        const auto& res = per_season.at(sname);
        const std::pair<std::string, std::function<double(const PixelMetrics&)>>
            metrics[4] = {{"mae", [](const auto& m) { return m.mae; }},
                          {"mae95sup", [](const auto& m) { return m.mae95sup; }},
                          {"rmse", [](const auto& m) { return m.rmse; }},
                          {"dry_prob_diff", [](const auto& m) { return m.dry_prob_diff; }}};
        for (const auto& [metric_name, get] : metrics) {
          std::vector<double> vals;
          vals.reserve(res.size());
          for (const auto& m : res) vals.push_back(get(m));
          try {
            const BoxStats s = aggregate(vals);
            out << sname << ',' << name << ',' << metric_name << ',' << s.median
                << ',' << s.q1 << ',' << s.q3 << ',' << s.whisker_low << ','
                << s.whisker_high << ',' << s.n << ',' << s.n_nan << ','
                << s.outliers.size() << '\n';
          } catch (const std::invalid_argument&) {
            // season with no evaluable pixels
          }
        }
      }
    }
  }
}

void run_diagnose(const RunConfig& cfg, std::size_t lat_idx, std::size_t lon_idx) {
  cfg.validate();
  const GridStack obs = read_gsf(cfg.obs_path);
  const GridStack mod = read_gsf(cfg.mod_ref_path);
  require_same_grid(obs, mod);
  if (lat_idx >= obs.n_lat() || lon_idx >= obs.n_lon())
    throw std::out_of_range("diagnose: pixel out of range");
  std::filesystem::create_directories(cfg.output_dir);

  ordered_json doc;
  doc["lat_idx"] = lat_idx;
  doc["lon_idx"] = lon_idx;
  doc["lat"] = obs.lats[lat_idx];
  doc["lon"] = obs.lons[lon_idx];
  doc["seasons"] = ordered_json::object();

  const std::pair<std::string, const GridStack*> datasets[2] = {{"obs", &obs},
                                                                {"mod", &mod}};
  for (Season season : cfg.seasons) {
    ordered_json per_season = ordered_json::object();
    for (const auto& [name, stack] : datasets) {
      const auto sample = extract_sample(*stack, lat_idx, lon_idx, season,
                                         cfg.wet_threshold_mm);
      ordered_json d;
      d["n_days"] = sample.n_days;
      d["n_wet"] = sample.wet.size();
      d["alpha"] = sample.alpha;
      if (sample.wet.size() < kMinParametricSample) {
        d["label"] = "EMP";
        d["empirical_fallback"] = true;
        per_season[name] = std::move(d);
        continue;
      }
      d["empirical_fallback"] = false;

      const auto fits = fit_candidates(sample, cfg, {"stitchbj"});
      const StitchDecision decision = build_stitch(sample.wet, fits, cfg.bj_level);
      d["label"] = decision.label;
      d["i_lower"] = decision.indices.lower ? ordered_json(*decision.indices.lower)
                                            : ordered_json(nullptr);
      d["i_upper"] = decision.indices.upper ? ordered_json(*decision.indices.upper)
                                            : ordered_json(nullptr);

      std::vector<double> sorted = sample.wet;
      std::sort(sorted.begin(), sorted.end());
      const std::size_t n = sorted.size();
      ordered_json cands = ordered_json::object();
      for (const char* tag : {"egp", "expw"}) {
        const DistModel& m = fits.at(tag).model;
        const GofProfile prof = bj_pvalues(sorted, m, cfg.bj_level);
        ordered_json c;
        c["model"] = ordered_json::parse(model_to_json(m));
        c["k_values"] = prof.k_values;
        c["thresholds"] = prof.threshold;
        std::vector<bool> rej(prof.rejected.begin(), prof.rejected.end());
        c["rejected"] = rej;
        ordered_json qq = ordered_json::array();
        for (std::size_t i = 1; i <= n; ++i) {
          const double p = static_cast<double>(i) / static_cast<double>(n + 1);
          qq.push_back({p, quantile(m, p), sorted[i - 1]});
        }
        c["qq"] = std::move(qq);
        cands[tag] = std::move(c);
      }
      d["candidates"] = std::move(cands);
      per_season[name] = std::move(d);
    }
    doc["seasons"][season_name(season)] = std::move(per_season);
  }

  const auto path = cfg.output_dir / ("diagnose_" + std::to_string(lat_idx) + "_" +
                                      std::to_string(lon_idx) + ".json");
  std::ofstream out(path);
  out << doc.dump(2) << '\n';
  if (!out) throw std::runtime_error("short write to " + path.string());
}

}  // namespace pqm
