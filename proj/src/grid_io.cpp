#include "precipqm/grid_io.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

namespace pqm {

using ordered_json = nlohmann::ordered_json;

namespace {

std::string format_date(std::chrono::sys_days d) {
  const std::chrono::year_month_day ymd{d};
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

std::chrono::sys_days parse_date(const std::string& s) {
  int y = 0, m = 0, d = 0;
  if (std::sscanf(s.c_str(), "%d-%d-%d", &y, &m, &d) != 3)
    throw parse_error("invalid ISO date: " + s);
  const std::chrono::year_month_day ymd{std::chrono::year(y), std::chrono::month(unsigned(m)),
                                        std::chrono::day(unsigned(d))};
  if (!ymd.ok()) throw parse_error("invalid calendar date: " + s);
  return std::chrono::sys_days(ymd);
}

ordered_json model_to_json_obj(const DistModel& model);

DistModel model_from_json_obj(const ordered_json& j) {
  const std::string type = j.at("type").get<std::string>();
  if (type == "gamma") {
    return DistModel{GammaParams{j.at("shape").get<double>(), j.at("scale").get<double>(),
                                 j.at("shift").get<double>()}};
  }
  if (type == "expw") {
    return DistModel{ExpWParams{j.at("shape").get<double>(), j.at("scale").get<double>(),
                                j.at("exponent").get<double>(), j.at("shift").get<double>()}};
  }
  if (type == "egp") {
    return DistModel{EGPParams{j.at("sigma").get<double>(), j.at("xi").get<double>(),
                               j.at("kappa").get<double>(), j.at("shift").get<double>(),
                               j.at("censor").get<double>()}};
  }
  if (type == "emp") {
    return DistModel{EmpiricalModel{j.at("sample").get<std::vector<double>>()}};
  }
  if (type == "stitch") {
    StitchModel s;
    s.core = std::make_shared<DistModel>(model_from_json_obj(j.at("core")));
    if (!j.at("lower").is_null())
      s.lower = std::make_shared<DistModel>(model_from_json_obj(j.at("lower")));
    if (!j.at("upper").is_null())
      s.upper = std::make_shared<DistModel>(model_from_json_obj(j.at("upper")));
    s.p_lower = j.at("p_lower").get<double>();
    s.p_upper = j.at("p_upper").get<double>();
    s.label = j.at("label").get<std::string>();
    return DistModel{std::move(s)};
  }
  throw parse_error("unknown model type: " + type);
}

ordered_json model_to_json_obj(const DistModel& model) {
  ordered_json j;
  if (model.is<GammaParams>()) {
    const auto& g = model.as<GammaParams>();
    j["type"] = "gamma";
    j["shape"] = g.shape;
    j["scale"] = g.scale;
    j["shift"] = g.shift;
  } else if (model.is<ExpWParams>()) {
    const auto& w = model.as<ExpWParams>();
    j["type"] = "expw";
    j["shape"] = w.shape;
    j["scale"] = w.scale;
    j["exponent"] = w.exponent;
    j["shift"] = w.shift;
  } else if (model.is<EGPParams>()) {
    const auto& e = model.as<EGPParams>();
    j["type"] = "egp";
    j["sigma"] = e.sigma;
    j["xi"] = e.xi;
    j["kappa"] = e.kappa;
    j["shift"] = e.shift;
    j["censor"] = e.censor;
  } else if (model.is<EmpiricalModel>()) {
    j["type"] = "emp";
    j["sample"] = model.as<EmpiricalModel>().sorted_sample();
  } else {
    const auto& s = model.as<StitchModel>();
    j["type"] = "stitch";
    j["label"] = s.label;
    j["p_lower"] = s.p_lower;
    j["p_upper"] = s.p_upper;
    j["core"] = model_to_json_obj(*s.core);
    j["lower"] = s.lower ? model_to_json_obj(*s.lower) : ordered_json(nullptr);
    j["upper"] = s.upper ? model_to_json_obj(*s.upper) : ordered_json(nullptr);
  }
  return j;
}

}  // namespace

void GridStack::validate() const {
  if (lats.empty() || lons.empty()) throw dimension_mismatch("grid has empty axes");
  auto strictly_monotone = [](const std::vector<double>& v) {
    bool inc = true, dec = true;
    for (std::size_t i = 1; i < v.size(); ++i) {
      inc = inc && v[i] > v[i - 1];
      dec = dec && v[i] < v[i - 1];
    }
    return inc || dec;
  };
  if (!strictly_monotone(lats) || !strictly_monotone(lons))
    throw dimension_mismatch("grid axes must be strictly monotone");
  if (values.size() != n_time * n_lat() * n_lon())
    throw dimension_mismatch("grid payload size inconsistent with dimensions");
}

GridStack read_gsf(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());

  std::string header_line;
  if (!std::getline(in, header_line)) throw malformed_header("missing GSF header");

  ordered_json h;
  try {
    h = ordered_json::parse(header_line);
  } catch (const std::exception& e) {
    throw malformed_header(std::string("GSF header is not valid JSON: ") + e.what());
  }

  GridStack stack;
  try {
    if (h.at("version").get<int>() != 1) throw malformed_header("unsupported GSF version");
    stack.n_time = h.at("n_time").get<std::size_t>();
    stack.lats = h.at("lats").get<std::vector<double>>();
    stack.lons = h.at("lons").get<std::vector<double>>();
    if (h.at("n_lat").get<std::size_t>() != stack.lats.size() ||
        h.at("n_lon").get<std::size_t>() != stack.lons.size())
      throw dimension_mismatch("GSF header axis lengths disagree with n_lat/n_lon");
    stack.start_date = parse_date(h.at("start_date").get<std::string>());
  } catch (const ordered_json::exception& e) {
    throw malformed_header(std::string("GSF header field error: ") + e.what());
  }

  const std::size_t count = stack.n_time * stack.n_lat() * stack.n_lon();
  stack.values.resize(count);
  in.read(reinterpret_cast<char*>(stack.values.data()),
          static_cast<std::streamsize>(count * sizeof(float)));
  if (static_cast<std::size_t>(in.gcount()) != count * sizeof(float))
    throw truncated_payload("GSF payload shorter than the header promises");
  char extra;
  if (in.read(&extra, 1))
    throw truncated_payload("GSF payload longer than the header promises");

  stack.validate();
  return stack;
}

void write_gsf(const GridStack& stack, const std::filesystem::path& path) {
  stack.validate();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());

  ordered_json h;
  h["version"] = 1;
  h["n_time"] = stack.n_time;
  h["n_lat"] = stack.n_lat();
  h["n_lon"] = stack.n_lon();
  h["lats"] = stack.lats;
  h["lons"] = stack.lons;
  h["start_date"] = format_date(stack.start_date);
  h["units"] = "mm/day";
  out << h.dump() << '\n';
  out.write(reinterpret_cast<const char*>(stack.values.data()),
            static_cast<std::streamsize>(stack.values.size() * sizeof(float)));
  if (!out) throw std::runtime_error("short write to " + path.string());
}

void require_same_grid(const GridStack& a, const GridStack& b) {
  const double tol = 1e-9;
  if (a.n_lat() != b.n_lat() || a.n_lon() != b.n_lon())
    throw dimension_mismatch("stacks are on different grids (axis lengths differ)");
  for (std::size_t i = 0; i < a.lats.size(); ++i)
    if (std::abs(a.lats[i] - b.lats[i]) > tol)
      throw dimension_mismatch("stacks are on different grids (latitudes differ)");
  for (std::size_t j = 0; j < a.lons.size(); ++j)
    if (std::abs(a.lons[j] - b.lons[j]) > tol)
      throw dimension_mismatch("stacks are on different grids (longitudes differ)");
}

PixelSeries read_pixel_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());

  PixelSeries series;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos)
      throw parse_error("line " + std::to_string(line_no) + ": expected 'date,value'");
    std::chrono::sys_days d;
    try {
      d = parse_date(line.substr(0, comma));
    } catch (const parse_error& e) {
      throw parse_error("line " + std::to_string(line_no) + ": " + e.what());
    }
    if (!series.dates.empty() && d <= series.dates.back())
      throw parse_error("line " + std::to_string(line_no) + ": dates out of order");
    const std::string value_text = line.substr(comma + 1);
    double v = std::numeric_limits<double>::quiet_NaN();
    if (!value_text.empty()) {
      try {
        std::size_t used = 0;
        v = std::stod(value_text, &used);
        if (used != value_text.size()) throw std::invalid_argument("trailing junk");
      } catch (const std::exception&) {
        throw parse_error("line " + std::to_string(line_no) + ": bad value '" +
                          value_text + "'");
      }
    }
    series.dates.push_back(d);
    series.values.push_back(v);
  }
  return series;
}

const ModelRecord* ModelStore::find(int lat_idx, int lon_idx, const std::string& season,
                                    const std::string& model_tag) const {
  for (const auto& r : records) {
    if (r.lat_idx == lat_idx && r.lon_idx == lon_idx && r.season == season &&
        r.model_tag == model_tag)
      return &r;
  }
  return nullptr;
}

void save_models(const ModelStore& store, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  for (const auto& r : store.records) {
    ordered_json j;
    j["v"] = ModelStore::kVersion;
    j["lat_idx"] = r.lat_idx;
    j["lon_idx"] = r.lon_idx;
    j["season"] = r.season;
    j["model_tag"] = r.model_tag;
    j["alpha"] = r.alpha;
    j["n_days"] = r.n_days;
    j["n_wet"] = r.n_wet;
    j["neg_log_lik"] = r.diagnostics.neg_log_lik;
    j["converged"] = r.diagnostics.converged;
    j["iterations"] = r.diagnostics.iterations;
    j["stitch_label"] = r.stitch_label;
    j["i_lower"] = r.i_lower ? ordered_json(*r.i_lower) : ordered_json(nullptr);
    j["i_upper"] = r.i_upper ? ordered_json(*r.i_upper) : ordered_json(nullptr);
    j["empirical_fallback"] = r.empirical_fallback;
    j["model"] = model_to_json_obj(r.model);
    out << j.dump() << '\n';
  }
  if (!out) throw std::runtime_error("short write to " + path.string());
}

ModelStore load_models(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  ModelStore store;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    ordered_json j;
    try {
      j = ordered_json::parse(line);
      if (j.at("v").get<int>() != ModelStore::kVersion)
        throw parse_error("model store version mismatch at line " + std::to_string(line_no));
      ModelRecord r;
      r.lat_idx = j.at("lat_idx").get<int>();
      r.lon_idx = j.at("lon_idx").get<int>();
      r.season = j.at("season").get<std::string>();
      r.model_tag = j.at("model_tag").get<std::string>();
      r.alpha = j.at("alpha").get<double>();
      r.n_days = j.at("n_days").get<std::size_t>();
      r.n_wet = j.at("n_wet").get<std::size_t>();
      r.diagnostics.neg_log_lik = j.at("neg_log_lik").get<double>();
      r.diagnostics.converged = j.at("converged").get<bool>();
      r.diagnostics.iterations = j.at("iterations").get<int>();
      r.stitch_label = j.at("stitch_label").get<std::string>();
      if (!j.at("i_lower").is_null()) r.i_lower = j.at("i_lower").get<std::size_t>();
      if (!j.at("i_upper").is_null()) r.i_upper = j.at("i_upper").get<std::size_t>();
      r.empirical_fallback = j.at("empirical_fallback").get<bool>();
      r.model = model_from_json_obj(j.at("model"));
      store.records.push_back(std::move(r));
    } catch (const parse_error&) {
      throw;
    } catch (const std::exception& e) {
      throw parse_error("model store line " + std::to_string(line_no) +
                        " violates the schema: " + e.what());
    }
  }
  return store;
}

std::string model_to_json(const DistModel& model) {
  return model_to_json_obj(model).dump();
}

DistModel model_from_json(const std::string& json_text) {
  return model_from_json_obj(ordered_json::parse(json_text));
}

}  // namespace pqm
