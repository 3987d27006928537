#include "precipqm/stitch.hpp"

#include <boost/math/special_functions/beta.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <utility>

#include "precipqm/rng.hpp"

namespace pqm {

namespace {

constexpr std::size_t kCalibrationReplicates = 2000;
constexpr std::uint64_t kCalibrationSeed = 0xca11bULL;

double tail_weight(std::size_t i, std::size_t n) {
  const double depth = static_cast<double>(std::min(i, n - i + 1));
  return 1.0 / (1.0 + std::log(static_cast<double>(n) / depth));
}

double beta_two_sided(double u, std::size_t i, std::size_t n) {
  const double b = boost::math::ibeta(static_cast<double>(i),
                                      static_cast<double>(n - i + 1), u);
  return std::clamp(2.0 * std::min(b, 1.0 - b), 0.0, 1.0);
}

// Calibration constant C such that, under the null, the family-wise
// false-rejection rate of the rule k_i < C * level / (n w_i) is `level`.
double calibration_constant(std::size_t n, double level) {
  std::vector<double> scores;
  scores.reserve(kCalibrationReplicates);
  std::vector<double> u(n);
  for (std::size_t r = 0; r < kCalibrationReplicates; ++r) {
    SplitMix64 rng(hash_combine(hash_combine(kCalibrationSeed, n),
                                static_cast<std::uint64_t>(r)));
    for (double& v : u) v = rng.uniform();
    std::sort(u.begin(), u.end());
    double s = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i <= n; ++i) {
      const double base = level / (static_cast<double>(n) * tail_weight(i, n));
      s = std::min(s, beta_two_sided(u[i - 1], i, n) / base);
    }
    scores.push_back(s);
  }
  std::sort(scores.begin(), scores.end());
  const auto m = static_cast<std::size_t>(
      std::llround(level * static_cast<double>(kCalibrationReplicates)));
  return scores[std::min(m, scores.size() - 1)];
}

// The constant C(n) drifts slowly (logarithmically) with n while its own
// Monte-Carlo noise is several percent, so large sample sizes share a
// calibration bucket; small sizes are calibrated exactly.
std::size_t calibration_size(std::size_t n) {
  constexpr std::size_t kExactBelow = 256;
  if (n <= kExactBelow) return n;
  const double ratio = 1.1;
  const double k = std::round(std::log(static_cast<double>(n) / kExactBelow) /
                              std::log(ratio));
  return static_cast<std::size_t>(
      std::llround(kExactBelow * std::pow(ratio, std::max(k, 1.0))));
}

std::mutex g_threshold_mutex;
std::map<std::pair<std::size_t, double>, std::vector<double>> g_threshold_cache;
std::map<std::pair<std::size_t, double>, double> g_constant_cache;

}  // namespace

bool GofProfile::any_rejected() const {
  return std::find(rejected.begin(), rejected.end(), true) != rejected.end();
}

bool GofProfile::bulk_rejected() const {
  const auto n = size();
  for (std::size_t i = 1; i <= n; ++i) {
    if (4 * i > n && 4 * i < 3 * n && rejected[i - 1]) return true;
  }
  return false;
}

bool GofProfile::rejected_in(std::size_t lo, std::size_t hi) const {
  for (std::size_t i = std::max<std::size_t>(lo, 1); i <= std::min(hi, size()); ++i)
    if (rejected[i - 1]) return true;
  return false;
}

std::vector<double> pbj_threshold(std::size_t n, double level) {
  if (n < 1) throw std::domain_error("pbj_threshold: n must be >= 1");
  if (!(level > 0.0 && level < 1.0))
    throw std::domain_error("pbj_threshold: level outside (0,1)");

  {
    std::lock_guard lock(g_threshold_mutex);
    auto it = g_threshold_cache.find({n, level});
    if (it != g_threshold_cache.end()) return it->second;
  }

  const std::size_t n_cal = calibration_size(n);
  double c;
  {
    std::lock_guard lock(g_threshold_mutex);
    auto it = g_constant_cache.find({n_cal, level});
    c = it != g_constant_cache.end() ? it->second : 0.0;
  }
  if (c == 0.0) {
    c = calibration_constant(n_cal, level);
    std::lock_guard lock(g_threshold_mutex);
    g_constant_cache.try_emplace({n_cal, level}, c);
  }
  std::vector<double> t(n);
  for (std::size_t i = 1; i <= n; ++i)
    t[i - 1] = c * level / (static_cast<double>(n) * tail_weight(i, n));

  std::lock_guard lock(g_threshold_mutex);
  auto [it, inserted] = g_threshold_cache.try_emplace({n, level}, std::move(t));
  (void)inserted;
  return it->second;
}

GofProfile bj_pvalues(std::span<const double> wet, const DistModel& model, double level) {
  if (wet.empty()) throw invalid_parameter("bj_pvalues: empty sample");
  model.validate();
  std::vector<double> sorted(wet.begin(), wet.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();

  GofProfile profile;
  profile.k_values.resize(n);
  profile.threshold = pbj_threshold(n, level);
  profile.rejected.resize(n);
  for (std::size_t i = 1; i <= n; ++i) {
    const double u = cdf(model, sorted[i - 1]);
    profile.k_values[i - 1] = beta_two_sided(u, i, n);
    profile.rejected[i - 1] = profile.k_values[i - 1] < profile.threshold[i - 1];
  }
  return profile;
}

RejectionIndices rejection_indices(const GofProfile& profile) {
  RejectionIndices out;
  const auto n = profile.size();
  for (std::size_t i = 1; i <= n; ++i) {
    if (!profile.rejected[i - 1]) continue;
    if (2 * i <= n) {  // ties at exactly n/2 go to the lower half
      out.lower = i;
    } else if (!out.upper) {
      out.upper = i;
    }
  }
  return out;
}

double upper_tail_error(std::span<const double> sorted_wet, const DistModel& model) {
  const std::size_t n = sorted_wet.size();
  const auto i0 = static_cast<std::size_t>(
      std::ceil(0.95 * static_cast<double>(n)));
  double err = 0.0;
  for (std::size_t i = std::max<std::size_t>(i0, 1); i <= n; ++i) {
    const double p = static_cast<double>(i) / static_cast<double>(n + 1);
    err = std::max(err, std::abs(quantile(model, p) - sorted_wet[i - 1]));
  }
  return err;
}

namespace {

std::string segment_name(const std::string& tag) {
  if (tag == "egp") return "EGP";
  if (tag == "expw") return "ExpW";
  if (tag == "emp") return "EMP";
  return tag;
}

StitchDecision make_pure(const DistModel& core, const std::string& tag,
                         const RejectionIndices& indices) {
  StitchDecision d;
  d.chosen.core = std::make_shared<DistModel>(core);
  d.chosen.p_lower = 0.0;
  d.chosen.p_upper = 1.0;
  d.chosen.label = segment_name(tag);
  d.label = d.chosen.label;
  d.indices = indices;
  return d;
}

// Patches the rejected tails of `core` at the profile's rejection indices.
// `lower_cand`/`upper_cand` name the first-choice replacement ("expw" or
// "emp"); the empirical model is the fallback when that candidate is also
// rejected on the tail's indices.
StitchDecision patch_tails(const DistModel& core, const std::string& core_tag,
                           const RejectionIndices& ri, std::size_t n,
                           const GofProfile* cand_profile, const DistModel* cand_model,
                           const std::string& cand_tag, const DistModel& emp) {
  StitchDecision d;
  d.indices = ri;
  d.chosen.core = std::make_shared<DistModel>(core);
  std::string lower_name, upper_name;

  if (ri.lower) {
    const std::size_t il = *ri.lower;
    const bool cand_ok =
        cand_profile != nullptr && !cand_profile->rejected_in(1, il);
    const DistModel& seg = cand_ok ? *cand_model : emp;
    lower_name = segment_name(cand_ok ? cand_tag : "emp");
    d.chosen.lower = std::make_shared<DistModel>(seg);
    d.chosen.p_lower = static_cast<double>(il) / static_cast<double>(n);
  }
  if (ri.upper) {
    const std::size_t iu = *ri.upper;
    const bool cand_ok =
        cand_profile != nullptr && !cand_profile->rejected_in(iu, n);
    const DistModel& seg = cand_ok ? *cand_model : emp;
    upper_name = segment_name(cand_ok ? cand_tag : "emp");
    d.chosen.upper = std::make_shared<DistModel>(seg);
    d.chosen.p_upper = static_cast<double>(iu) / static_cast<double>(n);
  }

  std::string label;
  if (!lower_name.empty()) label += lower_name + "-";
  label += segment_name(core_tag);
  if (!upper_name.empty()) label += "-" + upper_name;
  d.chosen.label = label;
  d.label = label;
  return d;
}

}  // namespace

StitchDecision build_stitch(std::span<const double> wet,
                            const std::map<std::string, FitResult>& fits,
                            double level) {
  for (const char* tag : {"egp", "expw", "emp"})
    if (!fits.count(tag))
      throw missing_candidate(std::string("build_stitch: missing candidate ") + tag);
  if (wet.empty()) throw invalid_parameter("build_stitch: empty sample");

  const DistModel& egp = fits.at("egp").model;
  const DistModel& expw = fits.at("expw").model;
  const DistModel& emp = fits.at("emp").model;

  std::vector<double> sorted(wet.begin(), wet.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();

  const GofProfile prof_egp = bj_pvalues(sorted, egp, level);
  const GofProfile prof_expw = bj_pvalues(sorted, expw, level);
  const double err_egp = upper_tail_error(sorted, egp);
  const double err_expw = upper_tail_error(sorted, expw);

  auto count_rej = [](const GofProfile& p) {
    return static_cast<std::size_t>(std::count(p.rejected.begin(), p.rejected.end(), true));
  };
  std::vector<StitchCandidate> candidates = {
      {"egp", count_rej(prof_egp), err_egp},
      {"expw", count_rej(prof_expw), err_expw},
      {"emp", 0, upper_tail_error(sorted, emp)},
  };

  const RejectionIndices ri_egp = rejection_indices(prof_egp);
  const RejectionIndices ri_expw = rejection_indices(prof_expw);
  const bool expw_clean = !prof_expw.any_rejected();

  StitchDecision decision;
  if (!prof_egp.any_rejected()) {
    decision = make_pure(egp, "egp", ri_egp);
  } else if (prof_egp.bulk_rejected()) {
    if (prof_expw.bulk_rejected()) {
      decision = make_pure(emp, "emp", RejectionIndices{});
    } else if (expw_clean) {
      decision = make_pure(expw, "expw", ri_expw);
    } else {
      decision = patch_tails(expw, "expw", ri_expw, n, nullptr, nullptr, "", emp);
    }
  } else if (expw_clean && (err_egp > err_expw || (ri_egp.lower && ri_egp.upper))) {
    // the EGP misfits both halves, or a fully accepted ExpW has the smaller
    // extreme-quantile error
    decision = make_pure(expw, "expw", ri_expw);
  } else {
    decision = patch_tails(egp, "egp", ri_egp, n, &prof_expw, &expw, "expw", emp);
  }

  decision.candidates = std::move(candidates);
  decision.chosen.validate();
  return decision;
}

ReplacementSummary replacement_stats(
    const std::vector<std::pair<std::string, const StitchDecision*>>& decisions) {
  if (decisions.empty()) throw invalid_parameter("replacement_stats: empty grid");
  ReplacementSummary out;
  for (const auto& [season, dec] : decisions) {
    out.counts[season][dec->label] += 1;
    if (dec->chosen.p_lower > 0.0)
      out.lower_fractions[season].push_back(dec->chosen.p_lower);
    if (dec->chosen.p_upper < 1.0)
      out.upper_fractions[season].push_back(1.0 - dec->chosen.p_upper);
  }
  return out;
}

}  // namespace pqm
