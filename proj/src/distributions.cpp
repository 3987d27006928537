#include "precipqm/distributions.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

#include "precipqm/rng.hpp"

namespace pqm {

namespace {

constexpr double kXiZero = 1e-12;  // below this the EGP is evaluated at xi = 0

void require(bool ok, const char* msg) {
  if (!ok) throw invalid_parameter(msg);
}

double clamp01(double p) { return std::min(1.0, std::max(0.0, p)); }

}  // namespace

void GammaParams::validate() const {
  require(std::isfinite(shape) && shape > 0.0, "gamma: shape must be > 0");
  require(std::isfinite(scale) && scale > 0.0, "gamma: scale must be > 0");
  require(std::isfinite(shift) && shift >= 0.0, "gamma: shift must be >= 0");
}

void ExpWParams::validate() const {
  require(std::isfinite(shape) && shape > 0.0, "expw: shape must be > 0");
  require(std::isfinite(scale) && scale > 0.0, "expw: scale must be > 0");
  require(std::isfinite(exponent) && exponent > 0.0, "expw: exponent must be > 0");
  require(std::isfinite(shift) && shift >= 0.0, "expw: shift must be >= 0");
}

void EGPParams::validate() const {
  require(std::isfinite(sigma) && sigma > 0.0, "egp: sigma must be > 0");
  require(std::isfinite(xi) && xi >= 0.0, "egp: xi must be >= 0");
  require(std::isfinite(kappa) && kappa > 0.0, "egp: kappa must be > 0");
  require(std::isfinite(shift) && shift >= 0.0, "egp: shift must be >= 0");
  require(std::isfinite(censor) && censor >= 0.0, "egp: censor must be >= 0");
}

EmpiricalModel::EmpiricalModel(std::vector<double> sample) : sorted_(std::move(sample)) {
  std::sort(sorted_.begin(), sorted_.end());
}

void EmpiricalModel::validate() const {
  require(!sorted_.empty(), "empirical: sample must be nonempty");
  require(std::is_sorted(sorted_.begin(), sorted_.end()), "empirical: sample not sorted");
}

double EmpiricalModel::cdf(double x) const {
  validate();
  auto it = std::upper_bound(sorted_.begin(), sorted_.end(), x);
  return static_cast<double>(it - sorted_.begin()) / static_cast<double>(sorted_.size());
}

double EmpiricalModel::quantile(double p) const {
  validate();
  if (!(p >= 0.0 && p <= 1.0)) throw std::domain_error("empirical quantile: p outside [0,1]");
  const auto n = sorted_.size();
  std::size_t k = static_cast<std::size_t>(std::ceil(p * static_cast<double>(n)));
  if (k < 1) k = 1;
  if (k > n) k = n;
  return sorted_[k - 1];
}

void StitchModel::validate() const {
  require(core != nullptr, "stitch: core model missing");
  require(p_lower >= 0.0 && p_upper <= 1.0 && p_lower <= p_upper,
          "stitch: breakpoints must satisfy 0 <= p_lower <= p_upper <= 1");
  require(!(p_lower > 0.0) || lower != nullptr, "stitch: lower segment missing");
  require(!(p_upper < 1.0) || upper != nullptr, "stitch: upper segment missing");
  core->validate();
  if (lower) lower->validate();
  if (upper) upper->validate();
}

std::string DistModel::tag() const {
  struct Visitor {
    std::string operator()(const GammaParams&) const { return "gamma"; }
    std::string operator()(const ExpWParams&) const { return "expw"; }
    std::string operator()(const EGPParams&) const { return "egp"; }
    std::string operator()(const EmpiricalModel&) const { return "emp"; }
    std::string operator()(const StitchModel&) const { return "stitch"; }
  };
  return std::visit(Visitor{}, v_);
}

void DistModel::validate() const {
  std::visit([](const auto& m) { m.validate(); }, v_);
}

namespace {

// Base CDFs/densities on the shifted support y = x - shift > 0.

double gamma_cdf0(const GammaParams& g, double y) {
  return boost::math::gamma_p(g.shape, y / g.scale);
}

double gamma_quantile0(const GammaParams& g, double p) {
  if (p >= 1.0) return std::numeric_limits<double>::infinity();
  return g.scale * boost::math::gamma_p_inv(g.shape, p);
}

double gamma_logpdf0(const GammaParams& g, double y) {
  return (g.shape - 1.0) * std::log(y) - y / g.scale - g.shape * std::log(g.scale) -
         std::lgamma(g.shape);
}

double expw_cdf0(const ExpWParams& w, double y) {
  const double t = std::pow(y / w.scale, w.shape);
  return std::pow(-std::expm1(-t), w.exponent);
}

double expw_quantile0(const ExpWParams& w, double p) {
  if (p >= 1.0) return std::numeric_limits<double>::infinity();
  const double u = std::pow(p, 1.0 / w.exponent);
  return w.scale * std::pow(-std::log1p(-u), 1.0 / w.shape);
}

double expw_logpdf0(const ExpWParams& w, double y) {
  const double z = y / w.scale;
  const double t = std::pow(z, w.shape);
  const double one_minus_e = -std::expm1(-t);  // 1 - exp(-t)
  if (one_minus_e <= 0.0) return -std::numeric_limits<double>::infinity();
  return std::log(w.exponent) + std::log(w.shape) - std::log(w.scale) +
         (w.shape - 1.0) * std::log(z) - t + (w.exponent - 1.0) * std::log(one_minus_e);
}

// H(y) = 1 - (1 + xi y/sigma)^(-1/xi); its log and the log-density h.
double egp_h_cdf(const EGPParams& e, double y) {
  if (e.xi < kXiZero) return -std::expm1(-y / e.sigma);
  return -std::expm1(-std::log1p(e.xi * y / e.sigma) / e.xi);
}

double egp_log_h_pdf(const EGPParams& e, double y) {
  if (e.xi < kXiZero) return -std::log(e.sigma) - y / e.sigma;
  return -std::log(e.sigma) - (1.0 / e.xi + 1.0) * std::log1p(e.xi * y / e.sigma);
}

double egp_cdf0(const EGPParams& e, double y) {
  return std::pow(egp_h_cdf(e, y), e.kappa);
}

double egp_quantile0(const EGPParams& e, double p) {
  if (p >= 1.0) return std::numeric_limits<double>::infinity();
  const double u = std::pow(p, 1.0 / e.kappa);  // H(y) = u
  if (e.xi < kXiZero) return -e.sigma * std::log1p(-u);
  return e.sigma / e.xi * (std::pow(1.0 - u, -e.xi) - 1.0);
}

double egp_logpdf0(const EGPParams& e, double y) {
  const double h = egp_h_cdf(e, y);
  if (h <= 0.0) return -std::numeric_limits<double>::infinity();
  return std::log(e.kappa) + (e.kappa - 1.0) * std::log(h) + egp_log_h_pdf(e, y);
}

struct CdfVisitor {
  double x;
  double operator()(const GammaParams& g) const {
    g.validate();
    return x <= g.shift ? 0.0 : clamp01(gamma_cdf0(g, x - g.shift));
  }
  double operator()(const ExpWParams& w) const {
    w.validate();
    return x <= w.shift ? 0.0 : clamp01(expw_cdf0(w, x - w.shift));
  }
  double operator()(const EGPParams& e) const {
    e.validate();
    return x <= e.shift ? 0.0 : clamp01(egp_cdf0(e, x - e.shift));
  }
  double operator()(const EmpiricalModel& m) const { return m.cdf(x); }
  double operator()(const StitchModel& s) const { return stitch_cdf(s, x); }
};

struct QuantileVisitor {
  double p;
  double operator()(const GammaParams& g) const {
    g.validate();
    return g.shift + gamma_quantile0(g, p);
  }
  double operator()(const ExpWParams& w) const {
    w.validate();
    return w.shift + expw_quantile0(w, p);
  }
  double operator()(const EGPParams& e) const {
    e.validate();
    return e.shift + egp_quantile0(e, p);
  }
  double operator()(const EmpiricalModel& m) const { return m.quantile(p); }
  double operator()(const StitchModel& s) const { return stitch_quantile(s, p); }
};

struct LogPdfVisitor {
  double x;
  double operator()(const GammaParams& g) const {
    g.validate();
    if (x <= g.shift) return -std::numeric_limits<double>::infinity();
    return gamma_logpdf0(g, x - g.shift);
  }
  double operator()(const ExpWParams& w) const {
    w.validate();
    if (x <= w.shift) return -std::numeric_limits<double>::infinity();
    return expw_logpdf0(w, x - w.shift);
  }
  double operator()(const EGPParams& e) const {
    e.validate();
    if (x <= e.shift) return -std::numeric_limits<double>::infinity();
    return egp_logpdf0(e, x - e.shift);
  }
  double operator()(const EmpiricalModel&) const {
    throw invalid_parameter("pdf undefined for empirical model");
  }
  double operator()(const StitchModel&) const {
    throw invalid_parameter("pdf undefined for stitch model");
  }
};

}  // namespace

double cdf(const DistModel& model, double x) {
  if (!std::isfinite(x)) throw std::domain_error("cdf: x must be finite");
  return std::visit(CdfVisitor{x}, model.variant());
}

double quantile(const DistModel& model, double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::domain_error("quantile: p outside [0,1]");
  return std::visit(QuantileVisitor{p}, model.variant());
}

double log_pdf(const DistModel& model, double x) {
  return std::visit(LogPdfVisitor{x}, model.variant());
}

double pdf(const DistModel& model, double x) { return std::exp(log_pdf(model, x)); }

double stitch_quantile(const StitchModel& model, double p) {
  model.validate();
  if (!(p >= 0.0 && p <= 1.0)) throw std::domain_error("stitch_quantile: p outside [0,1]");
  if (model.lower && p < model.p_lower) return quantile(*model.lower, p);

  double floor_val = -std::numeric_limits<double>::infinity();
  if (model.lower && model.p_lower > 0.0)
    floor_val = quantile(*model.lower, model.p_lower);

  if (!model.upper || p < model.p_upper)
    return std::max(quantile(*model.core, p), floor_val);

  // running maximum carried across the upper junction
  floor_val = std::max(floor_val, quantile(*model.core, model.p_upper));
  return std::max(quantile(*model.upper, p), floor_val);
}

double stitch_cdf(const StitchModel& model, double x) {
  model.validate();
  // generalized inverse of the monotone quantile function
  if (stitch_quantile(model, 0.0) > x) return 0.0;
  if (stitch_quantile(model, 1.0) <= x) return 1.0;
  double lo = 0.0, hi = 1.0;  // quantile(lo) <= x < quantile(hi)
  for (int i = 0; i < 80; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (stitch_quantile(model, mid) <= x)
      lo = mid;
    else
      hi = mid;
  }
  return lo;
}

std::vector<double> sample(const DistModel& model, std::size_t count, std::uint64_t seed) {
  model.validate();
  std::vector<double> out;
  out.reserve(count);
  SplitMix64 rng(seed);
  for (std::size_t i = 0; i < count; ++i) out.push_back(quantile(model, rng.uniform()));
  return out;
}

}  // namespace pqm
