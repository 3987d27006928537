#ifndef PRECIPQM_DISTRIBUTIONS_HPP
#define PRECIPQM_DISTRIBUTIONS_HPP

#include <cstdint>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace pqm {

class DistModel;

struct invalid_parameter : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Gamma(k, theta) on intensities above the wet threshold; `shift` is the
// threshold itself (1 mm by default), so the support starts there.
struct GammaParams {
  double shape = 1.0;   // k
  double scale = 1.0;   // theta, mm
  double shift = 1.0;   // mm

  void validate() const;
};

// Exponentiated Weibull: F(x) = [1 - exp(-(x/lambda)^k)]^alpha.
struct ExpWParams {
  double shape = 1.0;     // k
  double scale = 1.0;     // lambda, mm
  double exponent = 1.0;  // alpha
  double shift = 1.0;     // mm

  void validate() const;
};

// Extended GP (type 1): F(x) = [1 - (1 + xi x/sigma)^(-1/xi)]^kappa,
// xi >= 0 only. `censor` is the left-censor used during fitting (raw mm).
struct EGPParams {
  double sigma = 1.0;   // mm
  double xi = 0.0;      // tail index
  double kappa = 1.0;   // power
  double shift = 1.0;   // mm
  double censor = 3.0;  // mm

  void validate() const;
};

// Step CDF F_n with quantile Q(p) = x_(ceil(n p)), clamped to the sample range.
class EmpiricalModel {
 public:
  EmpiricalModel() = default;
  explicit EmpiricalModel(std::vector<double> sample);  // sorts a copy

  const std::vector<double>& sorted_sample() const { return sorted_; }
  std::size_t size() const { return sorted_.size(); }

  void validate() const;
  double cdf(double x) const;
  double quantile(double p) const;

 private:
  std::vector<double> sorted_;
};

// Semi-parametric splice: lower segment on [0, p_lower), core on
// [p_lower, p_upper), upper on [p_upper, 1]. Each segment's quantile is
// evaluated at the global probability; a running maximum across segment
// junctions keeps the result nondecreasing.
struct StitchModel {
  std::shared_ptr<const DistModel> lower;  // may be null
  std::shared_ptr<const DistModel> core;   // required
  std::shared_ptr<const DistModel> upper;  // may be null
  double p_lower = 0.0;
  double p_upper = 1.0;
  std::string label;

  void validate() const;
};

class DistModel {
 public:
  using Variant =
      std::variant<GammaParams, ExpWParams, EGPParams, EmpiricalModel, StitchModel>;

  DistModel() : v_(GammaParams{}) {}
  DistModel(GammaParams p) : v_(std::move(p)) {}
  DistModel(ExpWParams p) : v_(std::move(p)) {}
  DistModel(EGPParams p) : v_(std::move(p)) {}
  DistModel(EmpiricalModel p) : v_(std::move(p)) {}
  DistModel(StitchModel p) : v_(std::move(p)) {}

  const Variant& variant() const { return v_; }

  template <typename T>
  bool is() const { return std::holds_alternative<T>(v_); }
  template <typename T>
  const T& as() const { return std::get<T>(v_); }

  // Short tag: "gamma", "expw", "egp", "emp", "stitch".
  std::string tag() const;

  void validate() const;

 private:
  Variant v_;
};

double cdf(const DistModel& model, double x);
double quantile(const DistModel& model, double p);

// Density of the parametric families (shift included). Throws for the
// empirical and stitch variants.
double pdf(const DistModel& model, double x);
double log_pdf(const DistModel& model, double x);

double stitch_quantile(const StitchModel& model, double p);
double stitch_cdf(const StitchModel& model, double x);

// Inverse-CDF sampling, deterministic given `seed`.
std::vector<double> sample(const DistModel& model, std::size_t count,
                           std::uint64_t seed);

}  // namespace pqm

#endif
