#include "precipqm/fitting.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "precipqm/nelder_mead.hpp"
#include "precipqm/rng.hpp"

namespace pqm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::uint64_t kRestartSeed = 0x5eed0f17u;  // fixed: fits are deterministic

struct Moments {
  double mean = 0.0;
  double var = 0.0;
};

Moments shifted_moments(std::span<const double> wet, double shift) {
  Moments m;
  for (double x : wet) m.mean += x - shift;
  m.mean /= static_cast<double>(wet.size());
  for (double x : wet) {
    const double d = (x - shift) - m.mean;
    m.var += d * d;
  }
  m.var /= static_cast<double>(wet.size());
  return m;
}

void check_sample(std::span<const double> wet, double shift) {
  if (wet.size() < kMinParametricSample)
    throw insufficient_sample("parametric fit needs at least 20 wet days");
  for (double x : wet)
    if (!(x > shift))
      throw invalid_parameter("wet-day sample contains values at or below the shift");
}

}  // namespace

double neg_log_lik(const DistModel& model, std::span<const double> wet) {
  double nll = 0.0;
  for (double x : wet) nll -= log_pdf(model, x);
  return nll;
}

double neg_log_lik_egp_censored(const EGPParams& params, std::span<const double> wet) {
  params.validate();
  const DistModel model{params};
  double nll = 0.0;
  std::size_t n_cens = 0;
  for (double x : wet) {
    if (x <= params.censor) {
      ++n_cens;
    } else {
      nll -= log_pdf(model, x);
    }
  }
  if (n_cens > 0) {
    const double mass = cdf(model, params.censor);
    if (mass <= 0.0) return kInf;
    nll -= static_cast<double>(n_cens) * std::log(mass);
  }
  return nll;
}

FitResult fit_gamma(std::span<const double> wet, const FitConfig& cfg) {
  check_sample(wet, cfg.shift_mm);
  const auto m = shifted_moments(wet, cfg.shift_mm);
  // method-of-moments start: k0 = mean^2/var, theta0 = var/mean
  const double k0 = std::max(1e-3, m.var > 0 ? m.mean * m.mean / m.var : 1.0);
  const double theta0 = std::max(1e-6, m.var > 0 ? m.var / m.mean : m.mean);

  auto nll = [&](const std::vector<double>& t) {
    GammaParams g{std::exp(t[0]), std::exp(t[1]), cfg.shift_mm};
    if (!std::isfinite(g.shape) || !std::isfinite(g.scale)) return kInf;
    double v = 0.0;
    for (double x : wet) {
      const double y = x - g.shift;
      v -= (g.shape - 1.0) * std::log(y) - y / g.scale;
    }
    v += static_cast<double>(wet.size()) *
         (g.shape * std::log(g.scale) + std::lgamma(g.shape));
    return std::isfinite(v) ? v : kInf;
  };

  SimplexOptions opts{cfg.max_iterations, cfg.tolerance};
  SimplexResult best;
  best.fmin = kInf;
  int iters = 0;
  for (int r = 0; r < std::max(1, cfg.restarts); ++r) {
    std::vector<double> s{std::log(k0), std::log(theta0)};
    if (r > 0) {
      SplitMix64 rng(hash_combine(kRestartSeed, static_cast<std::uint64_t>(r)));
      for (double& v : s) v += 0.4 * (rng.uniform() - 0.5);
    }
    auto res = nelder_mead(nll, s, opts);
    iters += res.iterations;
    if (res.fmin < best.fmin) best = res;
  }

  FitResult out;
  out.model = DistModel{GammaParams{std::exp(best.x[0]), std::exp(best.x[1]), cfg.shift_mm}};
  out.neg_log_lik = best.fmin;
  out.converged = best.converged && std::isfinite(best.fmin);
  out.iterations = iters;
  out.sample_size = wet.size();
  return out;
}

FitResult fit_expw(std::span<const double> wet, const FitConfig& cfg) {
  check_sample(wet, cfg.shift_mm);
  const auto m = shifted_moments(wet, cfg.shift_mm);
  // Weibull moment start with alpha0 = 1: cv determines k roughly; a crude
  // cv-based guess is enough to land in the simplex basin.
  const double cv = m.mean > 0 ? std::sqrt(m.var) / m.mean : 1.0;
  const double k0 = std::min(20.0, std::max(0.1, std::pow(cv, -1.086)));
  const double lambda0 = std::max(1e-6, m.mean / std::tgamma(1.0 + 1.0 / k0));

  auto nll = [&](const std::vector<double>& t) {
    ExpWParams w{std::exp(t[0]), std::exp(t[1]), std::exp(t[2]), cfg.shift_mm};
    if (!std::isfinite(w.shape) || !std::isfinite(w.scale) || !std::isfinite(w.exponent))
      return kInf;
    double v = 0.0;
    try {
      v = neg_log_lik(DistModel{w}, wet);
    } catch (const std::exception&) {
      return kInf;
    }
    return std::isfinite(v) ? v : kInf;
  };

  SimplexOptions opts{cfg.max_iterations, cfg.tolerance};
  SimplexResult best;
  best.fmin = kInf;
  int iters = 0;
  for (int r = 0; r < std::max(1, cfg.restarts); ++r) {
    std::vector<double> s{std::log(k0), std::log(lambda0), 0.0};
    if (r > 0) {
      SplitMix64 rng(hash_combine(kRestartSeed, static_cast<std::uint64_t>(r)));
      for (double& v : s) v += 0.4 * (rng.uniform() - 0.5);
    }
    auto res = nelder_mead(nll, s, opts);
    iters += res.iterations;
    if (res.fmin < best.fmin) best = res;
  }

  FitResult out;
  out.model = DistModel{
      ExpWParams{std::exp(best.x[0]), std::exp(best.x[1]), std::exp(best.x[2]), cfg.shift_mm}};
  out.neg_log_lik = best.fmin;
  out.converged = best.converged && std::isfinite(best.fmin);
  out.iterations = iters;
  out.sample_size = wet.size();
  return out;
}

FitResult fit_egp(std::span<const double> wet, const FitConfig& cfg) {
  check_sample(wet, cfg.shift_mm);
  const auto m = shifted_moments(wet, cfg.shift_mm);
  const double sigma0 = std::max(1e-6, m.mean);
  const double xi0 = 0.1;
  const double kappa0 = 1.0;

  const std::size_t n_uncensored =
      static_cast<std::size_t>(std::count_if(wet.begin(), wet.end(), [&](double x) {
        return x > cfg.censor_mm;
      }));

  auto nll = [&](const std::vector<double>& t) {
    EGPParams e{std::exp(t[0]), std::exp(t[1]), std::exp(t[2]), cfg.shift_mm,
                cfg.censor_mm};
    if (!std::isfinite(e.sigma) || !std::isfinite(e.xi) || !std::isfinite(e.kappa))
      return kInf;
    if (e.xi > 5.0) return kInf;  // keep the tail index in a sane range
    double v = 0.0;
    try {
      v = neg_log_lik_egp_censored(e, wet);
    } catch (const std::exception&) {
      return kInf;
    }
    return std::isfinite(v) ? v : kInf;
  };

  SimplexOptions opts{cfg.max_iterations, cfg.tolerance};
  SimplexResult best;
  best.fmin = kInf;
  int iters = 0;
  for (int r = 0; r < std::max(1, cfg.restarts); ++r) {
    std::vector<double> s{std::log(sigma0), std::log(xi0), std::log(kappa0)};
    if (r > 0) {
      SplitMix64 rng(hash_combine(kRestartSeed, static_cast<std::uint64_t>(r)));
      for (double& v : s) v += 0.4 * (rng.uniform() - 0.5);
    }
    auto res = nelder_mead(nll, s, opts);
    iters += res.iterations;
    if (res.fmin < best.fmin) best = res;
  }

  FitResult out;
  out.model = DistModel{EGPParams{std::exp(best.x[0]), std::exp(best.x[1]),
                                  std::exp(best.x[2]), cfg.shift_mm, cfg.censor_mm}};
  out.neg_log_lik = best.fmin;
  // a fully censored sample carries no density information
  out.converged = best.converged && std::isfinite(best.fmin) && n_uncensored > 0;
  out.iterations = iters;
  out.sample_size = wet.size();
  return out;
}

FitResult fit_empirical(std::span<const double> wet) {
  if (wet.empty()) throw insufficient_sample("empirical fit needs a nonempty sample");
  FitResult out;
  out.model = DistModel{EmpiricalModel{std::vector<double>(wet.begin(), wet.end())}};
  out.neg_log_lik = 0.0;
  out.converged = true;
  out.iterations = 0;
  out.sample_size = wet.size();
  return out;
}

}  // namespace pqm
