#include "precipqm/nelder_mead.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace pqm {

namespace {

double simplex_diameter(const std::vector<std::vector<double>>& pts) {
  double d = 0.0;
  for (std::size_t i = 1; i < pts.size(); ++i)
    for (std::size_t k = 0; k < pts[0].size(); ++k)
      d = std::max(d, std::abs(pts[i][k] - pts[0][k]));
  return d;
}

}  // namespace

SimplexResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                          std::vector<double> start, const SimplexOptions& opts) {
  const std::size_t d = start.size();
  const double alpha = 1.0, gamma = 2.0, rho = 0.5, sigma = 0.5;

  std::vector<std::vector<double>> pts(d + 1, start);
  for (std::size_t i = 0; i < d; ++i)
    pts[i + 1][i] += (start[i] != 0.0 ? opts.initial_step * std::abs(start[i])
                                      : opts.initial_step);

  std::vector<double> fv(d + 1);
  for (std::size_t i = 0; i <= d; ++i) fv[i] = f(pts[i]);

  SimplexResult res;
  int iter = 0;
  std::vector<std::size_t> order(d + 1);
  for (; iter < opts.max_iterations; ++iter) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
    {
      std::vector<std::vector<double>> p2(d + 1);
      std::vector<double> f2(d + 1);
      for (std::size_t i = 0; i <= d; ++i) {
        p2[i] = pts[order[i]];
        f2[i] = fv[order[i]];
      }
      pts.swap(p2);
      fv.swap(f2);
    }

    if (simplex_diameter(pts) < opts.tolerance) {
      res.converged = true;
      break;
    }

    std::vector<double> centroid(d, 0.0);
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t k = 0; k < d; ++k) centroid[k] += pts[i][k];
    }
    for (double& c : centroid) c /= static_cast<double>(d);

    auto affine = [&](double t) {
      std::vector<double> p(d);
      for (std::size_t k = 0; k < d; ++k)
        p[k] = centroid[k] + t * (pts[d][k] - centroid[k]);
      return p;
    };

    const auto xr = affine(-alpha);
    const double fr = f(xr);
    if (fr < fv[0]) {
      const auto xe = affine(-gamma);
      const double fe = f(xe);
      if (fe < fr) {
        pts[d] = xe;
        fv[d] = fe;
      } else {
        pts[d] = xr;
        fv[d] = fr;
      }
      continue;
    }
    if (fr < fv[d - 1]) {
      pts[d] = xr;
      fv[d] = fr;
      continue;
    }
    // contraction, outside if the reflection improved on the worst point
    const bool outside = fr < fv[d];
    const auto xc = affine(outside ? -rho : rho);
    const double fc = f(xc);
    if (fc < std::min(fr, fv[d])) {
      pts[d] = xc;
      fv[d] = fc;
      continue;
    }
    // shrink toward the best vertex
    for (std::size_t i = 1; i <= d; ++i) {
      for (std::size_t k = 0; k < d; ++k)
        pts[i][k] = pts[0][k] + sigma * (pts[i][k] - pts[0][k]);
      fv[i] = f(pts[i]);
    }
  }

  res.iterations = iter;
  std::size_t best = 0;
  for (std::size_t i = 1; i <= d; ++i)
    if (fv[i] < fv[best]) best = i;
  res.x = pts[best];
  res.fmin = fv[best];
  return res;
}

}  // namespace pqm
