#ifndef PRECIPQM_NELDER_MEAD_HPP
#define PRECIPQM_NELDER_MEAD_HPP

#include <functional>
#include <vector>

namespace pqm {

struct SimplexOptions {
  int max_iterations = 2000;
  double tolerance = 1e-9;  // simplex diameter in parameter space
  double initial_step = 0.25;
};

struct SimplexResult {
  std::vector<double> x;
  double fmin = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Nelder-Mead downhill simplex. Deterministic: no internal randomness,
// ties broken by index order.
SimplexResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                          std::vector<double> start, const SimplexOptions& opts);

}  // namespace pqm

#endif
