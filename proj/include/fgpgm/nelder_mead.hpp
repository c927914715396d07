#ifndef FGPGM_NELDER_MEAD_HPP
#define FGPGM_NELDER_MEAD_HPP

#include <functional>

#include "fgpgm/linalg.hpp"

namespace fgpgm {

struct NelderMeadOptions {
  double initial_step = 0.5;
  double tolerance = 1e-6;  // simplex diameter
  int max_evaluations = 2000;
};

struct NelderMeadResult {
  Vector argmin;
  double value = 0.0;
  int evaluations = 0;
  bool converged = false;
};

/// Derivative-free minimization. Non-finite objective values are treated as
/// +infinity, so the returned value is never worse than the value at `start`.
NelderMeadResult nelder_mead(const std::function<double(const Vector&)>& objective,
                             const Vector& start, const NelderMeadOptions& options = {});

}  // namespace fgpgm

#endif  // FGPGM_NELDER_MEAD_HPP
