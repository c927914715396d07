#include "fgpgm/nelder_mead.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <vector>

namespace fgpgm {

NelderMeadResult nelder_mead(const std::function<double(const Vector&)>& objective,
                             const Vector& start, const NelderMeadOptions& options) {
  const Index dim = start.size();
  int evaluations = 0;
  auto eval = [&](const Vector& x) {
    ++evaluations;
    const double v = objective(x);
    return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
  };

  std::vector<Vector> simplex(dim + 1, start);
  std::vector<double> values(dim + 1);
  for (Index i = 0; i < dim; ++i) simplex[i + 1](i) += options.initial_step;
  for (Index i = 0; i <= dim; ++i) values[i] = eval(simplex[i]);

  std::vector<Index> order(dim + 1);
  bool converged = false;
  while (evaluations < options.max_evaluations) {
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](Index a, Index b) { return values[a] < values[b]; });
    const Index best = order.front();
    const Index worst = order.back();
    const Index second_worst = order[dim - 1 >= 0 ? dim - 1 : 0];

    double diameter = 0.0;
    for (Index i = 0; i <= dim; ++i) {
      diameter = std::max(diameter, (simplex[i] - simplex[best]).norm());
    }
    if (diameter < options.tolerance) {
      converged = true;
      break;
    }

    Vector centroid = Vector::Zero(dim);
    for (Index i = 0; i <= dim; ++i) {
      if (i != worst) centroid += simplex[i];
    }
    centroid /= static_cast<double>(dim);

    const Vector reflected = centroid + (centroid - simplex[worst]);
    const double f_reflected = eval(reflected);
    if (f_reflected < values[best]) {
      const Vector expanded = centroid + 2.0 * (centroid - simplex[worst]);
      const double f_expanded = eval(expanded);
      if (f_expanded < f_reflected) {
        simplex[worst] = expanded;
        values[worst] = f_expanded;
      } else {
        simplex[worst] = reflected;
        values[worst] = f_reflected;
      }
      continue;
    }
    if (f_reflected < values[second_worst]) {
      simplex[worst] = reflected;
      values[worst] = f_reflected;
      continue;
    }

    const bool outside = f_reflected < values[worst];
    const Vector contracted = outside ? Vector(centroid + 0.5 * (reflected - centroid))
                                      : Vector(centroid + 0.5 * (simplex[worst] - centroid));
    const double f_contracted = eval(contracted);
    if (f_contracted < (outside ? f_reflected : values[worst])) {
      simplex[worst] = contracted;
      values[worst] = f_contracted;
      continue;
    }

    for (Index i = 0; i <= dim; ++i) {
      if (i == best) continue;
      simplex[i] = simplex[best] + 0.5 * (simplex[i] - simplex[best]);
      values[i] = eval(simplex[i]);
    }
  }

  const auto best_it = std::min_element(values.begin(), values.end());
  const auto best = static_cast<std::size_t>(std::distance(values.begin(), best_it));
  return {simplex[best], *best_it, evaluations, converged};
}

}  // namespace fgpgm
