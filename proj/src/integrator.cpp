#include "fgpgm/integrator.hpp"

#include <fstream>
#include <iomanip>
#include <limits>

namespace fgpgm {

Trajectory integrate(const OdeSystem& system, const Vector& theta, const Vector& x0,
                     const Vector& times, std::optional<double> step, std::optional<double> t0) {
  if (x0.size() != system.dimension) throw InvalidInput("integrate: x0 has wrong dimension");
  if (theta.size() != system.parameter_count) {
    throw InvalidInput("integrate: theta has wrong dimension");
  }
  if (times.size() < 1) throw InvalidInput("integrate: empty output grid");
  const double start = t0.value_or(times(0));
  const double h = step.value_or(default_step(start, times));
  auto field = [&](const Vector& x) { return system.f(x, theta); };
  try {
    return rk4_integrate(field, x0, start, times, h);
  } catch (const Singularity& e) {
    throw Divergence(std::string("integrate: ") + e.what(), start);
  }
}

void write_trajectory_csv(const Trajectory& trajectory, std::ostream& out) {
  out << std::setprecision(std::numeric_limits<double>::max_digits10) << "time";
  for (Index k = 0; k < trajectory.states.rows(); ++k) out << ",state_" << k;
  out << '\n';
  for (Index i = 0; i < trajectory.times.size(); ++i) {
    out << trajectory.times(i);
    for (Index k = 0; k < trajectory.states.rows(); ++k) out << ',' << trajectory.states(k, i);
    out << '\n';
  }
}

void write_trajectory_csv(const Trajectory& trajectory, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path + "'");
  write_trajectory_csv(trajectory, out);
}

}  // namespace fgpgm
