#ifndef FGPGM_INTEGRATOR_HPP
#define FGPGM_INTEGRATOR_HPP

#include <cmath>
#include <optional>
#include <ostream>
#include <string>

#include <Eigen/Dense>

#include "fgpgm/errors.hpp"
#include "fgpgm/kernels.hpp"
#include "fgpgm/systems.hpp"

namespace fgpgm {

template <typename Scalar>
struct BasicTrajectory {
  using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  VectorX times;
  MatrixX states;  // K x N, column i at times(i)
};

using Trajectory = BasicTrajectory<double>;

/// One classical Runge-Kutta step of size h for the autonomous field f.
template <typename Field, typename VectorX>
VectorX rk4_step(const Field& f, const VectorX& x, typename VectorX::Scalar h) {
  using Scalar = typename VectorX::Scalar;
  const VectorX k1 = f(x);
  const VectorX k2 = f(VectorX(x + h / Scalar(2) * k1));
  const VectorX k3 = f(VectorX(x + h / Scalar(2) * k2));
  const VectorX k4 = f(VectorX(x + h * k3));
  return x + h / Scalar(6) * (k1 + Scalar(2) * k2 + Scalar(2) * k3 + k4);
}

/// Fixed-step RK4 from (t0, x0), reporting the state at every output time.
/// Steps of size h are taken between output times and a final partial step
/// lands exactly on each one. Throws Divergence on a non-finite state.
template <typename Field, typename VectorX, typename DerivedTimes>
BasicTrajectory<typename VectorX::Scalar> rk4_integrate(
    const Field& f, const VectorX& x0, typename VectorX::Scalar t0,
    const Eigen::MatrixBase<DerivedTimes>& times, typename VectorX::Scalar h) {
  using Scalar = typename VectorX::Scalar;
  if (!(h > Scalar(0)) || !std::isfinite(h)) throw InvalidInput("integrate: step must be > 0");
  require_increasing_times(times);
  if (times(0) < t0) throw InvalidInput("integrate: output times precede the initial time");
  if (!x0.allFinite()) throw InvalidInput("integrate: non-finite initial state");

  BasicTrajectory<Scalar> out;
  out.times = times;
  out.states.resize(x0.size(), times.size());

  VectorX x = x0;
  Scalar t = t0;
  for (Eigen::Index i = 0; i < times.size(); ++i) {
    const Scalar target = times(i);
    // Relative slack so that rounding in t does not produce a sliver step.
    const Scalar slack = Scalar(1e-9) * h;
    while (target - t > h + slack) {
      x = rk4_step(f, x, h);
      t += h;
      if (!x.allFinite()) throw Divergence("integrate: state became non-finite", t);
    }
    if (target - t > slack) {
      x = rk4_step(f, x, target - t);
      if (!x.allFinite()) throw Divergence("integrate: state became non-finite", target);
    }
    t = target;
    out.states.col(i) = x;
  }
  return out;
}

/// Default internal step: 1/2000 of the integrated interval.
inline double default_step(double t0, const Vector& times) {
  const double span = times(times.size() - 1) - t0;
  return span > 0.0 ? span / 2000.0 : 1e-3;
}

/// Integrates `system` with parameters theta from x0 at t0 (defaults to times(0)).
Trajectory integrate(const OdeSystem& system, const Vector& theta, const Vector& x0,
                     const Vector& times, std::optional<double> step = std::nullopt,
                     std::optional<double> t0 = std::nullopt);

/// Per-state root-mean-square difference over a shared time grid.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> trajectory_rmse(const BasicTrajectory<Scalar>& a,
                                                         const BasicTrajectory<Scalar>& b) {
  if (a.times.size() != b.times.size() || a.states.rows() != b.states.rows() ||
      a.states.cols() != a.times.size() || b.states.cols() != b.times.size()) {
    throw InvalidInput("trajectory_rmse: trajectories have different shapes");
  }
  const Scalar tol = Scalar(1e-12) * (Scalar(1) + a.times.cwiseAbs().maxCoeff());
  if ((a.times - b.times).cwiseAbs().maxCoeff() > tol) {
    throw InvalidInput("trajectory_rmse: time grids differ");
  }
  return (a.states - b.states).array().square().rowwise().mean().sqrt().matrix();
}

/// CSV with header `time,state_0,...,state_{K-1}`, one row per output time.
void write_trajectory_csv(const Trajectory& trajectory, std::ostream& out);
void write_trajectory_csv(const Trajectory& trajectory, const std::string& path);

}  // namespace fgpgm

#endif  // FGPGM_INTEGRATOR_HPP
