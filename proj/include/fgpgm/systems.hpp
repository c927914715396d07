#ifndef FGPGM_SYSTEMS_HPP
#define FGPGM_SYSTEMS_HPP

#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "fgpgm/errors.hpp"
#include "fgpgm/linalg.hpp"

namespace fgpgm {

// Vector fields, written against Eigen expressions so they work for any scalar.

/// x = (prey, predator), theta = (theta1..theta4).
template <typename DX, typename DT>
Eigen::Matrix<typename DX::Scalar, 2, 1> lotka_volterra_f(const Eigen::MatrixBase<DX>& x,
                                                          const Eigen::MatrixBase<DT>& theta) {
  Eigen::Matrix<typename DX::Scalar, 2, 1> dx;
  dx(0) = theta(0) * x(0) - theta(1) * x(0) * x(1);
  dx(1) = -theta(2) * x(1) + theta(3) * x(0) * x(1);
  return dx;
}

/// x = (S, dS, R, RS, Rpp), theta = (theta1..theta6). Throws Singularity when
/// theta6 + Rpp = 0.
template <typename DX, typename DT>
Eigen::Matrix<typename DX::Scalar, 5, 1> protein_transduction_f(
    const Eigen::MatrixBase<DX>& x, const Eigen::MatrixBase<DT>& theta) {
  using Scalar = typename DX::Scalar;
  const Scalar s = x(0), r = x(2), rs = x(3), rpp = x(4);
  const Scalar denom = theta(5) + rpp;
  if (denom == Scalar(0)) throw Singularity("protein transduction: theta6 + Rpp = 0");
  const Scalar michaelis = theta(4) * rpp / denom;
  Eigen::Matrix<Scalar, 5, 1> dx;
  dx(0) = -theta(0) * s - theta(1) * s * r + theta(2) * rs;
  dx(1) = theta(0) * s;
  dx(2) = -theta(1) * s * r + theta(2) * rs + michaelis;
  dx(3) = theta(1) * s * r - theta(2) * rs - theta(3) * rs;
  dx(4) = theta(3) * rs - michaelis;
  return dx;
}

/// x = (V, R), theta = (theta1, theta2, theta3). Throws Singularity when theta1 = 0.
template <typename DX, typename DT>
Eigen::Matrix<typename DX::Scalar, 2, 1> fitzhugh_nagumo_f(const Eigen::MatrixBase<DX>& x,
                                                           const Eigen::MatrixBase<DT>& theta) {
  using Scalar = typename DX::Scalar;
  if (theta(0) == Scalar(0)) throw Singularity("fitzhugh-nagumo: theta1 = 0");
  const Scalar v = x(0), r = x(1);
  Eigen::Matrix<Scalar, 2, 1> dx;
  dx(0) = theta(0) * (v - v * v * v / Scalar(3) + r);
  dx(1) = (v - theta(1) + theta(2) * r) / theta(0);
  return dx;
}

struct ParameterBounds {
  Vector lower;
  Vector upper;

  [[nodiscard]] bool contains(const Vector& theta) const;
  [[nodiscard]] Vector midpoint() const { return (lower + upper) / 2.0; }
};

/// A named autonomous ODE system dx/dt = f(x, theta).
struct OdeSystem {
  using Field = std::function<Vector(const Vector& x, const Vector& theta)>;

  std::string name;
  Index dimension = 0;
  Index parameter_count = 0;
  Field field;
  ParameterBounds bounds;
  std::vector<std::string> state_names;

  [[nodiscard]] Vector f(const Vector& x, const Vector& theta) const;

  /// f applied to every column of a K x N state matrix.
  [[nodiscard]] Matrix f_columns(const Matrix& states, const Vector& theta) const;
};

OdeSystem lotka_volterra();
OdeSystem protein_transduction();
OdeSystem fitzhugh_nagumo();

/// Looks up a built-in or registered system by name; throws InvalidInput if unknown.
OdeSystem find_system(std::string_view name);

/// Adds or replaces a system in the process-wide registry.
void register_system(OdeSystem system);

std::vector<std::string> system_names();

}  // namespace fgpgm

#endif  // FGPGM_SYSTEMS_HPP
