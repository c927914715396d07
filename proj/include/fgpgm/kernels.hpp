#ifndef FGPGM_KERNELS_HPP
#define FGPGM_KERNELS_HPP

#include <cmath>
#include <string>
#include <string_view>

#include <Eigen/Dense>

#include "fgpgm/errors.hpp"

namespace fgpgm {

enum class KernelFamily { RBF, Matern52, Sigmoid };

inline std::string_view to_string(KernelFamily family) {
  switch (family) {
    case KernelFamily::RBF:
      return "rbf";
    case KernelFamily::Matern52:
      return "matern52";
    case KernelFamily::Sigmoid:
      return "sigmoid";
  }
  return "unknown";
}

inline KernelFamily parse_kernel_family(std::string_view name) {
  if (name == "rbf" || name == "squared_exponential") return KernelFamily::RBF;
  if (name == "matern52") return KernelFamily::Matern52;
  if (name == "sigmoid") return KernelFamily::Sigmoid;
  throw InvalidInput("unknown kernel family '" + std::string(name) + "'");
}

/// Hyperparameters of a one-dimensional (time) kernel.
///
/// RBF and Matern52 read `signal_variance` and `lengthscale`. The sigmoid
/// family is the arcsine (neural network) kernel
///
///   k(t, s) = signal_variance * asin(u / sqrt(p q)),
///   u = offset^2 + slope^2 t s,  p = 1 + offset^2 + slope^2 t^2,
///   q = 1 + offset^2 + slope^2 s^2,
///
/// and reads `signal_variance`, `offset` and `slope`. Unused fields are kept
/// at 1 so that every field is always a valid positive number.
template <typename Scalar>
struct BasicKernelParams {
  KernelFamily family = KernelFamily::RBF;
  Scalar signal_variance = Scalar(1);
  Scalar lengthscale = Scalar(1);
  Scalar offset = Scalar(1);
  Scalar slope = Scalar(1);

  static BasicKernelParams rbf(Scalar signal_variance, Scalar lengthscale) {
    return {KernelFamily::RBF, signal_variance, lengthscale, Scalar(1), Scalar(1)};
  }
  static BasicKernelParams matern52(Scalar signal_variance, Scalar lengthscale) {
    return {KernelFamily::Matern52, signal_variance, lengthscale, Scalar(1), Scalar(1)};
  }
  static BasicKernelParams sigmoid(Scalar signal_variance, Scalar offset, Scalar slope) {
    return {KernelFamily::Sigmoid, signal_variance, Scalar(1), offset, slope};
  }

  friend bool operator==(const BasicKernelParams&, const BasicKernelParams&) = default;
};

using KernelParams = BasicKernelParams<double>;

template <typename Scalar>
void validate(const BasicKernelParams<Scalar>& p) {
  auto ok = [](Scalar v) { return std::isfinite(v) && v > Scalar(0); };
  if (!ok(p.signal_variance) || !ok(p.lengthscale) || !ok(p.offset) || !ok(p.slope)) {
    throw InvalidInput("kernel hyperparameters must be finite and strictly positive");
  }
}

namespace detail {

template <typename Scalar>
void require_finite(Scalar t, Scalar s) {
  if (!std::isfinite(t) || !std::isfinite(s)) {
    throw InvalidInput("kernel evaluated at a non-finite time");
  }
}

// Pieces of the arcsine kernel shared by the value and its derivatives.
template <typename Scalar>
struct ArcsineTerms {
  Scalar z;     // argument of asin
  Scalar z_t;   // dz/dt
  Scalar z_s;   // dz/ds
  Scalar z_ts;  // d2z/dt ds

  ArcsineTerms(const BasicKernelParams<Scalar>& p, Scalar t, Scalar s) {
    const Scalar o2 = p.offset * p.offset;
    const Scalar w2 = p.slope * p.slope;
    const Scalar u = o2 + w2 * t * s;
    const Scalar pt = Scalar(1) + o2 + w2 * t * t;
    const Scalar qs = Scalar(1) + o2 + w2 * s * s;
    const Scalar root = std::sqrt(pt * qs);
    z = u / root;
    z_t = w2 * (s * (Scalar(1) + o2) - o2 * t) / (pt * root);
    z_s = w2 * (t * (Scalar(1) + o2) - o2 * s) / (qs * root);
    z_ts = w2 / (pt * root) *
           ((Scalar(1) + o2) - w2 * s * (s * (Scalar(1) + o2) - o2 * t) / qs);
  }
};

}  // namespace detail

/// k(t, s).
template <typename Scalar>
Scalar kernel_eval(const BasicKernelParams<Scalar>& p, Scalar t, Scalar s) {
  detail::require_finite(t, s);
  switch (p.family) {
    case KernelFamily::RBF: {
      const Scalar r = t - s;
      return p.signal_variance * std::exp(-r * r / (Scalar(2) * p.lengthscale * p.lengthscale));
    }
    case KernelFamily::Matern52: {
      const Scalar z = std::sqrt(Scalar(5)) * std::abs(t - s) / p.lengthscale;
      return p.signal_variance * (Scalar(1) + z + z * z / Scalar(3)) * std::exp(-z);
    }
    case KernelFamily::Sigmoid: {
      const detail::ArcsineTerms<Scalar> a(p, t, s);
      return p.signal_variance * std::asin(a.z);
    }
  }
  return Scalar(0);
}

/// dk/dt at (t, s): covariance between the derivative at t and the value at s.
template <typename Scalar>
Scalar kernel_deriv_a(const BasicKernelParams<Scalar>& p, Scalar t, Scalar s) {
  detail::require_finite(t, s);
  switch (p.family) {
    case KernelFamily::RBF: {
      const Scalar r = t - s;
      const Scalar l2 = p.lengthscale * p.lengthscale;
      return -p.signal_variance * r / l2 * std::exp(-r * r / (Scalar(2) * l2));
    }
    case KernelFamily::Matern52: {
      // Written in r = t - s directly, so r = 0 needs no special case.
      const Scalar r = t - s;
      const Scalar l2 = p.lengthscale * p.lengthscale;
      const Scalar z = std::sqrt(Scalar(5)) * std::abs(r) / p.lengthscale;
      return -Scalar(5) * p.signal_variance / (Scalar(3) * l2) * r * (Scalar(1) + z) *
             std::exp(-z);
    }
    case KernelFamily::Sigmoid: {
      const detail::ArcsineTerms<Scalar> a(p, t, s);
      return p.signal_variance * a.z_t / std::sqrt(Scalar(1) - a.z * a.z);
    }
  }
  return Scalar(0);
}

/// dk/ds at (t, s).
template <typename Scalar>
Scalar kernel_deriv_b(const BasicKernelParams<Scalar>& p, Scalar t, Scalar s) {
  detail::require_finite(t, s);
  if (p.family == KernelFamily::Sigmoid) {
    const detail::ArcsineTerms<Scalar> a(p, t, s);
    return p.signal_variance * a.z_s / std::sqrt(Scalar(1) - a.z * a.z);
  }
  return -kernel_deriv_a(p, t, s);
}

/// d2k/dt ds at (t, s): covariance between the derivatives at t and s.
template <typename Scalar>
Scalar kernel_deriv_ab(const BasicKernelParams<Scalar>& p, Scalar t, Scalar s) {
  detail::require_finite(t, s);
  switch (p.family) {
    case KernelFamily::RBF: {
      const Scalar r = t - s;
      const Scalar l2 = p.lengthscale * p.lengthscale;
      return p.signal_variance * (Scalar(1) / l2 - r * r / (l2 * l2)) *
             std::exp(-r * r / (Scalar(2) * l2));
    }
    case KernelFamily::Matern52: {
      const Scalar l2 = p.lengthscale * p.lengthscale;
      const Scalar z = std::sqrt(Scalar(5)) * std::abs(t - s) / p.lengthscale;
      return Scalar(5) * p.signal_variance / (Scalar(3) * l2) * (Scalar(1) + z - z * z) *
             std::exp(-z);
    }
    case KernelFamily::Sigmoid: {
      const detail::ArcsineTerms<Scalar> a(p, t, s);
      const Scalar one_minus = Scalar(1) - a.z * a.z;
      return p.signal_variance * (a.z * a.z_t * a.z_s / (one_minus * std::sqrt(one_minus)) +
                                  a.z_ts / std::sqrt(one_minus));
    }
  }
  return Scalar(0);
}

/// The four covariance blocks of the joint (state, derivative) Gaussian:
///   C(i,j)   = k(t_i, t_j)
///   dC(i,j)  = dk/da(t_i, t_j)      cov(x'(t_i), x(t_j))
///   Cd(i,j)  = dk/db(t_i, t_j)      cov(x(t_i), x'(t_j)) = dC^T
///   ddC(i,j) = d2k/da db(t_i, t_j)  cov(x'(t_i), x'(t_j))
template <typename Scalar>
struct BasicCovBlocks {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  Matrix C;
  Matrix dC;
  Matrix Cd;
  Matrix ddC;
};

using CovBlocks = BasicCovBlocks<double>;

/// Throws InvalidInput unless `times` is non-empty, finite and strictly increasing.
template <typename Derived>
void require_increasing_times(const Eigen::DenseBase<Derived>& times) {
  if (times.size() < 1) throw InvalidInput("time grid is empty");
  for (Eigen::Index i = 0; i < times.size(); ++i) {
    if (!std::isfinite(times(i))) throw InvalidInput("time grid contains a non-finite value");
    if (i > 0 && !(times(i) > times(i - 1))) {
      throw InvalidInput("time grid must be strictly increasing");
    }
  }
}

template <typename Scalar, typename Derived>
BasicCovBlocks<Scalar> build_cov_blocks(const BasicKernelParams<Scalar>& params,
                                        const Eigen::DenseBase<Derived>& times) {
  validate(params);
  require_increasing_times(times);
  const Eigen::Index n = times.size();
  BasicCovBlocks<Scalar> out;
  out.C.resize(n, n);
  out.dC.resize(n, n);
  out.ddC.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const Scalar ti = times(i);
      const Scalar tj = times(j);
      out.C(i, j) = kernel_eval(params, ti, tj);
      out.dC(i, j) = kernel_deriv_a(params, ti, tj);
      out.ddC(i, j) = kernel_deriv_ab(params, ti, tj);
    }
  }
  // Exact symmetry regardless of rounding in the closed forms.
  out.C = (out.C + out.C.transpose()).eval() / Scalar(2);
  out.ddC = (out.ddC + out.ddC.transpose()).eval() / Scalar(2);
  out.Cd = out.dC.transpose();
  return out;
}

}  // namespace fgpgm

#endif  // FGPGM_KERNELS_HPP
