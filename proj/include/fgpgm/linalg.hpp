#ifndef FGPGM_LINALG_HPP
#define FGPGM_LINALG_HPP

#include <cmath>
#include <numbers>

#include <Eigen/Dense>

#include "fgpgm/errors.hpp"

namespace fgpgm {

using Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// When to start adding diagonal jitter.
enum class JitterStart {
  Always,      // first attempt already adds 1e-8 x mean diagonal
  IfNeeded,    // first attempt is the bare matrix
};

/// Cholesky factor of `matrix + jitter * I`.
struct JitteredCholesky {
  Eigen::LLT<Matrix> llt;
  double jitter = 0.0;

  /// log|matrix + jitter I|
  [[nodiscard]] double log_det() const {
    return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
  }

  /// r^T (matrix + jitter I)^{-1} r
  template <typename Derived>
  [[nodiscard]] double quad_form(const Eigen::MatrixBase<Derived>& r) const {
    return llt.matrixL().solve(r).squaredNorm();
  }

  /// log N(r | 0, matrix + jitter I)
  template <typename Derived>
  [[nodiscard]] double log_normal_pdf(const Eigen::MatrixBase<Derived>& r) const {
    const double n = static_cast<double>(r.size());
    return -0.5 * quad_form(r) - 0.5 * log_det() - 0.5 * n * std::log(2.0 * std::numbers::pi);
  }
};

/// Factorizes a symmetric matrix, escalating the jitter tenfold from 1e-8 to
/// 1e-4 times the mean diagonal. Throws NumericalError when every attempt fails.
inline JitteredCholesky jittered_cholesky(const Matrix& matrix,
                                          JitterStart start = JitterStart::Always) {
  if (matrix.rows() != matrix.cols() || matrix.rows() == 0) {
    throw InvalidInput("cholesky: matrix must be square and non-empty");
  }
  if (!matrix.allFinite()) throw NumericalError("cholesky: matrix has non-finite entries");
  const double mean_diag = matrix.diagonal().mean();
  if (!(mean_diag > 0.0)) throw NumericalError("cholesky: non-positive mean diagonal");

  JitteredCholesky out;
  auto attempt = [&](double jitter) {
    Matrix m = matrix;
    m.diagonal().array() += jitter;
    out.llt.compute(m);
    out.jitter = jitter;
    return out.llt.info() == Eigen::Success;
  };
  if (start == JitterStart::IfNeeded && attempt(0.0)) return out;
  for (double rel = 1e-8; rel <= 1e-4 * (1.0 + 1e-9); rel *= 10.0) {
    if (attempt(rel * mean_diag)) return out;
  }
  throw NumericalError("cholesky failed after jitter escalation to 1e-4 x mean diagonal");
}

}  // namespace fgpgm

#endif  // FGPGM_LINALG_HPP
