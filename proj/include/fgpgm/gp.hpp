#ifndef FGPGM_GP_HPP
#define FGPGM_GP_HPP

#include <cstdint>
#include <span>

#include "fgpgm/kernels.hpp"
#include "fgpgm/linalg.hpp"
#include "fgpgm/nelder_mead.hpp"

namespace fgpgm {

/// Affine map between state units and standardized units.
struct Standardization {
  double mean = 0.0;
  double scale = 1.0;

  template <typename Derived>
  [[nodiscard]] auto apply(const Eigen::MatrixBase<Derived>& y) const {
    return ((y.array() - mean) / scale).matrix();
  }
  template <typename Derived>
  [[nodiscard]] auto invert(const Eigen::MatrixBase<Derived>& y_tilde) const {
    return (y_tilde.array() * scale + mean).matrix();
  }
};

struct StandardizedSeries {
  Vector values;
  Standardization standardization;
};

/// Zero mean, unit population standard deviation. Throws DegenerateData for
/// constant input and InvalidInput for fewer than two values.
StandardizedSeries standardize(const Vector& y);

/// log N(y_tilde | 0, C + noise_sd^2 I), the GP marginal likelihood.
double log_marginal_likelihood(const Vector& y_tilde, const Vector& times,
                               const KernelParams& kernel, double noise_sd);

/// Box constraints of the hyperparameter search, relative to the time span
/// where the quantity has time units.
struct HyperparameterBounds {
  double signal_variance_min = 1e-4;
  double signal_variance_max = 1e3;
  double lengthscale_min_rel = 1e-2;
  double lengthscale_max_rel = 1e2;
  double offset_min = 1e-3;
  double offset_max = 1e3;
  double slope_min_rel = 1e-3;
  double slope_max_rel = 1e5;
  double noise_sd_min = 1e-4;
  double noise_sd_max = 10.0;
};

struct FitOptions {
  std::uint64_t seed = 0;
  int restarts = 10;
  NelderMeadOptions optimizer{};
  HyperparameterBounds bounds{};
};

struct HyperparameterFit {
  KernelParams kernel;
  double noise_sd = 0.0;
  double log_likelihood = 0.0;
};

/// Multi-start Nelder-Mead maximization of the marginal likelihood in log
/// hyperparameter space. Restarts are drawn log-uniformly from fixed ranges
/// using `options.seed`.
HyperparameterFit fit_hyperparameters(const Vector& y_tilde, const Vector& times,
                                      KernelFamily family, const FitOptions& options = {});

/// One set of hyperparameters for several standardized series observed at the
/// same times; the objective is the sum of the per-series marginal likelihoods.
HyperparameterFit fit_hyperparameters(std::span<const Vector> series, const Vector& times,
                                      KernelFamily family, const FitOptions& options = {});

/// Start points used by fit_hyperparameters, exposed for tests.
std::vector<HyperparameterFit> hyperparameter_starts(const Vector& times, KernelFamily family,
                                                     const FitOptions& options);

struct DerivativeMatrices {
  Matrix D;  // conditional mean operator: E[x' | x] = D x
  Matrix A;  // conditional covariance:    cov[x' | x] = A
};

/// D = dC C^{-1}, A = ddC - dC C^{-1} Cd, via Cholesky solves of the jittered C.
DerivativeMatrices derivative_matrices(const CovBlocks& blocks);

/// Per-state GP ready for sampling: standardization, fixed
/// hyperparameters, and the matrices of the derivative conditional.
class GPStateFit {
 public:
  /// `nugget` is added to the diagonal of C, relative to its mean diagonal,
  /// before C is factorized and before D and A are formed.
  GPStateFit(Standardization standardization, KernelParams kernel, double noise_sd,
             Vector times, double nugget = 0.0);

  [[nodiscard]] const Standardization& standardization() const { return standardization_; }
  [[nodiscard]] const KernelParams& kernel() const { return kernel_; }
  [[nodiscard]] double noise_sd() const { return noise_sd_; }
  [[nodiscard]] const Vector& times() const { return times_; }
  [[nodiscard]] const CovBlocks& blocks() const { return blocks_; }
  [[nodiscard]] const Matrix& D() const { return derivatives_.D; }
  [[nodiscard]] const Matrix& A() const { return derivatives_.A; }
  [[nodiscard]] const JitteredCholesky& prior_factor() const { return prior_; }
  [[nodiscard]] Index size() const { return times_.size(); }
  [[nodiscard]] double nugget() const { return nugget_; }

  /// Cholesky of A + gamma I.
  [[nodiscard]] JitteredCholesky slack_factor(double gamma) const;

 private:
  Standardization standardization_;
  KernelParams kernel_;
  double noise_sd_;
  Vector times_;
  double nugget_;
  CovBlocks blocks_;
  JitteredCholesky prior_;
  DerivativeMatrices derivatives_;
};

}  // namespace fgpgm

#endif  // FGPGM_GP_HPP
