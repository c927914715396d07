#ifndef FGPGM_DENSITY_HPP
#define FGPGM_DENSITY_HPP

#include <functional>
#include <vector>

#include "fgpgm/gp.hpp"
#include "fgpgm/systems.hpp"

namespace fgpgm {

/// Observation times plus a K x N matrix of observed values.
struct TimeSeries {
  Vector times;
  Matrix values;

  [[nodiscard]] Index state_count() const { return values.rows(); }
  [[nodiscard]] Index size() const { return times.size(); }
};

/// Everything the gradient-matching density needs besides (x, theta).
///
/// gamma is a variance scale: the ODE output is matched to the GP derivative
/// with covariance A + gamma I (in standardized units).
class DensityContext {
 public:
  using LogPrior = std::function<double(const Vector& theta)>;

  /// Without `log_prior`, theta is uniform over the system's bounds.
  DensityContext(std::vector<GPStateFit> fits, double gamma, OdeSystem system,
                 TimeSeries observations, LogPrior log_prior = {});

  [[nodiscard]] const std::vector<GPStateFit>& fits() const { return fits_; }
  [[nodiscard]] const GPStateFit& fit(Index k) const {
    return fits_[static_cast<std::size_t>(k)];
  }
  [[nodiscard]] double gamma() const { return gamma_; }
  [[nodiscard]] const OdeSystem& system() const { return system_; }
  [[nodiscard]] const TimeSeries& observations() const { return observations_; }
  [[nodiscard]] const JitteredCholesky& slack_factor(Index k) const {
    return slack_[static_cast<std::size_t>(k)];
  }

  /// log p(theta); -inf outside the system bounds.
  [[nodiscard]] double log_prior(const Vector& theta) const;

 private:
  std::vector<GPStateFit> fits_;
  double gamma_;
  OdeSystem system_;
  TimeSeries observations_;
  LogPrior log_prior_;
  double uniform_log_prior_ = 0.0;
  std::vector<JitteredCholesky> slack_;
};

/// Log contribution of state k, in standardized units:
///   log N(x~_k / s | 0, C_k) + log N(y_k / s | x_k / s, sigma_k^2 I)
///     + log N(f_k(x, theta) / s | D_k x~_k / s, A_k + gamma I)
/// with x~_k = x_k - mu_k and s = sigma_{y,k}. The ODE field sees the
/// unstandardized states `x` (K x N). Returns -inf when f is not finite.
double state_log_density(const Matrix& x, Index k, const Vector& theta,
                         const DensityContext& ctx);

/// Same, for a precomputed field F = f(x, theta) (K x N).
double state_log_density_with_field(const Matrix& x, const Matrix& field, Index k,
                                    const DensityContext& ctx);

/// Sum of the state contributions plus log p(theta).
double joint_log_density(const Matrix& x, const Vector& theta, const DensityContext& ctx);

}  // namespace fgpgm

#endif  // FGPGM_DENSITY_HPP
