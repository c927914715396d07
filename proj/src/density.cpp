#include "fgpgm/density.hpp"

#include <limits>
#include <numbers>
#include <utility>

namespace fgpgm {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void check_shape(const Matrix& x, const DensityContext& ctx) {
  if (x.rows() != ctx.system().dimension || x.cols() != ctx.observations().size()) {
    throw InvalidInput("density: state matrix has the wrong shape");
  }
}

// f(x, theta) for every column, or nullopt-like empty matrix on failure.
bool field_or_fail(const DensityContext& ctx, const Matrix& x, const Vector& theta, Matrix& out) {
  try {
    out = ctx.system().f_columns(x, theta);
  } catch (const Singularity&) {
    return false;
  }
  return out.allFinite();
}

}  // namespace

DensityContext::DensityContext(std::vector<GPStateFit> fits, double gamma, OdeSystem system,
                               TimeSeries observations, LogPrior log_prior)
    : fits_(std::move(fits)),
      gamma_(gamma),
      system_(std::move(system)),
      observations_(std::move(observations)),
      log_prior_(std::move(log_prior)) {
  if (!(gamma_ > 0.0) || !std::isfinite(gamma_)) throw InvalidInput("gamma must be positive");
  if (static_cast<Index>(fits_.size()) != system_.dimension) {
    throw InvalidInput("density: one GP fit per state is required");
  }
  if (observations_.values.rows() != system_.dimension ||
      observations_.values.cols() != observations_.times.size()) {
    throw InvalidInput("density: observations do not match the system dimension");
  }
  for (const GPStateFit& fit : fits_) {
    if (fit.size() != observations_.size()) {
      throw InvalidInput("density: GP fit and observations have different lengths");
    }
    slack_.push_back(fit.slack_factor(gamma_));
  }
  const Vector width = system_.bounds.upper - system_.bounds.lower;
  uniform_log_prior_ = (width.array() > 0.0).all() ? -width.array().log().sum() : 0.0;
}

double DensityContext::log_prior(const Vector& theta) const {
  if (!system_.bounds.contains(theta)) return kNegInf;
  return log_prior_ ? log_prior_(theta) : uniform_log_prior_;
}

double state_log_density_with_field(const Matrix& x, const Matrix& field, Index k,
                                    const DensityContext& ctx) {
  const GPStateFit& fit = ctx.fit(k);
  const Standardization& s = fit.standardization();
  const Vector x_std = s.apply(x.row(k).transpose());

  const double prior = fit.prior_factor().log_normal_pdf(x_std);

  const double sigma = fit.noise_sd();
  const Vector obs_residual = (ctx.observations().values.row(k) - x.row(k)).transpose() / s.scale;
  const double n = static_cast<double>(x.cols());
  const double observation = -0.5 * obs_residual.squaredNorm() / (sigma * sigma) -
                             n * std::log(sigma) - 0.5 * n * std::log(2.0 * std::numbers::pi);

  const Vector gradient_residual = field.row(k).transpose() / s.scale - fit.D() * x_std;
  const double matching = ctx.slack_factor(k).log_normal_pdf(gradient_residual);

  return prior + observation + matching;
}

double state_log_density(const Matrix& x, Index k, const Vector& theta,
                         const DensityContext& ctx) {
  check_shape(x, ctx);
  if (k < 0 || k >= x.rows()) throw InvalidInput("density: state index out of range");
  Matrix field;
  if (!field_or_fail(ctx, x, theta, field)) return kNegInf;
  return state_log_density_with_field(x, field, k, ctx);
}

double joint_log_density(const Matrix& x, const Vector& theta, const DensityContext& ctx) {
  check_shape(x, ctx);
  const double prior = ctx.log_prior(theta);
  if (!std::isfinite(prior)) return kNegInf;
  Matrix field;
  if (!field_or_fail(ctx, x, theta, field)) return kNegInf;
  double total = prior;
  for (Index k = 0; k < x.rows(); ++k) total += state_log_density_with_field(x, field, k, ctx);
  return std::isnan(total) ? kNegInf : total;
}

}  // namespace fgpgm
