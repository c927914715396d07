#include "fgpgm/gp.hpp"

#include <algorithm>
#include <limits>
#include <random>
#include <utility>
#include <vector>

namespace fgpgm {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

DerivativeMatrices derivatives_from_factor(const CovBlocks& blocks,
                                           const JitteredCholesky& prior) {
  DerivativeMatrices out;
  // D^T = C^{-1} Cd since C is symmetric.
  out.D = prior.llt.solve(blocks.Cd).transpose();
  Matrix a = blocks.ddC - out.D * blocks.Cd;
  out.A = (a + a.transpose()) / 2.0;
  return out;
}

CovBlocks with_nugget(CovBlocks blocks, double nugget) {
  if (!(nugget >= 0.0) || !std::isfinite(nugget)) throw InvalidInput("nugget must be >= 0");
  if (nugget > 0.0) blocks.C.diagonal().array() += nugget * blocks.C.diagonal().mean();
  return blocks;
}

double time_span(const Vector& times) {
  const double span = times(times.size() - 1) - times(0);
  return span > 0.0 ? span : 1.0;
}

// Hyperparameters <-> unconstrained log vector:
//   RBF/Matern52: [log sv, log l, log sigma]
//   Sigmoid:      [log sv, log offset, log slope, log sigma]
Index packed_size(KernelFamily family) { return family == KernelFamily::Sigmoid ? 4 : 3; }

Vector pack(const KernelParams& k, double noise_sd) {
  Vector v(packed_size(k.family));
  v(0) = std::log(k.signal_variance);
  if (k.family == KernelFamily::Sigmoid) {
    v(1) = std::log(k.offset);
    v(2) = std::log(k.slope);
  } else {
    v(1) = std::log(k.lengthscale);
  }
  v(v.size() - 1) = std::log(noise_sd);
  return v;
}

std::pair<KernelParams, double> unpack(KernelFamily family, const Vector& v) {
  KernelParams k;
  k.family = family;
  k.signal_variance = std::exp(v(0));
  if (family == KernelFamily::Sigmoid) {
    k.offset = std::exp(v(1));
    k.slope = std::exp(v(2));
  } else {
    k.lengthscale = std::exp(v(1));
  }
  return {k, std::exp(v(v.size() - 1))};
}

bool within(const KernelParams& k, double noise_sd, double span, const HyperparameterBounds& b) {
  auto in = [](double v, double lo, double hi) { return v >= lo && v <= hi; };
  if (!in(k.signal_variance, b.signal_variance_min, b.signal_variance_max)) return false;
  if (!in(noise_sd, b.noise_sd_min, b.noise_sd_max)) return false;
  if (k.family == KernelFamily::Sigmoid) {
    return in(k.offset, b.offset_min, b.offset_max) &&
           in(k.slope, b.slope_min_rel / span, b.slope_max_rel / span);
  }
  return in(k.lengthscale, b.lengthscale_min_rel * span, b.lengthscale_max_rel * span);
}

}  // namespace

StandardizedSeries standardize(const Vector& y) {
  if (y.size() < 2) throw InvalidInput("standardize: need at least two values");
  if (!y.allFinite()) throw InvalidInput("standardize: non-finite observation");
  const double mean = y.mean();
  const double scale = std::sqrt((y.array() - mean).square().mean());
  if (!(scale > 0.0)) throw DegenerateData("standardize: observations are constant");
  Standardization s{mean, scale};
  return {s.apply(y), s};
}

double log_marginal_likelihood(const Vector& y_tilde, const Vector& times,
                               const KernelParams& kernel, double noise_sd) {
  if (y_tilde.size() != times.size()) {
    throw InvalidInput("log_marginal_likelihood: size mismatch between values and times");
  }
  if (!(noise_sd > 0.0) || !std::isfinite(noise_sd)) {
    throw InvalidInput("log_marginal_likelihood: noise_sd must be positive");
  }
  // Joint permutations of (times, y) must not change the value, so sort here.
  const Index n = times.size();
  std::vector<Index> order(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  std::sort(order.begin(), order.end(), [&](Index a, Index b) { return times(a) < times(b); });
  Vector t_sorted(n);
  Vector y_sorted(n);
  for (Index i = 0; i < n; ++i) {
    t_sorted(i) = times(order[static_cast<std::size_t>(i)]);
    y_sorted(i) = y_tilde(order[static_cast<std::size_t>(i)]);
  }
  const CovBlocks blocks = build_cov_blocks(kernel, t_sorted);
  Matrix cov = blocks.C;
  cov.diagonal().array() += noise_sd * noise_sd;
  return jittered_cholesky(cov, JitterStart::IfNeeded).log_normal_pdf(y_sorted);
}

std::vector<HyperparameterFit> hyperparameter_starts(const Vector& times, KernelFamily family,
                                                     const FitOptions& options) {
  const double span = time_span(times);
  std::mt19937_64 rng(options.seed);
  auto log_uniform = [&](double lo, double hi) {
    std::uniform_real_distribution<double> u(std::log(lo), std::log(hi));
    return std::exp(u(rng));
  };
  std::vector<HyperparameterFit> starts;
  for (int r = 0; r < options.restarts; ++r) {
    HyperparameterFit s;
    s.kernel.family = family;
    s.kernel.signal_variance = log_uniform(0.1, 10.0);
    if (family == KernelFamily::Sigmoid) {
      s.kernel.offset = log_uniform(0.1, 10.0);
      s.kernel.slope = log_uniform(0.05 / span, 20.0 / span);
    } else {
      s.kernel.lengthscale = log_uniform(0.05 * span, 2.0 * span);
    }
    s.noise_sd = log_uniform(0.01, 1.0);
    starts.push_back(s);
  }
  return starts;
}

HyperparameterFit fit_hyperparameters(std::span<const Vector> series, const Vector& times,
                                      KernelFamily family, const FitOptions& options) {
  if (series.empty()) throw InvalidInput("fit_hyperparameters: no data");
  if (times.size() < 4) throw InvalidInput("fit_hyperparameters: need at least 4 observations");
  for (const Vector& y : series) {
    if (y.size() != times.size()) throw InvalidInput("fit_hyperparameters: size mismatch");
  }
  require_increasing_times(times);
  const double span = time_span(times);

  auto log_likelihood = [&](const KernelParams& k, double noise_sd) {
    if (!within(k, noise_sd, span, options.bounds)) return kNegInf;
    try {
      const CovBlocks blocks = build_cov_blocks(k, times);
      Matrix cov = blocks.C;
      cov.diagonal().array() += noise_sd * noise_sd;
      const JitteredCholesky f = jittered_cholesky(cov, JitterStart::IfNeeded);
      double total = 0.0;
      for (const Vector& y : series) total += f.log_normal_pdf(y);
      return std::isfinite(total) ? total : kNegInf;
    } catch (const Error&) {
      return kNegInf;
    }
  };
  auto objective = [&](const Vector& v) {
    auto [k, noise_sd] = unpack(family, v);
    return -log_likelihood(k, noise_sd);
  };

  HyperparameterFit best;
  best.log_likelihood = kNegInf;
  for (const HyperparameterFit& start : hyperparameter_starts(times, family, options)) {
    const NelderMeadResult r =
        nelder_mead(objective, pack(start.kernel, start.noise_sd), options.optimizer);
    if (!std::isfinite(r.value)) continue;
    if (-r.value > best.log_likelihood) {
      auto [k, noise_sd] = unpack(family, r.argmin);
      best = {k, noise_sd, -r.value};
    }
  }
  if (!std::isfinite(best.log_likelihood)) {
    throw FitFailure("fit_hyperparameters: no start produced a finite likelihood");
  }
  return best;
}

HyperparameterFit fit_hyperparameters(const Vector& y_tilde, const Vector& times,
                                      KernelFamily family, const FitOptions& options) {
  return fit_hyperparameters(std::span<const Vector>(&y_tilde, 1), times, family, options);
}

DerivativeMatrices derivative_matrices(const CovBlocks& blocks) {
  return derivatives_from_factor(blocks, jittered_cholesky(blocks.C, JitterStart::Always));
}

GPStateFit::GPStateFit(Standardization standardization, KernelParams kernel, double noise_sd,
                       Vector times, double nugget)
    : standardization_(standardization),
      kernel_(kernel),
      noise_sd_(noise_sd),
      times_(std::move(times)),
      nugget_(nugget),
      blocks_(with_nugget(build_cov_blocks(kernel_, times_), nugget)),
      prior_(jittered_cholesky(blocks_.C, JitterStart::Always)),
      derivatives_(derivatives_from_factor(blocks_, prior_)) {
  if (!(noise_sd_ > 0.0) || !std::isfinite(noise_sd_)) {
    throw InvalidInput("GPStateFit: noise_sd must be positive");
  }
  if (!(standardization_.scale > 0.0)) throw InvalidInput("GPStateFit: scale must be positive");
}

JitteredCholesky GPStateFit::slack_factor(double gamma) const {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw InvalidInput("gamma must be positive");
  Matrix m = derivatives_.A;
  m.diagonal().array() += gamma;
  return jittered_cholesky(m, JitterStart::IfNeeded);
}

}  // namespace fgpgm
