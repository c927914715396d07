#include "fgpgm/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <mutex>
#include <random>
#include <thread>

namespace fgpgm {

namespace {

Vector column_sd(const Matrix& samples) {
  Vector sd(samples.cols());
  for (Index p = 0; p < samples.cols(); ++p) {
    const auto col = samples.col(p).array();
    sd(p) = std::sqrt((col - col.mean()).square().mean());
  }
  return sd;
}

Vector column_skewness(const Matrix& samples) {
  Vector skew(samples.cols());
  for (Index p = 0; p < samples.cols(); ++p) {
    const auto centered = (samples.col(p).array() - samples.col(p).mean()).eval();
    const double m2 = centered.square().mean();
    const double m3 = centered.cube().mean();
    skew(p) = m2 > 0.0 ? m3 / std::pow(m2, 1.5) : std::numeric_limits<double>::quiet_NaN();
  }
  return skew;
}

Vector draw_start(const ParameterBounds& bounds, std::mt19937_64& rng) {
  Vector theta(bounds.lower.size());
  for (Index p = 0; p < theta.size(); ++p) {
    const double lo = bounds.lower(p);
    const double hi = bounds.upper(p);
    if (lo >= 0.0) {
      // Rates span orders of magnitude, so positive boxes are sampled in log space.
      std::uniform_real_distribution<double> u(std::log(std::max(lo, 1e-3)), std::log(hi));
      theta(p) = std::exp(u(rng));
    } else {
      std::uniform_real_distribution<double> u(lo, hi);
      theta(p) = u(rng);
    }
  }
  return theta;
}

}  // namespace

Trajectory ground_truth(const ExperimentConfig& config) {
  const OdeSystem system = find_system(config.system);
  return integrate(system, config.theta, config.x0, config.times, config.integration_step,
                   config.start_time());
}

Vector effective_noise_sd(const ExperimentConfig& config, const Trajectory& truth) {
  if (config.noise_sd) return *config.noise_sd;
  if (!config.snr) throw ConfigError("either noise_sd or snr is required");
  const Matrix& s = truth.states;
  Vector sd(s.rows());
  for (Index k = 0; k < s.rows(); ++k) {
    const auto row = s.row(k).array();
    sd(k) = std::sqrt((row - row.mean()).square().mean()) / *config.snr;
  }
  return sd;
}

Dataset generate_data(const ExperimentConfig& config, Index realization) {
  Dataset data;
  data.truth = ground_truth(config);
  data.noise_sd = effective_noise_sd(config, data.truth);
  data.observations.times = config.times;
  data.observations.values = data.truth.states;

  std::mt19937_64 rng(derive_seed(config.seed, realization, seed_stream::noise));
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix& y = data.observations.values;
  // Column-major draw order: all states at t0, then t1, ...
  for (Index i = 0; i < y.cols(); ++i) {
    for (Index k = 0; k < y.rows(); ++k) y(k, i) += data.noise_sd(k) * normal(rng);
  }
  return data;
}

std::vector<GPStateFit> fit_state_gps(const ExperimentConfig& config,
                                      const TimeSeries& observations, Index realization) {
  const Index k_states = observations.state_count();
  std::vector<StandardizedSeries> standardized;
  for (Index k = 0; k < k_states; ++k) {
    standardized.push_back(standardize(observations.values.row(k).transpose()));
  }

  FitOptions options;
  options.restarts = config.fit_restarts;
  const std::uint64_t seed = derive_seed(config.seed, realization, seed_stream::gp_fit);

  std::vector<HyperparameterFit> hyper;
  if (config.fixed_kernel) {
    hyper.assign(static_cast<std::size_t>(k_states),
                 HyperparameterFit{*config.fixed_kernel, *config.fixed_noise_sd, 0.0});
  } else if (config.shared_gp) {
    std::vector<Vector> series;
    for (const auto& s : standardized) series.push_back(s.values);
    options.seed = seed;
    const HyperparameterFit shared =
        fit_hyperparameters(series, observations.times, config.kernel_family, options);
    hyper.assign(static_cast<std::size_t>(k_states), shared);
  } else {
    for (Index k = 0; k < k_states; ++k) {
      options.seed = seed + static_cast<std::uint64_t>(k);
      hyper.push_back(fit_hyperparameters(standardized[static_cast<std::size_t>(k)].values,
                                          observations.times, config.kernel_family, options));
    }
  }

  std::vector<GPStateFit> fits;
  for (Index k = 0; k < k_states; ++k) {
    const auto& h = hyper[static_cast<std::size_t>(k)];
    fits.emplace_back(standardized[static_cast<std::size_t>(k)].standardization, h.kernel,
                      h.noise_sd, observations.times, config.nugget);
  }
  return fits;
}

Vector warm_start_theta(const DensityContext& ctx, int restarts, std::uint64_t seed) {
  const Matrix& y = ctx.observations().values;
  const ParameterBounds& bounds = ctx.system().bounds;
  auto objective = [&](const Vector& theta) { return -joint_log_density(y, theta, ctx); };

  std::mt19937_64 rng(seed);
  Vector best = bounds.midpoint();
  double best_value = std::numeric_limits<double>::infinity();
  for (int start = 0; start < restarts; ++start) {
    const Vector theta0 = start == 0 ? bounds.midpoint() : draw_start(bounds, rng);
    NelderMeadOptions options;
    options.max_evaluations = 3000;
    options.tolerance = 1e-8;
    options.initial_step = 0.5 * std::max(theta0.cwiseAbs().maxCoeff(), 1e-3);
    NelderMeadResult r = nelder_mead(objective, theta0, options);
    // Restart with a shrinking simplex to escape premature collapse.
    for (int refine = 0; refine < 3; ++refine) {
      options.initial_step *= 0.1;
      r = nelder_mead(objective, r.argmin, options);
    }
    if (r.value < best_value) {
      best_value = r.value;
      best = r.argmin;
    }
  }
  return best;
}

RealizationOutcome run_fgpgm(const ExperimentConfig& config, Index realization) {
  return run_fgpgm(config, realization, config.gamma_grid.front());
}

RealizationOutcome run_fgpgm(const ExperimentConfig& config, Index realization, double gamma) {
  const auto started = std::chrono::steady_clock::now();
  RealizationOutcome out;
  RealizationRecord& rec = out.record;
  rec.index = realization;
  rec.gamma = gamma;
  try {
    const OdeSystem system = find_system(config.system);
    const Dataset data = generate_data(config, realization);

    std::vector<GPStateFit> fits = fit_state_gps(config, data.observations, realization);
    for (const GPStateFit& f : fits) {
      rec.gps.push_back({f.kernel(), f.noise_sd(), f.standardization()});
    }
    const DensityContext ctx(std::move(fits), gamma, system, data.observations);

    switch (config.theta_init) {
      case ThetaInit::WarmStart:
        rec.theta_init = warm_start_theta(
            ctx, config.warm_start_restarts,
            derive_seed(config.seed, realization, seed_stream::warm_start));
        break;
      case ThetaInit::Midpoint:
        rec.theta_init = system.bounds.midpoint();
        break;
      case ThetaInit::Explicit:
        rec.theta_init = config.theta_init_values;
        break;
    }

    MCMCConfig mcmc = config.mcmc;
    mcmc.rng_seed = derive_seed(config.seed, realization, seed_stream::mcmc);
    const DensityTarget target(ctx);
    const ChainResult chain =
        run_chain(ChainState{data.observations.values, rec.theta_init}, target, mcmc);
    const AcceptanceReport acc = tune_diagnostics(chain);

    rec.theta_hat = chain.theta_mean;
    rec.x_hat = chain.x_mean;
    rec.theta_sd = column_sd(chain.theta_samples);
    rec.theta_skewness = column_skewness(chain.theta_samples);
    rec.acceptance = acc.aggregate;
    rec.state_acceptance = acc.state_rates.rowwise().mean();
    rec.param_acceptance = acc.param_rates;
    rec.stalled = chain.stalled;
    out.theta_samples = chain.theta_samples;

    // Post-hoc evaluation is the only integration after data generation.
    const Vector x0 = config.evaluate_from_true_x0 ? config.x0 : Vector(chain.x_mean.col(0));
    const std::optional<double> t0 =
        config.evaluate_from_true_x0 ? config.t0 : std::optional<double>(config.times(0));
    const Trajectory fitted =
        integrate(system, rec.theta_hat, x0, config.times, config.integration_step, t0);
    rec.trajectory = fitted.states;
    rec.rmse = trajectory_rmse(fitted, data.truth);
    rec.observation_rmse = trajectory_rmse(fitted, Trajectory{config.times, data.observations.values});
    rec.ok = true;
  } catch (const std::exception& e) {
    rec.ok = false;
    rec.error = e.what();
    out.theta_samples.resize(0, 0);
  }
  rec.wall_clock_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return out;
}

GammaSelection select_gamma(const std::vector<double>& grid,
                            const std::function<double(double)>& score) {
  if (grid.empty()) throw InvalidInput("select_gamma: empty grid");
  GammaSelection sel;
  std::optional<double> best_score;
  for (double gamma : grid) {
    GammaScore entry{gamma, std::nullopt, {}};
    try {
      const double s = score(gamma);
      if (std::isfinite(s)) {
        entry.score = s;
      } else {
        entry.error = "non-finite score";
      }
    } catch (const std::exception& e) {
      entry.error = e.what();
    }
    if (entry.score &&
        (!best_score || *entry.score < *best_score ||
         (*entry.score == *best_score && gamma > sel.gamma))) {
      best_score = entry.score;
      sel.gamma = gamma;
    }
    sel.table.push_back(entry);
  }
  if (!best_score) throw FitFailure("gamma selection: every gamma in the grid failed");
  return sel;
}

GammaSelection gamma_grid_select(const ExperimentConfig& config) {
  return select_gamma(config.gamma_grid, [&](double gamma) {
    const RealizationOutcome o = run_fgpgm(config, 0, gamma);
    if (!o.record.ok) throw FitFailure(o.record.error);
    return o.record.observation_rmse.mean();
  });
}

ResultRecord run_realizations(const ExperimentConfig& config, double gamma,
                              const ProgressCallback& progress) {
  const auto n = static_cast<std::size_t>(config.realizations);
  std::vector<RealizationOutcome> outcomes(n);
  std::atomic<std::size_t> next{0};
  std::mutex progress_mutex;
  auto worker = [&] {
    for (std::size_t r = next++; r < n; r = next++) {
      outcomes[r] = run_fgpgm(config, static_cast<Index>(r), gamma);
      if (progress) {
        std::lock_guard lock(progress_mutex);
        progress(outcomes[r].record);
      }
    }
  };
  const auto workers = std::min<std::size_t>(static_cast<std::size_t>(config.threads), n);
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
  }

  // Single assembly step, in realization order.
  ResultRecord record;
  record.config = config;
  record.gamma = gamma;
  record.created = utc_timestamp();
  try {
    record.truth = ground_truth(config).states;
  } catch (const Error&) {
    // Every realization has already recorded the same failure.
  }
  std::vector<Matrix> samples;
  for (auto& o : outcomes) {
    record.realizations.push_back(std::move(o.record));
    samples.push_back(std::move(o.theta_samples));
  }
  aggregate(record, samples);
  return record;
}

ResultRecord benchmark(const ExperimentConfig& config, const ProgressCallback& progress) {
  if (!config.has_gamma_grid()) return run_realizations(config, config.gamma_grid.front(), progress);
  const GammaSelection sel = gamma_grid_select(config);
  ResultRecord record = run_realizations(config, sel.gamma, progress);
  record.gamma_table = sel.table;
  return record;
}

}  // namespace fgpgm
