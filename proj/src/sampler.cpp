#include "fgpgm/sampler.hpp"

#include <cmath>

namespace fgpgm {

void MCMCConfig::validate() const {
  if (n_mcmc < 1 || n_burnin < 0 || thinning < 1) {
    throw InvalidInput("mcmc: n_mcmc and thinning must be >= 1, n_burnin >= 0");
  }
  if (!(state_proposal_sd > 0.0) || !(param_proposal_sd > 0.0)) {
    throw InvalidInput("mcmc: proposal standard deviations must be positive");
  }
}

bool mh_component_step(ChainState& state, double& current_log_density, const Component& component,
                       const Target& target, const MCMCConfig& config, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);

  double& slot = component.kind == Component::Kind::State
                     ? state.x(component.row, component.col)
                     : state.theta(component.row);
  const double sd = component.kind == Component::Kind::State
                        ? config.state_proposal_sd * target.state_scale(component.row)
                        : config.param_proposal_sd;
  const double old_value = slot;
  slot = old_value + sd * normal(rng);
  const double proposed = target.log_density(state);
  const double delta = proposed - current_log_density;
  // Strict comparison: a -inf proposal is never accepted, a zero delta always is.
  if (std::log(uniform(rng)) < delta) {
    current_log_density = proposed;
    return true;
  }
  slot = old_value;
  return false;
}

ChainResult run_chain(const ChainState& initial, const Target& target, const MCMCConfig& config) {
  config.validate();
  Rng rng(config.rng_seed);
  ChainState state = initial;
  double log_density = target.log_density(state);

  const Index k_states = state.x.rows();
  const Index n_times = state.x.cols();
  const Index n_params = state.theta.size();
  const Index total = config.n_burnin + config.n_mcmc;

  ChainResult result;
  result.x_mean = Matrix::Zero(k_states, n_times);
  result.theta_mean = Vector::Zero(n_params);
  result.theta_samples.resize(config.n_mcmc / config.thinning, n_params);
  result.log_density_trace.resize(total);
  result.state_accepted = Matrix::Zero(k_states, n_times);
  result.param_accepted = Vector::Zero(n_params);

  Index sample_row = 0;
  for (Index sweep = 0; sweep < total; ++sweep) {
    const bool retained = sweep >= config.n_burnin;
    for (Index k = 0; k < k_states; ++k) {
      for (Index i = 0; i < n_times; ++i) {
        const bool accepted =
            mh_component_step(state, log_density, Component::state(k, i), target, config, rng);
        if (retained && accepted) result.state_accepted(k, i) += 1.0;
      }
    }
    for (Index p = 0; p < n_params; ++p) {
      const bool accepted =
          mh_component_step(state, log_density, Component::parameter(p), target, config, rng);
      if (retained && accepted) result.param_accepted(p) += 1.0;
    }
    result.log_density_trace(sweep) = log_density;
    if (!retained) continue;

    result.x_mean += state.x;
    result.theta_mean += state.theta;
    ++result.retained_sweeps;
    if (result.retained_sweeps % config.thinning == 0 && sample_row < result.theta_samples.rows()) {
      result.theta_samples.row(sample_row++) = state.theta.transpose();
      result.x_samples.push_back(state.x);
    }
  }
  const double n = static_cast<double>(result.retained_sweeps);
  result.x_mean /= n;
  result.theta_mean /= n;
  result.stalled = result.state_accepted.sum() + result.param_accepted.sum() == 0.0;
  return result;
}

AcceptanceReport tune_diagnostics(const ChainResult& result, double low, double high) {
  AcceptanceReport report;
  report.low = low;
  report.high = high;
  const double sweeps = static_cast<double>(result.retained_sweeps);
  const Index components = result.state_accepted.size() + result.param_accepted.size();
  report.proposals = result.retained_sweeps * components;
  report.accepted =
      static_cast<Index>(result.state_accepted.sum() + result.param_accepted.sum());
  if (report.proposals == 0) {
    report.state_rates = Matrix::Zero(result.state_accepted.rows(), result.state_accepted.cols());
    report.param_rates = Vector::Zero(result.param_accepted.size());
    return report;
  }
  report.state_rates = result.state_accepted / sweeps;
  report.param_rates = result.param_accepted / sweeps;
  report.aggregate = static_cast<double>(report.accepted) / static_cast<double>(report.proposals);
  auto outside = [&](double r) { return r < low || r > high; };
  for (Index i = 0; i < report.state_rates.size(); ++i) {
    if (outside(report.state_rates(i))) ++report.flagged_components;
  }
  for (Index i = 0; i < report.param_rates.size(); ++i) {
    if (outside(report.param_rates(i))) ++report.flagged_components;
  }
  report.aggregate_flagged = outside(report.aggregate);
  return report;
}

}  // namespace fgpgm
