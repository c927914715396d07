#ifndef FGPGM_SAMPLER_HPP
#define FGPGM_SAMPLER_HPP

#include <cstdint>
#include <random>
#include <vector>

#include "fgpgm/density.hpp"

namespace fgpgm {

struct MCMCConfig {
  Index n_mcmc = 10000;
  Index n_burnin = 1000;
  double state_proposal_sd = 0.075;  // standardized state units
  double param_proposal_sd = 0.09;   // parameter units
  std::uint64_t rng_seed = 0;
  Index thinning = 1;

  void validate() const;
};

struct ChainState {
  Matrix x;      // K x N latent states
  Vector theta;  // P parameters
};

/// What the sampler explores. The ODE density is one implementation; tests
/// plug in analytic targets.
class Target {
 public:
  virtual ~Target() = default;
  [[nodiscard]] virtual double log_density(const ChainState& state) const = 0;
  /// State proposals are N(0, sd^2) in standardized units, i.e. scaled by this.
  [[nodiscard]] virtual double state_scale(Index /*k*/) const { return 1.0; }
};

/// joint_log_density over a DensityContext.
class DensityTarget final : public Target {
 public:
  explicit DensityTarget(const DensityContext& ctx) : ctx_(ctx) {}
  [[nodiscard]] double log_density(const ChainState& state) const override {
    return joint_log_density(state.x, state.theta, ctx_);
  }
  [[nodiscard]] double state_scale(Index k) const override {
    return ctx_.fit(k).standardization().scale;
  }

 private:
  const DensityContext& ctx_;
};

/// One scalar coordinate of the chain: a state value (row, col) or a parameter.
struct Component {
  enum class Kind { State, Parameter };
  Kind kind = Kind::State;
  Index row = 0;  // state index k, or parameter index
  Index col = 0;  // time index i (states only)

  static Component state(Index k, Index i) { return {Kind::State, k, i}; }
  static Component parameter(Index p) { return {Kind::Parameter, p, 0}; }
};

using Rng = std::mt19937_64;

/// Random-walk Metropolis update of a single component. On acceptance the
/// state and `current_log_density` are updated in place.
bool mh_component_step(ChainState& state, double& current_log_density, const Component& component,
                       const Target& target, const MCMCConfig& config, Rng& rng);

struct ChainResult {
  Matrix x_mean;
  Vector theta_mean;
  std::vector<Matrix> x_samples;  // thinned retained sweeps
  Matrix theta_samples;           // thinned retained sweeps, one row each
  Vector log_density_trace;       // after every sweep, burn-in included
  Matrix state_accepted;          // K x N acceptance counts over retained sweeps
  Vector param_accepted;          // P
  Index retained_sweeps = 0;
  bool stalled = false;           // nothing was accepted after burn-in
};

/// Runs n_burnin + n_mcmc sweeps. A sweep updates every state value in (k, i)
/// order, then every parameter in index order, and records the resulting state.
ChainResult run_chain(const ChainState& initial, const Target& target, const MCMCConfig& config);

struct AcceptanceReport {
  double aggregate = 0.0;
  Matrix state_rates;
  Vector param_rates;
  Index proposals = 0;
  Index accepted = 0;
  Index flagged_components = 0;  // rates outside [low, high]
  bool aggregate_flagged = false;
  double low = 0.1;
  double high = 0.5;
};

AcceptanceReport tune_diagnostics(const ChainResult& result, double low = 0.1, double high = 0.5);

}  // namespace fgpgm

#endif  // FGPGM_SAMPLER_HPP
