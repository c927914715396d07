#ifndef FGPGM_HARNESS_HPP
#define FGPGM_HARNESS_HPP

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "fgpgm/config.hpp"
#include "fgpgm/density.hpp"
#include "fgpgm/integrator.hpp"
#include "fgpgm/sampler.hpp"

namespace fgpgm {

/// Synthetic observations for one realization together with the noiseless truth.
struct Dataset {
  TimeSeries observations;
  Trajectory truth;
  Vector noise_sd;  // per state, after SNR conversion
};

/// Per-state noise level: the configured values, or the population standard
/// deviation of the noiseless trajectory divided by the SNR.
Vector effective_noise_sd(const ExperimentConfig& config, const Trajectory& truth);

Trajectory ground_truth(const ExperimentConfig& config);

/// Noise is drawn from a stream keyed by (config.seed, realization).
Dataset generate_data(const ExperimentConfig& config, Index realization);

/// Standardizes each state and fits (or takes) its GP hyperparameters.
std::vector<GPStateFit> fit_state_gps(const ExperimentConfig& config,
                                      const TimeSeries& observations, Index realization);

/// Multi-start Nelder-Mead maximization of the joint density over theta with
/// the states held at the observations. The first start is the bounds midpoint.
Vector warm_start_theta(const DensityContext& ctx, int restarts, std::uint64_t seed);

struct StateGp {
  KernelParams kernel;
  double noise_sd = 0.0;  // standardized units
  Standardization standardization;
};

/// Summary of one realization. Everything except `wall_clock_s` is a pure
/// function of (config, realization, gamma).
struct RealizationRecord {
  Index index = 0;
  bool ok = false;
  std::string error;

  double gamma = 0.0;
  std::vector<StateGp> gps;
  Vector theta_init;
  Vector theta_hat;
  Vector theta_sd;
  Vector theta_skewness;
  Matrix x_hat;
  Matrix trajectory;        // integrated from theta_hat at the observation times
  Vector rmse;              // per state, against the noiseless truth
  Vector observation_rmse;  // per state, against the noisy observations
  double acceptance = 0.0;
  Vector state_acceptance;  // per state, averaged over time points
  Vector param_acceptance;
  bool stalled = false;

  double wall_clock_s = 0.0;
};

/// A realization record plus the retained parameter samples.
struct RealizationOutcome {
  RealizationRecord record;
  Matrix theta_samples;
};

/// Full pipeline for one realization at a fixed gamma. Stage errors are
/// captured in the record instead of thrown.
RealizationOutcome run_fgpgm(const ExperimentConfig& config, Index realization, double gamma);

/// Same, using the configured gamma (the first grid entry).
RealizationOutcome run_fgpgm(const ExperimentConfig& config, Index realization);

struct GammaScore {
  double gamma = 0.0;
  std::optional<double> score;
  std::string error;
};

struct GammaSelection {
  double gamma = 0.0;
  std::vector<GammaScore> table;
};

/// Picks the grid value with the lowest finite score; ties go to the larger
/// gamma. A score function that throws marks that gamma as failed. Throws
/// FitFailure when every gamma fails.
GammaSelection select_gamma(const std::vector<double>& grid,
                            const std::function<double(double gamma)>& score);

/// Scores each grid value by the mean over states of the RMSE between the
/// inferred trajectory and the noisy observations of realization 0.
GammaSelection gamma_grid_select(const ExperimentConfig& config);

/// Type-7 (linear interpolation) sample quantile, p in [0, 1].
double quantile(std::vector<double> values, double p);

struct QuantileSummary {
  double median = 0.0;
  double q25 = 0.0;
  double q75 = 0.0;
  double q12_5 = 0.0;
  double q87_5 = 0.0;
};

/// Median, 50% box and 75% whisker bounds.
QuantileSummary summarize(const std::vector<double>& values);

struct Histogram {
  Vector edges;   // bins + 1
  Vector counts;  // bins
};

Histogram histogram(const Vector& samples, int bins = 50);

struct ResultRecord {
  ExperimentConfig config;
  double gamma = 0.0;
  std::vector<GammaScore> gamma_table;  // empty unless a grid was searched
  Matrix truth;                         // noiseless states at the observation times
  std::vector<RealizationRecord> realizations;
  Index success_count = 0;
  std::vector<QuantileSummary> rmse_summary;  // per state, over successes
  std::vector<Histogram> theta_histograms;    // per parameter, pooled over successes
  std::string created;                        // ISO 8601 timestamp

  [[nodiscard]] Index failure_count() const {
    return static_cast<Index>(realizations.size()) - success_count;
  }
};

using ProgressCallback = std::function<void(const RealizationRecord&)>;

/// Runs every realization (concurrently when config.threads > 1) and
/// assembles the record in realization order.
ResultRecord run_realizations(const ExperimentConfig& config, double gamma,
                              const ProgressCallback& progress = {});

/// gamma_grid_select when a grid is configured, then run_realizations.
ResultRecord benchmark(const ExperimentConfig& config, const ProgressCallback& progress = {});

/// Recomputes success count, RMSE quantiles and histograms from `samples`
/// (one matrix per realization; failed realizations may pass an empty one).
void aggregate(ResultRecord& record, const std::vector<Matrix>& samples);

/// Equality of the serialized form, timestamps included.
bool operator==(const ResultRecord& a, const ResultRecord& b);

/// Everything except the top-level "timestamps" object is deterministic.
Json to_json(const ResultRecord& record, bool include_timestamps = true);
ResultRecord record_from_json(const Json& j);

void write_json(const Json& j, const std::string& path);
Json read_json(const std::string& path);

/// Plot data next to the JSON record.
void write_rmse_csv(const ResultRecord& record, const std::string& path);
void write_theta_histogram_csv(const ResultRecord& record, const std::string& path);
void write_trajectory_bands_csv(const ResultRecord& record, const std::string& path);
void write_dataset_csv(const Dataset& data, const OdeSystem& system, const std::string& path);
void write_estimates_csv(const RealizationRecord& r, const Vector& times, const OdeSystem& system,
                         const std::string& path);

/// Current UTC time, ISO 8601.
std::string utc_timestamp();

}  // namespace fgpgm

#endif  // FGPGM_HARNESS_HPP
