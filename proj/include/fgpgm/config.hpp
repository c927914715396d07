#ifndef FGPGM_CONFIG_HPP
#define FGPGM_CONFIG_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fgpgm/kernels.hpp"
#include "fgpgm/sampler.hpp"

namespace fgpgm {

using Json = nlohmann::json;

enum class ThetaInit { WarmStart, Midpoint, Explicit };

/// Declarative description of one experiment. Parsed from, and echoed back
/// into, a single JSON document.
struct ExperimentConfig {
  std::string system;
  Vector theta;  // ground truth
  Vector x0;
  std::optional<double> t0;  // defaults to the first observation time
  Vector times;

  // Exactly one of noise_sd (one entry per state) and snr is set.
  std::optional<Vector> noise_sd;
  std::optional<double> snr;

  KernelFamily kernel_family = KernelFamily::RBF;
  std::optional<KernelParams> fixed_kernel;  // skips fitting together with fixed_noise_sd
  std::optional<double> fixed_noise_sd;
  bool shared_gp = false;
  double nugget = 0.0;
  int fit_restarts = 10;

  std::vector<double> gamma_grid;  // one entry means a fixed gamma

  MCMCConfig mcmc;
  ThetaInit theta_init = ThetaInit::WarmStart;
  Vector theta_init_values;
  int warm_start_restarts = 10;

  bool evaluate_from_true_x0 = true;
  std::optional<double> integration_step;

  Index realizations = 5;
  std::uint64_t seed = 0;
  int threads = 1;
  std::string output;

  [[nodiscard]] double start_time() const { return t0.value_or(times(0)); }
  [[nodiscard]] bool has_gamma_grid() const { return gamma_grid.size() > 1; }
};

/// Field-wise equality, via the canonical JSON form.
bool operator==(const ExperimentConfig& a, const ExperimentConfig& b);

/// Throws ConfigError on any missing, malformed or inconsistent field.
ExperimentConfig parse_config(const Json& document);
ExperimentConfig load_config(const std::string& path);

Json to_json(const ExperimentConfig& config);

Json kernel_to_json(const KernelParams& kernel);
/// Reads `{"family": ..., <hyperparameters>}`. Returns nullopt when only the
/// family is given.
std::optional<KernelParams> kernel_from_json(const Json& j, KernelFamily* family = nullptr);

/// 8 values log-spaced between 1e-4 and 1, ascending.
std::vector<double> default_gamma_grid();
std::vector<double> log_spaced(double lo, double hi, int count);

/// Independent stream seed for (experiment seed, realization, purpose).
std::uint64_t derive_seed(std::uint64_t seed, Index realization, std::uint32_t stream);

namespace seed_stream {
inline constexpr std::uint32_t noise = 1;
inline constexpr std::uint32_t mcmc = 2;
inline constexpr std::uint32_t gp_fit = 3;
inline constexpr std::uint32_t warm_start = 4;
}  // namespace seed_stream

Json to_json(const Vector& v);
Json to_json(const Matrix& m);  // array of rows
Vector vector_from_json(const Json& j);
Matrix matrix_from_json(const Json& j);

}  // namespace fgpgm

#endif  // FGPGM_CONFIG_HPP
