#include "fgpgm/config.hpp"

#include <array>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>

#include "fgpgm/systems.hpp"

namespace fgpgm {

namespace {

double positive(const Json& j, const char* what) {
  const double v = j.get<double>();
  if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(std::string(what) + " must be > 0");
  return v;
}

Vector parse_times(const Json& j) {
  if (j.is_array()) return vector_from_json(j);
  if (j.is_object()) {
    const double start = j.at("start").get<double>();
    const double end = j.at("end").get<double>();
    const int count = j.at("count").get<int>();
    if (count < 2 || !(end > start)) throw ConfigError("times: need count >= 2 and end > start");
    return Vector::LinSpaced(count, start, end);
  }
  throw ConfigError("times: expected a list or {start, end, count}");
}

std::vector<double> parse_gamma_grid(const Json& j) {
  if (j.is_string() && j.get<std::string>() == "default") return default_gamma_grid();
  if (j.is_array()) {
    std::vector<double> grid;
    for (const Json& g : j) grid.push_back(positive(g, "gamma"));
    return grid;
  }
  if (j.is_object()) {
    return log_spaced(positive(j.at("min"), "gamma_grid.min"),
                      positive(j.at("max"), "gamma_grid.max"), j.at("count").get<int>());
  }
  throw ConfigError("gamma_grid: expected \"default\", a list or {min, max, count}");
}

MCMCConfig parse_mcmc(const Json& j) {
  MCMCConfig m;
  m.n_mcmc = j.value("n_mcmc", m.n_mcmc);
  m.n_burnin = j.value("n_burnin", m.n_burnin);
  m.state_proposal_sd = j.value("state_proposal_sd", m.state_proposal_sd);
  m.param_proposal_sd = j.value("param_proposal_sd", m.param_proposal_sd);
  m.thinning = j.value("thinning", m.thinning);
  try {
    m.validate();
  } catch (const InvalidInput& e) {
    throw ConfigError(e.what());
  }
  return m;
}

void validate(const ExperimentConfig& c) {
  OdeSystem system;
  try {
    system = find_system(c.system);
  } catch (const InvalidInput& e) {
    throw ConfigError(e.what());
  }
  if (c.theta.size() != system.parameter_count) {
    throw ConfigError("theta: expected " + std::to_string(system.parameter_count) + " values");
  }
  if (c.x0.size() != system.dimension) {
    throw ConfigError("x0: expected " + std::to_string(system.dimension) + " values");
  }
  if (c.times.size() < 4) throw ConfigError("times: at least 4 observation times are required");
  try {
    require_increasing_times(c.times);
  } catch (const InvalidInput& e) {
    throw ConfigError(std::string("times: ") + e.what());
  }
  if (c.t0 && *c.t0 > c.times(0)) throw ConfigError("t0 must not exceed the first time");
  if (c.noise_sd.has_value() == c.snr.has_value()) {
    throw ConfigError("exactly one of noise_sd and snr must be given");
  }
  if (c.noise_sd) {
    if (c.noise_sd->size() != system.dimension) throw ConfigError("noise_sd: one value per state");
    if ((c.noise_sd->array() < 0.0).any() || !c.noise_sd->allFinite()) {
      throw ConfigError("noise_sd must be >= 0");
    }
  }
  if (c.gamma_grid.empty()) throw ConfigError("gamma or gamma_grid is required");
  if (c.realizations < 1) throw ConfigError("realizations must be >= 1");
  if (c.threads < 1) throw ConfigError("threads must be >= 1");
  if (c.fit_restarts < 1 || c.warm_start_restarts < 1) throw ConfigError("restarts must be >= 1");
  if (!(c.nugget >= 0.0)) throw ConfigError("gp.nugget must be >= 0");
  if (c.theta_init == ThetaInit::Explicit && c.theta_init_values.size() != system.parameter_count) {
    throw ConfigError("theta_init: wrong number of values");
  }
  if (c.fixed_kernel.has_value() != c.fixed_noise_sd.has_value()) {
    throw ConfigError("fixed GP hyperparameters need both kernel values and gp.noise_sd");
  }
}

}  // namespace

bool operator==(const ExperimentConfig& a, const ExperimentConfig& b) {
  return to_json(a) == to_json(b);
}

Json to_json(const Vector& v) {
  Json j = Json::array();
  for (Index i = 0; i < v.size(); ++i) {
    if (std::isfinite(v(i))) {
      j.push_back(v(i));
    } else {
      j.push_back(nullptr);
    }
  }
  return j;
}

Json to_json(const Matrix& m) {
  Json j = Json::array();
  for (Index r = 0; r < m.rows(); ++r) j.push_back(to_json(Vector(m.row(r).transpose())));
  return j;
}

Vector vector_from_json(const Json& j) {
  if (!j.is_array()) throw ConfigError("expected a numeric list");
  Vector v(static_cast<Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    // NaN is written as null.
    v(static_cast<Index>(i)) =
        j[i].is_null() ? std::numeric_limits<double>::quiet_NaN() : j[i].get<double>();
  }
  return v;
}

Matrix matrix_from_json(const Json& j) {
  if (!j.is_array()) throw ConfigError("expected a list of rows");
  if (j.empty()) return Matrix(0, 0);
  const auto rows = static_cast<Index>(j.size());
  const auto cols = static_cast<Index>(j[0].size());
  Matrix m(rows, cols);
  for (Index r = 0; r < rows; ++r) {
    const Vector row = vector_from_json(j[static_cast<std::size_t>(r)]);
    if (row.size() != cols) throw ConfigError("ragged matrix");
    m.row(r) = row.transpose();
  }
  return m;
}

Json kernel_to_json(const KernelParams& k) {
  Json j{{"family", std::string(to_string(k.family))}, {"signal_variance", k.signal_variance}};
  if (k.family == KernelFamily::Sigmoid) {
    j["offset"] = k.offset;
    j["slope"] = k.slope;
  } else {
    j["lengthscale"] = k.lengthscale;
  }
  return j;
}

std::optional<KernelParams> kernel_from_json(const Json& j, KernelFamily* family) {
  const KernelFamily f =
      parse_kernel_family(j.is_string() ? j.get<std::string>() : j.at("family").get<std::string>());
  if (family) *family = f;
  if (j.is_string() || !j.contains("signal_variance")) return std::nullopt;
  KernelParams k;
  k.family = f;
  k.signal_variance = j.at("signal_variance").get<double>();
  if (f == KernelFamily::Sigmoid) {
    k.offset = j.at("offset").get<double>();
    k.slope = j.at("slope").get<double>();
  } else {
    k.lengthscale = j.at("lengthscale").get<double>();
  }
  validate(k);
  return k;
}

std::vector<double> log_spaced(double lo, double hi, int count) {
  if (count < 1 || !(lo > 0.0) || !(hi >= lo)) throw ConfigError("log_spaced: bad range");
  std::vector<double> out;
  for (int i = 0; i < count; ++i) {
    const double frac = count == 1 ? 0.0 : static_cast<double>(i) / (count - 1);
    out.push_back(std::pow(10.0, std::log10(lo) + frac * (std::log10(hi) - std::log10(lo))));
  }
  return out;
}

std::vector<double> default_gamma_grid() { return log_spaced(1e-4, 1.0, 8); }

std::uint64_t derive_seed(std::uint64_t seed, Index realization, std::uint32_t stream) {
  const auto r = static_cast<std::uint64_t>(realization);
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(r), static_cast<std::uint32_t>(r >> 32), stream};
  std::array<std::uint32_t, 2> out{};
  seq.generate(out.begin(), out.end());
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

ExperimentConfig parse_config(const Json& d) {
  ExperimentConfig c;
  try {
    if (!d.is_object()) throw ConfigError("config must be a JSON object");
    c.system = d.at("system").get<std::string>();
    c.theta = vector_from_json(d.at("theta"));
    c.x0 = vector_from_json(d.at("x0"));
    if (d.contains("t0")) c.t0 = d.at("t0").get<double>();
    c.times = parse_times(d.at("times"));

    if (d.contains("noise_sd")) {
      const Json& n = d.at("noise_sd");
      c.noise_sd = n.is_array() ? vector_from_json(n)
                                : Vector::Constant(c.x0.size(), n.get<double>());
    }
    if (d.contains("snr")) c.snr = positive(d.at("snr"), "snr");

    KernelFamily family = KernelFamily::RBF;
    if (d.contains("kernel")) c.fixed_kernel = kernel_from_json(d.at("kernel"), &family);
    c.kernel_family = family;

    if (d.contains("gp")) {
      const Json& gp = d.at("gp");
      c.shared_gp = gp.value("shared", false);
      c.nugget = gp.value("nugget", 0.0);
      c.fit_restarts = gp.value("restarts", 10);
      if (gp.contains("noise_sd")) c.fixed_noise_sd = positive(gp.at("noise_sd"), "gp.noise_sd");
    }

    if (d.contains("gamma") && d.contains("gamma_grid")) {
      throw ConfigError("give either gamma or gamma_grid, not both");
    }
    if (d.contains("gamma")) c.gamma_grid = {positive(d.at("gamma"), "gamma")};
    if (d.contains("gamma_grid")) c.gamma_grid = parse_gamma_grid(d.at("gamma_grid"));

    if (d.contains("mcmc")) c.mcmc = parse_mcmc(d.at("mcmc"));

    if (d.contains("theta_init")) {
      const Json& ti = d.at("theta_init");
      if (ti.is_array()) {
        c.theta_init = ThetaInit::Explicit;
        c.theta_init_values = vector_from_json(ti);
      } else {
        const auto mode = ti.get<std::string>();
        if (mode == "warm_start") {
          c.theta_init = ThetaInit::WarmStart;
        } else if (mode == "midpoint") {
          c.theta_init = ThetaInit::Midpoint;
        } else {
          throw ConfigError("theta_init: expected \"warm_start\", \"midpoint\" or a list");
        }
      }
    }
    c.warm_start_restarts = d.value("warm_start_restarts", c.warm_start_restarts);

    if (d.contains("evaluation")) {
      const Json& ev = d.at("evaluation");
      const auto ic = ev.value("initial_condition", std::string("true"));
      if (ic != "true" && ic != "inferred") {
        throw ConfigError("evaluation.initial_condition: expected \"true\" or \"inferred\"");
      }
      c.evaluate_from_true_x0 = ic == "true";
      if (ev.contains("step")) c.integration_step = positive(ev.at("step"), "evaluation.step");
    }

    c.realizations = d.value("realizations", c.realizations);
    c.seed = d.value("seed", c.seed);
    c.threads = d.value("threads", c.threads);
    c.output = d.value("output", std::string());
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  } catch (const InvalidInput& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  validate(c);
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  Json d;
  try {
    d = Json::parse(in);
  } catch (const Json::exception& e) {
    throw ConfigError("config '" + path + "' is not valid JSON: " + e.what());
  }
  return parse_config(d);
}

Json to_json(const ExperimentConfig& c) {
  Json j;
  j["system"] = c.system;
  j["theta"] = to_json(c.theta);
  j["x0"] = to_json(c.x0);
  if (c.t0) j["t0"] = *c.t0;
  j["times"] = to_json(c.times);
  if (c.noise_sd) j["noise_sd"] = to_json(*c.noise_sd);
  if (c.snr) j["snr"] = *c.snr;
  j["kernel"] = c.fixed_kernel ? kernel_to_json(*c.fixed_kernel)
                               : Json{{"family", std::string(to_string(c.kernel_family))}};
  j["gp"] = {{"shared", c.shared_gp}, {"nugget", c.nugget}, {"restarts", c.fit_restarts}};
  if (c.fixed_noise_sd) j["gp"]["noise_sd"] = *c.fixed_noise_sd;
  if (c.gamma_grid.size() == 1) {
    j["gamma"] = c.gamma_grid.front();
  } else {
    j["gamma_grid"] = c.gamma_grid;
  }
  j["mcmc"] = {{"n_mcmc", c.mcmc.n_mcmc},
               {"n_burnin", c.mcmc.n_burnin},
               {"state_proposal_sd", c.mcmc.state_proposal_sd},
               {"param_proposal_sd", c.mcmc.param_proposal_sd},
               {"thinning", c.mcmc.thinning}};
  switch (c.theta_init) {
    case ThetaInit::WarmStart:
      j["theta_init"] = "warm_start";
      break;
    case ThetaInit::Midpoint:
      j["theta_init"] = "midpoint";
      break;
    case ThetaInit::Explicit:
      j["theta_init"] = to_json(c.theta_init_values);
      break;
  }
  j["warm_start_restarts"] = c.warm_start_restarts;
  j["evaluation"] = {{"initial_condition", c.evaluate_from_true_x0 ? "true" : "inferred"}};
  if (c.integration_step) j["evaluation"]["step"] = *c.integration_step;
  j["realizations"] = c.realizations;
  j["seed"] = c.seed;
  j["threads"] = c.threads;
  j["output"] = c.output;
  return j;
}

}  // namespace fgpgm
