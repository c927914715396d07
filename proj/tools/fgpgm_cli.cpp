// Command-line front end: generate, infer, select-gamma, benchmark, evaluate.

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "fgpgm/harness.hpp"

namespace fs = std::filesystem;
using namespace fgpgm;

namespace {

enum ExitCode { kOk = 0, kPartial = 1, kConfigError = 2, kTotalFailure = 3 };

struct CommonOptions {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<Index> realizations;
  std::optional<int> threads;
  bool no_timestamps = false;
  bool quiet = false;
};

void add_common(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--config", o.config, "Experiment config (JSON)")->required();
  cmd->add_option("--out", o.out, "Output directory (default: config \"output\" or ./results)");
  cmd->add_option("--seed", o.seed, "Override the experiment seed");
  cmd->add_option("--realizations", o.realizations, "Override the realization count");
  cmd->add_option("--threads", o.threads, "Worker threads for realizations");
  cmd->add_flag("--no-timestamps", o.no_timestamps, "Omit the timestamps object from JSON");
  cmd->add_flag("-q,--quiet", o.quiet, "No progress output");
}

ExperimentConfig load(const CommonOptions& o) {
  ExperimentConfig c = load_config(o.config);
  if (o.seed) c.seed = *o.seed;
  if (o.realizations) c.realizations = *o.realizations;
  if (o.threads) c.threads = *o.threads;
  return parse_config(to_json(c));  // revalidate with overrides applied
}

fs::path output_dir(const CommonOptions& o, const ExperimentConfig& c) {
  fs::path dir = !o.out.empty() ? fs::path(o.out) : !c.output.empty() ? fs::path(c.output)
                                                                      : fs::path("results");
  fs::create_directories(dir);
  return dir;
}

int exit_code(const ResultRecord& r) {
  if (r.success_count == static_cast<Index>(r.realizations.size())) return kOk;
  return r.success_count == 0 ? kTotalFailure : kPartial;
}

ProgressCallback reporter(const CommonOptions& o) {
  if (o.quiet) return {};
  return [](const RealizationRecord& r) {
    std::cerr << "realization " << r.index << ": ";
    if (r.ok) {
      std::cerr << "rmse " << r.rmse.transpose() << "  acceptance " << r.acceptance;
    } else {
      std::cerr << "FAILED (" << r.error << ")";
    }
    std::cerr << "  [" << r.wall_clock_s << " s]\n";
  };
}

void print_summary(const ResultRecord& r) {
  const auto names = find_system(r.config.system).state_names;
  std::cout << "gamma " << r.gamma << ", " << r.success_count << "/" << r.realizations.size()
            << " realizations succeeded\n";
  for (std::size_t k = 0; k < r.rmse_summary.size(); ++k) {
    const QuantileSummary& q = r.rmse_summary[k];
    std::cout << "  " << names[k] << ": median RMSE " << q.median << " (50% " << q.q25 << ".."
              << q.q75 << ", 75% " << q.q12_5 << ".." << q.q87_5 << ")\n";
  }
}

int cmd_generate(const CommonOptions& o) {
  const ExperimentConfig c = load(o);
  const fs::path dir = output_dir(o, c);
  const OdeSystem system = find_system(c.system);
  const fs::path truth = dir / "truth.csv";
  write_trajectory_csv(ground_truth(c), truth.string());
  if (!o.quiet) std::cerr << "wrote " << truth.string() << '\n';
  for (Index r = 0; r < c.realizations; ++r) {
    const Dataset data = generate_data(c, r);
    const fs::path file = dir / ("data_" + std::to_string(r) + ".csv");
    write_dataset_csv(data, system, file.string());
    if (!o.quiet) std::cerr << "wrote " << file.string() << '\n';
  }
  return kOk;
}

int cmd_select_gamma(const CommonOptions& o) {
  const ExperimentConfig c = load(o);
  const fs::path dir = output_dir(o, c);
  const GammaSelection sel = gamma_grid_select(c);
  Json table = Json::array();
  for (const GammaScore& g : sel.table) {
    Json row{{"gamma", g.gamma}, {"score", g.score ? Json(*g.score) : Json(nullptr)}};
    if (!g.error.empty()) row["error"] = g.error;
    table.push_back(row);
    std::cout << "gamma " << g.gamma << ": "
              << (g.score ? std::to_string(*g.score) : "failed (" + g.error + ")") << '\n';
  }
  write_json({{"gamma", sel.gamma}, {"table", table}}, (dir / "gamma_selection.json").string());
  std::cout << "selected gamma " << sel.gamma << '\n';
  return kOk;
}

int cmd_run(const CommonOptions& o, bool full_benchmark) {
  const ExperimentConfig c = load(o);
  const fs::path dir = output_dir(o, c);
  const ResultRecord record = benchmark(c, reporter(o));
  write_json(to_json(record, !o.no_timestamps), (dir / "result.json").string());
  if (full_benchmark) {
    write_rmse_csv(record, (dir / "rmse.csv").string());
    write_theta_histogram_csv(record, (dir / "theta_hist.csv").string());
    write_trajectory_bands_csv(record, (dir / "trajectory_bands.csv").string());
  } else {
    const OdeSystem system = find_system(c.system);
    for (const RealizationRecord& r : record.realizations) {
      write_estimates_csv(r, c.times, system,
                          (dir / ("estimates_" + std::to_string(r.index) + ".csv")).string());
    }
  }
  print_summary(record);
  return exit_code(record);
}

int cmd_evaluate(const CommonOptions& o, const std::string& result_path) {
  const ExperimentConfig c = load(o);
  const fs::path dir = output_dir(o, c);
  ResultRecord record = record_from_json(read_json(result_path));
  const OdeSystem system = find_system(c.system);
  const Trajectory truth = ground_truth(c);

  Json out = Json::array();
  std::cout << "realization";
  for (const auto& n : system.state_names) std::cout << ' ' << n;
  std::cout << '\n';
  Index ok = 0;
  for (RealizationRecord& r : record.realizations) {
    Json row{{"index", r.index}};
    if (!r.ok) {
      row["error"] = r.error;
      out.push_back(row);
      continue;
    }
    try {
      const Vector x0 = c.evaluate_from_true_x0 ? c.x0 : Vector(r.x_hat.col(0));
      const std::optional<double> t0 =
          c.evaluate_from_true_x0 ? c.t0 : std::optional<double>(c.times(0));
      const Trajectory fitted = integrate(system, r.theta_hat, x0, c.times, c.integration_step, t0);
      r.trajectory = fitted.states;
      r.rmse = trajectory_rmse(fitted, truth);
      row["rmse"] = to_json(r.rmse);
      std::cout << r.index << ' ' << r.rmse.transpose() << '\n';
      ++ok;
    } catch (const Error& e) {
      r.ok = false;
      r.error = e.what();
      row["error"] = r.error;
      std::cout << r.index << " failed: " << r.error << '\n';
    }
    out.push_back(row);
  }
  record.config = c;
  record.truth = truth.states;
  aggregate(record, {});
  write_json({{"evaluation", out}, {"realizations", record.realizations.size()}},
             (dir / "evaluation.json").string());
  write_rmse_csv(record, (dir / "rmse.csv").string());
  write_trajectory_bands_csv(record, (dir / "trajectory_bands.csv").string());
  if (ok == static_cast<Index>(record.realizations.size())) return kOk;
  return ok == 0 ? kTotalFailure : kPartial;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gaussian-process gradient matching for ODE parameter inference"};
  app.require_subcommand(1);

  CommonOptions opts;
  std::string result_path;
  auto* generate = app.add_subcommand("generate", "Write synthetic observations as CSV");
  auto* infer = app.add_subcommand("infer", "Run the inference pipeline per realization");
  auto* select = app.add_subcommand("select-gamma", "Score a gamma grid on realization 0");
  auto* bench = app.add_subcommand("benchmark", "Run all realizations and aggregate");
  auto* evaluate = app.add_subcommand("evaluate", "Re-evaluate the estimates of a result file");
  for (auto* cmd : {generate, infer, select, bench, evaluate}) add_common(cmd, opts);
  evaluate->add_option("--result", result_path, "result.json from infer or benchmark")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (*generate) return cmd_generate(opts);
    if (*infer) return cmd_run(opts, false);
    if (*select) return cmd_select_gamma(opts);
    if (*bench) return cmd_run(opts, true);
    if (*evaluate) return cmd_evaluate(opts, result_path);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kTotalFailure;
  }
  return kConfigError;
}
