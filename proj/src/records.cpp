#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <limits>

#include "fgpgm/harness.hpp"

namespace fgpgm {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

Json number(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

double number_from(const Json& j) { return j.is_null() ? kNaN : j.get<double>(); }

std::ofstream open_csv(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path + "'");
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  return out;
}

Json summary_json(const QuantileSummary& q) {
  return {{"median", number(q.median)}, {"q25", number(q.q25)},     {"q75", number(q.q75)},
          {"q12_5", number(q.q12_5)},   {"q87_5", number(q.q87_5)}};
}

QuantileSummary summary_from(const Json& j) {
  return {number_from(j.at("median")), number_from(j.at("q25")), number_from(j.at("q75")),
          number_from(j.at("q12_5")), number_from(j.at("q87_5"))};
}

Json realization_json(const RealizationRecord& r) {
  Json gps = Json::array();
  for (const StateGp& g : r.gps) {
    gps.push_back({{"kernel", kernel_to_json(g.kernel)},
                   {"noise_sd", g.noise_sd},
                   {"mean", g.standardization.mean},
                   {"scale", g.standardization.scale}});
  }
  Json j{{"index", r.index}, {"ok", r.ok}, {"gamma", r.gamma}, {"gps", gps}};
  if (!r.ok) j["error"] = r.error;
  j["theta_init"] = to_json(r.theta_init);
  j["theta_hat"] = to_json(r.theta_hat);
  j["theta_sd"] = to_json(r.theta_sd);
  j["theta_skewness"] = to_json(r.theta_skewness);
  j["x_hat"] = to_json(r.x_hat);
  j["trajectory"] = to_json(r.trajectory);
  j["rmse"] = to_json(r.rmse);
  j["observation_rmse"] = to_json(r.observation_rmse);
  j["acceptance"] = {{"aggregate", number(r.acceptance)},
                     {"states", to_json(r.state_acceptance)},
                     {"parameters", to_json(r.param_acceptance)},
                     {"stalled", r.stalled}};
  return j;
}

RealizationRecord realization_from(const Json& j) {
  RealizationRecord r;
  r.index = j.at("index").get<Index>();
  r.ok = j.at("ok").get<bool>();
  r.gamma = j.at("gamma").get<double>();
  r.error = j.value("error", std::string());
  for (const Json& g : j.at("gps")) {
    r.gps.push_back({*kernel_from_json(g.at("kernel")), g.at("noise_sd").get<double>(),
                     {g.at("mean").get<double>(), g.at("scale").get<double>()}});
  }
  r.theta_init = vector_from_json(j.at("theta_init"));
  r.theta_hat = vector_from_json(j.at("theta_hat"));
  r.theta_sd = vector_from_json(j.at("theta_sd"));
  r.theta_skewness = vector_from_json(j.at("theta_skewness"));
  r.x_hat = matrix_from_json(j.at("x_hat"));
  r.trajectory = matrix_from_json(j.at("trajectory"));
  r.rmse = vector_from_json(j.at("rmse"));
  r.observation_rmse = vector_from_json(j.at("observation_rmse"));
  const Json& acc = j.at("acceptance");
  r.acceptance = number_from(acc.at("aggregate"));
  r.state_acceptance = vector_from_json(acc.at("states"));
  r.param_acceptance = vector_from_json(acc.at("parameters"));
  r.stalled = acc.at("stalled").get<bool>();
  return r;
}

std::vector<std::string> state_names(const ResultRecord& record) {
  return find_system(record.config.system).state_names;
}

}  // namespace

double quantile(std::vector<double> values, double p) {
  if (values.empty()) throw InvalidInput("quantile: no values");
  if (!(p >= 0.0 && p <= 1.0)) throw InvalidInput("quantile: p must lie in [0, 1]");
  std::sort(values.begin(), values.end());
  const double h = p * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

QuantileSummary summarize(const std::vector<double>& values) {
  return {quantile(values, 0.5), quantile(values, 0.25), quantile(values, 0.75),
          quantile(values, 0.125), quantile(values, 0.875)};
}

Histogram histogram(const Vector& samples, int bins) {
  if (bins < 1) throw InvalidInput("histogram: bins must be >= 1");
  if (samples.size() == 0) throw InvalidInput("histogram: no samples");
  double lo = samples.minCoeff();
  double hi = samples.maxCoeff();
  if (!(hi > lo)) {
    const double pad = 0.5 * std::max(std::abs(lo), 1.0) * 1e-6;
    lo -= pad;
    hi += pad;
  }
  Histogram h;
  h.edges = Vector::LinSpaced(bins + 1, lo, hi);
  h.counts = Vector::Zero(bins);
  const double width = (hi - lo) / bins;
  for (Index i = 0; i < samples.size(); ++i) {
    const auto b = static_cast<Index>((samples(i) - lo) / width);
    h.counts(std::clamp<Index>(b, 0, bins - 1)) += 1.0;
  }
  return h;
}

void aggregate(ResultRecord& record, const std::vector<Matrix>& samples) {
  record.success_count = 0;
  record.rmse_summary.clear();
  record.theta_histograms.clear();

  std::vector<const RealizationRecord*> ok;
  for (const RealizationRecord& r : record.realizations) {
    if (r.ok) ok.push_back(&r);
  }
  record.success_count = static_cast<Index>(ok.size());
  if (ok.empty()) return;

  const Index k_states = ok.front()->rmse.size();
  for (Index k = 0; k < k_states; ++k) {
    std::vector<double> values;
    for (const RealizationRecord* r : ok) values.push_back(r->rmse(k));
    record.rmse_summary.push_back(summarize(values));
  }

  Index rows = 0;
  Index params = 0;
  for (std::size_t i = 0; i < samples.size() && i < record.realizations.size(); ++i) {
    if (record.realizations[i].ok && samples[i].size() > 0) {
      rows += samples[i].rows();
      params = samples[i].cols();
    }
  }
  if (rows == 0) return;
  Matrix pooled(rows, params);
  Index row = 0;
  for (std::size_t i = 0; i < samples.size() && i < record.realizations.size(); ++i) {
    if (record.realizations[i].ok && samples[i].size() > 0) {
      pooled.middleRows(row, samples[i].rows()) = samples[i];
      row += samples[i].rows();
    }
  }
  for (Index p = 0; p < params; ++p) record.theta_histograms.push_back(histogram(pooled.col(p)));
}

bool operator==(const ResultRecord& a, const ResultRecord& b) { return to_json(a) == to_json(b); }

Json to_json(const ResultRecord& record, bool include_timestamps) {
  Json j;
  j["config"] = to_json(record.config);
  j["gamma"] = record.gamma;
  Json table = Json::array();
  for (const GammaScore& g : record.gamma_table) {
    Json row{{"gamma", g.gamma}, {"score", g.score ? number(*g.score) : Json(nullptr)}};
    if (!g.error.empty()) row["error"] = g.error;
    table.push_back(row);
  }
  j["gamma_table"] = table;
  j["truth"] = to_json(record.truth);

  Json reals = Json::array();
  for (const RealizationRecord& r : record.realizations) reals.push_back(realization_json(r));
  j["realizations"] = reals;

  Json rmse = Json::array();
  for (const QuantileSummary& q : record.rmse_summary) rmse.push_back(summary_json(q));
  Json hists = Json::array();
  for (const Histogram& h : record.theta_histograms) {
    hists.push_back({{"edges", to_json(h.edges)}, {"counts", to_json(h.counts)}});
  }
  j["aggregate"] = {{"realizations", record.realizations.size()},
                    {"success_count", record.success_count},
                    {"failure_count", record.failure_count()},
                    {"rmse", rmse},
                    {"theta_histograms", hists}};

  if (include_timestamps) {
    Json wall = Json::array();
    for (const RealizationRecord& r : record.realizations) wall.push_back(r.wall_clock_s);
    j["timestamps"] = {{"created", record.created}, {"wall_clock_s", wall}};
  }
  return j;
}

ResultRecord record_from_json(const Json& j) {
  try {
    ResultRecord record;
    record.config = parse_config(j.at("config"));
    record.gamma = j.at("gamma").get<double>();
    for (const Json& g : j.at("gamma_table")) {
      GammaScore s;
      s.gamma = g.at("gamma").get<double>();
      if (!g.at("score").is_null()) s.score = g.at("score").get<double>();
      s.error = g.value("error", std::string());
      record.gamma_table.push_back(s);
    }
    record.truth = matrix_from_json(j.at("truth"));
    for (const Json& r : j.at("realizations")) record.realizations.push_back(realization_from(r));

    const Json& agg = j.at("aggregate");
    record.success_count = agg.at("success_count").get<Index>();
    for (const Json& q : agg.at("rmse")) record.rmse_summary.push_back(summary_from(q));
    for (const Json& h : agg.at("theta_histograms")) {
      record.theta_histograms.push_back(
          {vector_from_json(h.at("edges")), vector_from_json(h.at("counts"))});
    }

    if (j.contains("timestamps")) {
      const Json& ts = j.at("timestamps");
      record.created = ts.value("created", std::string());
      const Json& wall = ts.at("wall_clock_s");
      for (std::size_t i = 0; i < wall.size() && i < record.realizations.size(); ++i) {
        record.realizations[i].wall_clock_s = wall[i].get<double>();
      }
    }
    return record;
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("malformed result record: ") + e.what());
  }
}

void write_json(const Json& j, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path + "'");
  out << j.dump(2) << '\n';
}

Json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw ConfigError("'" + path + "' is not valid JSON: " + e.what());
  }
}

void write_rmse_csv(const ResultRecord& record, const std::string& path) {
  std::ofstream out = open_csv(path);
  out << "realization,ok";
  for (const std::string& name : state_names(record)) out << ',' << name;
  out << '\n';
  for (const RealizationRecord& r : record.realizations) {
    out << r.index << ',' << (r.ok ? 1 : 0);
    for (Index k = 0; k < r.rmse.size(); ++k) out << ',' << r.rmse(k);
    out << '\n';
  }
}

void write_theta_histogram_csv(const ResultRecord& record, const std::string& path) {
  std::ofstream out = open_csv(path);
  out << "parameter,bin,lower,upper,count\n";
  for (std::size_t p = 0; p < record.theta_histograms.size(); ++p) {
    const Histogram& h = record.theta_histograms[p];
    for (Index b = 0; b < h.counts.size(); ++b) {
      out << "theta" << p + 1 << ',' << b << ',' << h.edges(b) << ',' << h.edges(b + 1) << ','
          << h.counts(b) << '\n';
    }
  }
}

void write_trajectory_bands_csv(const ResultRecord& record, const std::string& path) {
  std::ofstream out = open_csv(path);
  out << "state,time,truth,median,q12_5,q25,q75,q87_5\n";
  std::vector<const RealizationRecord*> ok;
  for (const RealizationRecord& r : record.realizations) {
    if (r.ok) ok.push_back(&r);
  }
  if (ok.empty()) return;
  const auto names = state_names(record);
  const Vector& times = record.config.times;
  for (Index k = 0; k < record.truth.rows(); ++k) {
    for (Index i = 0; i < times.size(); ++i) {
      std::vector<double> values;
      for (const RealizationRecord* r : ok) values.push_back(r->trajectory(k, i));
      const QuantileSummary q = summarize(values);
      out << names[static_cast<std::size_t>(k)] << ',' << times(i) << ',' << record.truth(k, i)
          << ',' << q.median << ',' << q.q12_5 << ',' << q.q25 << ',' << q.q75 << ',' << q.q87_5
          << '\n';
    }
  }
}

void write_dataset_csv(const Dataset& data, const OdeSystem& system, const std::string& path) {
  std::ofstream out = open_csv(path);
  out << "time";
  for (const std::string& name : system.state_names) out << ',' << name;
  for (const std::string& name : system.state_names) out << ",true_" << name;
  out << '\n';
  const Matrix& y = data.observations.values;
  for (Index i = 0; i < y.cols(); ++i) {
    out << data.observations.times(i);
    for (Index k = 0; k < y.rows(); ++k) out << ',' << y(k, i);
    for (Index k = 0; k < y.rows(); ++k) out << ',' << data.truth.states(k, i);
    out << '\n';
  }
}

void write_estimates_csv(const RealizationRecord& r, const Vector& times, const OdeSystem& system,
                         const std::string& path) {
  std::ofstream out = open_csv(path);
  out << "time";
  for (const std::string& name : system.state_names) out << ",x_hat_" << name;
  for (const std::string& name : system.state_names) out << ",integrated_" << name;
  out << '\n';
  if (!r.ok) return;
  for (Index i = 0; i < times.size(); ++i) {
    out << times(i);
    for (Index k = 0; k < r.x_hat.rows(); ++k) out << ',' << r.x_hat(k, i);
    for (Index k = 0; k < r.trajectory.rows(); ++k) out << ',' << r.trajectory(k, i);
    out << '\n';
  }
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace fgpgm
