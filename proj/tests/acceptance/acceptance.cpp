// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "fgpgm/config.hpp"
#include "fgpgm/density.hpp"
#include "fgpgm/gp.hpp"
#include "fgpgm/harness.hpp"
#include "fgpgm/integrator.hpp"
#include "fgpgm/kernels.hpp"
#include "fgpgm/sampler.hpp"
#include "oracles.hpp"

using namespace fgpgm;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

std::string config_path(const char* name) { return std::string(FGPGM_CONFIG_DIR) + "/" + name; }

// dx/dt = theta * x.
OdeSystem linear_system() {
  OdeSystem s;
  s.name = "acceptance_linear";
  s.dimension = 1;
  s.parameter_count = 1;
  s.field = [](const Vector& x, const Vector& theta) { return Vector(theta(0) * x); };
  s.bounds = {Vector::Constant(1, -10.0), Vector::Constant(1, 10.0)};
  s.state_names = {"x"};
  return s;
}

Outcome closed_form_vs_quadrature() {
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double worst = 0.0;
  for (Index n : {1, 2}) {
    for (int rep = 0; rep < 6; ++rep) {
      Vector t(n);
      if (n == 1) {
        t << 0.2;
      } else {
        t << 0.0, 0.3 + 0.2 * (rep % 3);
      }
      const Standardization st{0.5 * u(rng), 1.0 + 0.5 * u(rng)};
      const KernelParams k = rep % 3 == 0   ? KernelParams::rbf(1.0 + 0.5 * u(rng), 0.8)
                             : rep % 3 == 1 ? KernelParams::matern52(1.2, 0.6 + 0.2 * u(rng))
                                            : KernelParams::sigmoid(1.0, 1.0, 1.5);
      std::vector<GPStateFit> fits{GPStateFit(st, k, 0.3, t)};
      Matrix x(1, n), y(1, n);
      for (Index i = 0; i < n; ++i) {
        x(0, i) = st.mean + st.scale * u(rng);
        y(0, i) = x(0, i) + 0.2 * u(rng);
      }
      const double gamma = 0.05 + 0.5 * (1.0 + u(rng));
      const DensityContext ctx(fits, gamma, linear_system(), TimeSeries{t, y});
      Vector theta(1);
      theta << 0.7 * u(rng);
      const double closed = state_log_density(x, 0, theta, ctx);

      // Reference: prior times likelihood times the slack integral done numerically.
      const GPStateFit& fit = fits[0];
      const Vector xs = (x.row(0).transpose().array() - st.mean) / st.scale;
      const Vector ys = (y.row(0).transpose().array() - st.mean) / st.scale;
      Matrix c = fit.blocks().C;
      c.diagonal().array() += fit.prior_factor().jitter;
      const Vector f = theta(0) * x.row(0).transpose() / st.scale;
      const double reference =
          oracle::mvn_logpdf(xs, Vector::Zero(n), c) +
          oracle::mvn_logpdf(ys, xs, fit.noise_sd() * fit.noise_sd() * Matrix::Identity(n, n)) +
          oracle::log_marginalized_slack(fit.D() * xs, fit.A(), f, gamma);
      worst = std::max(worst, std::abs(std::exp(closed - reference) - 1.0));
    }
  }
  return {worst <= 1e-4, "max relative density error " + fmt(worst)};
}

Outcome kernel_derivatives() {
  std::mt19937_64 rng(202);
  std::uniform_real_distribution<double> time(-3.0, 3.0);
  const std::vector<KernelParams> kernels{KernelParams::rbf(1.3, 0.7),
                                          KernelParams::matern52(0.8, 1.1),
                                          KernelParams::sigmoid(1.0, 0.9, 1.4)};
  double worst_fd = 0.0;
  for (const KernelParams& p : kernels) {
    const double scale = p.family == KernelFamily::Sigmoid ? 1.0 / p.slope : p.lengthscale;
    const double h = 1e-4 * scale;
    for (int i = 0; i < 100; ++i) {
      const double a = time(rng);
      const double b = time(rng);
      const auto rel = [](double analytic, double numeric) {
        return std::abs(analytic - numeric) / (std::abs(numeric) + 1e-3);
      };
      worst_fd = std::max(
          {worst_fd,
           rel(kernel_deriv_a(p, a, b),
               oracle::central_diff([&](double s) { return kernel_eval(p, s, b); }, a, h)),
           rel(kernel_deriv_b(p, a, b),
               oracle::central_diff([&](double s) { return kernel_eval(p, a, s); }, b, h)),
           rel(kernel_deriv_ab(p, a, b),
               oracle::central_diff([&](double s) { return kernel_deriv_b(p, s, b); }, a, h))});
    }
  }

  const Vector t = Vector::LinSpaced(20, 0.0, 2.0 * std::numbers::pi);
  const Vector x = t.array().sin();
  const HyperparameterFit fit = fit_hyperparameters(x, t, KernelFamily::RBF);
  const DerivativeMatrices m = derivative_matrices(build_cov_blocks(fit.kernel, t));
  const double worst_dx =
      (m.D * x - Vector(t.array().cos())).segment(1, 18).cwiseAbs().maxCoeff();

  double min_eig = std::numeric_limits<double>::infinity();
  const Vector grid = Vector::LinSpaced(20, 0.0, 2.0);
  for (const KernelParams& k : {KernelParams::rbf(1.0, 0.4), KernelParams::matern52(2.0, 0.3),
                                KernelParams::sigmoid(1.0, 1.0, 2.0)}) {
    const Matrix a = derivative_matrices(build_cov_blocks(k, grid)).A;
    min_eig = std::min(min_eig, Eigen::SelfAdjointEigenSolver<Matrix>(a).eigenvalues().minCoeff());
  }
  const bool pass = worst_fd <= 1e-5 && worst_dx <= 0.05 && min_eig >= -1e-8;
  return {pass, "max FD rel error " + fmt(worst_fd) + ", max |Dx - cos| " + fmt(worst_dx) +
                    ", min eig(A) " + fmt(min_eig)};
}

Outcome marginal_likelihood() {
  std::mt19937_64 rng(303);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> n(0.0, 1.0);
  double worst = 0.0;
  for (Index size = 1; size <= 10; ++size) {
    for (int rep = 0; rep < 3; ++rep) {
      Vector t(size);
      double acc = 0.0;
      for (Index i = 0; i < size; ++i) t(i) = (acc += 0.1 + u(rng));
      Vector y(size);
      for (Index i = 0; i < size; ++i) y(i) = n(rng);
      const KernelParams k = rep == 0   ? KernelParams::rbf(0.5 + u(rng), 0.3 + u(rng))
                             : rep == 1 ? KernelParams::matern52(0.5 + u(rng), 0.3 + u(rng))
                                        : KernelParams::sigmoid(0.5 + u(rng), 0.5, 0.8);
      const double noise = 0.1 + u(rng);
      Matrix cov(size, size);
      for (Index i = 0; i < size; ++i) {
        for (Index j = 0; j < size; ++j) cov(i, j) = kernel_eval(k, t(i), t(j));
      }
      cov.diagonal().array() += noise * noise;
      const double expected = oracle::mvn_logpdf(y, Vector::Zero(size), cov);
      const double err = std::abs(log_marginal_likelihood(y, t, k, noise) - expected) /
                         std::max(1.0, std::abs(expected));
      worst = std::max(worst, err);
    }
  }
  return {worst <= 1e-10, "max relative error " + fmt(worst)};
}

class IsotropicGaussian final : public Target {
 public:
  double log_density(const ChainState& s) const override { return -0.5 * s.theta.squaredNorm(); }
};

Outcome sampler_moments() {
  const IsotropicGaussian target;
  MCMCConfig cfg;
  cfg.param_proposal_sd = 2.4;
  cfg.n_burnin = 1000;
  cfg.n_mcmc = 50000;
  cfg.rng_seed = 404;
  const ChainState init{Matrix(0, 0), Vector::Constant(2, 1.0)};
  const ChainResult a = run_chain(init, target, cfg);
  const ChainResult b = run_chain(init, target, cfg);
  double worst_mean = 0.0, worst_var = 0.0;
  for (Index p = 0; p < 2; ++p) {
    const auto col = a.theta_samples.col(p).array();
    const double mean = col.mean();
    const double var = (col - mean).square().mean();
    worst_mean = std::max(worst_mean, std::abs(mean));
    worst_var = std::max(worst_var, std::abs(var - 1.0));
  }
  const bool identical = a.theta_samples == b.theta_samples;
  return {worst_mean <= 0.05 && worst_var <= 0.1 && identical,
          "max |mean| " + fmt(worst_mean) + ", max |var - 1| " + fmt(worst_var) +
              (identical ? ", reruns identical" : ", reruns differ")};
}

Outcome rk4_order() {
  const OdeSystem lv = lotka_volterra();
  Vector theta(4), x0(2), t(1);
  theta << 2, 1, 4, 1;
  x0 << 5, 3;
  t << 2.0;
  const auto error = [&](double h) {
    return (integrate(lv, theta, x0, t, h, 0.0).states - integrate(lv, theta, x0, t, h / 2, 0.0).states)
        .norm();
  };
  const double order = std::log2(error(0.01) / error(0.005));
  Vector one(1);
  one << 1.0;
  const Trajectory decay =
      rk4_integrate([](const Vector& x) { return Vector(-x); }, Vector(Vector::Ones(1)), 0.0, one, 0.01);
  const double decay_err = std::abs(decay.states(0, 0) - std::exp(-1.0));
  return {order >= 3.5 && order <= 4.5 && decay_err <= 1e-6,
          "observed order " + fmt(order) + ", |x(1) - e^-1| " + fmt(decay_err)};
}

std::vector<double> successful_rmse(const ResultRecord& r, Index state) {
  std::vector<double> out;
  for (const RealizationRecord& rr : r.realizations) {
    if (rr.ok) out.push_back(rr.rmse(state));
  }
  return out;
}

std::string per_realization(const ResultRecord& r, Index state) {
  std::string out;
  for (const RealizationRecord& rr : r.realizations) {
    if (!out.empty()) out += ' ';
    out += rr.ok ? fmt(rr.rmse(state)) : std::string("failed");
  }
  return out;
}

Outcome lv_rmse(const ResultRecord& r) {
  if (r.success_count == 0) return {false, "no realization succeeded"};
  bool pass = r.failure_count() == 0;
  std::string detail;
  const OdeSystem lv = lotka_volterra();
  for (Index k = 0; k < 2; ++k) {
    const double median = quantile(successful_rmse(r, k), 0.5);
    pass = pass && median <= 0.5;
    detail += lv.state_names[static_cast<std::size_t>(k)] + " median " + fmt(median) + " [" +
              per_realization(r, k) + "]; ";
  }
  return {pass, detail + std::to_string(r.success_count) + "/" +
                    std::to_string(r.realizations.size()) + " succeeded"};
}

Outcome lv_acceptance(const ResultRecord& r) {
  // Every realization makes the same number of proposals, so the mean of rates is the pooled rate.
  double sum = 0.0;
  Index count = 0;
  for (const RealizationRecord& rr : r.realizations) {
    if (!rr.ok) continue;
    sum += rr.acceptance;
    ++count;
  }
  if (count == 0) return {false, "no realization succeeded"};
  const double rate = sum / static_cast<double>(count);
  return {rate >= 0.13 && rate <= 0.33, "aggregate acceptance " + fmt(rate)};
}

Outcome pt_rmse(const ResultRecord& r) {
  if (r.success_count == 0) return {false, "no realization succeeded"};
  const OdeSystem pt = protein_transduction();
  bool pass = r.failure_count() == 0;
  std::string detail;
  for (Index k = 0; k < 2; ++k) {
    const double median = quantile(successful_rmse(r, k), 0.5);
    pass = pass && median <= 0.005;
    detail += pt.state_names[static_cast<std::size_t>(k)] + " median " + fmt(median) + " [" +
              per_realization(r, k) + "]; ";
  }
  return {pass, detail + std::to_string(r.success_count) + "/" +
                    std::to_string(r.realizations.size()) + " succeeded"};
}

Outcome lv_skewness(const ResultRecord& r) {
  double worst = 0.0;
  for (const RealizationRecord& rr : r.realizations) {
    if (rr.ok) worst = std::max(worst, rr.theta_skewness.cwiseAbs().maxCoeff());
  }
  return {r.success_count > 0 && worst < 1.0, "max |skewness| " + fmt(worst)};
}

Outcome reproducible(const ExperimentConfig& config, const ResultRecord& first) {
  const ResultRecord second = benchmark(config);
  const std::string a = to_json(first, false).dump();
  const std::string b = to_json(second, false).dump();
  return {a == b, a == b ? std::to_string(a.size()) + " bytes identical" : "outputs differ"};
}

using Clock = std::chrono::steady_clock;

struct Gate {
  bool all_pass = true;

  void report(int id, const std::string& name, const Outcome& o, double seconds,
              double budget = 0.0) {
    const bool in_time = budget <= 0.0 || seconds <= budget;
    const bool pass = o.pass && in_time;
    all_pass = all_pass && pass;
    std::cout << "criterion " << id << " " << (pass ? "PASS" : "FAIL") << "  " << name << ": "
              << o.detail << " (" << fmt(seconds) << " s";
    if (budget > 0.0) std::cout << ", budget " << fmt(budget) << " s";
    std::cout << ")" << std::endl;
  }

  template <typename F>
  Outcome timed(F&& f, double& seconds) {
    const auto start = Clock::now();
    Outcome o;
    try {
      o = f();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    seconds = std::chrono::duration<double>(Clock::now() - start).count();
    return o;
  }

  template <typename F>
  void run(int id, const std::string& name, F&& f, double budget = 0.0) {
    double seconds = 0.0;
    const Outcome o = timed(std::forward<F>(f), seconds);
    report(id, name, o, seconds, budget);
  }
};

}  // namespace

int main() {
  Gate gate;
  gate.run(1, "closed-form density vs quadrature", closed_form_vs_quadrature, 10.0);
  gate.run(2, "kernel derivatives and derivative GP", kernel_derivatives, 30.0);
  gate.run(3, "marginal likelihood vs dense normal", marginal_likelihood);
  gate.run(4, "sampler moments and reproducibility", sampler_moments, 60.0);
  gate.run(5, "RK4 convergence order", rk4_order);

  ExperimentConfig lv_config;
  ResultRecord lv;
  double lv_seconds = 0.0;
  const Outcome lv_outcome = gate.timed(
      [&] {
        lv_config = load_config(config_path("lotka_volterra.json"));
        lv = benchmark(lv_config);
        return lv_rmse(lv);
      },
      lv_seconds);
  gate.report(6, "Lotka-Volterra trajectory RMSE", lv_outcome, lv_seconds, 600.0);
  gate.run(7, "Lotka-Volterra acceptance rate", [&] { return lv_acceptance(lv); });

  gate.run(8, "protein transduction RMSE", [&] {
    return pt_rmse(benchmark(load_config(config_path("protein_transduction.json"))));
  });

  gate.run(9, "Lotka-Volterra parameter marginal skewness", [&] { return lv_skewness(lv); });
  gate.run(10, "benchmark reproducibility", [&] { return reproducible(lv_config, lv); });

  std::cout << (gate.all_pass ? "all criteria PASS" : "some criteria FAIL") << std::endl;
  return gate.all_pass ? 0 : 1;
}
