#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "fgpgm/density.hpp"
#include "oracles.hpp"

using namespace fgpgm;

namespace {

// dx/dt = theta * x, one state and one parameter.
OdeSystem linear_system() {
  OdeSystem s;
  s.name = "linear";
  s.dimension = 1;
  s.parameter_count = 1;
  s.field = [](const Vector& x, const Vector& theta) { return Vector(theta(0) * x); };
  s.bounds = {Vector::Constant(1, -10.0), Vector::Constant(1, 10.0)};
  s.state_names = {"x"};
  return s;
}

OdeSystem zero_system() {
  OdeSystem s = linear_system();
  s.field = [](const Vector& x, const Vector&) { return Vector(Vector::Zero(x.size())); };
  return s;
}

Matrix row(std::initializer_list<double> v) {
  Matrix m(1, static_cast<Index>(v.size()));
  Index i = 0;
  for (double x : v) m(0, i++) = x;
  return m;
}

// Closed-form value of one state's density, rebuilt from the pieces of the
// fit with the derivative integrated out numerically.
double quadrature_reference(const GPStateFit& fit, const Vector& x, const Vector& y,
                            const Vector& f, double gamma) {
  const Standardization& s = fit.standardization();
  const Vector x_std = (x.array() - s.mean) / s.scale;
  const Vector y_std = (y.array() - s.mean) / s.scale;
  Matrix c = fit.blocks().C;
  c.diagonal().array() += fit.prior_factor().jitter;
  const Index n = x.size();
  const double noise_var = fit.noise_sd() * fit.noise_sd();
  return oracle::mvn_logpdf(x_std, Vector::Zero(n), c) +
         oracle::mvn_logpdf(y_std, x_std, noise_var * Matrix::Identity(n, n)) +
         oracle::log_marginalized_slack(fit.D() * x_std, fit.A(), f / s.scale, gamma);
}

}  // namespace

TEST_CASE("hand example with a single point") {
  // C = 1, sigma = 1, D = 0, A = 1 from an RBF kernel at one time point.
  Vector t(1);
  t << 0.0;
  std::vector<GPStateFit> fits{GPStateFit({0.0, 1.0}, KernelParams::rbf(1.0, 1.0), 1.0, t)};
  const DensityContext ctx(fits, 1.0, zero_system(), TimeSeries{t, row({0.0})});
  const double expected = 3.0 * -0.5 * std::log(2.0 * std::numbers::pi) - 0.5 * std::log(2.0);
  CHECK(state_log_density(row({0.0}), 0, Vector::Zero(1), ctx) ==
        doctest::Approx(expected).epsilon(1e-7));
  CHECK(expected == doctest::Approx(-3.103390).epsilon(1e-6));
}

TEST_CASE("closed form equals quadrature over the derivative") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (Index n : {1, 2}) {
    for (int rep = 0; rep < 4; ++rep) {
      CAPTURE(n);
      CAPTURE(rep);
      Vector t(n);
      if (n == 1) {
        t << 0.3;
      } else {
        t << 0.0, 0.4 + 0.3 * (rep % 2);
      }
      const Standardization s{0.5 * u(rng), 1.0 + 0.5 * u(rng)};
      const auto k = rep % 2 == 0 ? KernelParams::rbf(1.0 + 0.5 * u(rng), 0.8)
                                  : KernelParams::matern52(1.2, 0.6 + 0.2 * u(rng));
      std::vector<GPStateFit> fits{GPStateFit(s, k, 0.3, t)};
      Matrix x(1, n), y(1, n);
      for (Index i = 0; i < n; ++i) {
        x(0, i) = s.mean + s.scale * u(rng);
        y(0, i) = x(0, i) + 0.2 * u(rng);
      }
      const double gamma = 0.05 + 0.5 * (1.0 + u(rng));
      const DensityContext ctx(fits, gamma, linear_system(), TimeSeries{t, y});
      Vector theta(1);
      theta << 0.7 * u(rng);
      const double closed = state_log_density(x, 0, theta, ctx);
      const Vector f = theta(0) * x.row(0).transpose();
      const double reference = quadrature_reference(fits[0], x.row(0).transpose(),
                                                    y.row(0).transpose(), f, gamma);
      CHECK(std::abs(std::exp(closed - reference) - 1.0) <= 1e-4);
    }
  }
}

TEST_CASE("log density increases with gamma toward the regression limit") {
  const Vector t = Vector::LinSpaced(6, 0.0, 1.0);
  std::vector<GPStateFit> fits{GPStateFit({0.0, 1.0}, KernelParams::rbf(1.0, 0.5), 0.2, t)};
  Matrix x(1, 6);
  x << 0.1, 0.4, 0.2, -0.3, -0.1, 0.5;
  Vector theta(1);
  theta << 3.0;
  // A large misfit keeps the quadratic term dominant over the log-determinant.
  double previous = -std::numeric_limits<double>::infinity();
  for (double gamma : {1e-3, 1e-2, 1e-1, 1.0}) {
    const DensityContext ctx(fits, gamma, linear_system(), TimeSeries{t, x});
    const double v = state_log_density(x, 0, theta, ctx);
    CHECK(v > previous);
    previous = v;
  }
}

TEST_CASE("joint density") {
  const Vector t = Vector::LinSpaced(5, 0.0, 2.0);
  const OdeSystem lv = lotka_volterra();
  Matrix y(2, 5);
  y << 5.0, 3.2, 1.4, 0.9, 1.1, 3.0, 3.9, 3.1, 1.8, 0.9;
  std::vector<GPStateFit> fits;
  for (Index k = 0; k < 2; ++k) {
    const auto s = standardize(y.row(k).transpose());
    fits.emplace_back(s.standardization, KernelParams::rbf(1.0, 0.6), 0.1, t);
  }
  const DensityContext ctx(fits, 0.3, lv, TimeSeries{t, y});
  Vector theta(4);
  theta << 2.0, 1.0, 4.0, 1.0;

  SUBCASE("sum of the state terms plus the prior") {
    const double sum = state_log_density(y, 0, theta, ctx) + state_log_density(y, 1, theta, ctx) +
                       ctx.log_prior(theta);
    CHECK(joint_log_density(y, theta, ctx) == sum);
    CHECK(ctx.log_prior(theta) == doctest::Approx(-4.0 * std::log(100.0)));
  }
  SUBCASE("out of bounds") {
    Vector bad = theta;
    bad(2) = -0.1;
    CHECK(joint_log_density(y, bad, ctx) == -std::numeric_limits<double>::infinity());
    bad(2) = 100.5;
    CHECK(joint_log_density(y, bad, ctx) == -std::numeric_limits<double>::infinity());
  }
  SUBCASE("finite and deterministic inside the bounds") {
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> u(0.0, 100.0);
    std::normal_distribution<double> n(0.0, 3.0);
    for (int rep = 0; rep < 50; ++rep) {
      Vector th(4);
      for (Index p = 0; p < 4; ++p) th(p) = u(rng);
      Matrix x = y;
      for (Index i = 0; i < x.size(); ++i) x(i) += n(rng);
      const double a = joint_log_density(x, th, ctx);
      CHECK(std::isfinite(a));
      CHECK(a == joint_log_density(x, th, ctx));
    }
  }
  SUBCASE("wrong state shape") {
    CHECK_THROWS_AS(joint_log_density(Matrix::Zero(2, 4), theta, ctx), InvalidInput);
  }
  SUBCASE("custom prior") {
    const DensityContext flat(fits, 0.3, lv, TimeSeries{t, y}, [](const Vector&) { return 0.0; });
    CHECK(flat.log_prior(theta) == 0.0);
  }
}

TEST_CASE("standardized factors are invariant under consistent rescaling") {
  const Vector t = Vector::LinSpaced(5, 0.0, 1.0);
  Matrix y(1, 5), x(1, 5);
  y << 1.0, 1.5, 2.2, 2.1, 1.7;
  x << 1.1, 1.4, 2.0, 2.2, 1.6;
  Vector theta(1);
  theta << 0.4;
  const auto k = KernelParams::rbf(1.0, 0.4);
  auto density = [&](double c) {
    const Matrix ys = c * y;
    const Matrix xs = c * x;
    const auto s = standardize(ys.row(0).transpose());
    std::vector<GPStateFit> fits{GPStateFit(s.standardization, k, 0.2, t)};
    const DensityContext ctx(fits, 0.1, linear_system(), TimeSeries{t, ys});
    return state_log_density(xs, 0, theta, ctx);
  };
  // The linear field scales with the states, so every standardized residual is unchanged.
  CHECK(density(7.5) == doctest::Approx(density(1.0)).epsilon(1e-10));
}

TEST_CASE("singular field values give minus infinity") {
  const Vector t = Vector::LinSpaced(4, 0.0, 1.0);
  OdeSystem s = linear_system();
  s.field = [](const Vector&, const Vector&) -> Vector { throw Singularity("test"); };
  std::vector<GPStateFit> fits{GPStateFit({0.0, 1.0}, KernelParams::rbf(1.0, 0.5), 0.2, t)};
  Matrix y(1, 4);
  y << 0.1, 0.2, 0.3, 0.4;
  const DensityContext ctx(fits, 0.1, s, TimeSeries{t, y});
  CHECK(joint_log_density(y, Vector::Zero(1), ctx) == -std::numeric_limits<double>::infinity());
}

TEST_CASE("context validation") {
  const Vector t = Vector::LinSpaced(4, 0.0, 1.0);
  std::vector<GPStateFit> fits{GPStateFit({0.0, 1.0}, KernelParams::rbf(1.0, 0.5), 0.2, t)};
  Matrix y = Matrix::Zero(1, 4);
  CHECK_THROWS_AS(DensityContext(fits, 0.0, linear_system(), TimeSeries{t, y}), InvalidInput);
  CHECK_THROWS_AS(DensityContext(fits, 0.1, lotka_volterra(), TimeSeries{t, y}), InvalidInput);
  CHECK_THROWS_AS(DensityContext(fits, 0.1, linear_system(), TimeSeries{t, Matrix::Zero(1, 3)}),
                  InvalidInput);
}
