#include <doctest.h>

#include <cmath>
#include <random>

#include "fgpgm/integrator.hpp"
#include "fgpgm/systems.hpp"

using namespace fgpgm;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Index>(v.size()));
  Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

bool close_rel(const Vector& a, const Vector& b, double tol) {
  for (Index i = 0; i < a.size(); ++i) {
    if (std::abs(a(i) - b(i)) > tol * std::max(1.0, std::abs(b(i)))) return false;
  }
  return a.size() == b.size();
}

}  // namespace

TEST_CASE("Lotka-Volterra") {
  const OdeSystem s = lotka_volterra();
  CHECK(s.dimension == 2);
  CHECK(s.parameter_count == 4);
  CHECK(close_rel(s.f(vec({5, 3}), vec({2, 1, 4, 1})), vec({-5, 3}), 1e-15));
  CHECK(s.f(vec({5, 3}), Vector::Zero(4)).isZero());
  CHECK(s.f(Vector::Zero(2), vec({2, 1, 4, 1})).isZero());
}

TEST_CASE("protein transduction") {
  const OdeSystem s = protein_transduction();
  CHECK(s.dimension == 5);
  CHECK(s.parameter_count == 6);
  const Vector f = s.f(vec({1, 0, 1, 0, 0}), vec({0.07, 0.6, 0.05, 0.3, 0.017, 0.3}));
  CHECK(close_rel(f, vec({-0.67, 0.07, -0.6, 0.6, 0.0}), 1e-14));
  CHECK(s.f(vec({0.3, 0.1, 0.5, 0.2, 0.4}), vec({0, 0, 0, 0, 0, 0.3})).isZero());
  CHECK_THROWS_AS((void)s.f(vec({1, 0, 1, 0, -0.3}), vec({0.07, 0.6, 0.05, 0.3, 0.017, 0.3})),
                  Singularity);
}

TEST_CASE("FitzHugh-Nagumo") {
  const OdeSystem s = fitzhugh_nagumo();
  const Vector f = s.f(vec({-1, 1}), vec({3, 0.2, 0.2}));
  CHECK(f(0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(f(1) == doctest::Approx(-1.0 / 3.0).epsilon(1e-14));
  CHECK(s.f(vec({0, 0}), vec({2, 0, 0.5})).isZero());
  CHECK_THROWS_AS((void)s.f(vec({0, 0}), vec({0, 0.2, 0.2})), Singularity);
}

TEST_CASE("vector fields agree with a term-by-term expansion") {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  std::uniform_real_distribution<double> pos(0.05, 3.0);
  const OdeSystem lv = lotka_volterra(), pt = protein_transduction(), fhn = fitzhugh_nagumo();
  for (int rep = 0; rep < 100; ++rep) {
    {
      const double x1 = u(rng), x2 = u(rng);
      const double a = pos(rng), b = pos(rng), c = pos(rng), d = pos(rng);
      const Vector expected = vec({a * x1 - b * x1 * x2, -c * x2 + d * x1 * x2});
      CHECK(close_rel(lv.f(vec({x1, x2}), vec({a, b, c, d})), expected, 1e-12));
    }
    {
      const double S = pos(rng), dS = pos(rng), R = pos(rng), RS = pos(rng), Rpp = pos(rng);
      Vector th(6);
      for (Index p = 0; p < 6; ++p) th(p) = pos(rng);
      const double mm = th(4) * Rpp / (th(5) + Rpp);
      const Vector expected = vec({-th(0) * S - th(1) * S * R + th(2) * RS, th(0) * S,
                                   -th(1) * S * R + th(2) * RS + mm,
                                   th(1) * S * R - th(2) * RS - th(3) * RS, th(3) * RS - mm});
      CHECK(close_rel(pt.f(vec({S, dS, R, RS, Rpp}), th), expected, 1e-12));
    }
    {
      const double V = u(rng), R = u(rng), a = pos(rng), b = u(rng), c = u(rng);
      const Vector expected = vec({a * (V - V * V * V / 3.0 + R), (V - b + c * R) / a});
      CHECK(close_rel(fhn.f(vec({V, R}), vec({a, b, c})), expected, 1e-12));
    }
  }
}

TEST_CASE("f_columns applies the field column by column") {
  const OdeSystem s = lotka_volterra();
  Matrix x(2, 3);
  x << 5, 1, 2, 3, 2, 0.5;
  const Vector th = vec({2, 1, 4, 1});
  const Matrix f = s.f_columns(x, th);
  for (Index i = 0; i < 3; ++i) CHECK(f.col(i) == s.f(x.col(i), th));
}

TEST_CASE("nonnegativity is preserved under integration") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const Vector t = Vector::LinSpaced(20, 0.0, 2.0);
  for (int rep = 0; rep < 10; ++rep) {
    const Vector th_lv = vec({3 * u(rng), 3 * u(rng), 3 * u(rng), 3 * u(rng)});
    const Vector x_lv = vec({5 * u(rng), 5 * u(rng)});
    CHECK(integrate(lotka_volterra(), th_lv, x_lv, t).states.minCoeff() >= -1e-6);
    Vector th_pt(6);
    for (Index p = 0; p < 6; ++p) th_pt(p) = 0.01 + u(rng);
    const Vector x_pt = vec({u(rng), u(rng), u(rng), u(rng), u(rng)});
    const Vector t_pt = Vector::LinSpaced(15, 0.0, 100.0);
    CHECK(integrate(protein_transduction(), th_pt, x_pt, t_pt).states.minCoeff() >= -1e-6);
  }
}

TEST_CASE("bounds") {
  const OdeSystem lv = lotka_volterra();
  CHECK(lv.bounds.contains(vec({0, 50, 100, 1})));
  CHECK_FALSE(lv.bounds.contains(vec({-1e-9, 50, 100, 1})));
  CHECK(lv.bounds.midpoint() == Vector::Constant(4, 50.0));
  const OdeSystem fhn = fitzhugh_nagumo();
  CHECK(fhn.bounds.lower == vec({0.1, -100, -100}));
  CHECK(fhn.bounds.upper == vec({100, 100, 100}));
  CHECK(protein_transduction().bounds.upper == Vector::Constant(6, 100.0));
}

TEST_CASE("registry") {
  CHECK(find_system("lotka_volterra").name == "lotka_volterra");
  CHECK(find_system("protein_transduction").dimension == 5);
  CHECK(find_system("fitzhugh_nagumo").parameter_count == 3);
  CHECK_THROWS_AS(find_system("lorenz"), InvalidInput);

  OdeSystem decay;
  decay.name = "decay";
  decay.dimension = 1;
  decay.parameter_count = 1;
  decay.field = [](const Vector& x, const Vector& th) { return Vector(-th(0) * x); };
  decay.bounds = {Vector::Zero(1), Vector::Constant(1, 10.0)};
  decay.state_names = {"x"};
  register_system(decay);
  CHECK(find_system("decay").f(vec({2}), vec({3}))(0) == -6.0);
  const auto names = system_names();
  CHECK(std::find(names.begin(), names.end(), "decay") != names.end());
}
