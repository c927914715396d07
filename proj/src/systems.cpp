#include "fgpgm/systems.hpp"

#include <map>
#include <mutex>

namespace fgpgm {

bool ParameterBounds::contains(const Vector& theta) const {
  if (theta.size() != lower.size()) return false;
  return (theta.array() >= lower.array()).all() && (theta.array() <= upper.array()).all();
}

Vector OdeSystem::f(const Vector& x, const Vector& theta) const {
  if (x.size() != dimension || theta.size() != parameter_count) {
    throw InvalidInput("ode system '" + name + "': dimension mismatch");
  }
  return field(x, theta);
}

Matrix OdeSystem::f_columns(const Matrix& states, const Vector& theta) const {
  Matrix out(states.rows(), states.cols());
  for (Index i = 0; i < states.cols(); ++i) out.col(i) = f(states.col(i), theta);
  return out;
}

OdeSystem lotka_volterra() {
  OdeSystem s;
  s.name = "lotka_volterra";
  s.dimension = 2;
  s.parameter_count = 4;
  s.field = [](const Vector& x, const Vector& theta) -> Vector {
    return lotka_volterra_f(x, theta);
  };
  s.bounds = {Vector::Zero(4), Vector::Constant(4, 100.0)};
  s.state_names = {"prey", "predator"};
  return s;
}

OdeSystem protein_transduction() {
  OdeSystem s;
  s.name = "protein_transduction";
  s.dimension = 5;
  s.parameter_count = 6;
  s.field = [](const Vector& x, const Vector& theta) -> Vector {
    return protein_transduction_f(x, theta);
  };
  s.bounds = {Vector::Zero(6), Vector::Constant(6, 100.0)};
  s.state_names = {"S", "dS", "R", "RS", "Rpp"};
  return s;
}

OdeSystem fitzhugh_nagumo() {
  OdeSystem s;
  s.name = "fitzhugh_nagumo";
  s.dimension = 2;
  s.parameter_count = 3;
  s.field = [](const Vector& x, const Vector& theta) -> Vector {
    return fitzhugh_nagumo_f(x, theta);
  };
  s.bounds = {Eigen::Vector3d(0.1, -100.0, -100.0), Eigen::Vector3d(100.0, 100.0, 100.0)};
  s.state_names = {"V", "R"};
  return s;
}

namespace {

struct Registry {
  std::mutex mutex;
  std::map<std::string, OdeSystem, std::less<>> systems;

  Registry() {
    for (OdeSystem s : {lotka_volterra(), protein_transduction(), fitzhugh_nagumo()}) {
      systems.emplace(s.name, std::move(s));
    }
  }
};

Registry& registry() {
  static Registry r;
  return r;
}

}  // namespace

OdeSystem find_system(std::string_view name) {
  Registry& r = registry();
  std::lock_guard lock(r.mutex);
  const auto it = r.systems.find(name);
  if (it == r.systems.end()) throw InvalidInput("unknown ode system '" + std::string(name) + "'");
  return it->second;
}

void register_system(OdeSystem system) {
  if (system.dimension < 1 || system.parameter_count < 0 || !system.field ||
      system.bounds.lower.size() != system.parameter_count ||
      system.bounds.upper.size() != system.parameter_count) {
    throw InvalidInput("register_system: incomplete system description");
  }
  Registry& r = registry();
  std::lock_guard lock(r.mutex);
  r.systems.insert_or_assign(system.name, std::move(system));
}

std::vector<std::string> system_names() {
  Registry& r = registry();
  std::lock_guard lock(r.mutex);
  std::vector<std::string> names;
  for (const auto& [name, _] : r.systems) names.push_back(name);
  return names;
}

}  // namespace fgpgm
