#ifndef FGPGM_ERRORS_HPP
#define FGPGM_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace fgpgm {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed arguments: non-finite times, unsorted grids, mismatched sizes.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// Data that carries no information, e.g. a constant observation vector.
class DegenerateData : public Error {
 public:
  using Error::Error;
};

/// A factorization failed even after jitter escalation.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// No hyperparameter start produced a finite objective.
class FitFailure : public Error {
 public:
  using Error::Error;
};

/// An ODE vector field was evaluated at a declared singular point.
class Singularity : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Integration produced a non-finite state.
class Divergence : public Error {
 public:
  Divergence(const std::string& what, double time)
      : Error(what + " (t = " + std::to_string(time) + ")"), time_(time) {}

  [[nodiscard]] double time() const noexcept { return time_; }

 private:
  double time_;
};

}  // namespace fgpgm

#endif  // FGPGM_ERRORS_HPP
