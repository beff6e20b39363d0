#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace mvb {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Precondition violated by a caller-supplied argument.
class ArgumentError : public Error {
 public:
  using Error::Error;
};

/// A user function returned a non-finite value.
class EvaluationError : public Error {
 public:
  EvaluationError(const std::string& what, std::size_t index)
      : Error(what), index_(index) {}
  std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

/// A coefficient of the model evaluated to a non-finite value at (t, x).
class ModelEvaluationError : public Error {
 public:
  ModelEvaluationError(const std::string& what, double t, std::vector<double> x);
  double time() const noexcept { return t_; }
  const std::vector<double>& point() const noexcept { return x_; }

 private:
  double t_;
  std::vector<double> x_;
};

/// The particle or tangent state left the finite range.
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, std::size_t step, std::size_t particle);
  std::size_t step() const noexcept { return step_; }
  std::size_t particle() const noexcept { return particle_; }

 private:
  std::size_t step_;
  std::size_t particle_;
};

class SingularDiffusionError : public Error {
 public:
  using Error::Error;
};

/// Invalid experiment configuration; `field()` is the dotted path of the offending entry.
class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& what);
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// Raised when one replication of a Monte Carlo run fails; wraps the cause.
class ReplicationError : public Error {
 public:
  ReplicationError(const std::string& what, std::uint64_t seed, std::size_t replication,
                   bool divergence);
  std::uint64_t seed() const noexcept { return seed_; }
  std::size_t replication() const noexcept { return replication_; }
  bool divergence() const noexcept { return divergence_; }

 private:
  std::uint64_t seed_;
  std::size_t replication_;
  bool divergence_;
};

}  // namespace mvb
