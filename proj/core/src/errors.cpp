#include "mvbismut/errors.hpp"

#include <sstream>
#include <utility>

namespace mvb {

namespace {

std::string with_point(const std::string& what, double t, const std::vector<double>& x) {
  std::ostringstream os;
  os.precision(17);
  os << what << " at t=" << t << ", x=(";
  for (std::size_t i = 0; i < x.size(); ++i) os << (i ? "," : "") << x[i];
  os << ")";
  return os.str();
}

}  // namespace

ModelEvaluationError::ModelEvaluationError(const std::string& what, double t,
                                           std::vector<double> x)
    : Error(with_point(what, t, x)), t_(t), x_(std::move(x)) {}

DivergenceError::DivergenceError(const std::string& what, std::size_t step,
                                 std::size_t particle)
    : Error(what + " (step " + std::to_string(step) + ", particle " +
            std::to_string(particle) + ")"),
      step_(step),
      particle_(particle) {}

ConfigError::ConfigError(std::string field, const std::string& what)
    : Error(field + ": " + what), field_(std::move(field)) {}

ReplicationError::ReplicationError(const std::string& what, std::uint64_t seed,
                                   std::size_t replication, bool divergence)
    : Error("replication " + std::to_string(replication) + " (seed " + std::to_string(seed) +
            ") failed: " + what),
      seed_(seed),
      replication_(replication),
      divergence_(divergence) {}

}  // namespace mvb
