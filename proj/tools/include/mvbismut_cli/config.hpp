#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mvbismut/bismut.hpp"
#include "mvbismut/initial_law.hpp"
#include "mvbismut/measure.hpp"
#include "mvbismut/model.hpp"
#include "mvbismut/observables.hpp"
#include "mvbismut/oracle.hpp"

namespace mvb::cli {

enum class Task { Estimate, Compare, A1Sweep, A2Check, TangentCheck };

std::string to_string(Task task);
Task parse_task(const std::string& name);
bool is_sweep(Task task);

/// Initial law mu. kind: gaussian (mean, std), uniform (lower, upper),
/// dirac (point) or empirical (path to a CSV of atoms).
struct InitSpec {
  std::string kind = "gaussian";
  std::vector<double> mean;
  double std = 1.0;
  std::vector<double> lower, upper, point;
  std::string path;
};

/// Direction phi. kind: constant (value), sine (amplitude, frequency, phase),
/// linear (scale) or zero.
struct PhiSpec {
  std::string kind = "constant";
  std::vector<double> value;
  double amplitude = 1.0, frequency = 1.0, phase = 0.0;
  double scale = 1.0;
};

/// Terminal functional f. kind: mean, sigmoid (axis, center, scale),
/// indicator (axis, threshold, width) or constant (value).
struct FSpec {
  std::string kind = "mean";
  std::size_t axis = 0;
  double center = 0.0, scale = 1.0;
  double threshold = 0.0, width = 0.1;
  double value = 1.0;
};

struct SweepSpec {
  std::vector<double> times{0.25, 0.5, 1.0};
  std::size_t probes = 0;  ///< 0 means dim + 2
};

struct A2Spec {
  std::vector<double> mu{0.0};
  std::vector<double> nu{0.5};
};

/// One experiment. Times are in the abstract units of [0, T].
struct ExperimentConfig {
  std::string model_id = "linear_mf_ou";
  nlohmann::json model_params = nlohmann::json::object();
  double horizon = 1.0;
  std::size_t steps = 1024;
  std::size_t particles = 4096;
  std::size_t replications = 64;
  GateKind gate = GateKind::Linear;
  InitSpec init;
  PhiSpec phi;
  FSpec f;
  std::uint64_t seed = 42;
  Task task = Task::Estimate;
  FdConfig fd;
  SweepSpec sweep;
  A2Spec a2;
  std::string output_dir = "out";
};

/// Parses and validates; raises ConfigError naming the offending field.
ExperimentConfig parse_config(const nlohmann::json& doc);
ExperimentConfig load_config(const std::string& path);

/// Canonical serialisation with every default filled in.
nlohmann::json to_json(const ExperimentConfig& config);

/// FNV-1a (64 bit) of the canonical JSON without output_dir, as 16 hex digits.
std::string config_hash(const ExperimentConfig& config);

CoefficientSet build_model(const ExperimentConfig& config);
InitialLaw build_init(const ExperimentConfig& config, std::size_t dim);
Perturbation build_phi(const ExperimentConfig& config, std::size_t dim);
Observable build_f(const ExperimentConfig& config, std::size_t dim);
MonteCarloSettings build_settings(const ExperimentConfig& config, unsigned threads);

}  // namespace mvb::cli
