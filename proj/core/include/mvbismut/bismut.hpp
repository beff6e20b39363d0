#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mvbismut/initial_law.hpp"
#include "mvbismut/model.hpp"
#include "mvbismut/observables.hpp"
#include "mvbismut/solver.hpp"

namespace mvb {

enum class GateKind { Linear, Smoothstep };

std::string to_string(GateKind kind);
GateKind parse_gate(const std::string& name);

/// C^1 function on [0, T] with g(0) = 0 and g(T) = 1.
class Gate {
 public:
  Gate(GateKind kind, double horizon);

  GateKind kind() const noexcept { return kind_; }
  double horizon() const noexcept { return horizon_; }
  double value(double t) const noexcept;
  double derivative(double t) const noexcept;

 private:
  GateKind kind_;
  double horizon_;
};

/// sigma(t,x)^{-1} [g'(t) v + g(t) mf] for one particle, where v is its
/// tangent and mf its mean-field tangent term at the same time.
std::vector<double> weight_at(const CoefficientSet& coeffs, const Gate& gate, double t,
                              ConstVec x, ConstVec tangent, ConstVec mean_field);

/// Left-point Ito sums I^i = sum_k <zeta^i_{t_k}, dW^i_k>.
struct WeightAccumulator {
  std::vector<double> integral;
  /// Time average of |zeta^i|^2 (diagnostic).
  std::vector<double> zeta_mean_square;
};

WeightAccumulator accumulate(const TrajectoryBundle& traj, const CoefficientSet& coeffs,
                             const Gate& gate);

/// Monte Carlo budget shared by the Bismut and finite-difference estimators.
struct MonteCarloSettings {
  TimeGrid grid{1.0, 1};
  std::size_t particles = 2;
  std::size_t replications = 8;
  GateKind gate = GateKind::Linear;
  RngSpec rng{0};
  unsigned threads = 1;
};

inline constexpr std::size_t kMinReplications = 8;

struct EstimatorResult {
  double estimate = 0.0;
  double std_error = 0.0;
  std::size_t replications = 0;
  std::size_t particles = 0;
  std::size_t steps = 0;
  double horizon = 0.0;
  std::string gate;
  std::string model;
  std::string phi;
  std::string f;
  std::uint64_t seed = 0;
  double elapsed_s = 0.0;
  /// One value per replication; the estimate is their mean.
  std::vector<double> replication_values;
};

/// Mean and standard error (sample sd / sqrt(n)) of iid values.
struct SampleSummary {
  double mean = 0.0;
  double std_error = 0.0;
};
SampleSummary summarize_samples(std::span<const double> values);

nlohmann::json to_json(const EstimatorResult& result);
/// Results-log columns; elapsed time is deliberately excluded so rows are reproducible.
std::string results_csv_header();
std::string results_csv_row(const EstimatorResult& result);
void append_results_csv(const std::string& path, const EstimatorResult& result);

/// Per-replication output of a multi-direction Bismut run.
struct ReplicationSummary {
  std::vector<double> weighted;     ///< mean_i f(X_T^i) I_p^i, per direction p
  std::vector<double> weight_mean;  ///< mean_i I_p^i, per direction p
  double f_mean = 0.0;
  double f_sq_mean = 0.0;
};

/// Simulates every replication once, carrying one tangent per direction.
std::vector<ReplicationSummary> run_bismut_replications(const CoefficientSet& coeffs,
                                                        const InitialLaw& init,
                                                        const std::vector<Perturbation>& directions,
                                                        const Observable& f,
                                                        const MonteCarloSettings& settings);

/// E[f(X_T) int_0^T <zeta, dW>] averaged over particles, replicated M times.
EstimatorResult estimate_intrinsic_derivative(const CoefficientSet& coeffs,
                                              const InitialLaw& init, const Perturbation& phi,
                                              const Observable& f,
                                              const MonteCarloSettings& settings);

/// Mean of the stochastic integral alone (should vanish) with its standard error.
SampleSummary weight_mean_check(const CoefficientSet& coeffs, const InitialLaw& init,
                                const Perturbation& phi, const MonteCarloSettings& settings);

/// Unit-norm probe directions: the d coordinate constants followed by
/// sinusoidal fields normalised in L^2 of the sampled initial law.
std::vector<Perturbation> unit_probes(const InitialLaw& init, std::size_t probe_count,
                                      const MonteCarloSettings& settings);

struct GradientNormEstimate {
  double norm = 0.0;
  double norm_se = 0.0;
  /// sqrt(P_t f^2 - (P_t f)^2) pooled over particles and replications.
  double f_std = 0.0;
  double f_std_se = 0.0;
  std::size_t argmax = 0;
  std::vector<EstimatorResult> probes;
};

GradientNormEstimate gradient_norm_estimate(const CoefficientSet& coeffs, const InitialLaw& init,
                                            const Observable& f,
                                            const MonteCarloSettings& settings,
                                            std::size_t probe_count);

}  // namespace mvb
