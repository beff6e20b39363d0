#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "mvbismut/initial_law.hpp"
#include "mvbismut/measure.hpp"
#include "mvbismut/model.hpp"
#include "mvbismut/rng.hpp"

namespace mvb {

/// Uniform grid t_k = k * T / K on [0, T].
class TimeGrid {
 public:
  TimeGrid(double horizon, std::size_t steps);

  double horizon() const noexcept { return horizon_; }
  std::size_t steps() const noexcept { return steps_; }
  double dt() const noexcept { return horizon_ / static_cast<double>(steps_); }
  double node(std::size_t k) const noexcept { return static_cast<double>(k) * dt(); }

 private:
  double horizon_;
  std::size_t steps_;
};

/// Full record of one co-simulated ensemble. Arrays are row-major with the
/// time index outermost: positions/tangents are (K+1) x N x d, noise is K x N x d.
struct TrajectoryBundle {
  TimeGrid grid{1.0, 1};
  std::size_t particles = 0;
  std::size_t dim = 0;
  std::uint64_t seed = 0;
  std::uint32_t replication = 0;
  std::string model_id;
  std::vector<double> positions;
  std::vector<double> tangents;
  std::vector<double> noise;

  ConstVec position(std::size_t k) const { return slice(positions, k); }
  ConstVec tangent(std::size_t k) const { return slice(tangents, k); }
  ConstVec increment(std::size_t k) const { return slice(noise, k); }

 private:
  ConstVec slice(const std::vector<double>& v, std::size_t k) const {
    return {v.data() + k * particles * dim, particles * dim};
  }
};

enum class MeanFieldPath { Automatic, Separable, Generic };

/// X_{k+1}^i = X_k^i + (B+b)(t, X_k^i, mu_k) dt + sigma(t, X_k^i) dW_k^i, where
/// mu_k is the empirical measure of X_k. Throws DivergenceError on overflow.
std::vector<double> step_particles(const CoefficientSet& coeffs, const EmpiricalMeasure& mu_k,
                                   ConstVec dW, double t, double dt);

/// Row i is (1/N) sum_j D^L(B+b)(t, X^i, mu_k)(X^j) V^j. The separable path
/// costs O(N m), the generic path O(N^2); accumulation order is fixed.
std::vector<double> mean_field_tangent_term(const CoefficientSet& coeffs, double t,
                                            const EmpiricalMeasure& mu_k, ConstVec tangents,
                                            MeanFieldPath path = MeanFieldPath::Automatic);

/// One Euler step of the linearised (tangent) equation driven by the same dW.
std::vector<double> step_tangents(const CoefficientSet& coeffs, double t,
                                  const EmpiricalMeasure& mu_k, ConstVec tangents, ConstVec dW,
                                  double dt);

/// Everything an observer may read at the start of step k (before the update).
struct StepView {
  std::size_t step;
  double t;
  double dt;
  const EmpiricalMeasure& measure;
  const MeasureSnapshot& snapshot;
  ConstVec noise;                                 ///< dW_k, N x d
  std::span<const std::vector<double>> tangents;  ///< one N x d block per direction
  std::span<const std::vector<double>> mean_field;
};

using StepObserver = std::function<void(const StepView&)>;

struct EnsembleState {
  std::vector<double> positions;
  std::vector<std::vector<double>> tangents;
};

/// Synchronous Euler-Maruyama driver for the particle system and any number
/// of tangent directions sharing its Brownian increments.
class ParticleSimulator {
 public:
  ParticleSimulator(const CoefficientSet& coeffs, TimeGrid grid, RngSpec rng,
                    std::uint32_t replication);

  /// Advances `initial` to the horizon. `observer` is invoked once per step
  /// with the pre-update state.
  EnsembleState run(EnsembleState initial, const StepObserver& observer = {}) const;

  const TimeGrid& grid() const noexcept { return grid_; }

 private:
  const CoefficientSet& coeffs_;
  TimeGrid grid_;
  RngSpec rng_;
  std::uint32_t replication_;
};

/// eta_i = phi(X_0^i), N x d.
std::vector<double> initial_tangents(const Perturbation& phi, ConstVec x0, std::size_t dim);

/// Forward pass storing positions, tangents and increments at every node.
TrajectoryBundle simulate(const CoefficientSet& coeffs, const InitialLaw& init,
                          const Perturbation& phi, const TimeGrid& grid, std::size_t particles,
                          const RngSpec& rng, std::uint32_t replication);

/// Empirical E sup_t |tangent_t|^2 (mean over particles of the pathwise sup).
double tangent_sup_mean_square(const TrajectoryBundle& traj);

/// Writes one CSV per time node into `directory` (columns particle, x*, v*).
void dump_trajectories(const TrajectoryBundle& traj, const std::string& directory);

}  // namespace mvb
