#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "mvbismut/bismut.hpp"
#include "mvbismut/measure.hpp"
#include "mvbismut/models.hpp"

namespace mvb {

/// Coupled finite-difference settings. The ladder must be strictly decreasing.
struct FdConfig {
  std::vector<double> eps{1e-2, 5e-3, 2.5e-3};
  bool richardson = false;
};

void validate(const FdConfig& fd);

/// (mean f(X_T^eps) - mean f(X_T)) / eps with the shift X_0 + eps phi(X_0)
/// applied before simulation and both ensembles driven by the same dW.
/// Uses the smallest eps, or the Richardson combination of the two smallest.
EstimatorResult fd_intrinsic_derivative(const CoefficientSet& coeffs, const InitialLaw& init,
                                        const Perturbation& phi, const Observable& f,
                                        const MonteCarloSettings& settings, const FdConfig& fd);

/// Exact intrinsic derivative of mu -> E[(1/d) sum_k X_T^k] for the linear
/// mean-field model along the constant direction v: e^{(a+c)T} mean(v).
/// `f_kind` must be "mean" and `phi_kind` "constant".
double linear_mf_exact(const LinearMfParams& params, double horizon, const std::string& f_kind,
                       const std::string& phi_kind, ConstVec v);

/// One row of a sweep table.
struct SweepRow {
  double t = 0.0;
  std::string statistic;
  double value = 0.0;
  double se = 0.0;
  bool pass = true;
};

void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows);

/// Steps used for the sub-horizon t when the full grid covers [0, t_max] with K steps.
std::size_t sub_steps(std::size_t steps, double t, double t_max);

struct A1Entry {
  double t = 0.0;
  GradientNormEstimate gradient;
  double implied_constant = 0.0;  ///< norm sqrt(t) / std
  bool defined = false;           ///< false when std < 10 SE
};

struct A1Result {
  std::vector<A1Entry> entries;
  bool pass = true;
  std::vector<SweepRow> table() const;
};

/// Gradient-norm sweep over `times`. `settings.grid` fixes the step size at
/// the largest time; each t uses sub_steps(K, t, t_max) steps.
A1Result a1_sweep(const CoefficientSet& coeffs, const InitialLaw& init, const Observable& f,
                  const std::vector<double>& times, const MonteCarloSettings& settings,
                  std::size_t probe_count);

struct A2Entry {
  double t = 0.0;
  double lv = 0.0;  ///< sup_s |P_t^*mu(f_s) - P_t^*nu(f_s)| over the threshold dictionary
  double lv_se = 0.0;
  double threshold = 0.0;  ///< maximising s
  double ratio = 0.0;      ///< lv sqrt(t) / W2
  double rhs = 0.0;        ///< (C / sqrt(t)) W2 with C fitted at the largest t
  double tv() const { return 0.5 * lv; }
};

struct A2Result {
  double w2 = 0.0;
  std::vector<A2Entry> entries;
  bool pass = true;
  std::vector<SweepRow> table() const;
};

inline constexpr std::size_t kA2Thresholds = 64;

/// Threshold-dictionary lower bound on ||P_t^*mu - P_t^*nu||_var in d = 1.
/// Both ensembles share their Brownian increments.
A2Result a2_check(const CoefficientSet& coeffs, const EmpiricalMeasure& mu,
                  const EmpiricalMeasure& nu, const std::vector<double>& times,
                  const MonteCarloSettings& settings);

struct TangentCheckResult {
  std::vector<double> eps;
  std::vector<double> error;   ///< E sup_t |(X^eps - X)/eps - tangent|^2
  std::vector<double> ratios;  ///< error[k+1] / error[k]
  bool pass = true;
  std::vector<SweepRow> table() const;
};

inline constexpr double kTangentRatioBound = 0.6;
inline constexpr double kAffineTangentTolerance = 1e-10;

/// Pathwise comparison of the coupled difference quotient with the tangent
/// flow, averaged over particles and replications.
TangentCheckResult pathwise_tangent_check(const CoefficientSet& coeffs, const InitialLaw& init,
                                          const Perturbation& phi,
                                          const MonteCarloSettings& settings,
                                          const std::vector<double>& eps);

}  // namespace mvb
