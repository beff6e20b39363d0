#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mvbismut/measure.hpp"

namespace mvb {

/// A measure frozen at one time together with the finite-dimensional
/// statistics (means, feature integrals, ...) the coefficients read from it.
/// Computing the statistics once per time step keeps per-particle coefficient
/// evaluation O(1) in the ensemble size.
struct MeasureSnapshot {
  const EmpiricalMeasure* measure = nullptr;
  std::vector<double> stats;
};

// Vectors are length d; matrices are d x d row-major with rows indexing the
// output component. A diffusion gradient is d x d x d laid out as
// [k][i][j] = d sigma_ij / d x_k.
using DriftFn = std::function<void(double t, ConstVec x, const MeasureSnapshot& mu, MutVec out)>;
using DriftMatrixFn =
    std::function<void(double t, ConstVec x, const MeasureSnapshot& mu, MutVec out)>;
using KernelFn =
    std::function<void(double t, ConstVec x, const MeasureSnapshot& mu, ConstVec y, MutVec out)>;
using DiffusionFn = std::function<void(double t, ConstVec x, MutVec out)>;
using SummaryFn = std::function<std::vector<double>(double t, const EmpiricalMeasure& mu)>;

/// Rank-m factorisation kernel(t,x,mu,y) = sum_i coef_i(t,x,mu) (x) feature_grad_i(t,y).
struct SeparableLionsKernel {
  std::size_t channels = 0;
  /// Writes channels x d; row i is coef_i(t, x, mu).
  DriftMatrixFn coef;
  /// Writes channels x d; row i is grad f_i(y).
  DiffusionFn feature_grad;
};

/// The coefficients (B, b, sigma) of a distribution-dependent SDE together
/// with the derivatives the tangent flow and the Bismut weight need.
struct CoefficientSet {
  std::string id;
  std::size_t dim = 1;

  SummaryFn summarize;  ///< empty when the coefficients do not read mu

  DriftFn drift_regular;   ///< B_t(x, mu); empty means zero
  DriftFn drift_singular;  ///< b_t(x, mu); empty means zero
  DriftMatrixFn regular_grad_x;  ///< grad_x B alone (empty means zero)
  DriftMatrixFn drift_grad_x;    ///< grad_x (B + b), possibly mollified
  KernelFn lions_kernel;         ///< D^L (B + b)(x, mu)(y)
  std::optional<SeparableLionsKernel> lions_kernel_separable;

  DiffusionFn diffusion;
  DiffusionFn diffusion_grad;
  DiffusionFn diffusion_inverse;

  bool measure_dependent = true;
  /// sigma does not depend on x, so diffusion_grad vanishes identically.
  bool constant_diffusion = false;
  /// drift_grad_x is the exact gradient everywhere (no mollified surrogate).
  bool smooth_drift = true;
  /// The flow is affine in the initial condition (tangent == finite difference).
  bool affine = false;

  MeasureSnapshot snapshot(double t, const EmpiricalMeasure& mu) const;
};

/// B_t(x,mu) + b_t(x,mu). Throws ModelEvaluationError on non-finite output.
std::vector<double> eval_drift(const CoefficientSet& coeffs, double t, ConstVec x,
                               const EmpiricalMeasure& mu);
/// Allocation-free variant used inside the solver.
void eval_drift(const CoefficientSet& coeffs, double t, ConstVec x, const MeasureSnapshot& mu,
                MutVec out);

/// D^L(B_t + b_t)(x, mu)(y) as a d x d row-major matrix.
std::vector<double> eval_lions_kernel(const CoefficientSet& coeffs, double t, ConstVec x,
                                      const EmpiricalMeasure& mu, ConstVec y);

/// Kernel reassembled from the separable factorisation; throws ArgumentError
/// when the model has none.
std::vector<double> eval_separable_kernel(const CoefficientSet& coeffs, double t, ConstVec x,
                                          const EmpiricalMeasure& mu, ConstVec y);

/// Replaces b by its convolution with a smooth bump of radius `delta` and
/// drift_grad_x by the gradient of B + (mollified b). Supported for d <= 2.
CoefficientSet mollify_drift(const CoefficientSet& coeffs, double delta);

}  // namespace mvb
