#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "mvbismut/model.hpp"

namespace mvb {

/// dX = (a X + c E[X]) dt + sigma dW, componentwise.
struct LinearMfParams {
  double a = -1.0;
  double c = 0.5;
  double sigma = 0.2;
};

CoefficientSet linear_mf_ou(const LinearMfParams& params, std::size_t dim = 1);

/// dX = (X - X^3 + kappa (E[X] - X)) dt + sigma dW, componentwise.
struct DoubleWellParams {
  double kappa = 0.5;
  double sigma = 0.5;
};

CoefficientSet double_well_mf(const DoubleWellParams& params, std::size_t dim = 1);

/// Scalar outer function s_t(r, z); the drift is F_t(r, z) = s_t(r, z) * direction.
struct OuterFunction {
  std::string name;
  std::function<double(double t, double r, ConstVec z)> value;
  std::function<double(double t, double r, ConstVec z)> d_r;
  /// Writes d s / d z_i for every channel.
  std::function<void(double t, double r, ConstVec z, MutVec grad_z)> d_z;
  bool depends_on_r = true;
};

/// s = r, s = sum z, s = tanh(r + sum z).
OuterFunction outer_radial();
OuterFunction outer_mean_field();
OuterFunction outer_tanh();
OuterFunction outer_by_name(const std::string& name);

/// A bounded C^1 feature f_i: R^d -> R entering through mu(f_i).
struct Feature {
  std::string name;
  ScalarField value;
  VectorField grad;
};

/// sin, cos, tanh or gaussian (exp(-u^2/2)) of coordinate `axis`.
Feature feature_by_name(const std::string& name, std::size_t axis, std::size_t dim);

/// b_t(x, mu) = F_t(|x|^alpha, mu(f)) with an optional linear confinement
/// B_t(x) = confinement * x and constant diffusion sigma * Id.
struct CylindricalDriftSpec {
  std::size_t dim = 1;
  double alpha = 0.3;
  OuterFunction outer = outer_tanh();
  std::vector<double> direction;  ///< defaults to all ones
  std::vector<Feature> features;
  /// Radius of the bump used for the tangent-flow gradient; 0 uses the a.e. gradient.
  double mollify_radius = 0.0;
  double sigma = 1.0;
  double confinement = 0.0;
};

/// sup of |grad f_i| over a fixed sample grid, one entry per feature.
std::vector<double> feature_gradient_bounds(const CylindricalDriftSpec& spec);

/// Beyond this multiple of the mollification radius the mollified radial
/// gradient is replaced by the exact one (relative difference below 1e-5).
inline constexpr double kMollifierFarField = 100.0;

/// |x|^alpha mollified with the bump stencil, and its gradient.
double mollified_radial(ConstVec x, double alpha, double delta);
void mollified_radial_grad(ConstVec x, double alpha, double delta, MutVec out);

CoefficientSet build_cylindrical(const CylindricalDriftSpec& spec);

}  // namespace mvb
