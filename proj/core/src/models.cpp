#include "mvbismut/models.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>

#include "mvbismut/errors.hpp"
#include "mvbismut/mollifier.hpp"

namespace mvb {

namespace {

void identity_scaled(double s, std::size_t d, MutVec out) {
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t k = 0; k < d; ++k) out[k * d + k] = s;
}

void constant_diffusion(CoefficientSet& c, double sigma) {
  if (!(sigma != 0.0) || !std::isfinite(sigma))
    throw ArgumentError("diffusion coefficient must be finite and non-zero");
  const std::size_t d = c.dim;
  c.diffusion = [sigma, d](double, ConstVec, MutVec out) { identity_scaled(sigma, d, out); };
  c.diffusion_inverse = [sigma, d](double, ConstVec, MutVec out) {
    identity_scaled(1.0 / sigma, d, out);
  };
  c.diffusion_grad = [](double, ConstVec, MutVec out) { std::fill(out.begin(), out.end(), 0.0); };
  c.constant_diffusion = true;
}

std::vector<double> coordinate_mean(const EmpiricalMeasure& mu) {
  const std::size_t d = mu.dim();
  std::vector<double> mean(d, 0.0);
  for (std::size_t i = 0; i < mu.size(); ++i)
    for (std::size_t k = 0; k < d; ++k) mean[k] += mu.atom(i)[k];
  for (auto& m : mean) m /= static_cast<double>(mu.size());
  return mean;
}

// Kernel c * Id, separable as sum_k (c e_k) (x) e_k.
void attach_mean_kernel(CoefficientSet& c, double coupling) {
  const std::size_t d = c.dim;
  c.lions_kernel = [coupling, d](double, ConstVec, const MeasureSnapshot&, ConstVec, MutVec out) {
    identity_scaled(coupling, d, out);
  };
  SeparableLionsKernel sep;
  sep.channels = d;
  sep.coef = [coupling, d](double, ConstVec, const MeasureSnapshot&, MutVec out) {
    identity_scaled(coupling, d, out);
  };
  sep.feature_grad = [d](double, ConstVec, MutVec out) { identity_scaled(1.0, d, out); };
  c.lions_kernel_separable = std::move(sep);
}

}  // namespace

CoefficientSet linear_mf_ou(const LinearMfParams& p, std::size_t dim) {
  if (dim == 0) throw ArgumentError("linear_mf_ou: dimension must be positive");
  CoefficientSet c;
  c.id = "linear_mf_ou";
  c.dim = dim;
  const double a = p.a, cc = p.c;
  c.summarize = [](double, const EmpiricalMeasure& mu) { return coordinate_mean(mu); };
  c.drift_regular = [a, cc, dim](double, ConstVec x, const MeasureSnapshot& mu, MutVec out) {
    for (std::size_t k = 0; k < dim; ++k) out[k] = a * x[k] + cc * mu.stats[k];
  };
  c.regular_grad_x = [a, dim](double, ConstVec, const MeasureSnapshot&, MutVec out) {
    identity_scaled(a, dim, out);
  };
  c.drift_grad_x = c.regular_grad_x;
  attach_mean_kernel(c, cc);
  constant_diffusion(c, p.sigma);
  c.measure_dependent = cc != 0.0;
  c.smooth_drift = true;
  c.affine = true;
  return c;
}

CoefficientSet double_well_mf(const DoubleWellParams& p, std::size_t dim) {
  if (dim == 0) throw ArgumentError("double_well_mf: dimension must be positive");
  CoefficientSet c;
  c.id = "double_well_mf";
  c.dim = dim;
  const double kappa = p.kappa;
  c.summarize = [](double, const EmpiricalMeasure& mu) { return coordinate_mean(mu); };
  c.drift_regular = [kappa, dim](double, ConstVec x, const MeasureSnapshot& mu, MutVec out) {
    for (std::size_t k = 0; k < dim; ++k)
      out[k] = x[k] - x[k] * x[k] * x[k] + kappa * (mu.stats[k] - x[k]);
  };
  c.regular_grad_x = [kappa, dim](double, ConstVec x, const MeasureSnapshot&, MutVec out) {
    std::fill(out.begin(), out.end(), 0.0);
    for (std::size_t k = 0; k < dim; ++k) out[k * dim + k] = 1.0 - 3.0 * x[k] * x[k] - kappa;
  };
  c.drift_grad_x = c.regular_grad_x;
  attach_mean_kernel(c, kappa);
  constant_diffusion(c, p.sigma);
  c.measure_dependent = kappa != 0.0;
  c.smooth_drift = true;
  c.affine = false;
  return c;
}

OuterFunction outer_radial() {
  OuterFunction f;
  f.name = "radial";
  f.value = [](double, double r, ConstVec) { return r; };
  f.d_r = [](double, double, ConstVec) { return 1.0; };
  f.d_z = [](double, double, ConstVec, MutVec g) { std::fill(g.begin(), g.end(), 0.0); };
  return f;
}

OuterFunction outer_mean_field() {
  OuterFunction f;
  f.name = "mean_field";
  f.value = [](double, double, ConstVec z) { return std::accumulate(z.begin(), z.end(), 0.0); };
  f.d_r = [](double, double, ConstVec) { return 0.0; };
  f.d_z = [](double, double, ConstVec, MutVec g) { std::fill(g.begin(), g.end(), 1.0); };
  f.depends_on_r = false;
  return f;
}

OuterFunction outer_tanh() {
  OuterFunction f;
  f.name = "tanh";
  f.value = [](double, double r, ConstVec z) {
    return std::tanh(r + std::accumulate(z.begin(), z.end(), 0.0));
  };
  f.d_r = [](double, double r, ConstVec z) {
    const double th = std::tanh(r + std::accumulate(z.begin(), z.end(), 0.0));
    return 1.0 - th * th;
  };
  f.d_z = [](double, double r, ConstVec z, MutVec g) {
    const double th = std::tanh(r + std::accumulate(z.begin(), z.end(), 0.0));
    std::fill(g.begin(), g.end(), 1.0 - th * th);
  };
  return f;
}

OuterFunction outer_by_name(const std::string& name) {
  if (name == "radial") return outer_radial();
  if (name == "mean_field") return outer_mean_field();
  if (name == "tanh") return outer_tanh();
  throw ArgumentError("unknown outer function '" + name + "' (expected radial, mean_field, tanh)");
}

Feature feature_by_name(const std::string& name, std::size_t axis, std::size_t dim) {
  if (axis >= dim) throw ArgumentError("feature axis " + std::to_string(axis) + " out of range");
  std::function<double(double)> value, deriv;
  if (name == "sin") {
    value = [](double u) { return std::sin(u); };
    deriv = [](double u) { return std::cos(u); };
  } else if (name == "cos") {
    value = [](double u) { return std::cos(u); };
    deriv = [](double u) { return -std::sin(u); };
  } else if (name == "tanh") {
    value = [](double u) { return std::tanh(u); };
    deriv = [](double u) {
      const double th = std::tanh(u);
      return 1.0 - th * th;
    };
  } else if (name == "gaussian") {
    value = [](double u) { return std::exp(-0.5 * u * u); };
    deriv = [](double u) { return -u * std::exp(-0.5 * u * u); };
  } else {
    throw ArgumentError("unknown feature '" + name + "' (expected sin, cos, tanh, gaussian)");
  }
  Feature f;
  f.name = name + (dim > 1 ? "(x" + std::to_string(axis) + ")" : "");
  f.value = [value, axis](ConstVec x) { return value(x[axis]); };
  f.grad = [deriv, axis](ConstVec x, MutVec out) {
    std::fill(out.begin(), out.end(), 0.0);
    out[axis] = deriv(x[axis]);
  };
  return f;
}

std::vector<double> feature_gradient_bounds(const CylindricalDriftSpec& spec) {
  const std::size_t d = spec.dim;
  constexpr int points = 401;
  constexpr double lo = -10.0, hi = 10.0;
  std::vector<double> bounds(spec.features.size(), 0.0);
  std::vector<double> x(d), g(d);
  // Axis-aligned sweep through the origin plus the diagonal.
  for (std::size_t fi = 0; fi < spec.features.size(); ++fi) {
    for (std::size_t line = 0; line <= d; ++line) {
      for (int s = 0; s < points; ++s) {
        const double u = lo + (hi - lo) * s / (points - 1);
        for (std::size_t k = 0; k < d; ++k) x[k] = (line == d || line == k) ? u : 0.0;
        spec.features[fi].grad(x, g);
        double norm = 0.0;
        for (double v : g) norm += v * v;
        bounds[fi] = std::max(bounds[fi], std::sqrt(norm));
      }
    }
  }
  return bounds;
}

namespace {

const BumpStencil& stencil_for(std::size_t dim) {
  static const BumpStencil one(1), two(2);
  if (dim == 1) return one;
  if (dim == 2) return two;
  throw ArgumentError("mollification supports d <= 2");
}

double norm_of(ConstVec x) {
  double r2 = 0.0;
  for (double v : x) r2 += v * v;
  return std::sqrt(r2);
}

// Value and gradient of |.|^alpha convolved with rho_delta.
double mollified_radial_impl(ConstVec x, double alpha, double delta, MutVec grad) {
  const std::size_t d = x.size();
  const auto& st = stencil_for(d);
  double value = 0.0;
  if (!grad.empty()) std::fill(grad.begin(), grad.end(), 0.0);
  double shifted[2];
  for (std::size_t q = 0; q < st.size(); ++q) {
    const double* u = st.node(q);
    double r2 = 0.0;
    for (std::size_t k = 0; k < d; ++k) {
      shifted[k] = x[k] - delta * u[k];
      r2 += shifted[k] * shifted[k];
    }
    const double h = r2 > 0.0 ? std::pow(r2, 0.5 * alpha) : 0.0;
    value += st.value_weight(q) * h;
    if (!grad.empty())
      for (std::size_t k = 0; k < d; ++k) grad[k] += st.grad_weight(q, k) * h / delta;
  }
  return value;
}

}  // namespace

double mollified_radial(ConstVec x, double alpha, double delta) {
  if (!(delta > 0.0)) throw ArgumentError("mollified_radial: delta must be positive");
  return mollified_radial_impl(x, alpha, delta, {});
}

void mollified_radial_grad(ConstVec x, double alpha, double delta, MutVec out) {
  if (!(delta > 0.0)) throw ArgumentError("mollified_radial_grad: delta must be positive");
  mollified_radial_impl(x, alpha, delta, out);
}

CoefficientSet build_cylindrical(const CylindricalDriftSpec& spec) {
  if (!(spec.alpha > 0.0 && spec.alpha < 0.5))
    throw ArgumentError("cylindrical drift: alpha must lie in (0, 1/2)");
  if (spec.dim == 0) throw ArgumentError("cylindrical drift: dimension must be positive");
  if (spec.mollify_radius < 0.0 || !std::isfinite(spec.mollify_radius))
    throw ArgumentError("cylindrical drift: mollify_radius must be non-negative");
  if (spec.mollify_radius > 0.0 && spec.dim > 2)
    throw ArgumentError("cylindrical drift: mollification supports d <= 2");
  if (!spec.outer.value || !spec.outer.d_r || !spec.outer.d_z)
    throw ArgumentError("cylindrical drift: outer function is incomplete");
  for (double b : feature_gradient_bounds(spec))
    if (!std::isfinite(b)) throw ArgumentError("cylindrical drift: unbounded feature gradient");

  const std::size_t d = spec.dim;
  const std::size_t m = spec.features.size();
  std::vector<double> dir = spec.direction.empty() ? std::vector<double>(d, 1.0) : spec.direction;
  if (dir.size() != d) throw ArgumentError("cylindrical drift: direction has the wrong length");

  auto features = std::make_shared<const std::vector<Feature>>(spec.features);
  const OuterFunction outer = spec.outer;
  const double alpha = spec.alpha, delta = spec.mollify_radius, conf = spec.confinement;

  CoefficientSet c;
  c.id = "cylindrical_dini";
  c.dim = d;
  c.summarize = [features, m](double, const EmpiricalMeasure& mu) {
    std::vector<double> z(m, 0.0);
    for (std::size_t i = 0; i < mu.size(); ++i)
      for (std::size_t f = 0; f < m; ++f) z[f] += (*features)[f].value(mu.atom(i));
    for (auto& v : z) v /= static_cast<double>(mu.size());
    return z;
  };
  if (conf != 0.0) {
    c.drift_regular = [conf, d](double, ConstVec x, const MeasureSnapshot&, MutVec out) {
      for (std::size_t k = 0; k < d; ++k) out[k] = conf * x[k];
    };
  }
  c.regular_grad_x = [conf, d](double, ConstVec, const MeasureSnapshot&, MutVec out) {
    identity_scaled(conf, d, out);
  };
  c.drift_singular = [outer, dir, alpha, d](double t, ConstVec x, const MeasureSnapshot& mu,
                                            MutVec out) {
    const double r = norm_of(x);
    const double h = r > 0.0 ? std::pow(r, alpha) : 0.0;
    const double s = outer.value(t, h, mu.stats);
    for (std::size_t k = 0; k < d; ++k) out[k] = s * dir[k];
  };
  c.drift_grad_x = [outer, dir, alpha, delta, conf, d](double t, ConstVec x,
                                                       const MeasureSnapshot& mu, MutVec out) {
    identity_scaled(conf, d, out);
    if (!outer.depends_on_r) return;
    const double r = norm_of(x);
    double h = 0.0;
    double grad_h[2] = {0.0, 0.0};
    std::vector<double> grad_heap;
    double* gh = grad_h;
    if (d > 2) {
      grad_heap.assign(d, 0.0);
      gh = grad_heap.data();
    }
    if (delta > 0.0 && r < kMollifierFarField * delta) {
      h = mollified_radial_impl(x, alpha, delta, MutVec(gh, d));
    } else if (r > 0.0) {
      h = std::pow(r, alpha);
      const double scale = alpha * h / (r * r);
      for (std::size_t k = 0; k < d; ++k) gh[k] = scale * x[k];
    }
    const double dr = outer.d_r(t, h, mu.stats);
    for (std::size_t row = 0; row < d; ++row)
      for (std::size_t col = 0; col < d; ++col) out[row * d + col] += dir[row] * dr * gh[col];
  };
  c.lions_kernel = [outer, features, dir, alpha, d, m](double t, ConstVec x,
                                                       const MeasureSnapshot& mu, ConstVec y,
                                                       MutVec out) {
    std::fill(out.begin(), out.end(), 0.0);
    const double r = norm_of(x);
    const double h = r > 0.0 ? std::pow(r, alpha) : 0.0;
    std::vector<double> dz(m), g(d);
    outer.d_z(t, h, mu.stats, dz);
    for (std::size_t f = 0; f < m; ++f) {
      (*features)[f].grad(y, g);
      for (std::size_t row = 0; row < d; ++row)
        for (std::size_t col = 0; col < d; ++col) out[row * d + col] += dir[row] * dz[f] * g[col];
    }
  };
  SeparableLionsKernel sep;
  sep.channels = m;
  sep.coef = [outer, dir, alpha, d, m](double t, ConstVec x, const MeasureSnapshot& mu,
                                       MutVec out) {
    const double r = norm_of(x);
    const double h = r > 0.0 ? std::pow(r, alpha) : 0.0;
    double dz_local[8];
    std::vector<double> dz_heap;
    MutVec dz(dz_local, m <= 8 ? m : 0);
    if (m > 8) {
      dz_heap.assign(m, 0.0);
      dz = dz_heap;
    }
    outer.d_z(t, h, mu.stats, dz);
    for (std::size_t f = 0; f < m; ++f)
      for (std::size_t k = 0; k < d; ++k) out[f * d + k] = dz[f] * dir[k];
  };
  sep.feature_grad = [features, d, m](double, ConstVec y, MutVec out) {
    for (std::size_t f = 0; f < m; ++f) (*features)[f].grad(y, out.subspan(f * d, d));
  };
  c.lions_kernel_separable = std::move(sep);
  constant_diffusion(c, spec.sigma);
  c.measure_dependent = m > 0;
  c.smooth_drift = !outer.depends_on_r;
  c.affine = false;
  return c;
}

}  // namespace mvb
