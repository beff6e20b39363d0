#include "mvbismut/model.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <memory>

#include "mvbismut/errors.hpp"
#include "mvbismut/mollifier.hpp"

namespace mvb {

MeasureSnapshot CoefficientSet::snapshot(double t, const EmpiricalMeasure& mu) const {
  MeasureSnapshot snap;
  snap.measure = &mu;
  if (summarize) snap.stats = summarize(t, mu);
  return snap;
}

namespace {

void check_finite(const char* what, double t, ConstVec x, ConstVec values) {
  for (double v : values) {
    if (!std::isfinite(v))
      throw ModelEvaluationError(std::string(what) + " is not finite", t,
                                 std::vector<double>(x.begin(), x.end()));
  }
}

void check_dims(const CoefficientSet& coeffs, ConstVec x, const EmpiricalMeasure& mu) {
  if (x.size() != coeffs.dim) throw ArgumentError("model: point has the wrong dimension");
  if (mu.dim() != coeffs.dim) throw ArgumentError("model: measure has the wrong dimension");
}

}  // namespace

void eval_drift(const CoefficientSet& coeffs, double t, ConstVec x, const MeasureSnapshot& mu,
                MutVec out) {
  const std::size_t d = coeffs.dim;
  if (coeffs.drift_regular) {
    coeffs.drift_regular(t, x, mu, out);
  } else {
    std::fill(out.begin(), out.end(), 0.0);
  }
  if (coeffs.drift_singular) {
    std::array<double, 8> local{};
    std::vector<double> heap(d > local.size() ? d : 0);
    MutVec buf = d <= local.size() ? MutVec(local.data(), d) : MutVec(heap);
    coeffs.drift_singular(t, x, mu, buf);
    for (std::size_t k = 0; k < d; ++k) out[k] += buf[k];
  }
  check_finite("drift", t, x, out);
}

std::vector<double> eval_drift(const CoefficientSet& coeffs, double t, ConstVec x,
                               const EmpiricalMeasure& mu) {
  check_dims(coeffs, x, mu);
  const auto snap = coeffs.snapshot(t, mu);
  std::vector<double> out(coeffs.dim);
  eval_drift(coeffs, t, x, snap, out);
  return out;
}

std::vector<double> eval_lions_kernel(const CoefficientSet& coeffs, double t, ConstVec x,
                                      const EmpiricalMeasure& mu, ConstVec y) {
  check_dims(coeffs, x, mu);
  if (y.size() != coeffs.dim) throw ArgumentError("model: atom has the wrong dimension");
  std::vector<double> out(coeffs.dim * coeffs.dim, 0.0);
  if (!coeffs.lions_kernel) return out;
  const auto snap = coeffs.snapshot(t, mu);
  coeffs.lions_kernel(t, x, snap, y, out);
  check_finite("Lions kernel", t, x, out);
  return out;
}

std::vector<double> eval_separable_kernel(const CoefficientSet& coeffs, double t, ConstVec x,
                                          const EmpiricalMeasure& mu, ConstVec y) {
  if (!coeffs.lions_kernel_separable)
    throw ArgumentError("model '" + coeffs.id + "' has no separable Lions kernel");
  check_dims(coeffs, x, mu);
  const auto& sep = *coeffs.lions_kernel_separable;
  const std::size_t d = coeffs.dim, m = sep.channels;
  const auto snap = coeffs.snapshot(t, mu);
  std::vector<double> coef(m * d), grad(m * d), out(d * d, 0.0);
  sep.coef(t, x, snap, coef);
  sep.feature_grad(t, y, grad);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t r = 0; r < d; ++r)
      for (std::size_t c = 0; c < d; ++c) out[r * d + c] += coef[i * d + r] * grad[i * d + c];
  check_finite("separable Lions kernel", t, x, out);
  return out;
}

CoefficientSet mollify_drift(const CoefficientSet& coeffs, double delta) {
  if (!(delta > 0.0) || !std::isfinite(delta))
    throw ArgumentError("mollify_drift: delta must be positive");
  CoefficientSet out = coeffs;
  if (!coeffs.drift_singular) return out;
  if (coeffs.drift_regular && !coeffs.regular_grad_x)
    throw ArgumentError("mollify_drift: model '" + coeffs.id +
                        "' has a regular drift but no regular_grad_x");
  const std::size_t d = coeffs.dim;
  auto stencil = std::make_shared<const BumpStencil>(d);
  auto singular = coeffs.drift_singular;

  out.drift_singular = [stencil, singular, delta, d](double t, ConstVec x,
                                                     const MeasureSnapshot& mu, MutVec res) {
    std::vector<double> shifted(d), value(d);
    std::fill(res.begin(), res.end(), 0.0);
    for (std::size_t q = 0; q < stencil->size(); ++q) {
      const double* u = stencil->node(q);
      for (std::size_t k = 0; k < d; ++k) shifted[k] = x[k] - delta * u[k];
      singular(t, shifted, mu, value);
      const double w = stencil->value_weight(q);
      for (std::size_t k = 0; k < d; ++k) res[k] += w * value[k];
    }
  };
  auto regular_grad = coeffs.regular_grad_x;
  out.drift_grad_x = [stencil, singular, regular_grad, delta, d](
                         double t, ConstVec x, const MeasureSnapshot& mu, MutVec res) {
    if (regular_grad) {
      regular_grad(t, x, mu, res);
    } else {
      std::fill(res.begin(), res.end(), 0.0);
    }
    std::vector<double> shifted(d), value(d);
    for (std::size_t q = 0; q < stencil->size(); ++q) {
      const double* u = stencil->node(q);
      for (std::size_t k = 0; k < d; ++k) shifted[k] = x[k] - delta * u[k];
      singular(t, shifted, mu, value);
      for (std::size_t r = 0; r < d; ++r)
        for (std::size_t c = 0; c < d; ++c)
          res[r * d + c] += value[r] * stencil->grad_weight(q, c) / delta;
    }
  };
  out.smooth_drift = true;
  out.affine = false;
  out.id = coeffs.id + "+mollified";
  return out;
}

}  // namespace mvb
