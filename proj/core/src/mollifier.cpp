#include "mvbismut/mollifier.hpp"

#include <cmath>
#include <numbers>

#include "mvbismut/errors.hpp"

namespace mvb {

void gauss_legendre(std::size_t n, std::vector<double>& nodes, std::vector<double>& weights) {
  if (n == 0) throw ArgumentError("gauss_legendre: need at least one node");
  nodes.assign(n, 0.0);
  weights.assign(n, 0.0);
  for (std::size_t i = 0; i < (n + 1) / 2; ++i) {
    // Newton on P_n starting from the Tricomi estimate.
    double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) /
                        (static_cast<double>(n) + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (std::size_t k = 2; k <= n; ++k) {
        const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / static_cast<double>(k);
        p0 = p1;
        p1 = pk;
      }
      dp = static_cast<double>(n) * (x * p1 - p0) / (x * x - 1.0);
      const double step = p1 / dp;
      x -= step;
      if (std::abs(step) < 1e-16) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    nodes[i] = -x;
    nodes[n - 1 - i] = x;
    weights[i] = w;
    weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) nodes[n / 2] = 0.0;
}

double bump(const double* u, std::size_t dim) {
  double r2 = 0.0;
  for (std::size_t k = 0; k < dim; ++k) r2 += u[k] * u[k];
  if (r2 >= 1.0) return 0.0;
  return std::exp(-1.0 / (1.0 - r2));
}

BumpStencil::BumpStencil(std::size_t dim, std::size_t nodes_per_axis) : dim_(dim) {
  if (dim == 0 || dim > 2)
    throw ArgumentError("mollifier: quadrature stencil supports d = 1 or d = 2 only");
  std::vector<double> x, w;
  gauss_legendre(nodes_per_axis, x, w);
  std::size_t total = 1;
  for (std::size_t k = 0; k < dim; ++k) total *= nodes_per_axis;

  std::vector<double> raw_value, raw_grad;
  std::vector<double> u(dim);
  double normaliser = 0.0;
  for (std::size_t flat = 0; flat < total; ++flat) {
    double weight = 1.0;
    std::size_t rest = flat;
    for (std::size_t k = 0; k < dim; ++k) {
      const std::size_t idx = rest % nodes_per_axis;
      rest /= nodes_per_axis;
      u[k] = x[idx];
      weight *= w[idx];
    }
    const double rho = bump(u.data(), dim);
    if (rho <= 0.0) continue;
    double r2 = 0.0;
    for (double c : u) r2 += c * c;
    const double s = 1.0 - r2;
    nodes_.insert(nodes_.end(), u.begin(), u.end());
    raw_value.push_back(weight * rho);
    normaliser += weight * rho;
    for (std::size_t k = 0; k < dim; ++k) raw_grad.push_back(weight * rho * (-2.0 * u[k] / (s * s)));
  }
  value_weight_.resize(raw_value.size());
  grad_weight_.resize(raw_grad.size());
  for (std::size_t q = 0; q < raw_value.size(); ++q) value_weight_[q] = raw_value[q] / normaliser;
  // Rescale each axis so that gradients of linear functions are reproduced exactly.
  for (std::size_t k = 0; k < dim; ++k) {
    double moment = 0.0;
    for (std::size_t q = 0; q < raw_value.size(); ++q)
      moment -= raw_grad[q * dim + k] * nodes_[q * dim + k];
    for (std::size_t q = 0; q < raw_value.size(); ++q)
      grad_weight_[q * dim + k] = raw_grad[q * dim + k] / moment;
  }
}

}  // namespace mvb
