#pragma once

#include <cstddef>
#include <vector>

namespace mvb {

inline constexpr std::size_t kMollifierNodesPerAxis = 33;

/// n-point Gauss-Legendre rule on [-1, 1].
void gauss_legendre(std::size_t n, std::vector<double>& nodes, std::vector<double>& weights);

/// rho(u) = exp(-1 / (1 - |u|^2)) on the open unit ball, zero elsewhere.
double bump(const double* u, std::size_t dim);

/// Fixed tensor Gauss-Legendre stencil on [-1,1]^d for the normalised bump rho.
/// For a function h,
///   (h * rho_delta)(x)      ~ sum_q value_weight[q] h(x - delta u_q)
///   grad (h * rho_delta)(x) ~ (1/delta) sum_q grad_weight[q] h(x - delta u_q)
/// Only nodes inside the ball are kept. Value weights sum to 1 and gradient
/// weights reproduce the gradient of linear functions exactly. Where h has a
/// kink inside the support the rule is only accurate to a few percent.
class BumpStencil {
 public:
  explicit BumpStencil(std::size_t dim, std::size_t nodes_per_axis = kMollifierNodesPerAxis);

  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return value_weight_.size(); }
  const double* node(std::size_t q) const noexcept { return nodes_.data() + q * dim_; }
  double value_weight(std::size_t q) const noexcept { return value_weight_[q]; }
  /// Component k of the gradient weight of node q.
  double grad_weight(std::size_t q, std::size_t k) const noexcept {
    return grad_weight_[q * dim_ + k];
  }

 private:
  std::size_t dim_;
  std::vector<double> nodes_;
  std::vector<double> value_weight_;
  std::vector<double> grad_weight_;
};

}  // namespace mvb
