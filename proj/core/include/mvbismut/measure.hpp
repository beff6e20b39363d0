#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace mvb {

using ConstVec = std::span<const double>;
using MutVec = std::span<double>;

/// Map R^d -> R^k writing into `out` (size k).
using VectorField = std::function<void(ConstVec x, MutVec out)>;
using ScalarField = std::function<double(ConstVec x)>;

/// Equal-weight atomic probability measure on R^d. Atoms are stored row-major
/// (N x d) and are immutable after construction.
class EmpiricalMeasure {
 public:
  /// Throws ArgumentError when `atoms` is empty, not a multiple of `dim`, or
  /// contains a non-finite entry.
  EmpiricalMeasure(std::size_t dim, std::vector<double> atoms);

  static EmpiricalMeasure dirac(std::vector<double> point);

  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return atoms_.size() / dim_; }
  ConstVec atom(std::size_t i) const noexcept { return {atoms_.data() + i * dim_, dim_}; }
  ConstVec atoms() const noexcept { return atoms_; }

  /// Hands the atom buffer back to the caller (used by the solver to recycle storage).
  std::vector<double> release() && { return std::move(atoms_); }

  friend bool operator==(const EmpiricalMeasure&, const EmpiricalMeasure&) = default;

 private:
  std::size_t dim_;
  std::vector<double> atoms_;
};

/// A direction phi in L^2(R^d -> R^d; mu) for the shift mu o (Id + eps phi)^{-1}.
struct Perturbation {
  VectorField phi;
  std::string label;
};

Perturbation constant_perturbation(std::vector<double> v, std::string label = {});
Perturbation zero_perturbation(std::size_t dim);

/// mu(f) for f: R^d -> R^k.
std::vector<double> integrate(const EmpiricalMeasure& mu, const VectorField& f, std::size_t out_dim);
double integrate(const EmpiricalMeasure& mu, const ScalarField& f);

/// Atoms mapped x -> x + eps * phi(x).
EmpiricalMeasure shift_pushforward(const EmpiricalMeasure& mu, const Perturbation& phi, double eps);

/// Root-mean-square of |phi| over the atoms of mu.
double l2_norm(const Perturbation& phi, const EmpiricalMeasure& mu);

/// Largest cloud accepted by the exact assignment solver used for d >= 2.
inline constexpr std::size_t kMaxAssignmentSize = 512;

/// Exact W2 between equal-weight clouds. In d = 1 clouds may have different
/// sizes (quantile coupling); in d >= 2 sizes must agree and not exceed
/// kMaxAssignmentSize.
double wasserstein2(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu);

/// Minimum-cost perfect matching on a dense n x n row-major cost matrix.
/// Returns `assignment[row] = column`.
std::vector<std::size_t> optimal_assignment(std::span<const double> cost, std::size_t n);

/// CSV with header "x0,...,x{d-1}" and one atom per row.
void write_csv(std::ostream& os, const EmpiricalMeasure& mu);
EmpiricalMeasure read_csv(std::istream& is);
EmpiricalMeasure read_csv_file(const std::string& path);

}  // namespace mvb
