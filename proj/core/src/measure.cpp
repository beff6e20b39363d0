#include "mvbismut/measure.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "mvbismut/errors.hpp"

namespace mvb {

EmpiricalMeasure::EmpiricalMeasure(std::size_t dim, std::vector<double> atoms)
    : dim_(dim), atoms_(std::move(atoms)) {
  if (dim_ == 0) throw ArgumentError("empirical measure: dimension must be positive");
  if (atoms_.empty()) throw ArgumentError("empirical measure: at least one atom required");
  if (atoms_.size() % dim_ != 0)
    throw ArgumentError("empirical measure: atom buffer is not a multiple of the dimension");
  for (std::size_t k = 0; k < atoms_.size(); ++k) {
    if (!std::isfinite(atoms_[k]))
      throw ArgumentError("empirical measure: atom " + std::to_string(k / dim_) +
                          " is not finite");
  }
}

EmpiricalMeasure EmpiricalMeasure::dirac(std::vector<double> point) {
  const std::size_t d = point.size();
  return EmpiricalMeasure(d, std::move(point));
}

Perturbation constant_perturbation(std::vector<double> v, std::string label) {
  if (label.empty()) {
    std::ostringstream os;
    os << "const(";
    for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
    os << ")";
    label = os.str();
  }
  return {[v = std::move(v)](ConstVec, MutVec out) { std::copy(v.begin(), v.end(), out.begin()); },
          std::move(label)};
}

Perturbation zero_perturbation(std::size_t dim) {
  return constant_perturbation(std::vector<double>(dim, 0.0), "zero");
}

std::vector<double> integrate(const EmpiricalMeasure& mu, const VectorField& f,
                              std::size_t out_dim) {
  std::vector<double> sum(out_dim, 0.0), value(out_dim);
  for (std::size_t i = 0; i < mu.size(); ++i) {
    f(mu.atom(i), value);
    for (std::size_t k = 0; k < out_dim; ++k) {
      if (!std::isfinite(value[k]))
        throw EvaluationError("integrate: non-finite value at atom " + std::to_string(i), i);
      sum[k] += value[k];
    }
  }
  const double n = static_cast<double>(mu.size());
  for (auto& s : sum) s /= n;
  return sum;
}

double integrate(const EmpiricalMeasure& mu, const ScalarField& f) {
  double sum = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    const double v = f(mu.atom(i));
    if (!std::isfinite(v))
      throw EvaluationError("integrate: non-finite value at atom " + std::to_string(i), i);
    sum += v;
  }
  return sum / static_cast<double>(mu.size());
}

EmpiricalMeasure shift_pushforward(const EmpiricalMeasure& mu, const Perturbation& phi,
                                   double eps) {
  const std::size_t d = mu.dim();
  std::vector<double> atoms(mu.atoms().begin(), mu.atoms().end());
  std::vector<double> v(d);
  for (std::size_t i = 0; i < mu.size(); ++i) {
    phi.phi(mu.atom(i), v);
    for (std::size_t k = 0; k < d; ++k) {
      const double shifted = atoms[i * d + k] + eps * v[k];
      if (!std::isfinite(shifted))
        throw EvaluationError("shift_pushforward: non-finite atom " + std::to_string(i), i);
      atoms[i * d + k] = shifted;
    }
  }
  return EmpiricalMeasure(d, std::move(atoms));
}

double l2_norm(const Perturbation& phi, const EmpiricalMeasure& mu) {
  const std::size_t d = mu.dim();
  std::vector<double> v(d);
  double sum = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    phi.phi(mu.atom(i), v);
    for (std::size_t k = 0; k < d; ++k) {
      if (!std::isfinite(v[k]))
        throw EvaluationError("l2_norm: non-finite value at atom " + std::to_string(i), i);
      sum += v[k] * v[k];
    }
  }
  return std::sqrt(sum / static_cast<double>(mu.size()));
}

namespace {

// Quantile coupling: integrate |F^{-1}(u) - G^{-1}(u)|^2 over u in [0,1]
// by walking the merged breakpoints i/n and j/m.
double wasserstein2_1d(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu) {
  std::vector<double> a(mu.atoms().begin(), mu.atoms().end());
  std::vector<double> b(nu.atoms().begin(), nu.atoms().end());
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const std::size_t n = a.size(), m = b.size();
  if (n == m) {
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) sum += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(sum / static_cast<double>(n));
  }
  // Work in units of 1/(n*m) so breakpoints are integers.
  std::size_t i = 0, j = 0, pos = 0;
  double sum = 0.0;
  const std::size_t total = n * m;
  while (pos < total) {
    const std::size_t next_a = (i + 1) * m, next_b = (j + 1) * n;
    const std::size_t next = std::min(next_a, next_b);
    const double diff = a[i] - b[j];
    sum += diff * diff * static_cast<double>(next - pos);
    pos = next;
    if (next == next_a) ++i;
    if (next == next_b) ++j;
  }
  return std::sqrt(sum / static_cast<double>(total));
}

}  // namespace

double wasserstein2(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu) {
  if (mu.dim() != nu.dim()) throw ArgumentError("wasserstein2: dimension mismatch");
  if (mu.dim() == 1) return wasserstein2_1d(mu, nu);
  if (mu.size() != nu.size())
    throw ArgumentError("wasserstein2: unequal atom counts are unsupported for d >= 2");
  const std::size_t n = mu.size();
  if (n > kMaxAssignmentSize)
    throw ArgumentError("wasserstein2: " + std::to_string(n) + " atoms exceed the cap of " +
                        std::to_string(kMaxAssignmentSize) + " for d >= 2");
  const std::size_t d = mu.dim();
  std::vector<double> cost(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double c = 0.0;
      for (std::size_t k = 0; k < d; ++k) {
        const double diff = mu.atom(i)[k] - nu.atom(j)[k];
        c += diff * diff;
      }
      cost[i * n + j] = c;
    }
  }
  const auto match = optimal_assignment(cost, n);
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) sum += cost[i * n + match[i]];
  return std::sqrt(sum / static_cast<double>(n));
}

void write_csv(std::ostream& os, const EmpiricalMeasure& mu) {
  const std::size_t d = mu.dim();
  for (std::size_t k = 0; k < d; ++k) os << (k ? "," : "") << 'x' << k;
  os << '\n';
  const auto old_precision = os.precision(17);
  for (std::size_t i = 0; i < mu.size(); ++i) {
    for (std::size_t k = 0; k < d; ++k) os << (k ? "," : "") << mu.atom(i)[k];
    os << '\n';
  }
  os.precision(old_precision);
}

EmpiricalMeasure read_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw ArgumentError("measure csv: missing header");
  std::size_t d = 0;
  {
    std::istringstream header(line);
    std::string cell;
    while (std::getline(header, cell, ',')) {
      while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
      if (cell != "x" + std::to_string(d))
        throw ArgumentError("measure csv: header column " + std::to_string(d) + " must be x" +
                            std::to_string(d));
      ++d;
    }
  }
  if (d == 0) throw ArgumentError("measure csv: empty header");
  std::vector<double> atoms;
  std::size_t row = 0;
  while (std::getline(is, line)) {
    if (line.empty() || line == "\r") continue;
    ++row;
    std::istringstream cells(line);
    std::string cell;
    std::size_t count = 0;
    while (std::getline(cells, cell, ',')) {
      try {
        std::size_t used = 0;
        atoms.push_back(std::stod(cell, &used));
      } catch (const std::exception&) {
        throw ArgumentError("measure csv: row " + std::to_string(row) + " has a malformed number");
      }
      ++count;
    }
    if (count != d)
      throw ArgumentError("measure csv: row " + std::to_string(row) + " has " +
                          std::to_string(count) + " columns, expected " + std::to_string(d));
  }
  return EmpiricalMeasure(d, std::move(atoms));
}

EmpiricalMeasure read_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ArgumentError("measure csv: cannot open " + path);
  return read_csv(in);
}

}  // namespace mvb
