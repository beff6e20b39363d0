#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "mvbismut/measure.hpp"
#include "mvbismut/rng.hpp"

namespace mvb {

/// Sampler for the initial law mu of the particle system. Samples are drawn
/// from the RNG at RngSpec::kInitialStep, so X_0 is reproducible per
/// (seed, replication, particle).
class InitialLaw {
 public:
  struct Gaussian {
    std::vector<double> mean;
    double std = 1.0;
  };
  struct Uniform {
    std::vector<double> lower;
    std::vector<double> upper;
  };
  /// Atoms are tiled when the particle count is a multiple of the atom count
  /// and resampled uniformly otherwise.
  struct Empirical {
    EmpiricalMeasure measure;
  };

  static InitialLaw gaussian(std::vector<double> mean, double std);
  static InitialLaw uniform(std::vector<double> lower, std::vector<double> upper);
  static InitialLaw dirac(std::vector<double> point);
  static InitialLaw empirical(EmpiricalMeasure measure);

  std::size_t dim() const noexcept { return dim_; }
  std::string label() const;

  /// N x d row-major initial positions for one replication.
  std::vector<double> sample(const RngSpec& rng, std::uint32_t replication,
                             std::size_t particles) const;

 private:
  using Variant = std::variant<Gaussian, Uniform, Empirical>;
  InitialLaw(std::size_t dim, Variant law) : dim_(dim), law_(std::move(law)) {}

  std::size_t dim_;
  Variant law_;
};

}  // namespace mvb
