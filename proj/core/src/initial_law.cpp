#include "mvbismut/initial_law.hpp"

#include <cmath>
#include <sstream>

#include "mvbismut/errors.hpp"

namespace mvb {

InitialLaw InitialLaw::gaussian(std::vector<double> mean, double std) {
  if (mean.empty()) throw ArgumentError("initial law: empty mean");
  if (!(std >= 0.0) || !std::isfinite(std))
    throw ArgumentError("initial law: standard deviation must be finite and non-negative");
  const std::size_t d = mean.size();
  return InitialLaw(d, Gaussian{std::move(mean), std});
}

InitialLaw InitialLaw::uniform(std::vector<double> lower, std::vector<double> upper) {
  if (lower.empty() || lower.size() != upper.size())
    throw ArgumentError("initial law: uniform bounds must be non-empty and of equal length");
  for (std::size_t k = 0; k < lower.size(); ++k)
    if (!(lower[k] <= upper[k])) throw ArgumentError("initial law: uniform bounds out of order");
  const std::size_t d = lower.size();
  return InitialLaw(d, Uniform{std::move(lower), std::move(upper)});
}

InitialLaw InitialLaw::dirac(std::vector<double> point) {
  return empirical(EmpiricalMeasure::dirac(std::move(point)));
}

InitialLaw InitialLaw::empirical(EmpiricalMeasure measure) {
  const std::size_t d = measure.dim();
  return InitialLaw(d, Empirical{std::move(measure)});
}

std::string InitialLaw::label() const {
  std::ostringstream os;
  if (const auto* g = std::get_if<Gaussian>(&law_)) {
    os << "gaussian(mean=" << g->mean[0] << (dim_ > 1 ? ",..." : "") << ",std=" << g->std << ")";
  } else if (std::holds_alternative<Uniform>(law_)) {
    os << "uniform";
  } else {
    os << "empirical(" << std::get<Empirical>(law_).measure.size() << " atoms)";
  }
  return os.str();
}

std::vector<double> InitialLaw::sample(const RngSpec& rng, std::uint32_t replication,
                                       std::size_t particles) const {
  if (particles == 0) throw ArgumentError("initial law: particle count must be positive");
  const std::size_t d = dim_;
  std::vector<double> x(particles * d);
  std::vector<double> draw(d);
  for (std::size_t i = 0; i < particles; ++i) {
    MutVec row(x.data() + i * d, d);
    const auto pid = static_cast<std::uint32_t>(i);
    if (const auto* g = std::get_if<Gaussian>(&law_)) {
      rng.gaussians(replication, pid, RngSpec::kInitialStep, draw);
      for (std::size_t k = 0; k < d; ++k) row[k] = g->mean[k] + g->std * draw[k];
    } else if (const auto* u = std::get_if<Uniform>(&law_)) {
      rng.uniforms(replication, pid, RngSpec::kInitialStep, draw);
      for (std::size_t k = 0; k < d; ++k)
        row[k] = u->lower[k] + (u->upper[k] - u->lower[k]) * draw[k];
    } else {
      const auto& mu = std::get<Empirical>(law_).measure;
      std::size_t idx = i % mu.size();
      if (particles % mu.size() != 0) {
        double pick = 0.0;
        rng.uniforms(replication, pid, RngSpec::kInitialStep, MutVec(&pick, 1));
        idx = std::min(mu.size() - 1, static_cast<std::size_t>(pick * static_cast<double>(mu.size())));
      }
      const auto atom = mu.atom(idx);
      std::copy(atom.begin(), atom.end(), row.begin());
    }
  }
  return x;
}

}  // namespace mvb
