#include <benchmark/benchmark.h>

#include <vector>

#include "mvbismut/bismut.hpp"
#include "mvbismut/measure.hpp"
#include "mvbismut/models.hpp"
#include "mvbismut/observables.hpp"
#include "mvbismut/rng.hpp"
#include "mvbismut/solver.hpp"

namespace {

using namespace mvb;

std::vector<double> gaussian_cloud(std::size_t n, std::size_t d, std::uint64_t seed) {
  std::vector<double> x(n * d);
  RngSpec(seed).gaussians(0, 0, 0, x);
  return x;
}

CoefficientSet cylindrical(std::size_t d) {
  CylindricalDriftSpec spec;
  spec.dim = d;
  spec.mollify_radius = 1e-3;
  spec.features.push_back(feature_by_name("sin", 0, d));
  return build_cylindrical(spec);
}

void BM_Philox(benchmark::State& state) {
  PhiloxCounter c{0, 0, 0, 0};
  const PhiloxKey k{0x12345678u, 0x9abcdef0u};
  for (auto _ : state) {
    c = philox4x32_10(c, k);
    benchmark::DoNotOptimize(c);
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_Philox);

void BM_Gaussians(benchmark::State& state) {
  std::vector<double> out(static_cast<std::size_t>(state.range(0)));
  const RngSpec rng(7);
  std::uint32_t step = 0;
  for (auto _ : state) {
    rng.gaussians(0, 0, step++, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Gaussians)->Arg(1024)->Arg(4096);

void BM_StepParticles(benchmark::State& state, CoefficientSet coeffs) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const EmpiricalMeasure mu(coeffs.dim, gaussian_cloud(n, coeffs.dim, 1));
  const auto dW = gaussian_cloud(n, coeffs.dim, 2);
  for (auto _ : state) benchmark::DoNotOptimize(step_particles(coeffs, mu, dW, 0.0, 1e-3));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK_CAPTURE(BM_StepParticles, linear, linear_mf_ou({-1.0, 0.5, 1.0}))->Arg(1024)->Arg(4096);
BENCHMARK_CAPTURE(BM_StepParticles, double_well, double_well_mf({0.5, 1.0}))->Arg(1024)->Arg(4096);
BENCHMARK_CAPTURE(BM_StepParticles, cylindrical, cylindrical(1))->Arg(1024)->Arg(4096);

void BM_MeanFieldTerm(benchmark::State& state, MeanFieldPath path) {
  const auto coeffs = double_well_mf({0.5, 1.0});
  const auto n = static_cast<std::size_t>(state.range(0));
  const EmpiricalMeasure mu(1, gaussian_cloud(n, 1, 3));
  const auto v = gaussian_cloud(n, 1, 4);
  for (auto _ : state) benchmark::DoNotOptimize(mean_field_tangent_term(coeffs, 0.0, mu, v, path));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK_CAPTURE(BM_MeanFieldTerm, separable, MeanFieldPath::Separable)->Arg(256)->Arg(1024)->Arg(4096);
BENCHMARK_CAPTURE(BM_MeanFieldTerm, generic, MeanFieldPath::Generic)->Arg(256)->Arg(1024);

void BM_MollifiedRadialGrad(benchmark::State& state) {
  const auto d = static_cast<std::size_t>(state.range(0));
  std::vector<double> x(d, 2e-3), g(d);
  for (auto _ : state) {
    mollified_radial_grad(x, 0.3, 1e-3, g);
    benchmark::DoNotOptimize(g.data());
  }
}
BENCHMARK(BM_MollifiedRadialGrad)->Arg(1)->Arg(2);

void BM_Estimator(benchmark::State& state) {
  const auto coeffs = linear_mf_ou({-1.0, 0.5, 1.0});
  const auto init = InitialLaw::gaussian({0.0}, 1.0);
  const auto phi = constant_perturbation({1.0});
  const auto f = coordinate_mean_observable(1);
  MonteCarloSettings s;
  s.grid = TimeGrid(1.0, 128);
  s.particles = static_cast<std::size_t>(state.range(0));
  s.replications = 8;
  s.rng = RngSpec(11);
  for (auto _ : state)
    benchmark::DoNotOptimize(estimate_intrinsic_derivative(coeffs, init, phi, f, s).estimate);
}
BENCHMARK(BM_Estimator)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);

void BM_Wasserstein(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const EmpiricalMeasure mu(2, gaussian_cloud(n, 2, 5)), nu(2, gaussian_cloud(n, 2, 6));
  for (auto _ : state) benchmark::DoNotOptimize(wasserstein2(mu, nu));
}
BENCHMARK(BM_Wasserstein)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
