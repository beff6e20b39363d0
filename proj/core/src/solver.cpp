#include "mvbismut/solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "mvbismut/errors.hpp"

namespace mvb {

TimeGrid::TimeGrid(double horizon, std::size_t steps) : horizon_(horizon), steps_(steps) {
  if (!(horizon > 0.0) || !std::isfinite(horizon))
    throw ArgumentError("time grid: horizon must be positive");
  if (steps == 0) throw ArgumentError("time grid: at least one step required");
}

namespace {

struct Workspace {
  explicit Workspace(std::size_t d)
      : drift(d), sigma(d * d), sigma_grad(d * d * d), grad(d * d), scratch(d) {}
  std::vector<double> drift, sigma, sigma_grad, grad, scratch;
};

void require_finite_row(ConstVec row, std::size_t step, std::size_t particle, const char* what) {
  for (double v : row)
    if (!std::isfinite(v)) throw DivergenceError(std::string(what) + " diverged", step, particle);
}

// next = X_k + drift dt + sigma dW for all particles.
void advance_positions(const CoefficientSet& c, const MeasureSnapshot& snap, double t, double dt,
                       ConstVec noise, MutVec next, std::size_t step, Workspace& ws) {
  const auto& mu = *snap.measure;
  const std::size_t d = c.dim;
  if (c.constant_diffusion) c.diffusion(t, mu.atom(0), ws.sigma);
  for (std::size_t i = 0; i < mu.size(); ++i) {
    const auto x = mu.atom(i);
    eval_drift(c, t, x, snap, ws.drift);
    if (!c.constant_diffusion) c.diffusion(t, x, ws.sigma);
    const double* dw = noise.data() + i * d;
    for (std::size_t r = 0; r < d; ++r) {
      double diffusion = 0.0;
      for (std::size_t k = 0; k < d; ++k) diffusion += ws.sigma[r * d + k] * dw[k];
      next[i * d + r] = x[r] + ws.drift[r] * dt + diffusion;
    }
    require_finite_row(next.subspan(i * d, d), step + 1, i, "particle");
  }
}

bool has_kernel(const CoefficientSet& c) {
  return c.measure_dependent && (c.lions_kernel || c.lions_kernel_separable);
}

void compute_mean_field(const CoefficientSet& c, const MeasureSnapshot& snap, double t,
                        std::span<const std::vector<double>> tangents,
                        std::span<std::vector<double>> out, MeanFieldPath path) {
  const auto& mu = *snap.measure;
  const std::size_t n = mu.size(), d = c.dim, dirs = tangents.size();
  for (auto& o : out) std::fill(o.begin(), o.end(), 0.0);
  if (!has_kernel(c) || dirs == 0) return;

  bool separable = c.lions_kernel_separable.has_value();
  if (path == MeanFieldPath::Separable && !separable)
    throw ArgumentError("model '" + c.id + "' has no separable Lions kernel");
  if (path == MeanFieldPath::Generic) {
    if (!c.lions_kernel) throw ArgumentError("model '" + c.id + "' has no generic Lions kernel");
    separable = false;
  }
  const double inv_n = 1.0 / static_cast<double>(n);

  if (separable) {
    const auto& sep = *c.lions_kernel_separable;
    const std::size_t m = sep.channels;
    // projections[p][ch] = (1/N) sum_j <grad f_ch(X^j), V_p^j>
    std::vector<double> projections(dirs * m, 0.0), buf(m * d);
    for (std::size_t j = 0; j < n; ++j) {
      sep.feature_grad(t, mu.atom(j), buf);
      for (std::size_t p = 0; p < dirs; ++p) {
        const double* v = tangents[p].data() + j * d;
        for (std::size_t ch = 0; ch < m; ++ch) {
          double dot = 0.0;
          for (std::size_t k = 0; k < d; ++k) dot += buf[ch * d + k] * v[k];
          projections[p * m + ch] += dot;
        }
      }
    }
    for (auto& s : projections) s *= inv_n;
    for (std::size_t i = 0; i < n; ++i) {
      sep.coef(t, mu.atom(i), snap, buf);
      for (std::size_t p = 0; p < dirs; ++p) {
        double* o = out[p].data() + i * d;
        for (std::size_t ch = 0; ch < m; ++ch)
          for (std::size_t r = 0; r < d; ++r) o[r] += buf[ch * d + r] * projections[p * m + ch];
      }
    }
    return;
  }

  std::vector<double> kernel(d * d);
  for (std::size_t i = 0; i < n; ++i) {
    const auto x = mu.atom(i);
    for (std::size_t j = 0; j < n; ++j) {
      c.lions_kernel(t, x, snap, mu.atom(j), kernel);
      for (std::size_t p = 0; p < dirs; ++p) {
        const double* v = tangents[p].data() + j * d;
        double* o = out[p].data() + i * d;
        for (std::size_t r = 0; r < d; ++r) {
          double acc = 0.0;
          for (std::size_t k = 0; k < d; ++k) acc += kernel[r * d + k] * v[k];
          o[r] += acc;
        }
      }
    }
    for (std::size_t p = 0; p < dirs; ++p)
      for (std::size_t r = 0; r < d; ++r) out[p][i * d + r] *= inv_n;
  }
}

void advance_tangent_set(const CoefficientSet& c, const MeasureSnapshot& snap, double t,
                         double dt, ConstVec noise, std::span<const std::vector<double>> tangents,
                         std::span<const std::vector<double>> mean_field,
                         std::span<std::vector<double>> next, std::size_t step, Workspace& ws) {
  const auto& mu = *snap.measure;
  const std::size_t d = c.dim, dirs = tangents.size();
  if (dirs == 0) return;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    const auto x = mu.atom(i);
    if (c.drift_grad_x) {
      c.drift_grad_x(t, x, snap, ws.grad);
    } else {
      std::fill(ws.grad.begin(), ws.grad.end(), 0.0);
    }
    const bool noisy_grad = !c.constant_diffusion;
    if (noisy_grad) c.diffusion_grad(t, x, ws.sigma_grad);
    const double* dw = noise.data() + i * d;
    for (std::size_t p = 0; p < dirs; ++p) {
      const double* v = tangents[p].data() + i * d;
      const double* mf = mean_field[p].data() + i * d;
      double* o = next[p].data() + i * d;
      for (std::size_t r = 0; r < d; ++r) {
        double drift = mf[r];
        for (std::size_t k = 0; k < d; ++k) drift += ws.grad[r * d + k] * v[k];
        double diffusion = 0.0;
        if (noisy_grad) {
          // (grad sigma . v)_{rj} = sum_k d_k sigma_rj v_k
          for (std::size_t j = 0; j < d; ++j) {
            double entry = 0.0;
            for (std::size_t k = 0; k < d; ++k) entry += ws.sigma_grad[(k * d + r) * d + j] * v[k];
            diffusion += entry * dw[j];
          }
        }
        o[r] = v[r] + drift * dt + diffusion;
      }
      require_finite_row(ConstVec(o, d), step + 1, i, "tangent");
    }
  }
}

void check_shape(const CoefficientSet& c, const EmpiricalMeasure& mu, ConstVec block,
                 const char* what) {
  if (mu.dim() != c.dim) throw ArgumentError("solver: measure dimension does not match the model");
  if (block.size() != mu.size() * c.dim)
    throw ArgumentError(std::string("solver: ") + what + " must be N x d");
}

}  // namespace

std::vector<double> step_particles(const CoefficientSet& coeffs, const EmpiricalMeasure& mu_k,
                                   ConstVec dW, double t, double dt) {
  check_shape(coeffs, mu_k, dW, "noise");
  const auto snap = coeffs.snapshot(t, mu_k);
  Workspace ws(coeffs.dim);
  std::vector<double> next(dW.size());
  advance_positions(coeffs, snap, t, dt, dW, next, 0, ws);
  return next;
}

std::vector<double> mean_field_tangent_term(const CoefficientSet& coeffs, double t,
                                            const EmpiricalMeasure& mu_k, ConstVec tangents,
                                            MeanFieldPath path) {
  check_shape(coeffs, mu_k, tangents, "tangents");
  const auto snap = coeffs.snapshot(t, mu_k);
  std::vector<std::vector<double>> in{std::vector<double>(tangents.begin(), tangents.end())};
  std::vector<std::vector<double>> out{std::vector<double>(tangents.size())};
  compute_mean_field(coeffs, snap, t, in, out, path);
  return std::move(out.front());
}

std::vector<double> step_tangents(const CoefficientSet& coeffs, double t,
                                  const EmpiricalMeasure& mu_k, ConstVec tangents, ConstVec dW,
                                  double dt) {
  check_shape(coeffs, mu_k, tangents, "tangents");
  check_shape(coeffs, mu_k, dW, "noise");
  const auto snap = coeffs.snapshot(t, mu_k);
  std::vector<std::vector<double>> in{std::vector<double>(tangents.begin(), tangents.end())};
  std::vector<std::vector<double>> mf{std::vector<double>(tangents.size())};
  std::vector<std::vector<double>> out{std::vector<double>(tangents.size())};
  compute_mean_field(coeffs, snap, t, in, mf, MeanFieldPath::Automatic);
  Workspace ws(coeffs.dim);
  advance_tangent_set(coeffs, snap, t, dt, dW, in, mf, out, 0, ws);
  return std::move(out.front());
}

ParticleSimulator::ParticleSimulator(const CoefficientSet& coeffs, TimeGrid grid, RngSpec rng,
                                     std::uint32_t replication)
    : coeffs_(coeffs), grid_(grid), rng_(rng), replication_(replication) {}

EnsembleState ParticleSimulator::run(EnsembleState state, const StepObserver& observer) const {
  const std::size_t d = coeffs_.dim;
  if (state.positions.empty() || state.positions.size() % d != 0)
    throw ArgumentError("solver: initial positions must be a non-empty N x d block");
  const std::size_t n = state.positions.size() / d;
  for (const auto& v : state.tangents)
    if (v.size() != n * d) throw ArgumentError("solver: tangent block must be N x d");
  if (n > 0xFFFFFFFFull) throw ArgumentError("solver: too many particles");

  const std::size_t dirs = state.tangents.size();
  const double dt = grid_.dt(), sqrt_dt = std::sqrt(dt);
  Workspace ws(d);
  std::vector<double> noise(n * d), next(n * d);
  std::vector<std::vector<double>> mean_field(dirs, std::vector<double>(n * d));
  std::vector<std::vector<double>> next_tangents(dirs, std::vector<double>(n * d));

  for (std::size_t i = 0; i < n; ++i)
    require_finite_row(ConstVec(state.positions.data() + i * d, d), 0, i, "initial particle");

  for (std::size_t k = 0; k < grid_.steps(); ++k) {
    const double t = grid_.node(k);
    for (std::size_t i = 0; i < n; ++i) {
      MutVec row(noise.data() + i * d, d);
      rng_.gaussians(replication_, static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(k),
                     row);
      for (auto& z : row) z *= sqrt_dt;
    }
    EmpiricalMeasure mu(d, std::move(state.positions));
    const MeasureSnapshot snap = coeffs_.snapshot(t, mu);
    if (dirs > 0) compute_mean_field(coeffs_, snap, t, state.tangents, mean_field,
                                     MeanFieldPath::Automatic);
    if (observer) observer(StepView{k, t, dt, mu, snap, noise, state.tangents, mean_field});

    advance_positions(coeffs_, snap, t, dt, noise, next, k, ws);
    advance_tangent_set(coeffs_, snap, t, dt, noise, state.tangents, mean_field, next_tangents, k,
                        ws);
    state.positions = std::move(mu).release();
    state.positions.swap(next);
    for (std::size_t p = 0; p < dirs; ++p) state.tangents[p].swap(next_tangents[p]);
  }
  return state;
}

std::vector<double> initial_tangents(const Perturbation& phi, ConstVec x0, std::size_t dim) {
  std::vector<double> v(x0.size());
  for (std::size_t i = 0; i < x0.size() / dim; ++i)
    phi.phi(x0.subspan(i * dim, dim), MutVec(v.data() + i * dim, dim));
  for (std::size_t k = 0; k < v.size(); ++k)
    if (!std::isfinite(v[k]))
      throw EvaluationError("perturbation is not finite at atom " + std::to_string(k / dim),
                            k / dim);
  return v;
}

TrajectoryBundle simulate(const CoefficientSet& coeffs, const InitialLaw& init,
                          const Perturbation& phi, const TimeGrid& grid, std::size_t particles,
                          const RngSpec& rng, std::uint32_t replication) {
  if (particles < 2) throw ArgumentError("simulate: at least two particles required");
  if (init.dim() != coeffs.dim)
    throw ArgumentError("simulate: initial law dimension does not match the model");
  const std::size_t d = coeffs.dim, block = particles * d, K = grid.steps();
  TrajectoryBundle traj;
  traj.grid = grid;
  traj.particles = particles;
  traj.dim = d;
  traj.seed = rng.seed();
  traj.replication = replication;
  traj.model_id = coeffs.id;
  traj.positions.resize((K + 1) * block);
  traj.tangents.resize((K + 1) * block);
  traj.noise.resize(K * block);

  EnsembleState state;
  state.positions = init.sample(rng, replication, particles);
  state.tangents.push_back(initial_tangents(phi, state.positions, d));

  ParticleSimulator sim(coeffs, grid, rng, replication);
  auto final_state = sim.run(std::move(state), [&](const StepView& view) {
    const std::size_t k = view.step;
    std::copy(view.measure.atoms().begin(), view.measure.atoms().end(),
              traj.positions.begin() + static_cast<std::ptrdiff_t>(k * block));
    std::copy(view.tangents[0].begin(), view.tangents[0].end(),
              traj.tangents.begin() + static_cast<std::ptrdiff_t>(k * block));
    std::copy(view.noise.begin(), view.noise.end(),
              traj.noise.begin() + static_cast<std::ptrdiff_t>(k * block));
  });
  std::copy(final_state.positions.begin(), final_state.positions.end(),
            traj.positions.begin() + static_cast<std::ptrdiff_t>(K * block));
  std::copy(final_state.tangents[0].begin(), final_state.tangents[0].end(),
            traj.tangents.begin() + static_cast<std::ptrdiff_t>(K * block));
  return traj;
}

double tangent_sup_mean_square(const TrajectoryBundle& traj) {
  const std::size_t n = traj.particles, d = traj.dim;
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double sup = 0.0;
    for (std::size_t k = 0; k <= traj.grid.steps(); ++k) {
      const auto v = traj.tangent(k).subspan(i * d, d);
      double sq = 0.0;
      for (double c : v) sq += c * c;
      sup = std::max(sup, sq);
    }
    total += sup;
  }
  return total / static_cast<double>(n);
}

void dump_trajectories(const TrajectoryBundle& traj, const std::string& directory) {
  namespace fs = std::filesystem;
  fs::create_directories(directory);
  const std::size_t d = traj.dim;
  for (std::size_t k = 0; k <= traj.grid.steps(); ++k) {
    char name[32];
    std::snprintf(name, sizeof(name), "step_%06zu.csv", k);
    std::ofstream os(fs::path(directory) / name);
    if (!os) throw ArgumentError("cannot write trajectory dump into " + directory);
    os << "particle";
    for (std::size_t c = 0; c < d; ++c) os << ",x" << c;
    for (std::size_t c = 0; c < d; ++c) os << ",v" << c;
    os << '\n';
    os.precision(17);
    const auto x = traj.position(k), v = traj.tangent(k);
    for (std::size_t i = 0; i < traj.particles; ++i) {
      os << i;
      for (std::size_t c = 0; c < d; ++c) os << ',' << x[i * d + c];
      for (std::size_t c = 0; c < d; ++c) os << ',' << v[i * d + c];
      os << '\n';
    }
  }
}

}  // namespace mvb
