#include "mvbismut/bismut.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "mvbismut/errors.hpp"
#include "mvbismut/parallel.hpp"

namespace mvb {

std::string to_string(GateKind kind) {
  return kind == GateKind::Linear ? "linear" : "smoothstep";
}

GateKind parse_gate(const std::string& name) {
  if (name == "linear") return GateKind::Linear;
  if (name == "smoothstep") return GateKind::Smoothstep;
  throw ArgumentError("unknown gate '" + name + "' (expected linear or smoothstep)");
}

Gate::Gate(GateKind kind, double horizon) : kind_(kind), horizon_(horizon) {
  if (!(horizon > 0.0)) throw ArgumentError("gate: horizon must be positive");
}

double Gate::value(double t) const noexcept {
  const double s = t / horizon_;
  return kind_ == GateKind::Linear ? s : s * s * (3.0 - 2.0 * s);
}

double Gate::derivative(double t) const noexcept {
  const double s = t / horizon_;
  return kind_ == GateKind::Linear ? 1.0 / horizon_ : 6.0 * s * (1.0 - s) / horizon_;
}

namespace {

void invert_diffusion(const CoefficientSet& c, double t, ConstVec x, MutVec inv) {
  c.diffusion_inverse(t, x, inv);
  for (double v : inv)
    if (!std::isfinite(v))
      throw SingularDiffusionError("diffusion inverse is not finite at t=" + std::to_string(t));
}

// zeta = inv * (g' v + g mf)
inline void weight_into(std::size_t d, const double* inv, double g, double dg, const double* v,
                        const double* mf, double* bracket, double* zeta) {
  for (std::size_t k = 0; k < d; ++k) bracket[k] = dg * v[k] + g * mf[k];
  for (std::size_t r = 0; r < d; ++r) {
    double acc = 0.0;
    for (std::size_t k = 0; k < d; ++k) acc += inv[r * d + k] * bracket[k];
    zeta[r] = acc;
  }
}

// Adds <zeta^i_p, dW^i> to integral[p][i] for every particle and direction.
class WeightIntegrator {
 public:
  WeightIntegrator(const CoefficientSet& c, const Gate& gate)
      : c_(c), gate_(gate), inv_(c.dim * c.dim), bracket_(c.dim), zeta_(c.dim) {}

  void step(const StepView& view, std::vector<std::vector<double>>& integral,
            std::vector<std::vector<double>>* zeta_sq) {
    const std::size_t d = c_.dim, n = view.measure.size();
    const double g = gate_.value(view.t), dg = gate_.derivative(view.t);
    if (c_.constant_diffusion) invert_diffusion(c_, view.t, view.measure.atom(0), inv_);
    for (std::size_t i = 0; i < n; ++i) {
      if (!c_.constant_diffusion) invert_diffusion(c_, view.t, view.measure.atom(i), inv_);
      const double* dw = view.noise.data() + i * d;
      for (std::size_t p = 0; p < view.tangents.size(); ++p) {
        weight_into(d, inv_.data(), g, dg, view.tangents[p].data() + i * d,
                    view.mean_field[p].data() + i * d, bracket_.data(), zeta_.data());
        double dot = 0.0, sq = 0.0;
        for (std::size_t k = 0; k < d; ++k) {
          dot += zeta_[k] * dw[k];
          sq += zeta_[k] * zeta_[k];
        }
        integral[p][i] += dot;
        if (zeta_sq) (*zeta_sq)[p][i] += sq;
      }
    }
  }

 private:
  const CoefficientSet& c_;
  Gate gate_;
  std::vector<double> inv_, bracket_, zeta_;
};

void check_inputs(const CoefficientSet& coeffs, const InitialLaw& init,
                  const MonteCarloSettings& s) {
  if (init.dim() != coeffs.dim)
    throw ArgumentError("initial law dimension does not match the model");
  if (s.particles < 2) throw ArgumentError("at least two particles required");
  if (s.replications < kMinReplications)
    throw ArgumentError("at least " + std::to_string(kMinReplications) + " replications required");
}

template <typename Fn>
auto guarded_replication(const RngSpec& rng, std::size_t r, Fn&& fn) {
  try {
    return fn();
  } catch (const DivergenceError& e) {
    throw ReplicationError(e.what(), rng.seed(), r, true);
  } catch (const ModelEvaluationError& e) {
    throw ReplicationError(e.what(), rng.seed(), r, true);
  } catch (const SingularDiffusionError& e) {
    throw ReplicationError(e.what(), rng.seed(), r, false);
  }
}

}  // namespace

std::vector<double> weight_at(const CoefficientSet& coeffs, const Gate& gate, double t,
                              ConstVec x, ConstVec tangent, ConstVec mean_field) {
  const std::size_t d = coeffs.dim;
  if (x.size() != d || tangent.size() != d || mean_field.size() != d)
    throw ArgumentError("weight_at: vectors must have the model dimension");
  std::vector<double> inv(d * d), bracket(d), zeta(d);
  invert_diffusion(coeffs, t, x, inv);
  weight_into(d, inv.data(), gate.value(t), gate.derivative(t), tangent.data(),
              mean_field.data(), bracket.data(), zeta.data());
  return zeta;
}

WeightAccumulator accumulate(const TrajectoryBundle& traj, const CoefficientSet& coeffs,
                             const Gate& gate) {
  if (traj.dim != coeffs.dim) throw ArgumentError("accumulate: dimension mismatch");
  if (std::abs(gate.horizon() - traj.grid.horizon()) > 1e-12 * traj.grid.horizon())
    throw ArgumentError("accumulate: gate horizon differs from the trajectory horizon");
  const std::size_t n = traj.particles, d = traj.dim, K = traj.grid.steps();
  std::vector<std::vector<double>> integral(1, std::vector<double>(n, 0.0));
  std::vector<std::vector<double>> zeta_sq(1, std::vector<double>(n, 0.0));
  WeightIntegrator integrator(coeffs, gate);
  for (std::size_t k = 0; k < K; ++k) {
    const double t = traj.grid.node(k);
    const auto pos = traj.position(k);
    EmpiricalMeasure mu(d, std::vector<double>(pos.begin(), pos.end()));
    const auto snap = coeffs.snapshot(t, mu);
    std::vector<std::vector<double>> tangents{
        std::vector<double>(traj.tangent(k).begin(), traj.tangent(k).end())};
    std::vector<std::vector<double>> mf{
        mean_field_tangent_term(coeffs, t, mu, tangents.front())};
    integrator.step(StepView{k, t, traj.grid.dt(), mu, snap, traj.increment(k), tangents, mf},
                    integral, &zeta_sq);
  }
  WeightAccumulator acc;
  acc.integral = std::move(integral.front());
  acc.zeta_mean_square = std::move(zeta_sq.front());
  for (auto& z : acc.zeta_mean_square) z /= static_cast<double>(K);
  return acc;
}

SampleSummary summarize_samples(std::span<const double> values) {
  SampleSummary s;
  if (values.empty()) return s;
  const double n = static_cast<double>(values.size());
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / n;
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.std_error = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
  }
  return s;
}

std::vector<ReplicationSummary> run_bismut_replications(const CoefficientSet& coeffs,
                                                        const InitialLaw& init,
                                                        const std::vector<Perturbation>& directions,
                                                        const Observable& f,
                                                        const MonteCarloSettings& s) {
  check_inputs(coeffs, init, s);
  const Gate gate(s.gate, s.grid.horizon());
  const std::size_t d = coeffs.dim, n = s.particles, dirs = directions.size();
  std::vector<ReplicationSummary> out(s.replications);

  parallel_for(s.replications, s.threads, [&](std::size_t r) {
    out[r] = guarded_replication(s.rng, r, [&] {
      const auto rep = static_cast<std::uint32_t>(r);
      EnsembleState state;
      state.positions = init.sample(s.rng, rep, n);
      for (const auto& phi : directions)
        state.tangents.push_back(initial_tangents(phi, state.positions, d));
      std::vector<std::vector<double>> integral(dirs, std::vector<double>(n, 0.0));
      WeightIntegrator integrator(coeffs, gate);
      ParticleSimulator sim(coeffs, s.grid, s.rng, rep);
      const auto terminal = sim.run(std::move(state), [&](const StepView& view) {
        integrator.step(view, integral, nullptr);
      });
      ReplicationSummary summary;
      summary.weighted.assign(dirs, 0.0);
      summary.weight_mean.assign(dirs, 0.0);
      for (std::size_t i = 0; i < n; ++i) {
        const double fx = f.fn(ConstVec(terminal.positions.data() + i * d, d));
        if (!std::isfinite(fx))
          throw EvaluationError("observable is not finite at particle " + std::to_string(i), i);
        summary.f_mean += fx;
        summary.f_sq_mean += fx * fx;
        for (std::size_t p = 0; p < dirs; ++p) {
          summary.weighted[p] += fx * integral[p][i];
          summary.weight_mean[p] += integral[p][i];
        }
      }
      const double inv_n = 1.0 / static_cast<double>(n);
      summary.f_mean *= inv_n;
      summary.f_sq_mean *= inv_n;
      for (std::size_t p = 0; p < dirs; ++p) {
        summary.weighted[p] *= inv_n;
        summary.weight_mean[p] *= inv_n;
      }
      return summary;
    });
  });
  return out;
}

namespace {

EstimatorResult make_result(const std::vector<double>& values, const CoefficientSet& coeffs,
                            const std::string& phi, const Observable& f,
                            const MonteCarloSettings& s, const std::string& gate) {
  EstimatorResult res;
  const auto summary = summarize_samples(values);
  res.estimate = summary.mean;
  res.std_error = summary.std_error;
  res.replications = s.replications;
  res.particles = s.particles;
  res.steps = s.grid.steps();
  res.horizon = s.grid.horizon();
  res.gate = gate;
  res.model = coeffs.id;
  res.phi = phi;
  res.f = f.label;
  res.seed = s.rng.seed();
  res.replication_values = values;
  return res;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

EstimatorResult estimate_intrinsic_derivative(const CoefficientSet& coeffs,
                                              const InitialLaw& init, const Perturbation& phi,
                                              const Observable& f, const MonteCarloSettings& s) {
  const auto start = std::chrono::steady_clock::now();
  const auto reps = run_bismut_replications(coeffs, init, {phi}, f, s);
  std::vector<double> values;
  values.reserve(reps.size());
  for (const auto& r : reps) values.push_back(r.weighted.front());
  auto res = make_result(values, coeffs, phi.label, f, s, to_string(s.gate));
  res.elapsed_s = seconds_since(start);
  return res;
}

SampleSummary weight_mean_check(const CoefficientSet& coeffs, const InitialLaw& init,
                                const Perturbation& phi, const MonteCarloSettings& s) {
  const auto reps = run_bismut_replications(coeffs, init, {phi}, constant_observable(0.0), s);
  std::vector<double> values;
  for (const auto& r : reps) values.push_back(r.weight_mean.front());
  return summarize_samples(values);
}

std::vector<Perturbation> unit_probes(const InitialLaw& init, std::size_t probe_count,
                                      const MonteCarloSettings& s) {
  const std::size_t d = init.dim();
  if (probe_count < d) throw ArgumentError("probe_count must be at least the dimension");
  std::vector<Perturbation> probes;
  for (std::size_t k = 0; k < d; ++k) {
    std::vector<double> e(d, 0.0);
    e[k] = 1.0;
    probes.push_back(constant_perturbation(e, "e" + std::to_string(k)));
  }
  if (probe_count == d) return probes;

  // Pooled initial atoms of every replication stand in for mu when normalising.
  std::vector<double> pooled;
  for (std::size_t r = 0; r < s.replications; ++r) {
    const auto x = init.sample(s.rng, static_cast<std::uint32_t>(r), s.particles);
    pooled.insert(pooled.end(), x.begin(), x.end());
  }
  const EmpiricalMeasure mu(d, std::move(pooled));
  const RngSpec probe_rng = s.rng.with_stream(0x7FFF);
  for (std::size_t p = d; p < probe_count; ++p) {
    double draw[2];
    probe_rng.uniforms(0, static_cast<std::uint32_t>(p), 0, MutVec(draw, 2));
    const double frequency = 0.5 + 1.5 * draw[0];
    const double phase = 2.0 * std::numbers::pi * draw[1];
    const std::size_t axis = p % d;
    Perturbation raw{[=](ConstVec x, MutVec out) {
                       std::fill(out.begin(), out.end(), 0.0);
                       out[axis] = std::sin(frequency * x[axis] + phase);
                     },
                     ""};
    const double norm = l2_norm(raw, mu);
    if (!(norm > 0.0)) throw ArgumentError("probe field vanishes on the initial law");
    std::ostringstream label;
    label << "probe" << p << "(sin " << frequency << "x" << axis << "+" << phase << ")";
    probes.push_back({[raw, norm](ConstVec x, MutVec out) {
                        raw.phi(x, out);
                        for (auto& v : out) v /= norm;
                      },
                      label.str()});
  }
  return probes;
}

GradientNormEstimate gradient_norm_estimate(const CoefficientSet& coeffs, const InitialLaw& init,
                                            const Observable& f, const MonteCarloSettings& s,
                                            std::size_t probe_count) {
  const auto start = std::chrono::steady_clock::now();
  const auto probes = unit_probes(init, probe_count, s);
  const auto reps = run_bismut_replications(coeffs, init, probes, f, s);
  GradientNormEstimate out;
  for (std::size_t p = 0; p < probes.size(); ++p) {
    std::vector<double> values;
    for (const auto& r : reps) values.push_back(r.weighted[p]);
    out.probes.push_back(make_result(values, coeffs, probes[p].label, f, s, to_string(s.gate)));
    if (std::abs(out.probes.back().estimate) > out.norm || p == 0) {
      out.norm = std::abs(out.probes.back().estimate);
      out.norm_se = out.probes.back().std_error;
      out.argmax = p;
    }
  }
  double f_mean = 0.0, f_sq = 0.0;
  std::vector<double> per_rep_std;
  for (const auto& r : reps) {
    f_mean += r.f_mean;
    f_sq += r.f_sq_mean;
    per_rep_std.push_back(std::sqrt(std::max(0.0, r.f_sq_mean - r.f_mean * r.f_mean)));
  }
  f_mean /= static_cast<double>(reps.size());
  f_sq /= static_cast<double>(reps.size());
  out.f_std = std::sqrt(std::max(0.0, f_sq - f_mean * f_mean));
  out.f_std_se = summarize_samples(per_rep_std).std_error;
  for (auto& p : out.probes) p.elapsed_s = seconds_since(start);
  return out;
}

nlohmann::json to_json(const EstimatorResult& r) {
  return {{"estimate", r.estimate}, {"std_error", r.std_error}, {"N", r.particles},
          {"M", r.replications},    {"K", r.steps},             {"T", r.horizon},
          {"gate", r.gate},         {"model", r.model},         {"phi", r.phi},
          {"f", r.f},               {"seed", r.seed},           {"elapsed_s", r.elapsed_s}};
}

std::string results_csv_header() { return "estimate,std_error,N,M,K,T,gate,model,phi,f,seed"; }

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string quoted = "\"";
  for (char ch : s) {
    if (ch == '"') quoted += '"';
    quoted += ch;
  }
  return quoted + "\"";
}

}  // namespace

std::string results_csv_row(const EstimatorResult& r) {
  std::ostringstream os;
  os.precision(17);
  os << r.estimate << ',' << r.std_error << ',' << r.particles << ',' << r.replications << ','
     << r.steps << ',' << r.horizon << ',' << csv_field(r.gate) << ',' << csv_field(r.model)
     << ',' << csv_field(r.phi) << ',' << csv_field(r.f) << ',' << r.seed;
  return os.str();
}

void append_results_csv(const std::string& path, const EstimatorResult& r) {
  const bool fresh = !std::filesystem::exists(path) || std::filesystem::file_size(path) == 0;
  std::ofstream os(path, std::ios::app);
  if (!os) throw ArgumentError("cannot open results log " + path);
  if (fresh) os << results_csv_header() << '\n';
  os << results_csv_row(r) << '\n';
}

}  // namespace mvb
