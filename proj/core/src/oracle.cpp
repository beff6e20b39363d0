#include "mvbismut/oracle.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <ostream>

#include "mvbismut/errors.hpp"
#include "mvbismut/parallel.hpp"

namespace mvb {

namespace {

void check_budget(const CoefficientSet& coeffs, std::size_t init_dim,
                  const MonteCarloSettings& s) {
  if (init_dim != coeffs.dim) throw ArgumentError("initial law dimension does not match the model");
  if (s.particles < 2) throw ArgumentError("at least two particles required");
  if (s.replications < kMinReplications)
    throw ArgumentError("at least " + std::to_string(kMinReplications) + " replications required");
}

double terminal_mean(const Observable& f, const std::vector<double>& x, std::size_t d) {
  const std::size_t n = x.size() / d;
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double v = f.fn(ConstVec(x.data() + i * d, d));
    if (!std::isfinite(v))
      throw EvaluationError("observable is not finite at particle " + std::to_string(i), i);
    sum += v;
  }
  return sum / static_cast<double>(n);
}

std::vector<double> shifted(const std::vector<double>& x0, const std::vector<double>& eta,
                            double eps) {
  std::vector<double> out(x0.size());
  for (std::size_t k = 0; k < x0.size(); ++k) out[k] = x0[k] + eps * eta[k];
  return out;
}

std::vector<double> run_positions(const CoefficientSet& coeffs, const TimeGrid& grid,
                                  const RngSpec& rng, std::uint32_t rep, std::vector<double> x0) {
  ParticleSimulator sim(coeffs, grid, rng, rep);
  EnsembleState state;
  state.positions = std::move(x0);
  return sim.run(std::move(state)).positions;
}

template <typename Fn>
auto wrap_replication(const RngSpec& rng, std::size_t r, Fn&& fn) {
  try {
    return fn();
  } catch (const DivergenceError& e) {
    throw ReplicationError(e.what(), rng.seed(), r, true);
  } catch (const ModelEvaluationError& e) {
    throw ReplicationError(e.what(), rng.seed(), r, true);
  }
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

void validate(const FdConfig& fd) {
  if (fd.eps.empty()) throw ArgumentError("fd: eps ladder is empty");
  for (std::size_t k = 0; k < fd.eps.size(); ++k) {
    if (!(fd.eps[k] > 0.0) || !std::isfinite(fd.eps[k]))
      throw ArgumentError("fd: eps must be positive and finite");
    if (k > 0 && !(fd.eps[k] < fd.eps[k - 1]))
      throw ArgumentError("fd: eps ladder must be strictly decreasing");
  }
  if (fd.richardson && fd.eps.size() < 2)
    throw ArgumentError("fd: Richardson extrapolation needs two ladder values");
}

EstimatorResult fd_intrinsic_derivative(const CoefficientSet& coeffs, const InitialLaw& init,
                                        const Perturbation& phi, const Observable& f,
                                        const MonteCarloSettings& s, const FdConfig& fd) {
  const auto start = std::chrono::steady_clock::now();
  validate(fd);
  check_budget(coeffs, init.dim(), s);
  const std::size_t d = coeffs.dim;
  const double eps_small = fd.eps.back();
  const double eps_prev = fd.richardson ? fd.eps[fd.eps.size() - 2] : 0.0;
  std::vector<double> values(s.replications);

  parallel_for(s.replications, s.threads, [&](std::size_t r) {
    values[r] = wrap_replication(s.rng, r, [&] {
      const auto rep = static_cast<std::uint32_t>(r);
      const auto x0 = init.sample(s.rng, rep, s.particles);
      const auto eta = initial_tangents(phi, x0, d);
      const double base = terminal_mean(f, run_positions(coeffs, s.grid, s.rng, rep, x0), d);
      auto quotient = [&](double eps) {
        const auto xe = run_positions(coeffs, s.grid, s.rng, rep, shifted(x0, eta, eps));
        return (terminal_mean(f, xe, d) - base) / eps;
      };
      const double q_small = quotient(eps_small);
      if (!fd.richardson) return q_small;
      const double ratio = eps_prev / eps_small;
      return (ratio * q_small - quotient(eps_prev)) / (ratio - 1.0);
    });
  });

  EstimatorResult res;
  const auto summary = summarize_samples(values);
  res.estimate = summary.mean;
  res.std_error = summary.std_error;
  res.replications = s.replications;
  res.particles = s.particles;
  res.steps = s.grid.steps();
  res.horizon = s.grid.horizon();
  res.gate = fd.richardson ? "fd-richardson" : "fd";
  res.model = coeffs.id;
  res.phi = phi.label;
  res.f = f.label;
  res.seed = s.rng.seed();
  res.replication_values = std::move(values);
  res.elapsed_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return res;
}

double linear_mf_exact(const LinearMfParams& p, double horizon, const std::string& f_kind,
                       const std::string& phi_kind, ConstVec v) {
  if (f_kind != "mean")
    throw ArgumentError("linear_mf_exact: only the coordinate-mean functional is supported");
  if (phi_kind != "constant")
    throw ArgumentError("linear_mf_exact: only constant perturbations are supported");
  if (v.empty()) throw ArgumentError("linear_mf_exact: empty direction");
  const double mean_v = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  return std::exp((p.a + p.c) * horizon) * mean_v;
}

void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
  const auto precision = os.precision(17);
  os << "t,statistic,value,se,pass_flag\n";
  for (const auto& r : rows)
    os << r.t << ',' << r.statistic << ',' << r.value << ',' << r.se << ',' << (r.pass ? 1 : 0)
       << '\n';
  os.precision(precision);
}

std::size_t sub_steps(std::size_t steps, double t, double t_max) {
  const auto k = static_cast<std::size_t>(std::llround(static_cast<double>(steps) * t / t_max));
  return std::max<std::size_t>(1, k);
}

namespace {

std::vector<double> checked_times(const std::vector<double>& times) {
  if (times.empty()) throw ArgumentError("sweep: no time points");
  for (double t : times)
    if (!(t > 0.0) || !std::isfinite(t)) throw ArgumentError("sweep: time points must be positive");
  return times;
}

MonteCarloSettings at_time(const MonteCarloSettings& s, double t, double t_max) {
  MonteCarloSettings out = s;
  out.grid = TimeGrid(t, sub_steps(s.grid.steps(), t, t_max));
  return out;
}

}  // namespace

A1Result a1_sweep(const CoefficientSet& coeffs, const InitialLaw& init, const Observable& f,
                  const std::vector<double>& times, const MonteCarloSettings& s,
                  std::size_t probe_count) {
  const auto ts = checked_times(times);
  const double t_max = *std::max_element(ts.begin(), ts.end());
  A1Result out;
  for (double t : ts) {
    A1Entry e;
    e.t = t;
    e.gradient = gradient_norm_estimate(coeffs, init, f, at_time(s, t, t_max), probe_count);
    e.defined = e.gradient.f_std > 10.0 * e.gradient.f_std_se;
    if (e.defined) e.implied_constant = e.gradient.norm * std::sqrt(t) / e.gradient.f_std;
    out.entries.push_back(std::move(e));
  }
  const A1Entry* last = nullptr;
  double max_c = 0.0;
  for (const auto& e : out.entries) {
    if (!e.defined) continue;
    if (!last || e.t > last->t) last = &e;
    max_c = std::max(max_c, e.implied_constant);
  }
  out.pass = !last || max_c <= 1.25 * last->implied_constant;
  return out;
}

std::vector<SweepRow> A1Result::table() const {
  std::vector<SweepRow> rows;
  for (const auto& e : entries) {
    rows.push_back({e.t, "norm", e.gradient.norm, e.gradient.norm_se, pass});
    rows.push_back({e.t, "std", e.gradient.f_std, e.gradient.f_std_se, pass});
    rows.push_back({e.t, "implied_constant", e.defined ? e.implied_constant : std::nan(""), 0.0,
                    pass});
  }
  return rows;
}

namespace {

double sign_mean_above(const std::vector<double>& sorted, double s) {
  const auto lo = std::lower_bound(sorted.begin(), sorted.end(), s);
  const auto hi = std::upper_bound(lo, sorted.end(), s);
  const auto below = static_cast<double>(lo - sorted.begin());
  const auto above = static_cast<double>(sorted.end() - hi);
  return (above - below) / static_cast<double>(sorted.size());
}

}  // namespace

A2Result a2_check(const CoefficientSet& coeffs, const EmpiricalMeasure& mu,
                  const EmpiricalMeasure& nu, const std::vector<double>& times,
                  const MonteCarloSettings& s) {
  if (coeffs.dim != 1 || mu.dim() != 1 || nu.dim() != 1)
    throw ArgumentError("a2_check: only d = 1 is supported");
  check_budget(coeffs, 1, s);
  const auto ts = checked_times(times);
  const double t_max = *std::max_element(ts.begin(), ts.end());
  A2Result out;
  out.w2 = wasserstein2(mu, nu);
  if (!(out.w2 > 0.0)) throw ArgumentError("a2_check: W2(mu, nu) is zero");
  const auto law_mu = InitialLaw::empirical(mu), law_nu = InitialLaw::empirical(nu);

  for (double t : ts) {
    const auto st = at_time(s, t, t_max);
    std::vector<std::vector<double>> xm(s.replications), xn(s.replications);
    parallel_for(s.replications, s.threads, [&](std::size_t r) {
      wrap_replication(s.rng, r, [&] {
        const auto rep = static_cast<std::uint32_t>(r);
        xm[r] = run_positions(coeffs, st.grid, s.rng, rep, law_mu.sample(s.rng, rep, s.particles));
        xn[r] = run_positions(coeffs, st.grid, s.rng, rep, law_nu.sample(s.rng, rep, s.particles));
        std::sort(xm[r].begin(), xm[r].end());
        std::sort(xn[r].begin(), xn[r].end());
        return 0;
      });
    });

    std::vector<double> pooled;
    for (std::size_t r = 0; r < s.replications; ++r) {
      pooled.insert(pooled.end(), xm[r].begin(), xm[r].end());
      pooled.insert(pooled.end(), xn[r].begin(), xn[r].end());
    }
    std::sort(pooled.begin(), pooled.end());

    A2Entry e;
    e.t = t;
    double best = -1.0;
    for (std::size_t q = 0; q < kA2Thresholds; ++q) {
      const double level = (static_cast<double>(q) + 0.5) / static_cast<double>(kA2Thresholds);
      const auto idx = static_cast<std::size_t>(level * static_cast<double>(pooled.size()));
      const double threshold = pooled[std::min(idx, pooled.size() - 1)];
      std::vector<double> diffs(s.replications);
      for (std::size_t r = 0; r < s.replications; ++r)
        diffs[r] = sign_mean_above(xm[r], threshold) - sign_mean_above(xn[r], threshold);
      const auto summary = summarize_samples(diffs);
      if (std::abs(summary.mean) > best) {
        best = std::abs(summary.mean);
        e.lv = best;
        e.lv_se = summary.std_error;
        e.threshold = threshold;
      }
    }
    e.ratio = e.lv * std::sqrt(t) / out.w2;
    out.entries.push_back(e);
  }

  const auto largest = std::max_element(out.entries.begin(), out.entries.end(),
                                        [](const A2Entry& a, const A2Entry& b) { return a.t < b.t; });
  const double fitted = largest->ratio;
  std::vector<double> ratios;
  for (auto& e : out.entries) {
    e.rhs = fitted / std::sqrt(e.t) * out.w2;
    ratios.push_back(e.ratio);
  }
  out.pass = *std::max_element(ratios.begin(), ratios.end()) <= 1.5 * median(ratios);
  return out;
}

std::vector<SweepRow> A2Result::table() const {
  std::vector<SweepRow> rows;
  for (const auto& e : entries) {
    rows.push_back({e.t, "lv", e.lv, e.lv_se, pass});
    rows.push_back({e.t, "tv_lower", e.tv(), 0.5 * e.lv_se, pass});
    rows.push_back({e.t, "ratio", e.ratio, e.lv_se * std::sqrt(e.t) / w2, pass});
    rows.push_back({e.t, "rhs", e.rhs, 0.0, pass});
  }
  return rows;
}

TangentCheckResult pathwise_tangent_check(const CoefficientSet& coeffs, const InitialLaw& init,
                                          const Perturbation& phi, const MonteCarloSettings& s,
                                          const std::vector<double>& eps) {
  if (!coeffs.smooth_drift)
    throw ArgumentError("tangent check requires an exact drift gradient");
  validate(FdConfig{eps, false});
  if (init.dim() != coeffs.dim) throw ArgumentError("initial law dimension does not match the model");
  if (s.particles < 2) throw ArgumentError("at least two particles required");
  if (s.replications == 0) throw ArgumentError("at least one replication required");
  const std::size_t d = coeffs.dim, n = s.particles, block = n * d, K = s.grid.steps();
  std::vector<std::vector<double>> per_rep(s.replications);

  parallel_for(s.replications, s.threads, [&](std::size_t r) {
    per_rep[r] = wrap_replication(s.rng, r, [&] {
      const auto rep = static_cast<std::uint32_t>(r);
      const auto x0 = init.sample(s.rng, rep, n);
      const auto eta = initial_tangents(phi, x0, d);
      std::vector<double> path((K + 1) * block), tangent((K + 1) * block);
      ParticleSimulator sim(coeffs, s.grid, s.rng, rep);
      EnsembleState state;
      state.positions = x0;
      state.tangents.push_back(eta);
      const auto terminal = sim.run(std::move(state), [&](const StepView& v) {
        std::copy(v.measure.atoms().begin(), v.measure.atoms().end(),
                  path.begin() + v.step * block);
        std::copy(v.tangents[0].begin(), v.tangents[0].end(), tangent.begin() + v.step * block);
      });
      std::copy(terminal.positions.begin(), terminal.positions.end(), path.begin() + K * block);
      std::copy(terminal.tangents[0].begin(), terminal.tangents[0].end(),
                tangent.begin() + K * block);

      std::vector<double> errors;
      for (double e : eps) {
        std::vector<double> sup(n, 0.0);
        auto record = [&](std::size_t k, ConstVec xe) {
          for (std::size_t i = 0; i < n; ++i) {
            double sq = 0.0;
            for (std::size_t c = 0; c < d; ++c) {
              const std::size_t at = k * block + i * d + c;
              const double diff = (xe[i * d + c] - path[at]) / e - tangent[at];
              sq += diff * diff;
            }
            sup[i] = std::max(sup[i], sq);
          }
        };
        ParticleSimulator shifted_sim(coeffs, s.grid, s.rng, rep);
        EnsembleState shifted_state;
        shifted_state.positions = shifted(x0, eta, e);
        const auto end = shifted_sim.run(std::move(shifted_state), [&](const StepView& v) {
          record(v.step, v.measure.atoms());
        });
        record(K, end.positions);
        errors.push_back(std::accumulate(sup.begin(), sup.end(), 0.0) / static_cast<double>(n));
      }
      return errors;
    });
  });

  TangentCheckResult out;
  out.eps = eps;
  out.error.assign(eps.size(), 0.0);
  for (const auto& rep_errors : per_rep)
    for (std::size_t k = 0; k < eps.size(); ++k) out.error[k] += rep_errors[k];
  for (auto& v : out.error) v /= static_cast<double>(s.replications);
  bool ratios_ok = true;
  for (std::size_t k = 1; k < eps.size(); ++k) {
    const double ratio = out.error[k - 1] > 0.0 ? out.error[k] / out.error[k - 1] : 0.0;
    out.ratios.push_back(ratio);
    ratios_ok = ratios_ok && ratio <= kTangentRatioBound;
  }
  const double worst = *std::max_element(out.error.begin(), out.error.end());
  out.pass = coeffs.affine ? worst <= kAffineTangentTolerance : ratios_ok;
  return out;
}

std::vector<SweepRow> TangentCheckResult::table() const {
  std::vector<SweepRow> rows;
  for (std::size_t k = 0; k < eps.size(); ++k) {
    rows.push_back({eps[k], "sup_sq_error", error[k], 0.0, pass});
    if (k > 0) rows.push_back({eps[k], "ratio", ratios[k - 1], 0.0, pass});
  }
  return rows;
}

}  // namespace mvb
