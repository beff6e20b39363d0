#include "mvbismut_cli/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "mvbismut/errors.hpp"
#include "mvbismut/models.hpp"
#include "mvbismut/oracle.hpp"
#include "mvbismut/parallel.hpp"

#ifndef MVBISMUT_VERSION
#define MVBISMUT_VERSION "0.0.0"
#endif

namespace mvb::cli {

using nlohmann::json;
namespace fs = std::filesystem;

std::string tool_version() { return MVBISMUT_VERSION; }

ExperimentConfig apply_overrides(ExperimentConfig config, const RunOptions& options) {
  if (options.out_dir) config.output_dir = *options.out_dir;
  if (options.seed) config.seed = *options.seed;
  return config;
}

namespace {

struct Curve {
  std::string name;
  std::vector<std::pair<double, double>> points;
};

struct TaskOutput {
  json result;
  bool pass = true;
  std::string csv;  ///< full results.csv contents
  std::vector<Curve> curves;
  bool log_axes = false;
  std::string x_label = "t";
};

void write_file(const fs::path& path, const std::string& contents) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw Error("cannot write " + path.string());
  os << contents;
}

std::string dat_contents(const Curve& c) {
  std::ostringstream os;
  os << std::setprecision(17);
  os << "# " << c.name << '\n';
  for (const auto& [x, y] : c.points) os << x << ' ' << y << '\n';
  return os.str();
}

std::string plot_script(const TaskOutput& out) {
  std::ostringstream os;
  os << "set terminal pngcairo size 900,600\n"
     << "set output 'plot.png'\n"
     << "set xlabel '" << out.x_label << "'\n"
     << "set key outside right\n";
  if (out.log_axes) os << "set logscale xy\n";
  os << "plot ";
  for (std::size_t k = 0; k < out.curves.size(); ++k)
    os << (k ? ", \\\n     " : "") << "'" << out.curves[k].name
       << ".dat' using 1:2 with linespoints title '" << out.curves[k].name << "'";
  os << '\n';
  return os.str();
}

std::string estimator_csv(std::initializer_list<const EstimatorResult*> results) {
  std::string csv = results_csv_header() + "\n";
  for (const auto* r : results) csv += results_csv_row(*r) + "\n";
  return csv;
}

Curve replication_curve(const std::string& name, const EstimatorResult& r) {
  Curve c{name, {}};
  for (std::size_t k = 0; k < r.replication_values.size(); ++k)
    c.points.emplace_back(static_cast<double>(k), r.replication_values[k]);
  return c;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::ostringstream os;
  write_sweep_csv(os, rows);
  return os.str();
}

/// Closed-form value when the configuration admits one.
std::optional<double> analytic_value(const ExperimentConfig& c) {
  if (c.model_id != "linear_mf_ou" || c.f.kind != "mean" || c.phi.kind != "constant")
    return std::nullopt;
  const LinearMfParams p{c.model_params["a"].get<double>(), c.model_params["c"].get<double>(),
                         c.model_params["sigma"].get<double>()};
  return linear_mf_exact(p, c.horizon, "mean", "constant", c.phi.value);
}

TaskOutput run_estimate(const ExperimentConfig& c, const CoefficientSet& model,
                        const InitialLaw& init, const Perturbation& phi, const Observable& f,
                        const MonteCarloSettings& s) {
  TaskOutput out;
  const auto r = estimate_intrinsic_derivative(model, init, phi, f, s);
  out.result = to_json(r);
  if (c.phi.kind == "zero") {
    out.pass = r.estimate == 0.0 && r.std_error == 0.0;
    out.result["oracle"] = "zero direction";
  } else if (const auto exact = analytic_value(c)) {
    const double tol = std::max(3.0 * r.std_error, 0.02 * std::abs(*exact));
    out.result["oracle"] = "closed form";
    out.result["exact"] = *exact;
    out.result["abs_error"] = std::abs(r.estimate - *exact);
    out.result["tolerance"] = tol;
    out.pass = std::abs(r.estimate - *exact) <= tol;
  } else {
    out.result["oracle"] = "none";
  }
  out.result["pass"] = out.pass;
  out.csv = estimator_csv({&r});
  out.curves.push_back(replication_curve("replications", r));
  out.x_label = "replication";
  return out;
}

TaskOutput run_compare(const CoefficientSet& model, const InitialLaw& init,
                       const Perturbation& phi, const Observable& f, const MonteCarloSettings& s,
                       const FdConfig& fd) {
  TaskOutput out;
  MonteCarloSettings sb = s, sf = s;
  sb.rng = s.rng.with_stream(0);
  sf.rng = s.rng.with_stream(1);
  const auto b = estimate_intrinsic_derivative(model, init, phi, f, sb);
  const auto d = fd_intrinsic_derivative(model, init, phi, f, sf, fd);
  const double diff = std::abs(b.estimate - d.estimate);
  const double bound = 3.0 * (b.std_error + d.std_error);
  out.pass = diff <= bound;
  out.result = {{"bismut", to_json(b)}, {"fd", to_json(d)},   {"abs_diff", diff},
                {"bound", bound},       {"pass", out.pass}};
  out.csv = estimator_csv({&b, &d});
  out.curves.push_back(replication_curve("bismut_replications", b));
  out.curves.push_back(replication_curve("fd_replications", d));
  out.x_label = "replication";
  return out;
}

TaskOutput run_a1(const ExperimentConfig& c, const CoefficientSet& model, const InitialLaw& init,
                  const Observable& f, const MonteCarloSettings& s) {
  TaskOutput out;
  const auto a1 = a1_sweep(model, init, f, c.sweep.times, s, c.sweep.probes);
  out.pass = a1.pass;
  Curve norm{"norm", {}}, sd{"std", {}}, constant{"implied_constant", {}};
  json entries = json::array();
  for (const auto& e : a1.entries) {
    entries.push_back({{"t", e.t},
                       {"norm", e.gradient.norm},
                       {"norm_se", e.gradient.norm_se},
                       {"std", e.gradient.f_std},
                       {"std_se", e.gradient.f_std_se},
                       {"implied_constant", e.defined ? json(e.implied_constant) : json()},
                       {"defined", e.defined},
                       {"argmax_probe", e.gradient.probes[e.gradient.argmax].phi}});
    norm.points.emplace_back(e.t, e.gradient.norm);
    sd.points.emplace_back(e.t, e.gradient.f_std);
    if (e.defined) constant.points.emplace_back(e.t, e.implied_constant);
  }
  out.result = {{"entries", entries}, {"pass", out.pass}};
  out.csv = sweep_csv(a1.table());
  out.curves = {norm, sd, constant};
  return out;
}

TaskOutput run_a2(const ExperimentConfig& c, const CoefficientSet& model,
                  const MonteCarloSettings& s) {
  TaskOutput out;
  const EmpiricalMeasure mu(1, c.a2.mu), nu(1, c.a2.nu);
  const auto a2 = a2_check(model, mu, nu, c.sweep.times, s);
  out.pass = a2.pass;
  Curve lv{"lv", {}}, rhs{"rhs", {}}, ratio{"ratio", {}};
  json entries = json::array();
  for (const auto& e : a2.entries) {
    entries.push_back({{"t", e.t},
                       {"lv", e.lv},
                       {"lv_se", e.lv_se},
                       {"tv_lower", e.tv()},
                       {"threshold", e.threshold},
                       {"ratio", e.ratio},
                       {"rhs", e.rhs}});
    lv.points.emplace_back(e.t, e.lv);
    rhs.points.emplace_back(e.t, e.rhs);
    ratio.points.emplace_back(e.t, e.ratio);
  }
  out.result = {{"w2", a2.w2}, {"entries", entries}, {"pass", out.pass}};
  out.csv = sweep_csv(a2.table());
  out.curves = {lv, rhs, ratio};
  return out;
}

TaskOutput run_tangent(const ExperimentConfig& c, const CoefficientSet& model,
                       const InitialLaw& init, const Perturbation& phi,
                       const MonteCarloSettings& s) {
  TaskOutput out;
  const auto tc = pathwise_tangent_check(model, init, phi, s, c.fd.eps);
  out.pass = tc.pass;
  Curve err{"sup_sq_error", {}};
  for (std::size_t k = 0; k < tc.eps.size(); ++k) err.points.emplace_back(tc.eps[k], tc.error[k]);
  out.result = {{"eps", tc.eps},
                {"error", tc.error},
                {"ratios", tc.ratios},
                {"affine", model.affine},
                {"pass", out.pass}};
  out.csv = sweep_csv(tc.table());
  out.curves = {err};
  out.log_axes = std::all_of(tc.error.begin(), tc.error.end(), [](double v) { return v > 0.0; });
  out.x_label = "eps";
  return out;
}

void print_summary(const ExperimentConfig& c, const TaskOutput& out) {
  const auto& r = out.result;
  std::cout << std::setprecision(8);
  switch (c.task) {
    case Task::Estimate:
      std::cout << "estimate " << r["estimate"].get<double>() << "  std_error "
                << r["std_error"].get<double>();
      if (r.contains("exact")) std::cout << "  exact " << r["exact"].get<double>();
      break;
    case Task::Compare:
      std::cout << std::left << std::setw(12) << "bismut" << std::setw(16) << "se_b"
                << std::setw(16) << "fd" << std::setw(16) << "se_fd" << std::setw(16)
                << "|diff|" << std::setw(16) << "3(se_b+se_fd)" << "\n"
                << std::setw(12) << r["bismut"]["estimate"].get<double>() << std::setw(16)
                << r["bismut"]["std_error"].get<double>() << std::setw(16)
                << r["fd"]["estimate"].get<double>() << std::setw(16)
                << r["fd"]["std_error"].get<double>() << std::setw(16)
                << r["abs_diff"].get<double>() << std::setw(16) << r["bound"].get<double>();
      break;
    default:
      std::cout << out.csv;
      std::cout << to_string(c.task);
      break;
  }
  std::cout << "  " << (out.pass ? "PASS" : "FAIL") << std::endl;
}

}  // namespace

RunOutcome run_experiment(const ExperimentConfig& config, const RunOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  const fs::path dir(config.output_dir);
  fs::create_directories(dir);

  RunOutcome outcome;
  outcome.report = {{"tool", "mvbismut"},
                    {"version", tool_version()},
                    {"config", to_json(config)},
                    {"config_hash", config_hash(config)},
                    {"task", to_string(config.task)}};
  auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  };
  auto finish = [&](const std::string& status, bool pass, int code) {
    outcome.report["status"] = status;
    outcome.report["pass"] = pass;
    outcome.report["wall_time_s"] = elapsed();
    outcome.pass = pass;
    outcome.exit_code = code;
    write_file(dir / "report.json", outcome.report.dump(2) + "\n");
    return outcome;
  };

  const auto model = build_model(config);
  const auto init = build_init(config, model.dim);
  const auto phi = build_phi(config, model.dim);
  const auto f = build_f(config, model.dim);
  const unsigned threads = options.threads == 0 ? default_threads() : options.threads;
  const auto settings = build_settings(config, threads);

  try {
    if (options.dump_trajectories) {
      const auto traj =
          simulate(model, init, phi, settings.grid, settings.particles, settings.rng, 0);
      dump_trajectories(traj, (dir / "trajectories").string());
    }

    TaskOutput out;
    switch (config.task) {
      case Task::Estimate: out = run_estimate(config, model, init, phi, f, settings); break;
      case Task::Compare: out = run_compare(model, init, phi, f, settings, config.fd); break;
      case Task::A1Sweep: out = run_a1(config, model, init, f, settings); break;
      case Task::A2Check: out = run_a2(config, model, settings); break;
      case Task::TangentCheck: out = run_tangent(config, model, init, phi, settings); break;
    }

    write_file(dir / "results.csv", out.csv);
    for (const auto& curve : out.curves)
      write_file(dir / (curve.name + ".dat"), dat_contents(curve));
    if (!out.curves.empty()) write_file(dir / "plot.gp", plot_script(out));
    outcome.report["result"] = out.result;
    if (!options.quiet) print_summary(config, out);
    return finish("complete", out.pass, out.pass ? kExitPass : kExitFail);
  } catch (const ReplicationError& e) {
    outcome.report["error"] = e.what();
    outcome.report["failed_replication"] = e.replication();
    outcome.report["partial"] = true;
    std::cerr << "error: replication " << e.replication() << " (seed " << e.seed()
              << "): " << e.what() << std::endl;
    return finish(e.divergence() ? "diverged" : "failed", false, kExitDiverged);
  } catch (const DivergenceError& e) {
    outcome.report["error"] = e.what();
    outcome.report["partial"] = true;
    std::cerr << "error: " << e.what() << std::endl;
    return finish("diverged", false, kExitDiverged);
  }
}

}  // namespace mvb::cli
