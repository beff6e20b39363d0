// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "mvbismut/bismut.hpp"
#include "mvbismut/models.hpp"
#include "mvbismut/oracle.hpp"
#include "mvbismut/registry.hpp"
#include "mvbismut/solver.hpp"

using namespace mvb;

namespace {

constexpr std::size_t kParticles = 4096;
constexpr std::size_t kReplications = 64;
constexpr std::size_t kSteps = 1024;

struct Verdict {
  bool pass = false;
  std::string detail;
};

MonteCarloSettings settings(std::size_t n, std::size_t m, std::size_t k, std::uint64_t seed,
                            GateKind gate = GateKind::Linear, double horizon = 1.0) {
  MonteCarloSettings s;
  s.grid = TimeGrid(horizon, k);
  s.particles = n;
  s.replications = m;
  s.gate = gate;
  s.rng = RngSpec(seed);
  s.threads = 1;
  return s;
}

const InitialLaw& standard_init() {
  static const InitialLaw law = InitialLaw::gaussian({0.0}, 1.0);
  return law;
}

CoefficientSet linear_model() { return linear_mf_ou({-1.0, 0.5, 0.2}); }

CoefficientSet cylindrical_model() {
  return make_model("cylindrical_dini", {{"alpha", 0.3},
                                         {"outer", "tanh"},
                                         {"features", {"sin"}},
                                         {"mollify_radius", 1e-3},
                                         {"sigma", 1.0}});
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(6) << v;
  return os.str();
}

// Shared by criteria 1 and 3 (same model, seed and budget).
const EstimatorResult& linear_gate_estimate() {
  static const EstimatorResult r = estimate_intrinsic_derivative(
      linear_model(), standard_init(), constant_perturbation({1.0}, "const(1)"),
      coordinate_mean_observable(1), settings(kParticles, kReplications, kSteps, 20240611));
  return r;
}

Verdict analytic_agreement() {
  const auto& r = linear_gate_estimate();
  const double exact = std::exp(-0.5);
  const double tol = std::max(3.0 * r.std_error, 0.02 * exact);
  const double err = std::abs(r.estimate - exact);
  return {err <= tol, "estimate=" + fmt(r.estimate) + " se=" + fmt(r.std_error) +
                          " exact=" + fmt(exact) + " |err|=" + fmt(err) + " tol=" + fmt(tol)};
}

Verdict singular_cross_agreement() {
  const auto c = cylindrical_model();
  const auto phi = constant_perturbation({1.0}, "const(1)");
  const auto f = sigmoid_observable(0, 0.0, 1.0);
  auto s = settings(kParticles, kReplications, kSteps, 20240612);
  const auto b = estimate_intrinsic_derivative(c, standard_init(), phi, f, s);
  s.rng = s.rng.with_stream(1);
  const auto fd = fd_intrinsic_derivative(c, standard_init(), phi, f, s, FdConfig{});
  const double diff = std::abs(b.estimate - fd.estimate);
  const double bound = 3.0 * (b.std_error + fd.std_error);
  return {diff <= bound, "bismut=" + fmt(b.estimate) + " se_b=" + fmt(b.std_error) +
                             " fd=" + fmt(fd.estimate) + " se_fd=" + fmt(fd.std_error) +
                             " |diff|=" + fmt(diff) + " bound=" + fmt(bound)};
}

Verdict gate_invariance() {
  const auto& lin = linear_gate_estimate();
  const auto smooth = estimate_intrinsic_derivative(
      linear_model(), standard_init(), constant_perturbation({1.0}, "const(1)"),
      coordinate_mean_observable(1),
      settings(kParticles, kReplications, kSteps, 20240611, GateKind::Smoothstep));
  const double diff = std::abs(lin.estimate - smooth.estimate);
  const double bound = 3.0 * std::hypot(lin.std_error, smooth.std_error);
  return {diff <= bound, "linear=" + fmt(lin.estimate) + " smoothstep=" + fmt(smooth.estimate) +
                             " |diff|=" + fmt(diff) + " bound=" + fmt(bound)};
}

Verdict linearity_and_ge_shape() {
  const std::vector<CoefficientSet> models = {linear_model(), double_well_mf({}),
                                              cylindrical_model()};
  const TimeGrid grid(1.0, 256);
  double worst_tangent = 0.0, worst_ge = 0.0;
  for (const auto& c : models) {
    const auto a = simulate(c, standard_init(), sine_field(1, 1.0, 0.8, 0.4), grid, 1024,
                            RngSpec(31), 0);
    const auto b = simulate(c, standard_init(), sine_field(1, 2.0, 0.8, 0.4), grid, 1024,
                            RngSpec(31), 0);
    double num = 0.0, den = 0.0;
    for (std::size_t k = 0; k < a.tangents.size(); ++k) {
      num = std::max(num, std::abs(b.tangents[k] - 2.0 * a.tangents[k]));
      den = std::max(den, std::abs(2.0 * a.tangents[k]));
    }
    worst_tangent = std::max(worst_tangent, num / den);
    const double ga = tangent_sup_mean_square(a), gb = tangent_sup_mean_square(b);
    worst_ge = std::max(worst_ge, std::abs(gb / ga - 4.0) / 4.0);
  }
  return {worst_tangent <= 1e-10 && worst_ge <= 1e-10,
          "max rel |V(2phi) - 2V(phi)|=" + fmt(worst_tangent) +
              " max rel |GE ratio - 4|=" + fmt(worst_ge)};
}

Verdict tangent_limit() {
  const std::vector<double> ladder{1e-2, 5e-3, 2.5e-3};
  const auto s = settings(512, 8, 256, 20240615);
  const auto dw = pathwise_tangent_check(double_well_mf({}), standard_init(),
                                         sine_field(1, 1.0, 1.0, 0.3), s, ladder);
  const auto lin = pathwise_tangent_check(linear_model(), standard_init(),
                                          sine_field(1, 1.0, 1.0, 0.3), s, ladder);
  double worst_affine = 0.0;
  for (double e : lin.error) worst_affine = std::max(worst_affine, e);
  bool ratios_ok = true;
  std::string ratios;
  for (double q : dw.ratios) {
    ratios_ok = ratios_ok && q <= kTangentRatioBound;
    ratios += fmt(q) + " ";
  }
  return {ratios_ok && worst_affine <= kAffineTangentTolerance,
          "double_well ratios=" + ratios + "affine max error=" + fmt(worst_affine)};
}

Verdict martingale_zero_mean() {
  const auto s = settings(1024, 32, 256, 20240616);
  bool ok = true;
  std::string detail;
  for (const auto& id : model_names()) {
    const auto c = id == "cylindrical_dini" ? cylindrical_model() : make_model(id, nlohmann::json::object());
    const auto m = weight_mean_check(c, standard_init(), constant_perturbation({1.0}), s);
    const bool pass = std::abs(m.mean) <= 3.0 * m.std_error;
    ok = ok && pass;
    detail += id + ": mean=" + fmt(m.mean) + " se=" + fmt(m.std_error) + (pass ? "; " : " (out); ");
  }
  return {ok, detail};
}

Verdict a1_shape() {
  const auto r = a1_sweep(linear_model(), standard_init(), coordinate_mean_observable(1),
                          {0.25, 0.5, 1.0},
                          settings(kParticles, kReplications, kSteps, 20240613), 3);
  std::string detail;
  for (const auto& e : r.entries)
    detail += "t=" + fmt(e.t) + " C=" + (e.defined ? fmt(e.implied_constant) : "undef") + " ";
  return {r.pass, detail};
}

Verdict a2_shape() {
  const double eps = 0.5;
  const auto r = a2_check(linear_mf_ou({0.0, 0.0, 1.0}), EmpiricalMeasure(1, {0.0}),
                          EmpiricalMeasure(1, {eps}), {0.25, 0.5, 1.0},
                          settings(kParticles, kReplications, 64, 20240614));
  const double reference = std::erf(eps / (2.0 * std::sqrt(2.0)));  // 2 Phi(eps / 2) - 1
  const double tv = r.entries.back().tv();
  const bool tv_ok = std::abs(tv - reference) <= 0.05;
  std::string detail = "tv(1)=" + fmt(tv) + " gaussian=" + fmt(reference) + " ratios=";
  for (const auto& e : r.entries) detail += fmt(e.ratio) + " ";
  return {tv_ok && r.pass, detail};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

Verdict determinism() {
  const std::string config = std::string(MVBISMUT_CONFIG_DIR) + "/linear_estimate.json";
  const std::filesystem::path root = std::filesystem::absolute("acceptance_determinism");
  std::string rows[2];
  int codes[2];
  const unsigned threads[2] = {1, 8};
  for (int k = 0; k < 2; ++k) {
    const auto dir = root / ("threads" + std::to_string(threads[k]));
    std::filesystem::remove_all(dir);
    const std::string cmd = std::string("\"") + MVBISMUT_CLI_PATH + "\" run --config \"" + config +
                            "\" --out \"" + dir.string() + "\" --threads " +
                            std::to_string(threads[k]) + " --quiet";
    codes[k] = std::system(cmd.c_str());
    rows[k] = slurp(dir / "results.csv");
  }
  const bool same = !rows[0].empty() && rows[0] == rows[1];
  return {same && codes[0] == 0 && codes[1] == 0,
          std::string(same ? "results.csv identical" : "results.csv differs") + " (exit codes " +
              std::to_string(codes[0]) + ", " + std::to_string(codes[1]) + ")"};
}

Verdict mean_field_paths() {
  std::mt19937_64 gen(20240617);
  std::normal_distribution<double> normal;
  std::uniform_int_distribution<int> pick(0, 3);
  const std::vector<std::string> feature_names{"sin", "cos", "tanh", "gaussian"};
  double worst = 0.0;
  for (int draw = 0; draw < 1000; ++draw) {
    const std::size_t d = 1 + draw % 2;
    CoefficientSet c;
    switch (pick(gen)) {
      case 0: c = linear_mf_ou({normal(gen), normal(gen), 0.5}, d); break;
      case 1: c = double_well_mf({std::abs(normal(gen)), 0.5}, d); break;
      default: {
        CylindricalDriftSpec spec;
        spec.dim = d;
        spec.mollify_radius = draw % 3 == 0 ? 0.0 : 1e-3;
        for (int f = 0; f < 1 + draw % 3; ++f)
          spec.features.push_back(feature_by_name(feature_names[pick(gen)], f % d, d));
        spec.outer = draw % 2 ? outer_tanh() : outer_mean_field();
        c = build_cylindrical(spec);
      }
    }
    const std::size_t n = 64;
    std::vector<double> x(n * d), v(n * d);
    for (auto& e : x) e = normal(gen);
    for (auto& e : v) e = normal(gen);
    const EmpiricalMeasure mu(d, x);
    const double t = std::abs(normal(gen));
    const auto a = mean_field_tangent_term(c, t, mu, v, MeanFieldPath::Separable);
    const auto b = mean_field_tangent_term(c, t, mu, v, MeanFieldPath::Generic);
    for (std::size_t k = 0; k < a.size(); ++k) worst = std::max(worst, std::abs(a[k] - b[k]));
  }
  return {worst <= 1e-12, "max |separable - generic| over 1000 draws=" + fmt(worst)};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria = {
      {"1 analytic agreement (linear_mf_ou)", analytic_agreement},
      {"2 bismut vs fd on cylindrical_dini", singular_cross_agreement},
      {"3 gate invariance", gate_invariance},
      {"4 linearity and GE shape", linearity_and_ge_shape},
      {"5 tangent-limit convergence", tangent_limit},
      {"6 martingale zero mean", martingale_zero_mean},
      {"7 A1 shape sweep", a1_shape},
      {"8 A2 shape check", a2_shape},
      {"9 determinism across thread counts", determinism},
      {"10 separable vs generic mean-field term", mean_field_paths},
  };
  int failures = 0;
  for (const auto& [name, run] : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = run();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    failures += v.pass ? 0 : 1;
    std::cout << (v.pass ? "PASS" : "FAIL") << "  criterion " << name << ": " << v.detail << " ["
              << fmt(secs) << " s]" << std::endl;
  }
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " failed")
            << std::endl;
  return failures == 0 ? EXIT_SUCCESS : EXIT_FAILURE;
}
