#include "mvbismut_cli/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "mvbismut/errors.hpp"
#include "mvbismut/registry.hpp"

namespace mvb::cli {

using nlohmann::json;

std::string to_string(Task task) {
  switch (task) {
    case Task::Estimate: return "estimate";
    case Task::Compare: return "compare";
    case Task::A1Sweep: return "a1_sweep";
    case Task::A2Check: return "a2_check";
    case Task::TangentCheck: return "tangent_check";
  }
  return "estimate";
}

Task parse_task(const std::string& name) {
  for (Task t : {Task::Estimate, Task::Compare, Task::A1Sweep, Task::A2Check, Task::TangentCheck})
    if (to_string(t) == name) return t;
  throw ConfigError("task", "unknown task '" + name +
                                "' (expected estimate, compare, a1_sweep, a2_check, tangent_check)");
}

bool is_sweep(Task task) {
  return task == Task::A1Sweep || task == Task::A2Check || task == Task::TangentCheck;
}

namespace {

/// Typed, path-aware view of one JSON object.
class Reader {
 public:
  Reader(const json& obj, std::string path, std::set<std::string> allowed)
      : obj_(obj), path_(std::move(path)) {
    if (!obj.is_object()) throw ConfigError(path_.empty() ? "config" : path_, "must be an object");
    for (const auto& [key, value] : obj.items()) {
      (void)value;
      if (!allowed.count(key)) throw ConfigError(at(key), "unknown field");
    }
  }

  std::string at(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  bool has(const std::string& key) const { return obj_.contains(key); }
  const json& raw(const std::string& key) const { return obj_.at(key); }

  double number(const std::string& key, double fallback) const {
    if (!has(key)) return fallback;
    const auto& v = obj_.at(key);
    if (!v.is_number()) throw ConfigError(at(key), "must be a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw ConfigError(at(key), "must be finite");
    return x;
  }

  std::uint64_t count(const std::string& key, std::uint64_t fallback, bool allow_zero) const {
    if (!has(key)) return fallback;
    const auto& v = obj_.at(key);
    if (!v.is_number_integer() || (!v.is_number_unsigned() && v.get<long long>() < 0))
      throw ConfigError(at(key), "must be a non-negative integer");
    const auto n = v.get<std::uint64_t>();
    if (n == 0 && !allow_zero) throw ConfigError(at(key), "must be positive");
    return n;
  }

  std::string string(const std::string& key, const std::string& fallback) const {
    if (!has(key)) return fallback;
    const auto& v = obj_.at(key);
    if (!v.is_string()) throw ConfigError(at(key), "must be a string");
    return v.get<std::string>();
  }

  std::vector<double> numbers(const std::string& key, std::vector<double> fallback) const {
    if (!has(key)) return fallback;
    const auto& v = obj_.at(key);
    if (!v.is_array()) throw ConfigError(at(key), "must be an array of numbers");
    std::vector<double> out;
    for (const auto& x : v) {
      if (!x.is_number() || !std::isfinite(x.get<double>()))
        throw ConfigError(at(key), "must contain finite numbers");
      out.push_back(x.get<double>());
    }
    return out;
  }

  bool boolean(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    if (!obj_.at(key).is_boolean()) throw ConfigError(at(key), "must be true or false");
    return obj_.at(key).get<bool>();
  }

 private:
  const json& obj_;
  std::string path_;
};

const json& section(const json& doc, const std::string& key) {
  static const json empty = json::object();
  return doc.contains(key) ? doc.at(key) : empty;
}

void require_dim(const std::vector<double>& v, std::size_t dim, const std::string& path) {
  if (v.size() != dim)
    throw ConfigError(path, "must have " + std::to_string(dim) + " entries (model dimension)");
}

void parse_init(const json& doc, InitSpec& s, std::size_t dim) {
  const Reader r(doc, "init", {"kind", "mean", "std", "lower", "upper", "point", "path"});
  s.kind = r.string("kind", "gaussian");
  if (s.kind == "gaussian") {
    s.mean = r.numbers("mean", std::vector<double>(dim, 0.0));
    require_dim(s.mean, dim, r.at("mean"));
    s.std = r.number("std", 1.0);
    if (!(s.std >= 0.0)) throw ConfigError(r.at("std"), "must be non-negative");
  } else if (s.kind == "uniform") {
    s.lower = r.numbers("lower", std::vector<double>(dim, -1.0));
    s.upper = r.numbers("upper", std::vector<double>(dim, 1.0));
    require_dim(s.lower, dim, r.at("lower"));
    require_dim(s.upper, dim, r.at("upper"));
    for (std::size_t k = 0; k < dim; ++k)
      if (!(s.lower[k] < s.upper[k])) throw ConfigError(r.at("upper"), "must exceed lower");
  } else if (s.kind == "dirac") {
    s.point = r.numbers("point", std::vector<double>(dim, 0.0));
    require_dim(s.point, dim, r.at("point"));
  } else if (s.kind == "empirical") {
    s.path = r.string("path", "");
    if (s.path.empty()) throw ConfigError(r.at("path"), "required for an empirical law");
  } else {
    throw ConfigError(r.at("kind"), "expected gaussian, uniform, dirac or empirical");
  }
}

void parse_phi(const json& doc, PhiSpec& s, std::size_t dim) {
  const Reader r(doc, "phi", {"kind", "value", "amplitude", "frequency", "phase", "scale"});
  s.kind = r.string("kind", "constant");
  if (s.kind == "constant") {
    s.value = r.numbers("value", std::vector<double>(dim, 1.0));
    require_dim(s.value, dim, r.at("value"));
  } else if (s.kind == "sine") {
    s.amplitude = r.number("amplitude", 1.0);
    s.frequency = r.number("frequency", 1.0);
    s.phase = r.number("phase", 0.0);
  } else if (s.kind == "linear") {
    s.scale = r.number("scale", 1.0);
  } else if (s.kind != "zero") {
    throw ConfigError(r.at("kind"), "expected constant, sine, linear or zero");
  }
}

void parse_f(const json& doc, FSpec& s, std::size_t dim) {
  const Reader r(doc, "f", {"kind", "axis", "center", "scale", "threshold", "width", "value"});
  s.kind = r.string("kind", "mean");
  if (s.kind == "sigmoid" || s.kind == "indicator") {
    s.axis = r.count("axis", 0, true);
    if (s.axis >= dim) throw ConfigError(r.at("axis"), "exceeds the model dimension");
  }
  if (s.kind == "sigmoid") {
    s.center = r.number("center", 0.0);
    s.scale = r.number("scale", 1.0);
    if (!(s.scale > 0.0)) throw ConfigError(r.at("scale"), "must be positive");
  } else if (s.kind == "indicator") {
    s.threshold = r.number("threshold", 0.0);
    s.width = r.number("width", 0.1);
    if (!(s.width > 0.0)) throw ConfigError(r.at("width"), "must be positive");
  } else if (s.kind == "constant") {
    s.value = r.number("value", 1.0);
  } else if (s.kind != "mean") {
    throw ConfigError(r.at("kind"), "expected mean, sigmoid, indicator or constant");
  }
}

}  // namespace

ExperimentConfig parse_config(const json& doc) {
  const Reader top(doc, "", {"model", "grid", "budget", "gate", "init", "phi", "f", "seed", "task",
                             "fd", "sweep", "a2", "output_dir"});
  ExperimentConfig c;

  const Reader model(section(doc, "model"), "model", {"id", "params"});
  c.model_id = model.string("id", c.model_id);
  c.model_params = canonical_model_params(
      c.model_id, model.has("params") ? model.raw("params") : json::object(), "model.params");
  const std::size_t dim = c.model_params["dim"].get<std::size_t>();

  const Reader grid(section(doc, "grid"), "grid", {"horizon", "steps"});
  c.horizon = grid.number("horizon", c.horizon);
  if (!(c.horizon > 0.0)) throw ConfigError("grid.horizon", "must be positive");
  c.steps = grid.count("steps", c.steps, false);

  const Reader budget(section(doc, "budget"), "budget", {"particles", "replications"});
  c.particles = budget.count("particles", c.particles, false);
  if (c.particles < 2) throw ConfigError("budget.particles", "must be at least 2");
  c.replications = budget.count("replications", c.replications, false);

  try {
    c.gate = parse_gate(top.string("gate", "linear"));
  } catch (const ArgumentError& e) {
    throw ConfigError("gate", e.what());
  }
  c.task = parse_task(top.string("task", "estimate"));
  if (c.task != Task::TangentCheck && c.replications < kMinReplications)
    throw ConfigError("budget.replications",
                      "must be at least " + std::to_string(kMinReplications));
  c.seed = top.count("seed", c.seed, true);
  c.output_dir = top.string("output_dir", c.output_dir);

  parse_init(section(doc, "init"), c.init, dim);
  parse_phi(section(doc, "phi"), c.phi, dim);
  parse_f(section(doc, "f"), c.f, dim);

  const Reader fd(section(doc, "fd"), "fd", {"eps", "richardson"});
  c.fd.eps = fd.numbers("eps", c.fd.eps);
  c.fd.richardson = fd.boolean("richardson", false);
  try {
    validate(c.fd);
  } catch (const ArgumentError& e) {
    throw ConfigError("fd.eps", e.what());
  }

  const Reader sweep(section(doc, "sweep"), "sweep", {"times", "probes"});
  c.sweep.times = sweep.numbers("times", c.sweep.times);
  if (c.sweep.times.empty()) throw ConfigError("sweep.times", "must not be empty");
  for (double t : c.sweep.times)
    if (!(t > 0.0)) throw ConfigError("sweep.times", "must be positive");
  c.sweep.probes = sweep.count("probes", dim + 2, false);
  if (c.sweep.probes < dim) throw ConfigError("sweep.probes", "must be at least the dimension");

  const Reader a2(section(doc, "a2"), "a2", {"mu", "nu"});
  c.a2.mu = a2.numbers("mu", c.a2.mu);
  c.a2.nu = a2.numbers("nu", c.a2.nu);
  if (c.task == Task::A2Check) {
    if (dim != 1) throw ConfigError("model.params.dim", "a2_check supports d = 1 only");
    if (c.a2.mu.empty()) throw ConfigError("a2.mu", "must not be empty");
    if (c.a2.nu.empty()) throw ConfigError("a2.nu", "must not be empty");
  }
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("config", "cannot open " + path);
  json doc;
  try {
    doc = json::parse(is);
  } catch (const json::parse_error& e) {
    throw ConfigError("config", std::string("invalid JSON: ") + e.what());
  }
  return parse_config(doc);
}

json to_json(const ExperimentConfig& c) {
  json init = {{"kind", c.init.kind}};
  if (c.init.kind == "gaussian") {
    init["mean"] = c.init.mean;
    init["std"] = c.init.std;
  } else if (c.init.kind == "uniform") {
    init["lower"] = c.init.lower;
    init["upper"] = c.init.upper;
  } else if (c.init.kind == "dirac") {
    init["point"] = c.init.point;
  } else {
    init["path"] = c.init.path;
  }

  json phi = {{"kind", c.phi.kind}};
  if (c.phi.kind == "constant") {
    phi["value"] = c.phi.value;
  } else if (c.phi.kind == "sine") {
    phi["amplitude"] = c.phi.amplitude;
    phi["frequency"] = c.phi.frequency;
    phi["phase"] = c.phi.phase;
  } else if (c.phi.kind == "linear") {
    phi["scale"] = c.phi.scale;
  }

  json f = {{"kind", c.f.kind}};
  if (c.f.kind == "sigmoid") {
    f["axis"] = c.f.axis;
    f["center"] = c.f.center;
    f["scale"] = c.f.scale;
  } else if (c.f.kind == "indicator") {
    f["axis"] = c.f.axis;
    f["threshold"] = c.f.threshold;
    f["width"] = c.f.width;
  } else if (c.f.kind == "constant") {
    f["value"] = c.f.value;
  }

  return {{"model", {{"id", c.model_id}, {"params", c.model_params}}},
          {"grid", {{"horizon", c.horizon}, {"steps", c.steps}}},
          {"budget", {{"particles", c.particles}, {"replications", c.replications}}},
          {"gate", to_string(c.gate)},
          {"init", init},
          {"phi", phi},
          {"f", f},
          {"seed", c.seed},
          {"task", to_string(c.task)},
          {"fd", {{"eps", c.fd.eps}, {"richardson", c.fd.richardson}}},
          {"sweep", {{"times", c.sweep.times}, {"probes", c.sweep.probes}}},
          {"a2", {{"mu", c.a2.mu}, {"nu", c.a2.nu}}},
          {"output_dir", c.output_dir}};
}

std::string config_hash(const ExperimentConfig& c) {
  json doc = to_json(c);
  doc.erase("output_dir");
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : doc.dump()) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

CoefficientSet build_model(const ExperimentConfig& c) {
  return make_model(c.model_id, c.model_params);
}

InitialLaw build_init(const ExperimentConfig& c, std::size_t dim) {
  const auto& s = c.init;
  if (s.kind == "gaussian") return InitialLaw::gaussian(s.mean, s.std);
  if (s.kind == "uniform") return InitialLaw::uniform(s.lower, s.upper);
  if (s.kind == "dirac") return InitialLaw::dirac(s.point);
  EmpiricalMeasure mu = [&] {
    try {
      return read_csv_file(s.path);
    } catch (const Error& e) {
      throw ConfigError("init.path", e.what());
    }
  }();
  if (mu.dim() != dim) throw ConfigError("init.path", "atom dimension differs from the model");
  return InitialLaw::empirical(std::move(mu));
}

Perturbation build_phi(const ExperimentConfig& c, std::size_t dim) {
  const auto& s = c.phi;
  if (s.kind == "constant") {
    std::string label = "const(";
    for (std::size_t k = 0; k < s.value.size(); ++k) {
      std::ostringstream os;
      os << s.value[k];
      label += (k ? " " : "") + os.str();
    }
    return constant_perturbation(s.value, label + ")");
  }
  if (s.kind == "sine") return sine_field(dim, s.amplitude, s.frequency, s.phase);
  if (s.kind == "linear") return linear_field(dim, s.scale);
  return zero_perturbation(dim);
}

Observable build_f(const ExperimentConfig& c, std::size_t dim) {
  const auto& s = c.f;
  if (s.kind == "mean") return coordinate_mean_observable(dim);
  if (s.kind == "sigmoid") return sigmoid_observable(s.axis, s.center, s.scale);
  if (s.kind == "indicator") return smoothed_indicator_observable(s.axis, s.threshold, s.width);
  return constant_observable(s.value);
}

MonteCarloSettings build_settings(const ExperimentConfig& c, unsigned threads) {
  MonteCarloSettings s;
  s.grid = TimeGrid(c.horizon, c.steps);
  s.particles = c.particles;
  s.replications = c.replications;
  s.gate = c.gate;
  s.rng = RngSpec(c.seed);
  s.threads = threads;
  return s;
}

}  // namespace mvb::cli
