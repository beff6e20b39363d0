#include "mvbismut/registry.hpp"

#include <cmath>
#include <set>

#include "mvbismut/errors.hpp"
#include "mvbismut/models.hpp"

namespace mvb {

using nlohmann::json;

const std::vector<std::string>& model_names() {
  static const std::vector<std::string> names = {"linear_mf_ou", "cylindrical_dini",
                                                 "double_well_mf"};
  return names;
}

namespace {

void reject_unknown(const json& params, const std::set<std::string>& allowed,
                    const std::string& path) {
  if (!params.is_object()) throw ConfigError(path, "must be an object");
  for (const auto& [key, value] : params.items()) {
    (void)value;
    if (!allowed.count(key)) throw ConfigError(path + "." + key, "unknown parameter");
  }
}

double number(const json& params, const std::string& key, double fallback,
              const std::string& path) {
  if (!params.contains(key)) return fallback;
  const auto& v = params.at(key);
  if (!v.is_number()) throw ConfigError(path + "." + key, "must be a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw ConfigError(path + "." + key, "must be finite");
  return x;
}

std::size_t dimension(const json& params, const std::string& path) {
  if (!params.contains("dim")) return 1;
  const auto& v = params.at("dim");
  if (!v.is_number_integer() || v.get<long long>() < 1)
    throw ConfigError(path + ".dim", "must be a positive integer");
  return v.get<std::size_t>();
}

json canonical_linear(const json& p, const std::string& path) {
  reject_unknown(p, {"a", "c", "sigma", "dim"}, path);
  const LinearMfParams defaults;
  json out = {{"a", number(p, "a", defaults.a, path)},
              {"c", number(p, "c", defaults.c, path)},
              {"sigma", number(p, "sigma", defaults.sigma, path)},
              {"dim", dimension(p, path)}};
  if (out["sigma"].get<double>() == 0.0) throw ConfigError(path + ".sigma", "must be non-zero");
  return out;
}

json canonical_double_well(const json& p, const std::string& path) {
  reject_unknown(p, {"kappa", "sigma", "dim"}, path);
  const DoubleWellParams defaults;
  json out = {{"kappa", number(p, "kappa", defaults.kappa, path)},
              {"sigma", number(p, "sigma", defaults.sigma, path)},
              {"dim", dimension(p, path)}};
  if (out["sigma"].get<double>() == 0.0) throw ConfigError(path + ".sigma", "must be non-zero");
  return out;
}

json canonical_cylindrical(const json& p, const std::string& path) {
  reject_unknown(p, {"alpha", "features", "outer", "mollify_radius", "sigma", "confinement",
                     "dim", "direction"},
                 path);
  const std::size_t d = dimension(p, path);
  json out = {{"alpha", number(p, "alpha", 0.3, path)},
              {"mollify_radius", number(p, "mollify_radius", 1e-3, path)},
              {"sigma", number(p, "sigma", 1.0, path)},
              {"confinement", number(p, "confinement", 0.0, path)},
              {"dim", d}};
  const double alpha = out["alpha"].get<double>();
  if (!(alpha > 0.0 && alpha < 0.5)) throw ConfigError(path + ".alpha", "must lie in (0, 1/2)");
  if (out["mollify_radius"].get<double>() < 0.0)
    throw ConfigError(path + ".mollify_radius", "must be non-negative");
  if (out["sigma"].get<double>() == 0.0) throw ConfigError(path + ".sigma", "must be non-zero");

  std::string outer = "tanh";
  if (p.contains("outer")) {
    if (!p["outer"].is_string()) throw ConfigError(path + ".outer", "must be a string");
    outer = p["outer"].get<std::string>();
    if (outer != "tanh" && outer != "radial" && outer != "mean_field")
      throw ConfigError(path + ".outer", "expected one of tanh, radial, mean_field");
  }
  out["outer"] = outer;

  json features = json::array();
  const json raw = p.contains("features") ? p["features"] : json::array({"sin"});
  if (!raw.is_array()) throw ConfigError(path + ".features", "must be an array");
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const std::string fpath = path + ".features[" + std::to_string(i) + "]";
    std::string name;
    std::size_t axis = 0;
    if (raw[i].is_string()) {
      name = raw[i].get<std::string>();
    } else if (raw[i].is_object()) {
      reject_unknown(raw[i], {"name", "axis"}, fpath);
      if (!raw[i].contains("name") || !raw[i]["name"].is_string())
        throw ConfigError(fpath + ".name", "must be a string");
      name = raw[i]["name"].get<std::string>();
      if (raw[i].contains("axis")) {
        if (!raw[i]["axis"].is_number_integer() || raw[i]["axis"].get<long long>() < 0)
          throw ConfigError(fpath + ".axis", "must be a non-negative integer");
        axis = raw[i]["axis"].get<std::size_t>();
      }
    } else {
      throw ConfigError(fpath, "must be a feature name or {name, axis}");
    }
    if (name != "sin" && name != "cos" && name != "tanh" && name != "gaussian")
      throw ConfigError(fpath, "unknown feature '" + name + "'");
    if (axis >= d) throw ConfigError(fpath + ".axis", "exceeds the model dimension");
    features.push_back({{"name", name}, {"axis", axis}});
  }
  out["features"] = features;

  std::vector<double> dir(d, 1.0);
  if (p.contains("direction")) {
    const auto& v = p["direction"];
    if (!v.is_array() || v.size() != d)
      throw ConfigError(path + ".direction", "must be an array of length dim");
    for (std::size_t k = 0; k < d; ++k) {
      if (!v[k].is_number()) throw ConfigError(path + ".direction", "must contain numbers");
      dir[k] = v[k].get<double>();
    }
  }
  out["direction"] = dir;
  return out;
}

}  // namespace

json canonical_model_params(const std::string& id, const json& params, const std::string& path) {
  const json p = params.is_null() ? json::object() : params;
  if (id == "linear_mf_ou") return canonical_linear(p, path);
  if (id == "double_well_mf") return canonical_double_well(p, path);
  if (id == "cylindrical_dini") return canonical_cylindrical(p, path);
  std::string known;
  for (const auto& n : model_names()) known += (known.empty() ? "" : ", ") + n;
  const auto dot = path.rfind('.');
  throw ConfigError(dot == std::string::npos ? "model.id" : path.substr(0, dot) + ".id",
                    "unknown model '" + id + "' (known: " + known + ")");
}

CoefficientSet make_model(const std::string& id, const json& params, const std::string& path) {
  const json p = canonical_model_params(id, params, path);
  const std::size_t d = p["dim"].get<std::size_t>();
  if (id == "linear_mf_ou") {
    return linear_mf_ou({p["a"].get<double>(), p["c"].get<double>(), p["sigma"].get<double>()}, d);
  }
  if (id == "double_well_mf") {
    return double_well_mf({p["kappa"].get<double>(), p["sigma"].get<double>()}, d);
  }
  CylindricalDriftSpec spec;
  spec.dim = d;
  spec.alpha = p["alpha"].get<double>();
  spec.mollify_radius = p["mollify_radius"].get<double>();
  spec.sigma = p["sigma"].get<double>();
  spec.confinement = p["confinement"].get<double>();
  spec.direction = p["direction"].get<std::vector<double>>();
  spec.outer = outer_by_name(p["outer"].get<std::string>());
  for (const auto& f : p["features"])
    spec.features.push_back(
        feature_by_name(f["name"].get<std::string>(), f["axis"].get<std::size_t>(), d));
  try {
    return build_cylindrical(spec);
  } catch (const ArgumentError& e) {
    throw ConfigError(path, e.what());
  }
}

}  // namespace mvb
