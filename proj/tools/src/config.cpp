#include <cmath>
#include <set>

#include "symreduce/app.hpp"

namespace symreduce::app {
namespace {

std::string child(const std::string& ptr, const std::string& key) {
  std::string escaped;
  for (char c : key) {
    if (c == '~')
      escaped += "~0";
    else if (c == '/')
      escaped += "~1";
    else
      escaped += c;
  }
  return ptr + "/" + escaped;
}

void require_object(const Json& j, const std::string& ptr) {
  if (!j.is_object()) throw ConfigError(ptr, "expected an object");
}

void reject_unknown(const Json& j, const std::string& ptr,
                    const std::set<std::string>& allowed) {
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key()))
      throw ConfigError(child(ptr, it.key()), "unknown key");
}

double number(const Json& j, const std::string& ptr) {
  if (!j.is_number()) throw ConfigError(ptr, "expected a number");
  double v = j.get<double>();
  if (!std::isfinite(v)) throw ConfigError(ptr, "expected a finite number");
  return v;
}

double positive(const Json& j, const std::string& ptr) {
  double v = number(j, ptr);
  if (!(v > 0)) throw ConfigError(ptr, "expected a positive number");
  return v;
}

Expr exact(const Json& j, const std::string& ptr) {
  double v = number(j, ptr);
  try {
    return Expr(Rational::approximate(v));
  } catch (const std::exception& e) {
    throw ConfigError(ptr, std::string("cannot represent value: ") + e.what());
  }
}

std::set<std::string> parameter_keys(Family f) {
  switch (f) {
    case Family::Kepler: return {"mu"};
    case Family::KeplerDrag: return {"mu", "alpha"};
    case Family::PowerLaw: return {"mu", "alpha"};
    case Family::ConeDrag: return {"mu", "g"};
    case Family::MICZ: return {"mu", "lambda", "nu"};
  }
  return {};
}

// Builds a spec from the parameter keys of `j`, with `base` supplying any
// key `j` leaves out (used by sweep points).
ProblemSpec build_spec(Family family, const Json& j, const std::string& ptr,
                       const Json* base) {
  auto get = [&](const char* key) -> std::pair<const Json*, std::string> {
    if (j.contains(key)) return {&j[key], child(ptr, key)};
    if (base && base->contains(key)) return {&(*base)[key], child("", key)};
    return {nullptr, child(ptr, key)};
  };
  auto need = [&](const char* key) {
    auto [v, p] = get(key);
    if (!v) throw ConfigError(p, "required for " + family_name(family));
    return exact(*v, p);
  };

  ProblemSpec spec;
  Expr mu = need("mu");
  switch (family) {
    case Family::Kepler:
      spec = ProblemSpec::kepler(mu);
      break;
    case Family::KeplerDrag:
      spec = ProblemSpec::kepler_drag(mu, need("alpha"));
      break;
    case Family::PowerLaw: {
      auto [v, p] = get("alpha");
      if (!v) throw ConfigError(p, "required for power_law");
      double a = number(*v, p);
      auto q = Rational::approximate(a);
      if (std::abs(q.to_double() - a) > 1e-12)
        throw ConfigError(p, "exponent must be rational");
      spec = ProblemSpec::power_law(mu, q);
      break;
    }
    case Family::ConeDrag: {
      auto [v, p] = get("g");
      if (!v) throw ConfigError(p, "required for cone_drag");
      if (!v->is_string()) throw ConfigError(p, "expected an expression string");
      Expr g;
      try {
        g = parse_infix(v->get<std::string>());
      } catch (const std::exception& e) {
        throw ConfigError(p, std::string("unparseable expression: ") + e.what());
      }
      for (const auto& s : free_symbols(g))
        if (s != names::t) throw ConfigError(p, "g may depend on t only, found " + s);
      spec = ProblemSpec::cone_drag(mu, g);
      break;
    }
    case Family::MICZ: {
      Expr lambda = need("lambda");
      auto [v, p] = get("nu");
      std::optional<Expr> nu;
      if (v) nu = exact(*v, p);
      spec = ProblemSpec::micz(mu, lambda, nu);
      break;
    }
  }
  try {
    spec.validate();
  } catch (const ProblemError& e) {
    throw ConfigError(ptr, e.what());
  }
  return spec;
}

}  // namespace

RunConfig parse_problem_config(std::string_view text) {
  Json doc;
  try {
    doc = Json::parse(text.begin(), text.end());
  } catch (const Json::parse_error& e) {
    throw ConfigError("", std::string("invalid JSON: ") + e.what());
  }
  require_object(doc, "");

  if (!doc.contains("family")) throw ConfigError("/family", "required");
  if (!doc["family"].is_string()) throw ConfigError("/family", "expected a string");
  auto family = parse_family(doc["family"].get<std::string>());
  if (!family) throw ConfigError("/family", "unknown family '" + doc["family"].get<std::string>() + "'");

  auto params = parameter_keys(*family);
  std::set<std::string> allowed = {"family", "initial", "tol",   "t_end", "r_min",
                                   "h_max",  "csv",     "sweep", "seed"};
  allowed.insert(params.begin(), params.end());
  reject_unknown(doc, "", allowed);

  RunConfig cfg;
  cfg.spec = build_spec(*family, doc, "", nullptr);
  cfg.parameters = Json::object();
  for (const char* k : {"mu", "alpha", "lambda", "nu", "g"})
    if (doc.contains(k)) cfg.parameters[k] = doc[k];

  cfg.initial = standard_initial_state(cfg.spec);
  if (doc.contains("initial")) {
    const auto& in = doc["initial"];
    require_object(in, "/initial");
    reject_unknown(in, "/initial", {"r", "r_dot", "angle", "angle_dot"});
    if (in.contains("r")) cfg.initial.r = positive(in["r"], "/initial/r");
    if (in.contains("r_dot")) cfg.initial.r_dot = number(in["r_dot"], "/initial/r_dot");
    if (in.contains("angle")) cfg.initial.angle = number(in["angle"], "/initial/angle");
    if (in.contains("angle_dot"))
      cfg.initial.angle_dot = number(in["angle_dot"], "/initial/angle_dot");
  }

  if (doc.contains("tol")) cfg.integrator.tol = positive(doc["tol"], "/tol");
  if (doc.contains("r_min")) cfg.integrator.r_min = positive(doc["r_min"], "/r_min");
  if (doc.contains("h_max")) cfg.integrator.h_max = positive(doc["h_max"], "/h_max");
  if (doc.contains("t_end")) cfg.t_end = positive(doc["t_end"], "/t_end");

  if (doc.contains("csv")) {
    if (!doc["csv"].is_string() || doc["csv"].get<std::string>().empty())
      throw ConfigError("/csv", "expected a file name");
    cfg.csv = doc["csv"].get<std::string>();
  }

  if (doc.contains("seed")) {
    if (!doc["seed"].is_number_unsigned()) throw ConfigError("/seed", "expected a non-negative integer");
    cfg.seed = doc["seed"].get<std::uint64_t>();
  }

  if (doc.contains("sweep")) {
    const auto& sw = doc["sweep"];
    if (!sw.is_array()) throw ConfigError("/sweep", "expected an array");
    for (std::size_t i = 0; i < sw.size(); ++i) {
      std::string p = "/sweep/" + std::to_string(i);
      require_object(sw[i], p);
      reject_unknown(sw[i], p, params);
      cfg.sweep.push_back(build_spec(*family, sw[i], p, &doc));
    }
  }
  return cfg;
}

}  // namespace symreduce::app
