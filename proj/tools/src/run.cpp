#include <cmath>
#include <cstdio>
#include <future>
#include <sstream>

#include "symreduce/app.hpp"

namespace symreduce::app {
namespace {

constexpr double kDriftBound = 1e-7;
constexpr double kOscillatorBound = 1e-5;
constexpr double kParticularBound = 1e-8;
constexpr double kFrequencyTol = 1e-4;

std::string ex(const Expr& e) { return to_infix(e); }

Json nan_safe(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

class Checks {
 public:
  void add(const std::string& name, bool ok, Json value, Json bound) {
    push(name, ok ? "pass" : "fail", std::move(value), std::move(bound), "");
  }
  void error(const std::string& name, const std::string& what) {
    push(name, "error", nullptr, nullptr, what);
  }
  void skip(const std::string& name, const std::string& reason) {
    push(name, "skipped", nullptr, nullptr, reason);
  }
  const Json& table() const { return table_; }

 private:
  void push(const std::string& name, const char* status, Json value, Json bound,
            const std::string& detail) {
    Json row;
    row["name"] = name;
    row["status"] = status;
    row["value"] = std::move(value);
    row["bound"] = std::move(bound);
    if (!detail.empty()) row["detail"] = detail;
    table_.push_back(std::move(row));
  }
  Json table_ = Json::array();
};

Json error_json(const std::exception& e) {
  Json j;
  j["error"] = e.what();
  if (auto* r = dynamic_cast<const ReductionError*>(&e)) j["step"] = r->step();
  return j;
}

// Runs f(0..n-1), concurrently when asked. Results keep their index order.
template <class F>
std::vector<Json> map_points(std::size_t n, bool parallel, F f) {
  std::vector<Json> out(n);
  if (!parallel || n < 2) {
    for (std::size_t i = 0; i < n; ++i) out[i] = f(i);
    return out;
  }
  std::vector<std::future<Json>> jobs;
  for (std::size_t i = 0; i < n; ++i)
    jobs.push_back(std::async(std::launch::async, f, i));
  for (std::size_t i = 0; i < n; ++i) out[i] = jobs[i].get();
  return out;
}

Env parameter_env(const ProblemSpec& spec) {
  Env env;
  auto bind = [&](const char* name, const Expr& e) {
    if (free_symbols(e).empty()) env[name] = eval_numeric(e, {});
  };
  bind("mu", spec.mu);
  bind("alpha", spec.alpha);
  bind("lambda", spec.lambda);
  bind("nu", spec.nu);
  return env;
}

Json parameters_json(const ProblemSpec& spec) {
  Json j;
  j["mu"] = ex(spec.mu);
  if (spec.family == Family::KeplerDrag || spec.family == Family::PowerLaw)
    j["alpha"] = ex(spec.alpha);
  if (spec.family == Family::MICZ) {
    j["lambda"] = ex(spec.lambda);
    j["nu"] = ex(spec.nu);
  }
  if (spec.g) j["g"] = ex(*spec.g);
  return j;
}

Json reduced_json(const ReducedSystem& rs) {
  Json j;
  j["pipeline"] = rs.pipeline;
  j["independent"] = rs.independent;
  j["dependent"] = rs.dependent;
  j["linearizable"] = rs.linearizable;
  j["equation"] = ex(rs.equation);
  j["omega_sq"] = ex(rs.omega_sq);
  j["forcing"] = ex(rs.forcing);
  j["u1"] = ex(rs.u1_def);
  j["u2"] = ex(rs.u2_def);
  if (!rs.particular.is_zero()) j["particular"] = ex(rs.particular);
  if (rs.angle_omega_sq) j["angle_omega_sq"] = ex(*rs.angle_omega_sq);
  if (!rs.omega_candidates.empty()) {
    Json c = Json::array();
    for (const auto& oc : rs.omega_candidates)
      c.push_back({{"name", oc.name}, {"omega_sq", ex(oc.omega_sq)}});
    j["omega_candidates"] = c;
  }
  Json consts = Json::object();
  for (const auto& [k, v] : rs.constants) consts[k] = ex(v);
  if (!consts.empty()) j["constants"] = consts;
  Json trace = Json::array();
  for (const auto& t : rs.trace) trace.push_back({{"label", t.label}, {"expr", ex(t.expr)}});
  j["trace"] = trace;
  return j;
}

Json generator_json(const Generator& g) {
  Json j;
  j["name"] = g.name;
  j["xi"] = ex(g.xi);
  Json etas = Json::array();
  for (const auto& e : g.etas) etas.push_back(ex(e));
  j["etas"] = etas;
  if (g.is_complex()) {
    j["xi_im"] = ex(*g.xi_im);
    Json im = Json::array();
    for (const auto& e : g.etas_im) im.push_back(ex(e));
    j["etas_im"] = im;
  }
  j["nonlocal"] = g.nonlocal;
  return j;
}

std::string residual_text(const std::vector<Expr>& rs) {
  std::string s;
  for (const auto& e : rs) s += (s.empty() ? "" : ", ") + ex(e);
  return "[" + s + "]";
}

bool has_nucci(Family f) { return f == Family::Kepler || f == Family::KeplerDrag; }

Json section_reduce(const RunConfig& cfg, Checks& checks) {
  Json out;
  std::optional<ReducedSystem> direct, nucci;

  auto certify = [&](const ReducedSystem& rs, const std::string& tag) {
    if (!rs.linearizable) {
      checks.skip("reduce." + tag + ".residual", "not linearizable");
      return;
    }
    try {
      Expr r = reduced_residual(rs);
      checks.add("reduce." + tag + ".residual", r.is_zero(), ex(r), "0");
      auto orig = residual_in_original_variables(rs, cfg.spec);
      bool zero = true;
      for (const auto& e : orig) zero = zero && e.is_zero();
      checks.add("reduce." + tag + ".original_variables", zero, residual_text(orig), "0");
    } catch (const std::exception& e) {
      checks.error("reduce." + tag + ".residual", e.what());
    }
  };

  try {
    direct = reduce_direct(cfg.spec);
    out["direct"] = reduced_json(*direct);
    certify(*direct, "direct");
  } catch (const std::exception& e) {
    out["direct"] = error_json(e);
    checks.error("reduce.direct", e.what());
  }

  try {
    nucci = reduce_nucci(cfg.spec);
    out["nucci"] = reduced_json(*nucci);
    certify(*nucci, "nucci");
  } catch (const std::exception& e) {
    out["nucci"] = error_json(e);
    if (has_nucci(cfg.spec.family))
      checks.error("reduce.nucci", e.what());
    else
      out["nucci"]["applicable"] = false;
  }

  if (direct && nucci) {
    bool same = equals(direct->omega_sq, nucci->omega_sq);
    checks.add("reduce.pipelines_agree.omega_sq", same,
               ex(direct->omega_sq) + " vs " + ex(nucci->omega_sq), "equal");
  }
  return out;
}

// Original-variable catalog and the spec used to back-transform it.
std::optional<std::pair<std::vector<Generator>, ProblemSpec>> original_catalog(
    const ProblemSpec& spec, std::string& reason) {
  if (spec.family == Family::Kepler)
    return std::make_pair(kepler_catalog(spec.mu), ProblemSpec::micz(spec.mu, Expr(0)));
  if (spec.family == Family::MICZ) {
    try {
      return std::make_pair(micz_catalog(spec), spec);
    } catch (const SymmetryError& e) {
      reason = e.what();
      return std::nullopt;
    }
  }
  reason = "no original-variable catalog for " + family_name(spec.family);
  return std::nullopt;
}

Json section_symmetries(const RunConfig& cfg, Checks& checks) {
  Json out;
  ReducedSystem rs;
  try {
    rs = reduce_direct(cfg.spec);
  } catch (const std::exception& e) {
    checks.error("symmetries.reduce", e.what());
    out["error"] = error_json(e);
    return out;
  }
  if (!rs.linearizable) {
    checks.skip("symmetries.reduced", "not linearizable");
    out["reduced"] = {{"skipped", "not linearizable"}};
    return out;
  }

  try {
    auto cat = reduced_catalog(rs);
    Json gens = Json::array();
    for (const auto& g : cat) {
      Json j = generator_json(g);
      bool ok = is_symmetry(g, rs);
      j["determining_residual_zero"] = ok;
      checks.add("symmetries.reduced." + g.name, ok, ok ? "0" : "nonzero", "0");
      gens.push_back(std::move(j));
    }
    int rank = coefficient_rank(cat, static_cast<unsigned>(cfg.seed));
    checks.add("symmetries.reduced.count", cat.size() == 9, cat.size(), 9);
    checks.add("symmetries.reduced.rank", rank == 9, rank, 9);
    out["reduced"] = {{"generators", gens}, {"rank", rank}};
  } catch (const std::exception& e) {
    checks.error("symmetries.reduced", e.what());
    out["reduced"] = error_json(e);
  }

  std::string reason;
  auto orig = original_catalog(cfg.spec, reason);
  if (!orig) {
    out["original"] = {{"skipped", reason}};
    return out;
  }
  try {
    const auto& [cat, spec_b] = *orig;
    auto results = check_back_transforms(cat, spec_b, reduce_direct(spec_b));
    Json list = Json::array();
    for (const auto& c : results) {
      Json j;
      j["original"] = generator_json(c.original);
      j["reduced"] = generator_json(c.reduced);
      j["status"] = status_name(c.status);
      j["residual"] = residual_text(c.residual);
      list.push_back(std::move(j));

      const std::string name = "symmetries.back_transform." + c.original.name;
      if (c.original.name == "Λ2") {
        bool rotation = c.reduced.xi.is_one();
        for (const auto& e : c.reduced.etas) rotation = rotation && e.is_zero();
        checks.add(name, rotation, ex(c.reduced.xi), "1");
      } else if (c.original.name == "Λ4+" || c.original.name == "Λ4-") {
        checks.add(name, c.status == BackTransformStatus::Symmetry,
                   status_name(c.status), status_name(BackTransformStatus::Symmetry));
      }
    }
    out["original"] = {{"generators", list}};
  } catch (const std::exception& e) {
    checks.error("symmetries.back_transform", e.what());
    out["original"] = error_json(e);
  }
  return out;
}

Json frequency_point(const ProblemSpec& spec, const RunConfig& cfg) {
  Json j;
  j["parameters"] = parameters_json(spec);
  try {
    auto rs = reduce_direct(spec);
    auto tr = integrate_orbit(spec, cfg.initial, cfg.t_end, cfg.integrator);
    auto v = estimate_frequency(tr, rs, kFrequencyTol);
    j["measured"] = v.measured;
    Json c = Json::array();
    for (std::size_t i = 0; i < v.candidates.size(); ++i)
      c.push_back({{"name", v.candidates[i].first},
                   {"predicted", nan_safe(v.candidates[i].second)},
                   {"match", static_cast<bool>(v.matches[i])}});
    j["candidates"] = c;
    j["selected"] = v.selected ? Json(*v.selected) : Json(nullptr);
  } catch (const std::exception& e) {
    j["error"] = e.what();
  }
  return j;
}

Json section_frequency(const RunConfig& cfg, Checks& checks) {
  std::vector<ProblemSpec> points = {cfg.spec};
  points.insert(points.end(), cfg.sweep.begin(), cfg.sweep.end());
  auto results = map_points(points.size(), cfg.parallel, [&](std::size_t i) {
    return frequency_point(points[i], cfg);
  });

  Json out;
  out["points"] = results;
  std::optional<std::string> verdict;
  bool consistent = true;
  std::string detail;
  for (const auto& r : results) {
    if (r.contains("error")) {
      consistent = false;
      detail = r["error"].get<std::string>();
      break;
    }
    if (r["selected"].is_null()) {
      consistent = false;
      break;
    }
    auto sel = r["selected"].get<std::string>();
    if (verdict && *verdict != sel) consistent = false;
    verdict = sel;
  }
  out["consistent"] = consistent;
  out["verdict"] = consistent && verdict ? Json(*verdict) : Json(nullptr);
  if (!detail.empty())
    checks.error("verify.frequency", detail);
  else
    checks.add("verify.frequency", consistent, out["verdict"], "one candidate at every point");
  return out;
}

Json section_defects(const Trajectory& tr, const ReducedSystem& rs, bool parallel) {
  auto gens = reduced_catalog(rs);
  gens.push_back(make_generator("u1_" + rs.independent, gens.front().chart,
                                Expr::symbol("u1"), {Expr(0), Expr(0)}));
  auto rows = map_points(gens.size(), parallel, [&](std::size_t i) {
    Json j;
    j["name"] = gens[i].name;
    try {
      auto d = symmetry_defect(tr, rs, gens[i], 1e-3);
      j["defect"] = nan_safe(d.defect);
      j["defect_half"] = nan_safe(d.defect_half);
      j["ratio"] = nan_safe(d.ratio);
      j["verdict"] = d.uninformative ? "below_floor"
                     : d.accepted    ? "second_order"
                                     : "not_second_order";
    } catch (const std::exception& e) {
      j["error"] = e.what();
    }
    return j;
  });
  rows.back()["control"] = true;
  return rows;
}

Json section_verify(const RunConfig& cfg, Checks& checks) {
  Json out;
  const ProblemSpec& spec = cfg.spec;
  Env params = parameter_env(spec);

  Trajectory tr;
  try {
    tr = integrate_orbit(spec, cfg.initial, cfg.t_end, cfg.integrator);
  } catch (const std::exception& e) {
    checks.error("verify.integrate", e.what());
    out["orbit"] = error_json(e);
    return out;
  }
  out["orbit"] = {{"samples", tr.samples.size()},
                  {"t_end", tr.t_end()},
                  {"singular", tr.singular},
                  {"stop_reason", tr.stop_reason}};

  for (const auto& q : conserved_quantities(spec)) {
    try {
      double d = conserved_drift(tr, q);
      checks.add("verify.conservation." + q.name, d < kDriftBound, nan_safe(d), kDriftBound);
    } catch (const std::exception& e) {
      checks.error("verify.conservation." + q.name, e.what());
    }
  }
  if (spec.family == Family::Kepler) {
    double mu = params.at("mu");
    auto energy = [&](const OrbitState& s) {
      return 0.5 * (s.r_dot * s.r_dot + s.r * s.r * s.angle_dot * s.angle_dot) - mu / s.r;
    };
    double e0 = energy(tr.samples.front()), d = 0, scale = std::max(1.0, std::abs(e0));
    for (const auto& s : tr.samples) {
      d = std::max(d, std::abs(energy(s) - e0));
      scale = std::max(scale, mu / s.r);
    }
    d /= scale;
    checks.add("verify.conservation.energy", d < kDriftBound, nan_safe(d), kDriftBound);
  }

  ReducedSystem rs;
  try {
    rs = reduce_direct(spec);
  } catch (const std::exception& e) {
    checks.error("verify.reduce", e.what());
    return out;
  }

  std::string skip;
  if (!rs.linearizable) {
    skip = "not linearizable";
  } else {
    Env env = phase_env(tr, tr.samples.front());
    env.insert(params.begin(), params.end());
    double u2 = eval_numeric(rs.u2_in_phase(), env);
    out["u2"] = u2;
    if (std::abs(u2) < 1e-12)
      skip = "u₂=0";
    else if (tr.singular)
      skip = "orbit reached r_min";
    params["L0"] = u2;
  }

  std::vector<std::pair<std::string, std::optional<ReducedSystem>>> pipelines = {
      {"direct", rs}};
  if (has_nucci(spec.family)) {
    try {
      pipelines.emplace_back("nucci", reduce_nucci(spec));
    } catch (const std::exception& e) {
      checks.error("verify.oscillator.nucci", e.what());
    }
  }
  for (const auto& [tag, p] : pipelines) {
    const std::string name = "verify.oscillator." + tag;
    if (!skip.empty()) {
      checks.skip(name, skip);
      continue;
    }
    try {
      auto fit = oscillator_residual(tr, *p);
      checks.add(name, fit.residual < kOscillatorBound, nan_safe(fit.residual),
                 kOscillatorBound);
    } catch (const std::exception& e) {
      checks.error(name, e.what());
    }
  }

  if (!skip.empty()) {
    checks.skip("verify.frequency", skip);
  } else {
    out["frequency"] = section_frequency(cfg, checks);
    try {
      out["symmetry_defects"] = section_defects(tr, rs, cfg.parallel);
    } catch (const std::exception& e) {
      out["symmetry_defects"] = error_json(e);
    }
  }

  if (spec.family == Family::KeplerDrag) {
    if (!skip.empty()) {
      checks.skip("verify.particular_solution", skip);
    } else {
      try {
        double r = particular_residual(rs, params);
        checks.add("verify.particular_solution", r < kParticularBound, nan_safe(r),
                   kParticularBound);
      } catch (const std::exception& e) {
        checks.error("verify.particular_solution", e.what());
      }
    }
  }
  return out;
}

Json section_orbit(const RunConfig& cfg, Checks& checks, std::string& csv) {
  try {
    auto tr = integrate_orbit(cfg.spec, cfg.initial, cfg.t_end, cfg.integrator);
    csv = trajectory_csv(tr);
    return {{"samples", tr.samples.size()},
            {"t_end", tr.t_end()},
            {"singular", tr.singular},
            {"stop_reason", tr.stop_reason},
            {"csv", cfg.csv ? Json(*cfg.csv) : Json("stdout")}};
  } catch (const std::exception& e) {
    checks.error("orbit.integrate", e.what());
    return error_json(e);
  }
}

}  // namespace

std::optional<Command> parse_command(std::string_view name) {
  if (name == "reduce") return Command::Reduce;
  if (name == "symmetries") return Command::Symmetries;
  if (name == "verify") return Command::Verify;
  if (name == "orbit") return Command::Orbit;
  if (name == "full") return Command::Full;
  return std::nullopt;
}

std::string command_name(Command c) {
  switch (c) {
    case Command::Reduce: return "reduce";
    case Command::Symmetries: return "symmetries";
    case Command::Verify: return "verify";
    case Command::Orbit: return "orbit";
    case Command::Full: return "full";
  }
  return "";
}

Report run(Command command, const RunConfig& cfg) {
  Report rep;
  Checks checks;
  Json& j = rep.json;
  j["schema_version"] = kSchemaVersion;
  j["command"] = command_name(command);
  j["seed"] = cfg.seed;

  Json problem;
  problem["family"] = family_name(cfg.spec.family);
  problem["parameters"] = cfg.parameters;
  problem["exact"] = parameters_json(cfg.spec);
  if (cfg.spec.family == Family::MICZ) problem["special_case"] = cfg.spec.special_case();
  problem["initial"] = {{"r", cfg.initial.r},
                        {"r_dot", cfg.initial.r_dot},
                        {"angle", cfg.initial.angle},
                        {"angle_dot", cfg.initial.angle_dot}};
  problem["integrator"] = {{"tol", cfg.integrator.tol},
                           {"r_min", cfg.integrator.r_min},
                           {"h_max", cfg.integrator.h_max},
                           {"t_end", cfg.t_end}};
  j["problem"] = problem;

  const bool full = command == Command::Full;
  if (full || command == Command::Reduce) j["reduce"] = section_reduce(cfg, checks);
  if (full || command == Command::Symmetries) j["symmetries"] = section_symmetries(cfg, checks);
  if (full || command == Command::Verify) j["verify"] = section_verify(cfg, checks);
  if (command == Command::Orbit || (full && cfg.csv)) j["orbit"] = section_orbit(cfg, checks, rep.csv);

  int passed = 0, failed = 0, errored = 0, skipped = 0;
  for (const auto& row : checks.table()) {
    const auto& s = row["status"].get_ref<const std::string&>();
    if (s == "pass") ++passed;
    else if (s == "fail") ++failed;
    else if (s == "error") ++errored;
    else ++skipped;
  }
  j["checks"] = checks.table();
  j["summary"] = {{"passed", passed}, {"failed", failed}, {"errored", errored}, {"skipped", skipped}};
  rep.exit_code = failed + errored == 0 ? 0 : 1;
  j["exit_code"] = rep.exit_code;
  return rep;
}

std::string trajectory_csv(const Trajectory& traj) {
  std::string out = "t,r,r_dot,angle,angle_dot\n";
  char line[160];
  for (const auto& s : traj.samples) {
    std::snprintf(line, sizeof line, "%.17g,%.17g,%.17g,%.17g,%.17g\n", s.t, s.r,
                  s.r_dot, s.angle, s.angle_dot);
    out += line;
  }
  return out;
}

}  // namespace symreduce::app
