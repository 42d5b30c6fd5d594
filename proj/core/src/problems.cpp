#include "symreduce/problems.hpp"

#include <algorithm>

namespace symreduce {

namespace names {
std::string dot(const std::string& v) { return v + "_dot"; }
std::string ddot(const std::string& v) { return v + "_ddot"; }
}  // namespace names

namespace {

constexpr std::pair<Family, std::string_view> kFamilies[] = {
    {Family::Kepler, "kepler"},
    {Family::KeplerDrag, "kepler_drag"},
    {Family::PowerLaw, "power_law"},
    {Family::ConeDrag, "cone_drag"},
    {Family::MICZ, "micz"},
};

Expr S(const char* n) { return Expr::symbol(n, SymbolRole::Dependent); }

}  // namespace

std::string family_name(Family f) {
  for (const auto& [fam, name] : kFamilies)
    if (fam == f) return std::string(name);
  return "unknown";
}

std::optional<Family> parse_family(std::string_view name) {
  for (const auto& [fam, n] : kFamilies)
    if (n == name) return fam;
  return std::nullopt;
}

ProblemSpec ProblemSpec::kepler(Expr mu) {
  ProblemSpec s;
  s.family = Family::Kepler;
  s.mu = std::move(mu);
  return s;
}

ProblemSpec ProblemSpec::kepler_drag(Expr mu, Expr alpha) {
  ProblemSpec s;
  s.family = Family::KeplerDrag;
  s.mu = std::move(mu);
  s.alpha = std::move(alpha);
  return s;
}

ProblemSpec ProblemSpec::power_law(Expr mu, Rational exponent) {
  ProblemSpec s;
  s.family = Family::PowerLaw;
  s.mu = std::move(mu);
  s.alpha = Expr(exponent);
  return s;
}

ProblemSpec ProblemSpec::cone_drag(Expr mu, Expr g) {
  ProblemSpec s;
  s.family = Family::ConeDrag;
  s.mu = std::move(mu);
  s.g = std::move(g);
  return s;
}

ProblemSpec ProblemSpec::micz(Expr mu, Expr lambda, std::optional<Expr> nu) {
  ProblemSpec s;
  s.family = Family::MICZ;
  s.mu = std::move(mu);
  s.lambda = std::move(lambda);
  s.nu = nu ? *nu : canonicalize(Expr(Rational(-1, 2)) * s.lambda * s.lambda);
  return s;
}

bool ProblemSpec::special_case() const {
  return family == Family::MICZ &&
         canonicalize(Expr(2) * nu + lambda * lambda).is_zero();
}

std::string ProblemSpec::angle() const {
  return family == Family::MICZ ? "phi" : "theta";
}

void ProblemSpec::validate() const {
  static const std::vector<std::string> phase = {
      "r", "r_dot", "r_ddot", "theta", "theta_dot", "theta_ddot",
      "phi", "phi_dot", "phi_ddot"};
  auto no_phase = [&](const Expr& e, const char* what) {
    for (const auto& s : free_symbols(e))
      if (std::find(phase.begin(), phase.end(), s) != phase.end() ||
          s == names::t)
        throw ProblemError(std::string(what) + " may not depend on " + s);
  };
  no_phase(mu, "mu");
  no_phase(alpha, "alpha");
  no_phase(lambda, "lambda");
  no_phase(nu, "nu");
  if (family == Family::PowerLaw && !canonicalize(alpha).is_constant())
    throw ProblemError("power_law exponent alpha must be a rational constant");
  if (family == Family::ConeDrag) {
    if (!g) throw ProblemError("cone_drag requires g(t)");
    for (const auto& s : free_symbols(*g))
      if (std::find(phase.begin(), phase.end(), s) != phase.end())
        throw ProblemError("g may depend on t only, found " + s);
    if (canonicalize(*g).is_zero()) throw ProblemError("g must be positive");
  } else if (g) {
    throw ProblemError("g is only meaningful for cone_drag");
  }
}

ComponentEquations equations_of_motion(const ProblemSpec& spec) {
  spec.validate();
  const std::string ang = spec.angle();
  Expr r = S(names::r), rd = S(names::r_dot), rdd = S(names::r_ddot);
  Expr ad = S(names::dot(ang).c_str()), add = S(names::ddot(ang).c_str());
  Expr inv_r = pow(r, Rational(-1));
  Expr inv_r2 = pow(r, Rational(-2));

  Expr radial, transverse;
  switch (spec.family) {
    case Family::Kepler:
      radial = rdd - r * ad * ad + spec.mu * inv_r2;
      transverse = r * add + Expr(2) * rd * ad;
      break;
    case Family::KeplerDrag:
      radial = rdd - r * ad * ad + spec.alpha * rd * inv_r2 + spec.mu * inv_r2;
      transverse = r * add + Expr(2) * rd * ad + spec.alpha * ad * inv_r;
      break;
    case Family::PowerLaw: {
      Rational k = canonicalize(spec.alpha).value();
      radial = rdd - r * ad * ad + spec.mu * pow(r, k + Rational(1));
      transverse = r * add + Expr(2) * rd * ad;
      break;
    }
    case Family::ConeDrag: {
      Expr g = *spec.g;
      Expr gdot = differentiate(g, names::t);
      Expr F = gdot / (Expr(2) * g) + Expr(Rational(3, 2)) * rd * inv_r;
      radial = rdd - r * ad * ad - F * rd + spec.mu * g * r;
      transverse = r * add + Expr(2) * rd * ad - F * r * ad;
      break;
    }
    case Family::MICZ: {
      Expr s = Expr::symbol(names::cone_sine);
      radial = rdd - r * s * s * ad * ad + spec.mu * inv_r2 +
               Expr(2) * spec.nu * pow(r, Rational(-3));
      transverse = r * add + Expr(2) * rd * ad;
      break;
    }
  }
  return {canonicalize(radial), canonicalize(transverse),
          {Symbol{names::t, SymbolRole::Independent},
           Symbol{names::r, SymbolRole::Dependent},
           Symbol{ang, SymbolRole::Dependent}}};
}

std::vector<ConservedQuantity> conserved_quantities(const ProblemSpec& spec) {
  spec.validate();
  const std::string ang = spec.angle();
  Expr r = S(names::r);
  Expr ad = S(names::dot(ang).c_str());
  Expr L = r * r * ad;
  switch (spec.family) {
    case Family::Kepler:
    case Family::PowerLaw:
      return {{"L", canonicalize(L)}};
    case Family::KeplerDrag:
      return {{"L + alpha*theta", canonicalize(L + spec.alpha * S("theta"))}};
    case Family::ConeDrag:
      return {{"A", canonicalize(L * pow(*spec.g * pow(r, Rational(3)),
                                         Rational(-1, 2)))}};
    case Family::MICZ: {
      Expr Lm = canonicalize(L * Expr::symbol(names::cone_sine));
      return {{"L", Lm},
              {"P", canonicalize(sqrt(Lm * Lm + spec.lambda * spec.lambda))}};
    }
  }
  return {};
}

JetChain time_jets(const ProblemSpec& spec) {
  const std::string ang = spec.angle();
  return {{names::r, names::r_dot},
          {names::r_dot, names::r_ddot},
          {ang, names::dot(ang)},
          {names::dot(ang), names::ddot(ang)}};
}

Bindings on_shell(const ProblemSpec& spec) {
  auto eom = equations_of_motion(spec);
  const std::string ang = spec.angle();
  return {{names::r_ddot, solve_linear(eom.radial, names::r_ddot)},
          {names::ddot(ang), solve_linear(eom.transverse, names::ddot(ang))}};
}

Expr time_derivative_on_shell(const Expr& e, const ProblemSpec& spec) {
  Expr d = total_derivative(e, names::t, time_jets(spec));
  return substitute(d, on_shell(spec));
}

}  // namespace symreduce
