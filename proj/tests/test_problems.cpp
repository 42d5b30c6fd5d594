#include "doctest.h"
#include "symreduce/problems.hpp"

using namespace symreduce;

namespace {
Expr P(std::string_view s) { return parse_infix(s); }
}  // namespace

TEST_CASE("family names round-trip") {
  for (auto f : {Family::Kepler, Family::KeplerDrag, Family::PowerLaw,
                 Family::ConeDrag, Family::MICZ})
    CHECK(parse_family(family_name(f)) == f);
  CHECK_FALSE(parse_family("hydrogen").has_value());
}

TEST_CASE("Kepler component equations") {
  auto eom = equations_of_motion(ProblemSpec::kepler());
  CHECK(equals(eom.radial, P("r_ddot - r*theta_dot^2 + mu/r^2")));
  CHECK(equals(eom.transverse, P("r*theta_ddot + 2*r_dot*theta_dot")));
  REQUIRE(eom.chart.size() == 3);
  CHECK(eom.chart[0].name == "t");
}

TEST_CASE("drag component equations") {
  auto eom = equations_of_motion(ProblemSpec::kepler_drag());
  CHECK(equals(eom.radial,
               P("r_ddot - r*theta_dot^2 + alpha*r_dot/r^2 + mu/r^2")));
  CHECK(equals(eom.transverse,
               P("r*theta_ddot + 2*r_dot*theta_dot + alpha*theta_dot/r")));
}

TEST_CASE("family coincidences") {
  auto kepler = equations_of_motion(ProblemSpec::kepler());
  auto power = equations_of_motion(
      ProblemSpec::power_law(Expr::symbol("mu"), Rational(-3)));
  CHECK(equals(kepler.radial, power.radial));
  CHECK(equals(kepler.transverse, power.transverse));

  auto drag0 = equations_of_motion(
      ProblemSpec::kepler_drag(Expr::symbol("mu"), Expr(0)));
  CHECK(equals(kepler.radial, drag0.radial));
  CHECK(equals(kepler.transverse, drag0.transverse));
}

TEST_CASE("power law radial force") {
  auto eom = equations_of_motion(
      ProblemSpec::power_law(Expr::symbol("mu"), Rational(-4)));
  CHECK(equals(eom.radial, P("r_ddot - r*theta_dot^2 + mu/r^3")));
}

TEST_CASE("cone drag components carry the g(t) friction factor") {
  auto spec = ProblemSpec::cone_drag(Expr::symbol("mu"), P("exp(-t)"));
  auto eom = equations_of_motion(spec);
  Expr F = P("-1/2 + 3*r_dot/(2*r)");
  CHECK(equals(eom.radial,
               P("r_ddot - r*theta_dot^2 + mu*exp(-t)*r") - F * P("r_dot")));
  CHECK(equals(eom.transverse, P("r*theta_ddot + 2*r_dot*theta_dot") -
                                   F * P("r*theta_dot")));
}

TEST_CASE("MICZ on its cone") {
  auto spec = ProblemSpec::micz();
  CHECK(spec.special_case());
  auto eom = equations_of_motion(spec);
  CHECK(equals(eom.radial,
               P("r_ddot - r*S^2*phi_dot^2 + mu/r^2 - lambda^2/r^3")));
  CHECK(equals(eom.transverse, P("r*phi_ddot + 2*r_dot*phi_dot")));

  auto general = ProblemSpec::micz(Expr::symbol("mu"), Expr::symbol("lambda"),
                                   Expr::symbol("nu"));
  CHECK_FALSE(general.special_case());
  auto exact = ProblemSpec::micz(Expr(1), Expr(Rational(1, 2)),
                                 Expr(Rational(-1, 8)));
  CHECK(exact.special_case());
}

TEST_CASE("spec validation") {
  ProblemSpec cone;
  cone.family = Family::ConeDrag;
  CHECK_THROWS_WITH_AS(equations_of_motion(cone), "cone_drag requires g(t)",
                       ProblemError);
  cone.g = P("1 + r");
  CHECK_THROWS_AS(cone.validate(), ProblemError);

  ProblemSpec power;
  power.family = Family::PowerLaw;
  power.alpha = Expr::symbol("alpha");
  CHECK_THROWS_AS(power.validate(), ProblemError);
}

TEST_CASE("conserved quantity lists") {
  auto k = conserved_quantities(ProblemSpec::kepler());
  REQUIRE(k.size() == 1);
  CHECK(equals(k[0].expression, P("r^2*theta_dot")));

  auto d = conserved_quantities(ProblemSpec::kepler_drag());
  REQUIRE(d.size() == 1);
  CHECK(equals(d[0].expression, P("r^2*theta_dot + alpha*theta")));

  auto m = conserved_quantities(ProblemSpec::micz());
  REQUIRE(m.size() == 2);
  CHECK(m[1].name == "P");
  Expr L = m[0].expression;
  CHECK(equals(m[1].expression * m[1].expression, L * L + P("lambda^2")));
}

TEST_CASE("every conserved quantity is constant along the motion") {
  std::vector<ProblemSpec> specs = {
      ProblemSpec::kepler(),
      ProblemSpec::kepler_drag(),
      ProblemSpec::power_law(Expr::symbol("mu"), Rational(-4)),
      ProblemSpec::power_law(Expr::symbol("mu"), Rational(-2)),
      ProblemSpec::cone_drag(Expr::symbol("mu"), P("exp(-t)")),
      ProblemSpec::cone_drag(Expr::symbol("mu"), P("1 + t^2")),
      ProblemSpec::micz(),
      ProblemSpec::micz(Expr::symbol("mu"), Expr::symbol("lambda"),
                        Expr::symbol("nu")),
  };
  for (const auto& spec : specs) {
    for (const auto& q : conserved_quantities(spec)) {
      INFO(family_name(spec.family) << " " << q.name);
      CHECK(time_derivative_on_shell(q.expression, spec).is_zero());
    }
  }
}

TEST_CASE("angular momentum is not conserved under drag") {
  auto spec = ProblemSpec::kepler_drag();
  CHECK_FALSE(time_derivative_on_shell(P("r^2*theta_dot"), spec).is_zero());
}
