#include <cmath>

#include "doctest.h"
#include "oracles.hpp"
#include "symreduce/reduce.hpp"

using namespace symreduce;

namespace {
Expr P(std::string_view s) { return parse_infix(s); }
Expr mu() { return Expr::symbol("mu"); }

const Expr& trace_at(const ReducedSystem& rs, const std::string& label) {
  for (const auto& t : rs.trace)
    if (t.label == label) return t.expr;
  FAIL("missing trace label " << label);
  static Expr none;
  return none;
}
}  // namespace

TEST_CASE("w-variable systems") {
  auto k = nucci_w_system(ProblemSpec::kepler());
  CHECK(equals(k.rhs("w1"), P("w3")));
  CHECK(equals(k.rhs("w2"), P("w4")));
  CHECK(equals(k.rhs("w3"), P("w1*w4^2 - mu/w1^2")));
  CHECK(equals(k.rhs("w4"), P("-2*w3*w4/w1")));

  auto d = nucci_w_system(ProblemSpec::kepler_drag());
  CHECK(equals(d.rhs("w3"), P("w1*w4^2 - mu/w1^2 - alpha*w3/w1^2")));
  CHECK(equals(d.rhs("w4"), P("-2*w3*w4/w1 - alpha*w4/w1^2")));

  auto d0 = nucci_w_system(ProblemSpec::kepler_drag(mu(), Expr(0)));
  for (const char* w : {"w1", "w2", "w3", "w4"})
    CHECK(equals(d0.rhs(w), k.rhs(w)));
}

TEST_CASE("w-variable pipeline rejects other families") {
  try {
    nucci_w_system(ProblemSpec::micz());
    FAIL("expected an error");
  } catch (const ReductionError& e) {
    CHECK(e.step() == "w_system");
  }
}

TEST_CASE("angle as the independent variable") {
  auto a = change_independent(nucci_w_system(ProblemSpec::kepler()));
  REQUIRE(a.equations.size() == 3);
  CHECK(equals(solve_linear(a.equations[0], "w1'"), P("w3/w4")));
  CHECK(equals(solve_linear(a.equations[1], "w3'"),
               P("w1*w4 - mu/(w1^2*w4)")));
  CHECK(equals(solve_linear(a.equations[2], "w4'"), P("-2*w3/w1")));
  CHECK(a.validity_conditions == std::vector<std::string>{"w4 != 0"});

  auto a0 = change_independent(
      nucci_w_system(ProblemSpec::kepler_drag(mu(), Expr(0))));
  for (std::size_t i = 0; i < 3; ++i)
    CHECK(equals(a0.equations[i], a.equations[i]));
}

TEST_CASE("Kepler elimination") {
  auto rs = reduce_nucci(ProblemSpec::kepler());
  CHECK(equals(rs.u1_def, P("mu - u2^2/w1")));
  CHECK(equals(rs.u2_def, P("w1^2*w4")));
  CHECK(rs.omega_sq.is_one());
  CHECK(rs.forcing.is_zero());
  CHECK(trace_at(rs, "exact_derivative").is_zero());
  CHECK(equals(trace_at(rs, "reciprocal_form"),
               P("u2^2*(w1''/w1^2 - 2*w1'^2/w1^3) - u2^2/w1 + mu")));
  CHECK(trace_at(rs, "reduced_pair").is_zero());
}

TEST_CASE("drag elimination") {
  auto rs = reduce_nucci(ProblemSpec::kepler_drag());
  CHECK(equals(rs.u2_def, P("w1^2*w4 + alpha*y + beta")));
  Expr v = integral(P("sin(y - s)*(alpha*s + beta)^(-2)"), "s", Expr(0),
                    Expr::symbol("y"));
  CHECK(equals(rs.u1_def, P("1/w1") - mu() * v));
  CHECK(equals(trace_at(rs, "exact_derivative"), P("-alpha")));
  CHECK(equals(trace_at(rs, "w4_equation"), P("-2*w1'*w4/w1 - alpha/w1^2")));
}

TEST_CASE("drag elimination at zero drag collapses to the Kepler constant") {
  auto rs = reduce_nucci(ProblemSpec::kepler_drag(mu(), Expr(0)));
  // With β = −L the integral node is μ(1 − cos y)/L²; the cos y part is a
  // homogeneous solution.
  for (double y : {0.3, 1.1, 2.5, 4.0}) {
    Env env{{"mu", 1.3}, {"beta", -0.9}, {"w1", 0.7}, {"y", y}};
    double L = 0.9;
    double got = eval_numeric(rs.u1_def, env);
    double homogeneous = 1.3 * std::cos(y) / (L * L);
    double closed = 1 / 0.7 - 1.3 / (L * L) + homogeneous;
    CHECK(std::fabs(got - closed) < 1e-8);
  }
}

TEST_CASE("elimination reports the first failing step") {
  auto a = change_independent(nucci_w_system(ProblemSpec::kepler()));
  a.equations[2] = canonicalize(a.equations[2] + P("w3/w1"));
  try {
    nucci_eliminate(a, ProblemSpec::kepler());
    FAIL("expected an error");
  } catch (const ReductionError& e) {
    CHECK(e.step() == "w4_equation");
  }
}

TEST_CASE("direct reduction goldens") {
  auto k = reduce_direct(ProblemSpec::kepler());
  CHECK(equals(k.u1_def, P("u - mu*L^(-2)")));
  CHECK(k.u2_symbol == "L");
  CHECK(equals(k.u2_def, P("r^2*theta_dot")));
  CHECK(k.omega_sq.is_one());
  CHECK(equals(k.equation, P("u'' + u - mu*L^(-2)")));

  auto p4 = reduce_direct(ProblemSpec::power_law(mu(), Rational(-4)));
  CHECK(equals(p4.omega_sq, P("1 - mu*L^(-2)")));
  CHECK(equals(p4.u1_def, P("u")));

  auto p3 = reduce_direct(ProblemSpec::power_law(mu(), Rational(-3)));
  CHECK(equals(p3.equation, k.equation));

  auto cone = reduce_direct(ProblemSpec::cone_drag(mu(), P("exp(-t)")));
  CHECK(equals(cone.u1_def, P("u - mu*A^(-2)")));
  CHECK(equals(cone.u2_def, P("r^2*theta_dot*(exp(-t)*r^3)^(-1/2)")));

  auto micz = reduce_direct(ProblemSpec::micz());
  CHECK(equals(micz.u1_def, P("u - mu/(L^2 + lambda^2)")));
  CHECK(micz.omega_sq.is_one());
}

TEST_CASE("inverse-power laws outside k in {0, -1} stay nonlinear") {
  auto p2 = reduce_direct(ProblemSpec::power_law(mu(), Rational(-2)));
  CHECK_FALSE(p2.linearizable);
  CHECK(equals(p2.equation, P("u'' + u - mu*L^(-2)*u^(-1)")));
}

TEST_CASE("MICZ with general nu records both frequency readings") {
  auto spec = ProblemSpec::micz(mu(), Expr::symbol("lambda"),
                                Expr::symbol("nu"));
  auto rs = reduce_direct(spec);
  REQUIRE(rs.angle_omega_sq.has_value());
  CHECK(rs.independent == "x");
  CHECK(equals(*rs.angle_omega_sq, P("(L^2 - 2*nu)/(L^2 + lambda^2)")));
  REQUIRE(rs.omega_candidates.size() == 2);
  CHECK(equals(rs.omega_candidates[0].omega_sq,
               P("L^2*(L^2 - 2*nu)/(L^2 + lambda^2)")));
  CHECK(equals(rs.forcing, P("mu/(L^2 + lambda^2)") / *rs.angle_omega_sq));
}

TEST_CASE("limit coherence") {
  auto k = reduce_direct(ProblemSpec::kepler());
  auto d0 = reduce_direct(ProblemSpec::kepler_drag(mu(), Expr(0)));
  CHECK(equals(d0.omega_sq, k.omega_sq));
  CHECK(equals(substitute(d0.forcing, {{"L0", Expr::symbol("L")}}),
               k.forcing));

  auto m0 = reduce_direct(ProblemSpec::micz(mu(), Expr(0), Expr(0)));
  CHECK(equals(m0.omega_sq, k.omega_sq));
  CHECK(equals(m0.forcing, k.forcing));
}

TEST_CASE("both pipelines share the frequency") {
  for (auto spec : {ProblemSpec::kepler(), ProblemSpec::kepler_drag()})
    CHECK(equals(reduce_nucci(spec).omega_sq, reduce_direct(spec).omega_sq));
}

TEST_CASE("particular solutions") {
  CHECK(equals(particular_solution(ProblemSpec::kepler()), P("mu*L^(-2)")));
  Expr v = integral(P("sin(theta - eta)*(L0 - alpha*eta)^(-2)"), "eta",
                    Expr(0), Expr::symbol("theta"));
  CHECK(equals(particular_solution(ProblemSpec::kepler_drag()), mu() * v));
  CHECK_THROWS_AS(
      particular_solution(ProblemSpec::power_law(mu(), Rational(-4))),
      ReductionError);
}

TEST_CASE("zero-drag particular solution against differences") {
  Expr v = particular_solution(ProblemSpec::kepler_drag(mu(), Expr(0)));
  const double m = 1.0, L = 1.3;
  for (int i = 0; i < 50; ++i) {
    double th = 0.1 + 0.12 * i;
    auto f = [&](double x) {
      return eval_numeric(v, {{"mu", m}, {"L0", L}, {"theta", x}});
    };
    double res = oracle::central_diff2(f, th, 1e-3) + f(th) - m / (L * L);
    CHECK(std::fabs(res) < 1e-8);
    CHECK(f(th) == doctest::Approx(m / (L * L) * (1 - std::cos(th)))
                       .epsilon(1e-10));
  }
}

TEST_CASE("reduced pair vanishes in the original variables") {
  std::vector<ProblemSpec> specs = {
      ProblemSpec::kepler(),
      ProblemSpec::kepler_drag(),
      ProblemSpec::power_law(mu(), Rational(-4)),
      ProblemSpec::power_law(mu(), Rational(-3)),
      ProblemSpec::cone_drag(mu(), P("exp(-t)")),
      ProblemSpec::cone_drag(mu(), P("1 + t^2")),
      ProblemSpec::micz(),
      ProblemSpec::micz(mu(), Expr::symbol("lambda"), Expr::symbol("nu")),
  };
  for (const auto& spec : specs) {
    INFO(family_name(spec.family));
    auto res = residual_in_original_variables(reduce_direct(spec), spec);
    CHECK(res[0].is_zero());
    CHECK(res[1].is_zero());
  }
  for (auto spec : {ProblemSpec::kepler(), ProblemSpec::kepler_drag()}) {
    auto res = residual_in_original_variables(reduce_nucci(spec), spec);
    CHECK(res[0].is_zero());
    CHECK(res[1].is_zero());
  }
}

TEST_CASE("a wrong frequency leaves a residual") {
  auto spec = ProblemSpec::power_law(mu(), Rational(-4));
  auto rs = reduce_direct(spec);
  rs.omega_sq = Expr(1);
  CHECK_FALSE(residual_in_original_variables(rs, spec)[0].is_zero());
  CHECK_FALSE(reduced_residual(rs).is_zero());
}
