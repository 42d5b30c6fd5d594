#include <cmath>
#include <functional>
#include <optional>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "symreduce/expr.hpp"

using namespace symreduce;

namespace {

Expr P(std::string_view s) { return parse_infix(s); }

// Random trees over x, y, z with small rational leaves.
class TreeGen {
 public:
  explicit TreeGen(unsigned seed) : rng_(seed) {}

  Expr make(int depth) {
    std::uniform_int_distribution<int> pick(0, 9);
    int k = depth <= 0 ? 0 : pick(rng_);
    switch (k) {
      case 0:
      case 1:
      case 2:
        return leaf();
      case 3:
      case 4:
        return make(depth - 1) + make(depth - 1);
      case 5:
      case 6:
        return make(depth - 1) * make(depth - 1);
      case 7: {
        static const Rational exps[] = {Rational(-1), Rational(2),
                                        Rational(1, 2), Rational(-1, 2)};
        std::uniform_int_distribution<int> e(0, 3);
        return pow(make(depth - 1), exps[e(rng_)]);
      }
      case 8:
        return sin(make(depth - 1));
      default:
        return cos(make(depth - 1));
    }
  }

 private:
  Expr leaf() {
    std::uniform_int_distribution<int> pick(0, 4);
    static const char* names[] = {"x", "y", "z"};
    int k = pick(rng_);
    if (k < 3) return sym(names[k]);
    std::uniform_int_distribution<int> n(-3, 3);
    std::uniform_int_distribution<int> d(1, 3);
    return Expr(Rational(n(rng_), d(rng_)));
  }

  std::mt19937 rng_;
};

Env random_env(std::mt19937& rng) {
  std::uniform_real_distribution<double> u(0.5, 2.0);
  return {{"x", u(rng)}, {"y", u(rng)}, {"z", u(rng)}};
}

std::optional<double> try_eval(const Expr& e, const Env& env) {
  try {
    double v = eval_numeric(e, env);
    if (std::fabs(v) > 1e6) return std::nullopt;
    return v;
  } catch (const NumericError&) {
    return std::nullopt;
  }
}

// Small subtrees only: exponents of sums can make expansion expensive.
bool small_enough(const Expr& e, int budget = 60) {
  int count = 0;
  std::function<void(const Expr&)> walk = [&](const Expr& n) {
    ++count;
    for (const auto& a : n.args()) walk(a);
  };
  walk(e);
  return count <= budget;
}

}  // namespace

TEST_CASE("rational arithmetic is exact and normalized") {
  CHECK(Rational(2, 4) == Rational(1, 2));
  CHECK(Rational(1, -2).den() == 2);
  CHECK(Rational(1, -2).num() == -1);
  CHECK((Rational(1, 3) + Rational(1, 6)) == Rational(1, 2));
  CHECK(Rational(4).exact_pow(Rational(1, 2)) == Rational(2));
  CHECK_FALSE(Rational(2).exact_pow(Rational(1, 2)).has_value());
  CHECK(Rational::approximate(-0.125) == Rational(-1, 8));
  CHECK_THROWS_AS(Rational(INT64_MAX) * Rational(2), RationalOverflow);
}

TEST_CASE("differentiate: table and power rules") {
  CHECK(equals(differentiate(P("sin(theta)"), "theta"), P("cos(theta)")));
  CHECK(equals(differentiate(P("mu - u2^2/w1"), "w1"), P("u2^2/w1^2")));
  CHECK(differentiate(P("exp(-t)"), "t").kind() == Kind::Product);
  CHECK(equals(differentiate(P("exp(-t)"), "t"), P("-exp(-t)")));
}

TEST_CASE("differentiate: Leibniz rule against quadrature plus differences") {
  Expr I = integral(P("sin(theta - s)*(alpha*s + beta)^(-2)"), "s", Expr(0),
                    sym("theta"));
  Expr dI = differentiate(I, "theta");
  double got = eval_numeric(dI, {{"alpha", 1}, {"beta", 2}, {"theta", 1}});
  auto F = [](double th) {
    return oracle::simpson(
        [th](double s) { return std::sin(th - s) / std::pow(s + 2.0, 2); },
        0.0, th);
  };
  double expected = oracle::central_diff(F, 1.0);
  CHECK(got == doctest::Approx(expected).epsilon(1e-6));
}

TEST_CASE("differentiate: bound variable is rejected") {
  Expr I = integral(P("sin(theta - s)"), "s", Expr(0), sym("theta"));
  CHECK_THROWS_WITH_AS(differentiate(I, "s"),
                       doctest::Contains("bound-variable differentiation"),
                       ExprError);
}

TEST_CASE("substitute examples") {
  Expr eq = P("u'' + u");
  Expr shifted =
      substitute(eq, {{"u", P("u1 + mu*L^-2")}, {"u''", sym("u1''")}});
  CHECK(equals(shifted, P("u1'' + u1 + mu*L^-2")));

  CHECK(equals(substitute(P("r^2*theta_dot"), {{"r", P("1/u")}}),
               P("theta_dot/u^2")));

  Expr S = P("L*(L^2 + lambda^2)^(-1/2)");
  CHECK(substitute(P("S^2*(1 + lambda^2*L^-2)"), {{"S", S}}).is_one());
}

TEST_CASE("substitute refuses to bind a bound symbol") {
  Expr I = integral(P("sin(theta - s)"), "s", Expr(0), sym("theta"));
  CHECK_THROWS_AS(substitute(I, {{"s", Expr(1)}}), ExprError);
  CHECK_THROWS_AS(substitute(I, {{"theta", P("s + 1")}}), ExprError);
}

TEST_CASE("canonicalize examples") {
  CHECK(canonicalize(P("sin(theta)^2 + cos(theta)^2")).is_one());
  Expr x = sym("x");
  CHECK(canonicalize(x + (-x)).is_zero());
  CHECK(equals(P("sin(2*a)"), P("2*sin(a)*cos(a)")));
  CHECK(equals(P("cos(2*a)"), P("cos(a)^2 - sin(a)^2")));
  CHECK(equals(P("sin(-a)"), P("-sin(a)")));
  CHECK(equals(P("(x^2)^(1/2)"), x));
  CHECK(equals(P("(x + y)*(x + y)^(-1)"), Expr(1)));
  CHECK(equals(P("exp(a)*exp(b)"), P("exp(a + b)")));
}

TEST_CASE("equals: identity behind the 1/w1 form") {
  JetChain jets{{"w1", "w1'"}, {"w1'", "w1''"}};
  Expr inv = P("1/w1");
  Expr inv2 = total_derivative(total_derivative(inv, "y", jets), "y", jets);
  Expr lhs = P("u2^2*(w1''/w1^2 - 2*w1'^2/w1^3)");
  Expr rhs = P("u2^2") * inv2 * Expr(-1);
  CHECK(equals(lhs, rhs));

  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(0.3, 3.0);
  for (int i = 0; i < 100; ++i) {
    Env env{{"u2", u(rng)}, {"w1", u(rng)}, {"w1'", u(rng) - 1.5},
            {"w1''", u(rng) - 1.5}};
    CHECK(eval_numeric(lhs, env) ==
          doctest::Approx(eval_numeric(rhs, env)).epsilon(1e-12));
  }
}

TEST_CASE("eval_numeric examples") {
  CHECK(eval_numeric(P("mu*L^-2"), {{"mu", 1}, {"L", 2}}) ==
        doctest::Approx(0.25));
  CHECK_THROWS_AS(eval_numeric(P("1/r"), {{"r", 0}}), NumericError);
  CHECK_THROWS_AS(eval_numeric(P("1/r"), {}), NumericError);

  Expr I = integral(P("sin(theta - eta)*(L0 - alpha*eta)^(-2)"), "eta",
                    Expr(0), sym("theta"));
  Env env{{"theta", 1}, {"L0", 2}, {"alpha", 0.1}};
  double fine = eval_numeric(I, env, 1e-12);
  double coarse = eval_numeric(I, env, 2e-12);
  double independent = oracle::simpson(
      [](double e) { return std::sin(1 - e) / std::pow(2 - 0.1 * e, 2); }, 0,
      1);
  CHECK(fine == doctest::Approx(coarse).epsilon(1e-10));
  CHECK(fine == doctest::Approx(independent).epsilon(1e-10));
}

TEST_CASE("prefix text round-trips and is stable") {
  Expr e = canonicalize(
      P("mu*sin(theta)/(L^2 + lambda^2) - 3/4*exp(-t)*r^(1/2)"));
  std::string text = to_prefix(e);
  CHECK(to_prefix(parse_prefix(text)) == text);
  CHECK(structurally_equal(canonicalize(parse_prefix(text)), e));

  Expr path = integral(P("r*cos(phi)"), "s", Expr(0), sym("t"), {"r", "phi"});
  CHECK(to_prefix(path) == "(int (* r (cos phi)) s 0 t (path phi r))");
  CHECK(structurally_equal(parse_prefix(to_prefix(path)), path));
  CHECK_THROWS_AS(parse_prefix("(+ x"), ExprError);
  CHECK_THROWS_AS(parse_infix("2 +* x"), ExprError);
}

TEST_CASE("property: canonicalize is idempotent on random trees") {
  TreeGen gen(42);
  int tested = 0;
  for (int i = 0; i < 400 && tested < 150; ++i) {
    Expr e = gen.make(8);
    if (!small_enough(e)) continue;
    Expr c;
    try {
      c = canonicalize(e);
    } catch (const ExprError&) {
      continue;  // exact division by zero in a random tree
    }
    ++tested;
    CHECK(structurally_equal(canonicalize(c), c));
  }
  CHECK(tested >= 100);
}

TEST_CASE("property: canonical form preserves value; equals implies agreement") {
  TreeGen gen(1234);
  std::mt19937 rng(99);
  int tested = 0;
  for (int i = 0; i < 400 && tested < 120; ++i) {
    Expr e = gen.make(6);
    if (!small_enough(e)) continue;
    Expr c;
    try {
      c = canonicalize(e);
    } catch (const ExprError&) {
      continue;
    }
    ++tested;
    for (int k = 0; k < 5; ++k) {
      Env env = random_env(rng);
      auto a = try_eval(e, env);
      auto b = try_eval(c, env);
      if (!a || !b) continue;
      CHECK(*a == doctest::Approx(*b).epsilon(1e-9).scale(1.0));
    }
  }
}

TEST_CASE("property: derivative matches central differences") {
  TreeGen gen(2024);
  std::mt19937 rng(5);
  int points = 0;
  for (int i = 0; i < 300 && points < 1000; ++i) {
    Expr e = gen.make(5);
    if (!small_enough(e, 40)) continue;
    Expr d;
    try {
      d = differentiate(e, "x");
    } catch (const ExprError&) {
      continue;
    }
    for (int k = 0; k < 100; ++k) {
      Env env = random_env(rng);
      auto f = [&](double x) {
        Env local = env;
        local["x"] = x;
        return eval_numeric(e, local);
      };
      auto exact = try_eval(d, env);
      if (!exact || !try_eval(e, env)) continue;
      double fd;
      try {
        fd = oracle::central_diff(f, env["x"], 1e-4);
      } catch (const NumericError&) {
        continue;
      }
      if (std::fabs(*exact) > 1e3) continue;  // near a singularity
      ++points;
      CHECK(std::fabs(*exact - fd) / std::max(1.0, std::fabs(*exact)) < 1e-6);
    }
  }
  CHECK(points >= 500);
}

TEST_CASE("property: constant substitution commutes with differentiation") {
  TreeGen gen(77);
  int tested = 0;
  for (int i = 0; i < 300 && tested < 80; ++i) {
    Expr e = gen.make(5);
    if (!small_enough(e, 40)) continue;
    try {
      Bindings b{{"y", Expr(Rational(3, 2))}};
      Expr lhs = differentiate(substitute(e, b), "x");
      Expr rhs = substitute(differentiate(e, "x"), b);
      ++tested;
      CHECK(structurally_equal(lhs, rhs));
    } catch (const ExprError&) {
      continue;
    }
  }
  CHECK(tested >= 50);
}

TEST_CASE("solve_linear and total derivative") {
  CHECK(equals(solve_linear(P("a*x + b"), "x"), P("-b/a")));
  CHECK_THROWS_AS(solve_linear(P("x^2 + 1"), "x"), ExprError);
  JetChain jets{{"u", "u'"}};
  CHECK(equals(total_derivative(P("theta*u^2"), "theta", jets),
               P("u^2 + 2*theta*u*u'")));
}

TEST_CASE("path integrals: Leibniz along the motion, no pointwise partials") {
  Expr xi = Expr(2) * integral(P("r*cos(phi)"), "s", Expr(0), sym("t"),
                               {"r", "phi"});
  JetChain jets{{"r", "r_dot"}, {"phi", "phi_dot"}};
  CHECK(equals(total_derivative(xi, "t", jets), P("2*r*cos(phi)")));
  CHECK(differentiate(xi, "r").is_zero());
  CHECK_THROWS_AS(eval_numeric(xi, {{"t", 1}}), NumericError);
  // Parameters factor out; a zero coefficient removes the node.
  Expr scaled = integral(P("4*mu*lambda^2*r"), "s", Expr(0), sym("t"), {"r"});
  CHECK(substitute(scaled, {{"lambda", Expr(0)}}).is_zero());
}
