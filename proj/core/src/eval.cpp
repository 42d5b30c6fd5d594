#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>

#include "symreduce/expr.hpp"

namespace symreduce {

namespace {

double checked(double v, const char* what) {
  if (!std::isfinite(v))
    throw NumericError(std::string("non-finite intermediate in ") + what);
  return v;
}

double eval(const Expr& e, Env& env, double tol) {
  switch (e.kind()) {
    case Kind::Constant:
      return e.value().to_double();
    case Kind::Symbol: {
      auto it = env.find(e.name());
      if (it == env.end()) throw NumericError("unbound symbol " + e.name());
      return it->second;
    }
    case Kind::Sum: {
      double s = 0.0;
      for (const auto& t : e.args()) s += eval(t, env, tol);
      return checked(s, "sum");
    }
    case Kind::Product: {
      double p = 1.0;
      for (const auto& t : e.args()) p *= eval(t, env, tol);
      return checked(p, "product");
    }
    case Kind::Power: {
      double base = eval(e.args()[0], env, tol);
      const Rational& q = e.exponent();
      if (base == 0.0 && q.is_negative())
        throw NumericError("non-finite intermediate: division by zero");
      double v = q.is_integer()
                     ? std::pow(base, static_cast<double>(q.num()))
                     : std::pow(base, q.to_double());
      return checked(v, "power");
    }
    case Kind::Sin:
      return std::sin(eval(e.args()[0], env, tol));
    case Kind::Cos:
      return std::cos(eval(e.args()[0], env, tol));
    case Kind::Exp:
      return checked(std::exp(eval(e.args()[0], env, tol)), "exp");
    case Kind::Derivative:
      return eval(canonicalize(e), env, tol);
    case Kind::Integral: {
      if (!e.path_symbols().empty()) {
        auto given = env.find(to_prefix(e));
        if (given != env.end()) return given->second;
        throw NumericError(
            "integral along the motion needs a trajectory, not a point");
      }
      double a = eval(e.lower(), env, tol);
      double b = eval(e.upper(), env, tol);
      const std::string& bound = e.name();
      auto saved = env.find(bound);
      std::optional<double> previous;
      if (saved != env.end()) previous = saved->second;
      auto integrand = [&](double s) {
        env[bound] = s;
        return eval(e.integrand(), env, tol);
      };
      double err = 0.0;
      double v = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
          integrand, a, b, 30, tol, &err);
      if (previous)
        env[bound] = *previous;
      else
        env.erase(bound);
      return checked(v, "integral");
    }
  }
  throw NumericError("unknown expression kind");
}

}  // namespace

double eval_numeric(const Expr& e, const Env& env, double quadrature_tol) {
  Env scratch = env;
  return eval(e, scratch, quadrature_tol);
}

}  // namespace symreduce
