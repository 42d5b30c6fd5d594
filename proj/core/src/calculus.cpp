#include <algorithm>

#include "symreduce/expr.hpp"

namespace symreduce {

Expr make_node(Node node);

namespace {

Expr rebuild(const Expr& e, std::vector<Expr> args) {
  Node n;
  n.kind = e.kind();
  n.value = e.value();
  n.exponent = e.exponent();
  n.name = e.name();
  n.role = e.role();
  n.order = e.order();
  n.path = e.path_symbols();
  n.args = std::move(args);
  return make_node(std::move(n));
}

Expr diff(const Expr& e, const std::string& var) {
  switch (e.kind()) {
    case Kind::Constant:
      return Expr(0);
    case Kind::Symbol:
      return e.name() == var ? Expr(1) : Expr(0);
    case Kind::Sum: {
      std::vector<Expr> terms;
      for (const auto& t : e.args()) terms.push_back(diff(t, var));
      return sum(terms);
    }
    case Kind::Product: {
      auto args = e.args();
      std::vector<Expr> terms;
      for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i].is_constant()) continue;
        Expr d = diff(args[i], var);
        if (d.is_zero()) continue;
        std::vector<Expr> factors{d};
        for (std::size_t j = 0; j < args.size(); ++j)
          if (j != i) factors.push_back(args[j]);
        terms.push_back(product(factors));
      }
      return sum(terms);
    }
    case Kind::Power: {
      const Expr& base = e.args()[0];
      Expr d = diff(base, var);
      if (d.is_zero()) return Expr(0);
      return Expr(e.exponent()) * pow(base, e.exponent() - Rational(1)) * d;
    }
    case Kind::Sin:
      return cos(e.args()[0]) * diff(e.args()[0], var);
    case Kind::Cos:
      return -(sin(e.args()[0]) * diff(e.args()[0], var));
    case Kind::Exp:
      return e * diff(e.args()[0], var);
    case Kind::Derivative:
      return diff(canonicalize(e), var);
    case Kind::Integral: {
      // Leibniz rule with a variable upper limit; the lower limit is held
      // constant. Path symbols inside the integrand are functions of the
      // bound variable, so their pointwise partials do not enter.
      Expr result = Expr(0);
      Expr du = diff(e.upper(), var);
      if (!du.is_zero())
        result = substitute(e.integrand(), {{e.name(), e.upper()}}) * du;
      const auto& path = e.path_symbols();
      if (std::find(path.begin(), path.end(), var) == path.end()) {
        Expr inner = diff(e.integrand(), var);
        if (!canonicalize(inner).is_zero())
          result = result + integral(inner, e.name(), e.lower(), e.upper(),
                                     e.path_symbols());
      }
      return result;
    }
  }
  throw ExprError("unknown expression kind");
}

void check_not_bound(const Expr& e, const std::string& var) {
  auto bound = bound_symbols(e);
  if (std::binary_search(bound.begin(), bound.end(), var))
    throw ExprError("bound-variable differentiation: " + var);
}

Expr subst(const Expr& e, const Bindings& b) {
  switch (e.kind()) {
    case Kind::Constant:
      return e;
    case Kind::Symbol: {
      auto it = b.find(e.name());
      return it == b.end() ? e : it->second;
    }
    case Kind::Integral: {
      const std::string& bound = e.name();
      Bindings inner;
      std::vector<std::string> path;
      for (const auto& [k, v] : b) {
        if (k == bound) continue;
        if (!depends_on(e.integrand(), k)) continue;
        if (depends_on(v, bound))
          throw ExprError("substitution captures bound symbol " + bound);
        inner.emplace(k, v);
      }
      for (const auto& p : e.path_symbols()) {
        auto it = inner.find(p);
        if (it == inner.end()) {
          path.push_back(p);
        } else {
          for (const auto& s : free_symbols(it->second)) path.push_back(s);
        }
      }
      return integral(subst(e.integrand(), inner), bound, subst(e.lower(), b),
                      subst(e.upper(), b), std::move(path));
    }
    default: {
      std::vector<Expr> args;
      args.reserve(e.args().size());
      for (const auto& a : e.args()) args.push_back(subst(a, b));
      return rebuild(e, std::move(args));
    }
  }
}

}  // namespace

Expr differentiate(const Expr& e, const std::string& var) {
  check_not_bound(e, var);
  Expr c = canonicalize(e);
  if (!depends_on(c, var)) return Expr(0);
  return canonicalize(diff(c, var));
}

Expr differentiate(const Expr& e, const Symbol& var) {
  return differentiate(e, var.name);
}

Expr substitute(const Expr& e, const Bindings& bindings) {
  auto bound = bound_symbols(e);
  for (const auto& [k, v] : bindings) {
    if (std::binary_search(bound.begin(), bound.end(), k))
      throw ExprError("cannot bind bound symbol " + k);
  }
  return canonicalize(subst(e, bindings));
}

Expr total_derivative(const Expr& e, const std::string& independent,
                      const JetChain& jets) {
  Expr c = canonicalize(e);
  std::vector<Expr> terms{differentiate(c, independent)};
  for (const auto& [s, next] : jets) {
    if (!depends_on(c, s)) continue;
    terms.push_back(differentiate(c, s) * sym(next));
  }
  return canonicalize(sum(terms));
}

Expr solve_linear(const Expr& e, const std::string& var) {
  Expr c = canonicalize(e);
  Expr a = differentiate(c, var);
  if (a.is_zero()) throw ExprError("equation does not contain " + var);
  if (depends_on(a, var)) throw ExprError("equation is not linear in " + var);
  Expr b = substitute(c, {{var, Expr(0)}});
  return canonicalize(-b / a);
}

}  // namespace symreduce
