#include <algorithm>
#include <optional>
#include <set>

#include "symreduce/expr.hpp"

namespace symreduce {

Expr make_node(Node node);

namespace {

// A monomial is a rational coefficient times a product of atoms raised to
// rational powers; a polynomial maps factor sets to coefficients. Atoms are
// canonical symbols, sums (only with negative or fractional exponents),
// sin, cos, exp and integral nodes, and constants with fractional powers.
using FactorMap = std::map<Expr, Rational, ExprLess>;

struct FactorMapLess {
  bool operator()(const FactorMap& a, const FactorMap& b) const {
    auto ia = a.begin();
    auto ib = b.begin();
    for (; ia != a.end() && ib != b.end(); ++ia, ++ib) {
      if (int c = compare(ia->first, ib->first); c != 0) return c < 0;
      if (!(ia->second == ib->second)) return ia->second < ib->second;
    }
    return a.size() < b.size();
  }
};

using Poly = std::map<FactorMap, Rational, FactorMapLess>;

Expr canon(const Expr& e);
Poly to_poly(const Expr& canonical);
Expr from_poly(const Poly& p);

Expr canonical_node(Kind kind, std::vector<Expr> args) {
  Node n;
  n.kind = kind;
  n.args = std::move(args);
  n.canonical = true;
  return make_node(std::move(n));
}

Expr canonical_power(const Expr& base, const Rational& q) {
  Node n;
  n.kind = Kind::Power;
  n.args = {base};
  n.exponent = q;
  n.canonical = true;
  return make_node(std::move(n));
}

Expr canonical_integral(const Expr& integrand, const std::string& bound,
                        const Expr& lower, const Expr& upper,
                        std::vector<std::string> path) {
  Node n;
  n.kind = Kind::Integral;
  n.name = bound;
  n.args = {integrand, lower, upper};
  n.path = std::move(path);
  n.canonical = true;
  return make_node(std::move(n));
}

void add_term(Poly& p, const FactorMap& f, const Rational& c) {
  if (c.is_zero()) return;
  auto [it, inserted] = p.try_emplace(f, c);
  if (!inserted) {
    it->second += c;
    if (it->second.is_zero()) p.erase(it);
  }
}

void add_poly(Poly& p, const Poly& q) {
  for (const auto& [f, c] : q) add_term(p, f, c);
}

Poly constant_poly(const Rational& c) {
  Poly p;
  add_term(p, {}, c);
  return p;
}

Poly multiply(const Poly& a, const Poly& b);
Poly monomial_poly(Rational coeff, const FactorMap& factors);

Poly poly_pow(const Poly& p, std::int64_t n) {
  Poly result = constant_poly(1);
  for (std::int64_t i = 0; i < n; ++i) result = multiply(result, p);
  return result;
}

bool needs_fixup(const Expr& base, const Rational& q) {
  if (q.is_zero()) return true;
  switch (base.kind()) {
    case Kind::Constant:
      return true;
    case Kind::Sum:
      return !(q < Rational(1));
    case Kind::Cos:
      return q.is_integer() && !(q < Rational(2));
    case Kind::Exp:
      return !q.is_one();
    default:
      return false;
  }
}

Poly monomial_poly(Rational coeff, const FactorMap& factors) {
  if (coeff.is_zero()) return {};
  bool clean_already =
      std::none_of(factors.begin(), factors.end(),
                   [](const auto& kv) {
                     return needs_fixup(kv.first, kv.second);
                   }) &&
      std::count_if(factors.begin(), factors.end(), [](const auto& kv) {
        return kv.first.kind() == Kind::Exp;
      }) < 2;
  if (clean_already) {
    Poly p;
    p.emplace(factors, coeff);
    return p;
  }

  FactorMap clean;
  std::vector<std::pair<Expr, std::int64_t>> expansions;
  std::vector<std::pair<Expr, std::int64_t>> cos_reductions;
  std::vector<Expr> exp_args;

  for (const auto& [base, q] : factors) {
    if (q.is_zero()) continue;
    switch (base.kind()) {
      case Kind::Constant: {
        if (base.value().is_zero()) {
          if (q.is_negative()) throw ExprError("division by zero");
          return {};
        }
        if (auto v = base.value().exact_pow(q)) {
          coeff *= *v;
        } else {
          std::int64_t n = q.floor();
          coeff *= base.value().pow(n);
          clean[base] = q - Rational(n);
        }
        break;
      }
      case Kind::Sum:
        if (!(q < Rational(1))) {
          std::int64_t n = q.floor();
          expansions.emplace_back(base, n);
          Rational frac = q - Rational(n);
          if (!frac.is_zero()) clean[base] = frac;
        } else {
          clean[base] = q;
        }
        break;
      case Kind::Cos:
        if (q.is_integer() && !(q < Rational(2))) {
          cos_reductions.emplace_back(base, q.num() / 2);
          if (q.num() % 2 != 0) clean[base] = Rational(1);
        } else {
          clean[base] = q;
        }
        break;
      case Kind::Exp:
        exp_args.push_back(base.args()[0] * Expr(q));
        break;
      default:
        clean[base] = q;
    }
  }

  Poly result;
  result.emplace(clean, coeff);
  for (const auto& [base, n] : expansions)
    result = multiply(result, poly_pow(to_poly(base), n));
  for (const auto& [cos_atom, k] : cos_reductions) {
    Expr s = canon(sin(cos_atom.args()[0]));
    Poly one_minus_sin2 = constant_poly(1);
    add_poly(one_minus_sin2, multiply(constant_poly(-1),
                                      multiply(to_poly(s), to_poly(s))));
    result = multiply(result, poly_pow(one_minus_sin2, k));
  }
  if (!exp_args.empty()) {
    Expr arg = canon(sum(exp_args));
    if (!arg.is_zero()) {
      Poly e;
      e.emplace(FactorMap{{canonical_node(Kind::Exp, {arg}), Rational(1)}},
                Rational(1));
      result = multiply(result, e);
    }
  }
  return result;
}

Poly multiply(const Poly& a, const Poly& b) {
  Poly result;
  for (const auto& [fa, ca] : a) {
    for (const auto& [fb, cb] : b) {
      FactorMap merged = fa;
      for (const auto& [base, q] : fb) merged[base] += q;
      for (auto it = merged.begin(); it != merged.end();) {
        it = it->second.is_zero() ? merged.erase(it) : std::next(it);
      }
      add_poly(result, monomial_poly(ca * cb, merged));
    }
  }
  return result;
}

Poly atom_poly(const Expr& atom, const Rational& q = Rational(1)) {
  return monomial_poly(Rational(1), FactorMap{{atom, q}});
}

Rational leading_coefficient(const Expr& e) {
  switch (e.kind()) {
    case Kind::Constant:
      return e.value();
    case Kind::Product:
      return e.args()[0].is_constant() ? e.args()[0].value() : Rational(1);
    case Kind::Sum:
      return leading_coefficient(e.args()[0]);
    default:
      return Rational(1);
  }
}

Poly scale(const Poly& p, const Rational& s) {
  Poly out;
  for (const auto& [f, c] : p) add_term(out, f, c * s);
  return out;
}

Poly power_poly(const Expr& base, const Rational& q) {
  if (q.is_zero()) return constant_poly(1);
  if (q.is_one()) return to_poly(base);
  switch (base.kind()) {
    case Kind::Sum: {
      if (q.is_integer() && q.num() > 0) return poly_pow(to_poly(base), q.num());
      Poly terms = to_poly(base);
      FactorMap common = terms.begin()->first;
      for (const auto& [f, c] : terms) {
        for (auto it = common.begin(); it != common.end();) {
          auto hit = f.find(it->first);
          if (hit == f.end()) {
            it = common.erase(it);
            continue;
          }
          if (hit->second < it->second) it->second = hit->second;
          ++it;
        }
      }
      if (!common.empty()) {
        Poly rest;
        for (const auto& [f, c] : terms) {
          FactorMap g = f;
          for (const auto& [atom, e] : common) {
            g[atom] -= e;
            if (g[atom].is_zero()) g.erase(atom);
          }
          add_term(rest, g, c);
        }
        FactorMap scaled;
        for (const auto& [atom, e] : common) scaled[atom] = e * q;
        return multiply(monomial_poly(Rational(1), scaled),
                        power_poly(from_poly(rest), q));
      }
      Rational c = leading_coefficient(base);
      if (!c.is_one() && (!c.is_negative() || q.is_integer())) {
        Expr normalized = from_poly(scale(to_poly(base), Rational(1) / c));
        return monomial_poly(Rational(1),
                             FactorMap{{Expr(c), q}, {normalized, q}});
      }
      return atom_poly(base, q);
    }
    case Kind::Product: {
      auto args = base.args();
      Rational c = args[0].is_constant() ? args[0].value() : Rational(1);
      if (c.is_negative() && !q.is_integer()) return atom_poly(base, q);
      FactorMap f;
      if (!c.is_one()) f[Expr(c)] += q;
      for (const auto& factor : args) {
        if (factor.is_constant()) continue;
        if (factor.kind() == Kind::Power)
          f[factor.args()[0]] += factor.exponent() * q;
        else
          f[factor] += q;
      }
      return monomial_poly(Rational(1), f);
    }
    case Kind::Power:
      return monomial_poly(Rational(1),
                           FactorMap{{base.args()[0], base.exponent() * q}});
    default:
      return monomial_poly(Rational(1), FactorMap{{base, q}});
  }
}

Poly to_poly(const Expr& e) {
  switch (e.kind()) {
    case Kind::Constant:
      return constant_poly(e.value());
    case Kind::Sum: {
      Poly p;
      for (const auto& t : e.args()) add_poly(p, to_poly(t));
      return p;
    }
    case Kind::Product: {
      Rational c(1);
      FactorMap f;
      for (const auto& factor : e.args()) {
        if (factor.is_constant())
          c *= factor.value();
        else if (factor.kind() == Kind::Power)
          f[factor.args()[0]] += factor.exponent();
        else
          f[factor] += Rational(1);
      }
      Poly p;
      p.emplace(std::move(f), c);
      return p;
    }
    case Kind::Power: {
      Poly p;
      p.emplace(FactorMap{{e.args()[0], e.exponent()}}, Rational(1));
      return p;
    }
    default: {
      Poly p;
      p.emplace(FactorMap{{e, Rational(1)}}, Rational(1));
      return p;
    }
  }
}

Expr term_expr(const FactorMap& f, const Rational& c) {
  std::vector<Expr> factors;
  if (!c.is_one() || f.empty()) factors.emplace_back(c);
  for (const auto& [base, q] : f)
    factors.push_back(q.is_one() ? base : canonical_power(base, q));
  if (factors.size() == 1) return factors.front();
  return canonical_node(Kind::Product, std::move(factors));
}

Expr from_poly(const Poly& p) {
  if (p.empty()) return Expr(0);
  std::vector<Expr> terms;
  terms.reserve(p.size());
  for (const auto& [f, c] : p) terms.push_back(term_expr(f, c));
  if (terms.size() == 1) return terms.front();
  return canonical_node(Kind::Sum, std::move(terms));
}

bool poly_equal(const Poly& a, const Poly& b) {
  if (a.size() != b.size()) return false;
  FactorMapLess less;
  for (auto ia = a.begin(), ib = b.begin(); ia != a.end(); ++ia, ++ib) {
    if (less(ia->first, ib->first) || less(ib->first, ia->first)) return false;
    if (!(ia->second == ib->second)) return false;
  }
  return true;
}

// Lexicographic order on exponent vectors; compatible with multiplication.
bool lex_less(const FactorMap& a, const FactorMap& b) {
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() || ib != b.end()) {
    int c = ia == a.end()   ? 1
            : ib == b.end() ? -1
                            : compare(ia->first, ib->first);
    Rational ea = c <= 0 ? ia->second : Rational(0);
    Rational eb = c >= 0 ? ib->second : Rational(0);
    if (!(ea == eb)) return ea < eb;
    if (c <= 0) ++ia;
    if (c >= 0) ++ib;
  }
  return false;
}

Poly::const_iterator leading_term(const Poly& p) {
  auto best = p.begin();
  for (auto it = p.begin(); it != p.end(); ++it)
    if (lex_less(best->first, it->first)) best = it;
  return best;
}

// Exact division of n by d in the Laurent ring over the atoms. Fails when a
// remainder is left or the quotient would contain `forbidden`.
std::optional<Poly> exact_divide(Poly n, const Poly& d, const Expr& forbidden) {
  auto [df, dc] = *leading_term(d);
  Poly q;
  const std::size_t limit = 2 * n.size() + 8;
  for (std::size_t step = 0; !n.empty(); ++step) {
    if (step > limit) return std::nullopt;
    auto [nf, nc] = *leading_term(n);
    FactorMap mf = nf;
    for (const auto& [base, e] : df) mf[base] -= e;
    for (auto it = mf.begin(); it != mf.end();)
      it = it->second.is_zero() ? mf.erase(it) : std::next(it);
    if (mf.count(forbidden)) return std::nullopt;
    Poly m;
    m.emplace(mf, nc / dc);
    for (const auto& [f, c] : multiply(m, d)) {
      if (f.count(forbidden)) return std::nullopt;
      add_term(n, f, -c);
    }
    add_poly(q, m);
  }
  return q;
}

// Folds groups of terms sharing a factor B^e (B a sum, e < 0) whose
// cofactors are divisible by B, or contain a monomial multiple of B, into
// quotient * B^(e+1).
void fold_denominators(Poly& p) {
  for (int guard = 0; guard < 1000; ++guard) {
    std::map<std::pair<Expr, Rational>, std::vector<FactorMap>,
             bool (*)(const std::pair<Expr, Rational>&,
                      const std::pair<Expr, Rational>&)>
        groups([](const std::pair<Expr, Rational>& a,
                  const std::pair<Expr, Rational>& b) {
          if (int c = compare(a.first, b.first); c != 0) return c < 0;
          return a.second < b.second;
        });
    for (const auto& [f, c] : p) {
      for (const auto& [base, q] : f) {
        if (base.kind() == Kind::Sum && q.is_negative())
          groups[{base, q}].push_back(f);
      }
    }
    bool changed = false;
    for (const auto& [key, members] : groups) {
      const auto& [b_expr, e] = key;
      Poly b_poly = to_poly(b_expr);
      if (members.size() < b_poly.size()) continue;
      Poly numerator;
      for (const auto& f : members) {
        FactorMap rest = f;
        rest.erase(b_expr);
        add_term(numerator, rest, p.at(f));
      }
      if (numerator.empty()) continue;
      std::optional<Poly> q;
      try {
        q = exact_divide(numerator, b_poly, b_expr);
      } catch (const RationalOverflow&) {
      }
      if (q) {
        for (const auto& f : members) p.erase(f);
        add_poly(p, multiply(*q, atom_poly(b_expr, e + Rational(1))));
        changed = true;
        break;
      }
      // Peel off any monomial multiple m*B contained in the numerator.
      for (const auto& [nf, nc] : numerator) {
        for (const auto& [bf, bc] : b_poly) {
          FactorMap mf = nf;
          for (const auto& [base, q] : bf) mf[base] -= q;
          for (auto it = mf.begin(); it != mf.end();)
            it = it->second.is_zero() ? mf.erase(it) : std::next(it);
          if (mf.count(b_expr)) continue;
          Poly m;
          m.emplace(mf, nc / bc);
          Poly mb = multiply(m, b_poly);
          bool contained = !mb.empty();
          for (const auto& [f, c] : mb) {
            auto hit = numerator.find(f);
            if (hit == numerator.end() || !(hit->second == c) ||
                f.count(b_expr)) {
              contained = false;
              break;
            }
          }
          if (!contained) continue;
          for (const auto& [f, c] : mb) {
            FactorMap full = f;
            full[b_expr] = e;
            p.erase(full);
          }
          add_poly(p, multiply(m, atom_poly(b_expr, e + Rational(1))));
          changed = true;
          break;
        }
        if (changed) break;
      }
      if (changed) break;
    }
    if (!changed) return;
  }
}

Expr canon_trig(Kind kind, const Expr& arg) {
  if (arg.is_zero()) return kind == Kind::Sin ? Expr(0) : Expr(1);
  if (leading_coefficient(arg).is_negative()) {
    Expr flipped = canon(-arg);
    Expr r = canon_trig(kind, flipped);
    return kind == Kind::Sin ? canon(-r) : r;
  }
  if (arg.kind() == Kind::Product && arg.args()[0].is_constant()) {
    const Rational& c = arg.args()[0].value();
    if (c.is_integer() && c.num() % 2 == 0) {
      Expr half = canon(arg * Expr(Rational(1, 2)));
      Expr s = canon_trig(Kind::Sin, half);
      Expr co = canon_trig(Kind::Cos, half);
      return kind == Kind::Sin ? canon(Expr(2) * s * co)
                               : canon(Expr(1) - Expr(2) * s * s);
    }
  }
  return canonical_node(kind, {arg});
}

Expr canon_integral(const Expr& e) {
  Expr integrand = canon(e.integrand());
  Expr lower = canon(e.lower());
  Expr upper = canon(e.upper());
  const std::string& bound = e.name();
  std::set<std::string> varying(e.path_symbols().begin(),
                                e.path_symbols().end());
  varying.insert(bound);
  auto varies = [&](const Expr& factor) {
    for (const auto& s : free_symbols(factor))
      if (varying.count(s)) return true;
    return false;
  };

  Poly out;
  for (const auto& [f, c] : to_poly(integrand)) {
    FactorMap inside, outside;
    for (const auto& [base, q] : f) (varies(base) ? inside : outside)[base] = q;
    Poly coefficient;
    coefficient.emplace(outside, c);
    if (inside.empty()) {
      add_poly(out, multiply(coefficient, to_poly(canon(upper - lower))));
      continue;
    }
    Expr inner = term_expr(inside, Rational(1));
    std::vector<std::string> path;
    for (const auto& s : e.path_symbols())
      if (depends_on(inner, s)) path.push_back(s);
    Expr node = canonical_integral(inner, bound, lower, upper, std::move(path));
    add_poly(out, multiply(coefficient, atom_poly(node)));
  }
  fold_denominators(out);
  return from_poly(out);
}

Expr canon(const Expr& e) {
  if (e.is_canonical()) return e;
  switch (e.kind()) {
    case Kind::Constant:
    case Kind::Symbol:
      return e;
    case Kind::Sum: {
      Poly p;
      for (const auto& t : e.args()) add_poly(p, to_poly(canon(t)));
      fold_denominators(p);
      return from_poly(p);
    }
    case Kind::Product: {
      Poly p = constant_poly(1);
      for (const auto& t : e.args()) {
        p = multiply(p, to_poly(canon(t)));
        if (p.empty()) return Expr(0);
      }
      fold_denominators(p);
      return from_poly(p);
    }
    case Kind::Power: {
      Poly p = power_poly(canon(e.args()[0]), e.exponent());
      fold_denominators(p);
      return from_poly(p);
    }
    case Kind::Sin:
    case Kind::Cos:
      return canon_trig(e.kind(), canon(e.args()[0]));
    case Kind::Exp: {
      Expr arg = canon(e.args()[0]);
      if (arg.is_zero()) return Expr(1);
      return canonical_node(Kind::Exp, {arg});
    }
    case Kind::Derivative: {
      Expr r = canon(e.args()[0]);
      for (int i = 0; i < e.order(); ++i)
        r = differentiate(r, e.args()[1].name());
      return r;
    }
    case Kind::Integral:
      return canon_integral(e);
  }
  throw ExprError("unknown expression kind");
}

}  // namespace

Expr canonicalize(const Expr& e) {
  try {
    return canon(e);
  } catch (const std::domain_error& err) {
    throw ExprError(err.what());
  }
}

}  // namespace symreduce
