#include "symreduce/expr.hpp"

#include <algorithm>
#include <set>

namespace symreduce {

Expr make_node(Node node) {
  return Expr(std::make_shared<const Node>(std::move(node)));
}

namespace {

Expr constant_node(const Rational& v) {
  Node n;
  n.kind = Kind::Constant;
  n.value = v;
  n.canonical = true;
  return make_node(std::move(n));
}

const Expr& zero_expr() {
  static const Expr z = constant_node(Rational(0));
  return z;
}

Expr unary(Kind kind, const Expr& arg) {
  Node n;
  n.kind = kind;
  n.args = {arg};
  return make_node(std::move(n));
}

Expr nary(Kind kind, std::vector<Expr> args) {
  Node n;
  n.kind = kind;
  n.args = std::move(args);
  return make_node(std::move(n));
}

int kind_rank(Kind k) { return static_cast<int>(k); }

int compare_strings(const std::string& a, const std::string& b) {
  int c = a.compare(b);
  return c < 0 ? -1 : (c > 0 ? 1 : 0);
}

}  // namespace

Expr::Expr() : Expr(zero_expr()) {}

Expr::Expr(Rational value) : Expr(constant_node(value)) {}

Expr Expr::symbol(std::string name, SymbolRole role) {
  if (name.empty()) throw ExprError("empty symbol name");
  Node n;
  n.kind = Kind::Symbol;
  n.name = std::move(name);
  n.role = role;
  n.canonical = true;
  return make_node(std::move(n));
}

Kind Expr::kind() const { return node_->kind; }
const Rational& Expr::value() const { return node_->value; }
const std::string& Expr::name() const { return node_->name; }
SymbolRole Expr::role() const { return node_->role; }
std::span<const Expr> Expr::args() const { return node_->args; }
const Rational& Expr::exponent() const { return node_->exponent; }
int Expr::order() const { return node_->order; }
const std::vector<std::string>& Expr::path_symbols() const {
  return node_->path;
}
const Expr& Expr::integrand() const { return node_->args.at(0); }
const Expr& Expr::lower() const { return node_->args.at(1); }
const Expr& Expr::upper() const { return node_->args.at(2); }

bool Expr::is_zero() const {
  return kind() == Kind::Constant && value().is_zero();
}
bool Expr::is_one() const {
  return kind() == Kind::Constant && value().is_one();
}
bool Expr::is_symbol(std::string_view name) const {
  return kind() == Kind::Symbol && node_->name == name;
}
bool Expr::is_canonical() const { return node_->canonical; }

Expr operator+(const Expr& a, const Expr& b) {
  if (a.is_zero()) return b;
  if (b.is_zero()) return a;
  return nary(Kind::Sum, {a, b});
}
Expr operator-(const Expr& a, const Expr& b) { return a + (-b); }
Expr operator*(const Expr& a, const Expr& b) {
  if (a.is_one()) return b;
  if (b.is_one()) return a;
  return nary(Kind::Product, {a, b});
}
Expr operator/(const Expr& a, const Expr& b) { return a * pow(b, -1); }
Expr Expr::operator-() const {
  if (is_constant()) return Expr(-value());
  return nary(Kind::Product, {Expr(-1), *this});
}

Expr sym(std::string name, SymbolRole role) {
  return Expr::symbol(std::move(name), role);
}

Expr pow(const Expr& base, const Rational& exponent) {
  if (exponent.is_one()) return base;
  Node n;
  n.kind = Kind::Power;
  n.args = {base};
  n.exponent = exponent;
  return make_node(std::move(n));
}

Expr sqrt(const Expr& e) { return pow(e, Rational(1, 2)); }
Expr sin(const Expr& e) { return unary(Kind::Sin, e); }
Expr cos(const Expr& e) { return unary(Kind::Cos, e); }
Expr exp(const Expr& e) { return unary(Kind::Exp, e); }

Expr integral(const Expr& integrand, const std::string& bound,
              const Expr& lower, const Expr& upper,
              std::vector<std::string> path) {
  if (depends_on(lower, bound) || depends_on(upper, bound))
    throw ExprError("integral limits may not contain the bound symbol");
  std::sort(path.begin(), path.end());
  path.erase(std::unique(path.begin(), path.end()), path.end());
  if (std::find(path.begin(), path.end(), bound) != path.end())
    throw ExprError("bound symbol listed as a path symbol");
  Node n;
  n.kind = Kind::Integral;
  n.name = bound;
  n.args = {integrand, lower, upper};
  n.path = std::move(path);
  return make_node(std::move(n));
}

Expr derivative(const Expr& e, const std::string& var, int order) {
  if (order < 1) throw ExprError("derivative order must be positive");
  Node n;
  n.kind = Kind::Derivative;
  n.args = {e, sym(var)};
  n.order = order;
  return make_node(std::move(n));
}

Expr sum(const std::vector<Expr>& terms) {
  if (terms.empty()) return Expr(0);
  if (terms.size() == 1) return terms.front();
  return nary(Kind::Sum, terms);
}

Expr product(const std::vector<Expr>& factors) {
  if (factors.empty()) return Expr(1);
  if (factors.size() == 1) return factors.front();
  return nary(Kind::Product, factors);
}

int compare(const Expr& a, const Expr& b) {
  if (a.id() == b.id()) return 0;
  if (a.kind() != b.kind())
    return kind_rank(a.kind()) < kind_rank(b.kind()) ? -1 : 1;
  switch (a.kind()) {
    case Kind::Constant:
      if (a.value() == b.value()) return 0;
      return a.value() < b.value() ? -1 : 1;
    case Kind::Symbol:
      return compare_strings(a.name(), b.name());
    case Kind::Power:
      if (int c = compare(a.args()[0], b.args()[0]); c != 0) return c;
      if (a.exponent() == b.exponent()) return 0;
      return a.exponent() < b.exponent() ? -1 : 1;
    case Kind::Derivative:
      if (a.order() != b.order()) return a.order() < b.order() ? -1 : 1;
      break;
    case Kind::Integral:
      if (int c = compare_strings(a.name(), b.name()); c != 0) return c;
      if (a.path_symbols() != b.path_symbols())
        return a.path_symbols() < b.path_symbols() ? -1 : 1;
      break;
    default:
      break;
  }
  auto aa = a.args();
  auto bb = b.args();
  std::size_t n = std::min(aa.size(), bb.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (int c = compare(aa[i], bb[i]); c != 0) return c;
  }
  if (aa.size() == bb.size()) return 0;
  return aa.size() < bb.size() ? -1 : 1;
}

bool structurally_equal(const Expr& a, const Expr& b) {
  return compare(a, b) == 0;
}

bool equals(const Expr& a, const Expr& b) {
  return structurally_equal(canonicalize(a), canonicalize(b));
}

namespace {

void collect_free(const Expr& e, std::set<std::string>& bound,
                  std::set<std::string>& out) {
  switch (e.kind()) {
    case Kind::Constant:
      return;
    case Kind::Symbol:
      if (!bound.count(e.name())) out.insert(e.name());
      return;
    case Kind::Integral: {
      collect_free(e.lower(), bound, out);
      collect_free(e.upper(), bound, out);
      bool inserted = bound.insert(e.name()).second;
      collect_free(e.integrand(), bound, out);
      if (inserted) bound.erase(e.name());
      return;
    }
    default:
      for (const auto& a : e.args()) collect_free(a, bound, out);
  }
}

void collect_bound(const Expr& e, std::set<std::string>& out) {
  if (e.kind() == Kind::Integral) out.insert(e.name());
  for (const auto& a : e.args()) collect_bound(a, out);
}

}  // namespace

std::vector<std::string> free_symbols(const Expr& e) {
  std::set<std::string> bound, out;
  collect_free(e, bound, out);
  return {out.begin(), out.end()};
}

bool depends_on(const Expr& e, const std::string& var) {
  auto fs = free_symbols(e);
  return std::binary_search(fs.begin(), fs.end(), var);
}

bool contains_integral(const Expr& e) {
  if (e.kind() == Kind::Integral) return true;
  return std::any_of(e.args().begin(), e.args().end(), contains_integral);
}

std::vector<std::string> bound_symbols(const Expr& e) {
  std::set<std::string> out;
  collect_bound(e, out);
  return {out.begin(), out.end()};
}

}  // namespace symreduce
