#pragma once

#include <map>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "symreduce/rational.hpp"

namespace symreduce {

/// Thrown for symbolic misuse: bound-variable differentiation, capture in
/// substitution, malformed text, division by an exact zero.
class ExprError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Thrown by eval_numeric for unbound symbols and non-finite intermediates.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class SymbolRole { Dependent, Independent, Parameter, Bound };

enum class Kind {
  Constant,
  Symbol,
  Sum,
  Product,
  Power,
  Sin,
  Cos,
  Exp,
  Derivative,
  Integral,
};

struct Node;

/// Immutable, shareable symbolic expression.
///
/// Negation is a product with the constant -1 and division a power with
/// exponent -1, so neither needs its own node kind. Integral nodes are
/// definite integrals from `lower` to `upper` over a bound symbol; they are
/// never expanded. An integral may also list "path symbols": dependent
/// variables that inside the integrand are evaluated along the motion at the
/// bound variable (the nonlocal `∫ r dt` terms). Partial derivatives with
/// respect to a path symbol do not reach inside such an integral.
///
/// Power simplification treats every symbol as a positive real, so
/// (x^a)^b = x^(ab) and (xy)^p = x^p y^p.
class Expr {
 public:
  Expr();  // the constant 0
  Expr(Rational value);  // NOLINT(google-explicit-constructor)
  Expr(std::int64_t value) : Expr(Rational(value)) {}  // NOLINT
  Expr(int value) : Expr(Rational(value)) {}           // NOLINT

  static Expr symbol(std::string name,
                     SymbolRole role = SymbolRole::Parameter);

  Kind kind() const;
  const Rational& value() const;        // Constant
  const std::string& name() const;      // Symbol; bound symbol of Integral
  SymbolRole role() const;              // Symbol
  std::span<const Expr> args() const;   // see Node layout in expr.cpp
  const Rational& exponent() const;     // Power
  int order() const;                    // Derivative
  const std::vector<std::string>& path_symbols() const;  // Integral

  // Integral accessors.
  const Expr& integrand() const;
  const Expr& lower() const;
  const Expr& upper() const;

  bool is_constant() const { return kind() == Kind::Constant; }
  bool is_zero() const;
  bool is_one() const;
  bool is_symbol(std::string_view name) const;
  bool is_canonical() const;

  const Node* id() const { return node_.get(); }

  friend Expr operator+(const Expr& a, const Expr& b);
  friend Expr operator-(const Expr& a, const Expr& b);
  friend Expr operator*(const Expr& a, const Expr& b);
  friend Expr operator/(const Expr& a, const Expr& b);
  Expr operator-() const;
  Expr& operator+=(const Expr& o) { return *this = *this + o; }
  Expr& operator*=(const Expr& o) { return *this = *this * o; }

 private:
  friend struct Node;
  friend Expr make_node(Node node);
  explicit Expr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

struct Node {
  Kind kind = Kind::Constant;
  Rational value;      // Constant
  Rational exponent;   // Power
  std::string name;    // Symbol name, Integral bound symbol
  SymbolRole role = SymbolRole::Parameter;
  int order = 0;       // Derivative
  // Sum/Product: terms. Power: [base]. Sin/Cos/Exp: [arg].
  // Derivative: [expr, variable]. Integral: [integrand, lower, upper].
  std::vector<Expr> args;
  std::vector<std::string> path;  // Integral path symbols, sorted
  bool canonical = false;
};

/// Named symbol with a role. Roles are metadata; identity is the name.
struct Symbol {
  std::string name;
  SymbolRole role = SymbolRole::Parameter;

  Expr expr() const { return Expr::symbol(name, role); }
  operator Expr() const { return expr(); }  // NOLINT
  friend bool operator==(const Symbol& a, const Symbol& b) {
    return a.name == b.name;
  }
};

using Bindings = std::map<std::string, Expr>;
using Env = std::map<std::string, double>;

// Construction.
Expr sym(std::string name, SymbolRole role = SymbolRole::Parameter);
Expr pow(const Expr& base, const Rational& exponent);
Expr sqrt(const Expr& e);
Expr sin(const Expr& e);
Expr cos(const Expr& e);
Expr exp(const Expr& e);
Expr integral(const Expr& integrand, const std::string& bound,
              const Expr& lower, const Expr& upper,
              std::vector<std::string> path = {});
Expr derivative(const Expr& e, const std::string& var, int order = 1);
Expr sum(const std::vector<Expr>& terms);
Expr product(const std::vector<Expr>& factors);

// Canonical form: flattened sums and products with exact rational
// coefficients, products of sums expanded, like terms and like powers
// collected, cos^2 rewritten as 1 - sin^2, even multiples of an angle
// halved, and sums sharing a sum-valued denominator folded back into it.
Expr canonicalize(const Expr& e);
bool equals(const Expr& a, const Expr& b);
/// Total order on expressions (structural, applied to whatever is passed).
int compare(const Expr& a, const Expr& b);
bool structurally_equal(const Expr& a, const Expr& b);

struct ExprLess {
  bool operator()(const Expr& a, const Expr& b) const {
    return compare(a, b) < 0;
  }
};

// Calculus.
Expr differentiate(const Expr& e, const std::string& var);
Expr differentiate(const Expr& e, const Symbol& var);
Expr substitute(const Expr& e, const Bindings& bindings);

/// Jet chain for total derivatives: each entry maps a symbol to the symbol
/// standing for its derivative with respect to the independent variable.
using JetChain = std::map<std::string, std::string>;

/// D_x e = ∂e/∂x + Σ ∂e/∂s · next(s) over the jet chain.
Expr total_derivative(const Expr& e, const std::string& independent,
                      const JetChain& jets);

/// Solves e = 0 for `var`, which must enter e linearly.
Expr solve_linear(const Expr& e, const std::string& var);

// Queries.
std::vector<std::string> free_symbols(const Expr& e);
bool depends_on(const Expr& e, const std::string& var);
bool contains_integral(const Expr& e);
std::vector<std::string> bound_symbols(const Expr& e);

// Numerics. Integrals are evaluated by adaptive Gauss-Kronrod quadrature.
// An integral along the motion has no value at a point; its value may be
// supplied in `env` under its prefix text.
double eval_numeric(const Expr& e, const Env& env,
                    double quadrature_tol = 1e-12);

// Text forms. The prefix form is fully parenthesized and stable.
std::string to_prefix(const Expr& e);
Expr parse_prefix(std::string_view text);
/// Infix rendering; with `pretty`, common names are shown as Greek letters
/// and subscripts (theta -> θ, u1 -> u₁, L1 -> L₁).
std::string to_infix(const Expr& e, bool pretty = false);
/// Parses arithmetic with + - * / ^, parentheses, decimal or integer
/// literals and the functions sin, cos, exp, sqrt.
Expr parse_infix(std::string_view text);

}  // namespace symreduce
