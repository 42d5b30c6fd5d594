#include <cctype>
#include <sstream>

#include "symreduce/expr.hpp"

namespace symreduce {

namespace {

void write_prefix(const Expr& e, std::ostringstream& out) {
  auto list = [&](const char* op) {
    out << '(' << op;
    for (const auto& a : e.args()) {
      out << ' ';
      write_prefix(a, out);
    }
    out << ')';
  };
  switch (e.kind()) {
    case Kind::Constant:
      out << e.value().str();
      return;
    case Kind::Symbol:
      out << e.name();
      return;
    case Kind::Sum:
      return list("+");
    case Kind::Product:
      return list("*");
    case Kind::Power:
      out << "(^ ";
      write_prefix(e.args()[0], out);
      out << ' ' << e.exponent().str() << ')';
      return;
    case Kind::Sin:
      return list("sin");
    case Kind::Cos:
      return list("cos");
    case Kind::Exp:
      return list("exp");
    case Kind::Derivative:
      out << "(d ";
      write_prefix(e.args()[0], out);
      out << ' ' << e.args()[1].name() << ' ' << e.order() << ')';
      return;
    case Kind::Integral:
      out << "(int ";
      write_prefix(e.integrand(), out);
      out << ' ' << e.name() << ' ';
      write_prefix(e.lower(), out);
      out << ' ';
      write_prefix(e.upper(), out);
      if (!e.path_symbols().empty()) {
        out << " (path";
        for (const auto& p : e.path_symbols()) out << ' ' << p;
        out << ')';
      }
      out << ')';
      return;
  }
}

class PrefixParser {
 public:
  explicit PrefixParser(std::string_view text) : text_(text) {}

  Expr parse() {
    Expr e = parse_expr();
    skip_ws();
    if (pos_ != text_.size()) fail("trailing input");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw ExprError("prefix parse error at " + std::to_string(pos_) + ": " +
                    what);
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(uchar(text_[pos_]))) ++pos_;
  }

  static unsigned char uchar(char c) { return static_cast<unsigned char>(c); }

  std::string token() {
    skip_ws();
    std::size_t start = pos_;
    while (pos_ < text_.size() && !std::isspace(uchar(text_[pos_])) &&
           text_[pos_] != '(' && text_[pos_] != ')')
      ++pos_;
    if (start == pos_) fail("expected token");
    return std::string(text_.substr(start, pos_ - start));
  }

  void expect(char c) {
    skip_ws();
    if (pos_ >= text_.size() || text_[pos_] != c)
      fail(std::string("expected '") + c + "'");
    ++pos_;
  }

  bool peek(char c) {
    skip_ws();
    return pos_ < text_.size() && text_[pos_] == c;
  }

  static bool is_rational(const std::string& t) {
    std::size_t i = (t[0] == '-') ? 1 : 0;
    if (i >= t.size()) return false;
    bool slash = false;
    bool digits = false;
    for (; i < t.size(); ++i) {
      if (std::isdigit(uchar(t[i]))) {
        digits = true;
      } else if (t[i] == '/' && !slash && digits) {
        slash = true;
        digits = false;
      } else {
        return false;
      }
    }
    return digits;
  }

  Rational rational(const std::string& t) {
    if (!is_rational(t)) fail("expected rational, got " + t);
    auto slash = t.find('/');
    if (slash == std::string::npos) return Rational(std::stoll(t));
    return Rational(std::stoll(t.substr(0, slash)),
                    std::stoll(t.substr(slash + 1)));
  }

  Expr parse_expr() {
    if (!peek('(')) {
      std::string t = token();
      if (is_rational(t)) return Expr(rational(t));
      return sym(t);
    }
    expect('(');
    std::string op = token();
    Expr result;
    if (op == "+" || op == "*") {
      std::vector<Expr> args;
      while (!peek(')')) args.push_back(parse_expr());
      result = op == "+" ? sum(args) : product(args);
    } else if (op == "^") {
      Expr base = parse_expr();
      result = pow(base, rational(token()));
    } else if (op == "sin") {
      result = sin(parse_expr());
    } else if (op == "cos") {
      result = cos(parse_expr());
    } else if (op == "exp") {
      result = exp(parse_expr());
    } else if (op == "d") {
      Expr inner = parse_expr();
      std::string var = token();
      result = derivative(inner, var, static_cast<int>(std::stoi(token())));
    } else if (op == "int") {
      Expr integrand = parse_expr();
      std::string bound = token();
      Expr lower = parse_expr();
      Expr upper = parse_expr();
      std::vector<std::string> path;
      if (peek('(')) {
        expect('(');
        if (token() != "path") fail("expected path list");
        while (!peek(')')) path.push_back(token());
        expect(')');
      }
      result = integral(integrand, bound, lower, upper, std::move(path));
    } else {
      fail("unknown operator " + op);
    }
    expect(')');
    return result;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

// Infix -------------------------------------------------------------------

std::string subscript_digits(const std::string& digits) {
  static const char* subs[] = {"₀", "₁", "₂", "₃", "₄",
                               "₅", "₆", "₇", "₈", "₉"};
  std::string out;
  for (char c : digits) out += subs[c - '0'];
  return out;
}

std::string pretty_name(const std::string& name) {
  static const std::map<std::string, std::string> greek = {
      {"theta", "θ"}, {"phi", "φ"},     {"mu", "μ"},    {"alpha", "α"},
      {"beta", "β"},  {"lambda", "λ"},  {"nu", "ν"},    {"eta", "η"},
      {"sigma", "σ"}, {"Omega", "Ω"},   {"xi", "ξ"},    {"Sigma", "Σ"}};
  std::string base = name;
  std::string suffix;
  std::string dots;
  while (!base.empty() && base.back() == '\'') {
    suffix += '\'';
    base.pop_back();
  }
  if (base.size() > 5 && base.ends_with("_ddot")) {
    base.resize(base.size() - 5);
    dots = "̈";
  } else if (base.size() > 4 && base.ends_with("_dot")) {
    base.resize(base.size() - 4);
    dots = "̇";
  }
  std::size_t d = base.size();
  while (d > 0 && std::isdigit(static_cast<unsigned char>(base[d - 1]))) --d;
  std::string digits = base.substr(d);
  base.resize(d);
  auto it = greek.find(base);
  std::string head = it == greek.end() ? base : it->second;
  return head + dots + subscript_digits(digits) + suffix;
}

struct InfixWriter {
  bool pretty;

  std::string name(const std::string& n) const {
    return pretty ? pretty_name(n) : n;
  }

  // Precedence: 1 sum, 2 product, 3 power, 4 atom.
  std::string write(const Expr& e, int parent) const {
    std::string s;
    int prec = 4;
    switch (e.kind()) {
      case Kind::Constant:
        s = e.value().str();
        prec = e.value().is_integer() && !e.value().is_negative() ? 4 : 2;
        if (e.value().is_negative()) prec = 1;
        break;
      case Kind::Symbol:
        s = name(e.name());
        break;
      case Kind::Sum: {
        prec = 1;
        bool first = true;
        for (const auto& t : e.args()) {
          auto [neg, body] = signed_term(t);
          if (first)
            s += neg ? "-" + body : body;
          else
            s += neg ? " - " + body : " + " + body;
          first = false;
        }
        break;
      }
      case Kind::Product: {
        auto [neg, body] = signed_term(e);
        prec = neg ? 1 : 2;
        s = neg ? "-" + body : body;
        break;
      }
      case Kind::Power:
        prec = 3;
        if (e.exponent() == Rational(1, 2)) {
          s = "sqrt(" + write(e.args()[0], 0) + ")";
          prec = 4;
        } else if (e.exponent() == Rational(-1)) {
          s = "1/" + write(e.args()[0], 3);
          prec = 2;
        } else {
          std::string q = e.exponent().str();
          if (!e.exponent().is_integer() || e.exponent().is_negative())
            q = "(" + q + ")";
          s = write(e.args()[0], 4) + "^" + q;
        }
        break;
      case Kind::Sin:
        s = "sin(" + write(e.args()[0], 0) + ")";
        break;
      case Kind::Cos:
        s = "cos(" + write(e.args()[0], 0) + ")";
        break;
      case Kind::Exp:
        s = "exp(" + write(e.args()[0], 0) + ")";
        break;
      case Kind::Derivative:
        s = "d" + (e.order() > 1 ? "^" + std::to_string(e.order()) : "") +
            "/d" + name(e.args()[1].name()) + "(" + write(e.args()[0], 0) +
            ")";
        break;
      case Kind::Integral:
        s = (pretty ? std::string("∫") : std::string("int")) + "[" +
            write(e.lower(), 0) + ", " + write(e.upper(), 0) + "](" +
            write(e.integrand(), 0) + ") d" + name(e.name());
        break;
    }
    if (prec < parent) return "(" + s + ")";
    return s;
  }

  // Splits a term into sign and an unsigned rendering, with negative powers
  // gathered into a denominator.
  std::pair<bool, std::string> signed_term(const Expr& t) const {
    if (t.kind() == Kind::Constant) {
      Rational v = t.value();
      bool neg = v.is_negative();
      return {neg, (neg ? -v : v).str()};
    }
    if (t.kind() != Kind::Product) return {false, write(t, 2)};
    Rational c(1);
    std::vector<std::string> num, den;
    for (const auto& f : t.args()) {
      if (f.is_constant()) {
        c = f.value();
      } else if (f.kind() == Kind::Power && f.exponent().is_negative()) {
        Rational q = -f.exponent();
        den.push_back(q.is_one() ? write(f.args()[0], 3)
                                 : write(pow(f.args()[0], q), 3));
      } else {
        num.push_back(write(f, 2));
      }
    }
    bool neg = c.is_negative();
    Rational mag = neg ? -c : c;
    std::string body;
    if (!mag.is_one() || num.empty()) {
      body = mag.is_integer() ? mag.str() : "(" + mag.str() + ")";
    }
    for (const auto& n : num) body += (body.empty() ? "" : "*") + n;
    if (!den.empty()) {
      std::string d;
      for (const auto& x : den) d += (d.empty() ? "" : "*") + x;
      body += "/" + (den.size() > 1 ? "(" + d + ")" : d);
    }
    return {neg, body};
  }
};

class InfixParser {
 public:
  explicit InfixParser(std::string_view text) : text_(text) {}

  Expr parse() {
    Expr e = parse_sum();
    skip_ws();
    if (pos_ != text_.size()) fail("unexpected trailing input");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw ExprError("expression parse error at " + std::to_string(pos_) +
                    ": " + what);
  }

  void skip_ws() {
    while (pos_ < text_.size() &&
           std::isspace(static_cast<unsigned char>(text_[pos_])))
      ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  Expr parse_sum() {
    Expr e = parse_product();
    for (;;) {
      if (accept('+'))
        e = e + parse_product();
      else if (accept('-'))
        e = e - parse_product();
      else
        return e;
    }
  }

  Expr parse_product() {
    Expr e = parse_unary();
    for (;;) {
      if (accept('*'))
        e = e * parse_unary();
      else if (accept('/'))
        e = e / parse_unary();
      else
        return e;
    }
  }

  Expr parse_unary() {
    if (accept('-')) return -parse_unary();
    if (accept('+')) return parse_unary();
    return parse_power();
  }

  Expr parse_power() {
    Expr base = parse_primary();
    if (accept('^')) {
      Expr q = canonicalize(parse_unary());
      if (!q.is_constant()) fail("exponent must be a rational constant");
      return pow(base, q.value());
    }
    return base;
  }

  Rational number() {
    std::size_t start = pos_;
    std::int64_t num = 0;
    std::int64_t den = 1;
    bool any = false;
    auto push_digit = [&](char c) {
      if (num > (std::int64_t{1} << 58)) fail("numeric literal too long");
      num = num * 10 + (c - '0');
      any = true;
    };
    while (pos_ < text_.size() &&
           std::isdigit(static_cast<unsigned char>(text_[pos_])))
      push_digit(text_[pos_++]);
    if (pos_ < text_.size() && text_[pos_] == '.') {
      ++pos_;
      while (pos_ < text_.size() &&
             std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
        push_digit(text_[pos_++]);
        den *= 10;
      }
    }
    if (!any) {
      pos_ = start;
      fail("expected number");
    }
    Rational r(num, den);
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      ++pos_;
      bool neg = false;
      if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-'))
        neg = text_[pos_++] == '-';
      int e = 0;
      bool digits = false;
      while (pos_ < text_.size() &&
             std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
        e = e * 10 + (text_[pos_++] - '0');
        digits = true;
      }
      if (!digits) fail("malformed exponent");
      r = r * Rational(10).pow(neg ? -e : e);
    }
    return r;
  }

  Expr parse_primary() {
    skip_ws();
    if (pos_ >= text_.size()) fail("unexpected end of input");
    char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      Expr e = parse_sum();
      if (!accept(')')) fail("expected ')'");
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.')
      return Expr(number());
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t start = pos_;
      while (pos_ < text_.size() &&
             (std::isalnum(static_cast<unsigned char>(text_[pos_])) ||
              text_[pos_] == '_' || text_[pos_] == '\''))
        ++pos_;
      std::string id(text_.substr(start, pos_ - start));
      if (accept('(')) {
        Expr arg = parse_sum();
        if (!accept(')')) fail("expected ')' after function argument");
        if (id == "sin") return sin(arg);
        if (id == "cos") return cos(arg);
        if (id == "exp") return exp(arg);
        if (id == "sqrt") return sqrt(arg);
        fail("unknown function " + id);
      }
      return sym(id);
    }
    fail(std::string("unexpected character '") + c + "'");
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string to_prefix(const Expr& e) {
  std::ostringstream out;
  write_prefix(e, out);
  return out.str();
}

Expr parse_prefix(std::string_view text) { return PrefixParser(text).parse(); }

std::string to_infix(const Expr& e, bool pretty) {
  return InfixWriter{pretty}.write(e, 0);
}

Expr parse_infix(std::string_view text) { return InfixParser(text).parse(); }

}  // namespace symreduce
