#include "symreduce/symmetry.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <random>

namespace symreduce {

namespace {

Expr dep(const std::string& n) { return sym(n, SymbolRole::Dependent); }
Expr par(const std::string& n) { return sym(n, SymbolRole::Parameter); }

bool has_integral(const Generator& g) {
  if (contains_integral(g.xi)) return true;
  for (const auto& e : g.etas)
    if (contains_integral(e)) return true;
  if (g.xi_im && contains_integral(*g.xi_im)) return true;
  for (const auto& e : g.etas_im)
    if (contains_integral(e)) return true;
  return false;
}

// Complex coefficient as a (real, imaginary) pair.
struct C {
  Expr re = Expr(0);
  Expr im = Expr(0);
};

C real(const Expr& e) { return {e, Expr(0)}; }
C operator+(const C& a, const C& b) { return {a.re + b.re, a.im + b.im}; }
C operator*(const C& a, const C& b) {
  return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
}
C operator*(const Expr& s, const C& a) { return {s * a.re, s * a.im}; }

// e^{±ikφ}
C cis(int k, const Expr& phi) {
  Expr arg = Expr(std::abs(k)) * phi;
  return {cos(arg), k < 0 ? -sin(arg) : sin(arg)};
}

const C kI{Expr(0), Expr(1)};

Expr time_integral(const Expr& f) {
  return integral(f, "tau", Expr(0), sym(names::t, SymbolRole::Independent),
                  {"phi", "r", "r_dot"});
}

C time_integral(const C& f) { return {time_integral(f.re), time_integral(f.im)}; }

std::vector<Symbol> trphi_chart() {
  return {Symbol{names::t, SymbolRole::Independent},
          Symbol{names::r, SymbolRole::Dependent},
          Symbol{"phi", SymbolRole::Dependent}};
}

Generator complex_generator(std::string name, const C& xt, const C& xr,
                            const C& xp) {
  Generator g = make_generator(std::move(name), trphi_chart(), xt.re,
                               {xr.re, xp.re});
  Expr im_t = canonicalize(xt.im), im_r = canonicalize(xr.im),
       im_p = canonicalize(xp.im);
  if (!(im_t.is_zero() && im_r.is_zero() && im_p.is_zero())) {
    g.xi_im = im_t;
    g.etas_im = {im_r, im_p};
    g.nonlocal = has_integral(g);
  }
  return g;
}

// Λ₂ … Λ₈± of the Kepler representation with the constant `L1`.
void add_common_entries(std::vector<Generator>& out, const Expr& mu,
                        const Expr& L1) {
  Expr r = dep("r"), phi = dep("phi"), rd = dep("r_dot");
  Expr t = sym(names::t, SymbolRole::Independent);
  Expr L1sq = L1 * L1;

  out.push_back(complex_generator("Λ2", real(Expr(0)), real(Expr(0)),
                                  real(Expr(1))));
  out.push_back(complex_generator(
      "Λ3", real(Expr(2) * (mu * time_integral(r) - L1sq * t)), real(Expr(0)),
      real(Expr(0))));
  out.back().etas[0] = canonicalize(mu * r - L1sq);
  for (int s : {1, -1}) {
    std::string pm = s > 0 ? "+" : "-";
    out.push_back(complex_generator(
        "Λ4" + pm, Expr(2) * time_integral(r * cis(s, phi)),
        (r * r) * cis(s, phi), real(Expr(0))));
  }
  for (int s : {1, -1}) {
    std::string pm = s > 0 ? "+" : "-";
    Expr a = mu * r + Expr(3) * L1sq;
    out.push_back(complex_generator(
        "Λ6" + pm, Expr(2) * time_integral(a * cis(s, phi)),
        (r * a) * cis(2 * s, phi), L1sq * cis(2 * s, phi)));
  }
  for (int s : {1, -1}) {
    std::string pm = s > 0 ? "+" : "-";
    Expr m = mu - L1 / r, p = mu + L1 / r;
    C f = real(Expr(2) * rd * L1 * L1 * L1) +
          Expr(s) * (kI * real(r * m * p));
    out.push_back(complex_generator(
        "Λ8" + pm, Expr(2) * time_integral(f * cis(s, phi)), r * f,
        (L1sq * m) * cis(s, phi)));
  }
}

void collect_path_integrals(const Expr& e, std::vector<std::string>& out) {
  if (e.kind() == Kind::Integral && !e.path_symbols().empty()) {
    std::string key = to_prefix(e);
    if (std::find(out.begin(), out.end(), key) == out.end()) out.push_back(key);
    return;
  }
  for (const auto& a : e.args()) collect_path_integrals(a, out);
}

// Zero test by evaluation at random points, for residuals whose canonical
// form is not visibly zero.
bool numerically_zero(const std::vector<Expr>& exprs, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> dist(0.3, 0.9);
  int evaluated = 0;
  for (int attempt = 0; attempt < 20 && evaluated < 4; ++attempt) {
    Env env;
    for (const auto& e : exprs)
      for (const auto& s : free_symbols(e))
        if (!env.count(s)) env[s] = dist(rng);
    try {
      for (const auto& e : exprs)
        if (std::abs(eval_numeric(e, env)) > 1e-9) return false;
      ++evaluated;
    } catch (const NumericError&) {
    }
  }
  return evaluated > 0;
}

}  // namespace

Expr reduced_omega_sq(const ReducedSystem& rs) {
  if (rs.angle_omega_sq) return Expr(1);
  if (rs.u2_symbol == "u2") return canonicalize(rs.omega_sq);
  return substitute(rs.omega_sq, {{rs.u2_symbol, dep("u2")}});
}

Generator make_generator(std::string name, std::vector<Symbol> chart, Expr xi,
                         std::vector<Expr> etas) {
  if (etas.size() + 1 != chart.size())
    throw SymmetryError("generator " + name + ": coefficient count " +
                        std::to_string(etas.size() + 1) +
                        " does not match chart size " +
                        std::to_string(chart.size()));
  Generator g;
  g.name = std::move(name);
  g.chart = std::move(chart);
  g.xi = canonicalize(xi);
  for (auto& e : etas) g.etas.push_back(canonicalize(e));
  g.nonlocal = has_integral(g);
  return g;
}

Generator Generator::real_part() const {
  Generator g = make_generator(name + ".re", chart, xi, etas);
  return g;
}

Generator Generator::imag_part() const {
  if (!xi_im) throw SymmetryError("generator " + name + " is real");
  return make_generator(name + ".im", chart, *xi_im, etas_im);
}

std::string jet(const std::string& u, int order) {
  return u + std::string(static_cast<std::size_t>(order), '\'');
}

ProlongedField prolong2(const Generator& g) {
  if (g.chart.size() < 2)
    throw SymmetryError("prolongation needs one independent and at least one "
                        "dependent variable");
  const std::string& x = g.chart[0].name;
  JetChain jets;
  for (std::size_t i = 1; i < g.chart.size(); ++i) {
    const std::string& u = g.chart[i].name;
    for (int k = 0; k < 3; ++k) jets[jet(u, k)] = jet(u, k + 1);
  }
  ProlongedField pf{g, {}, {}};
  Expr dxi = total_derivative(g.xi, x, jets);
  for (std::size_t i = 1; i < g.chart.size(); ++i) {
    const std::string& u = g.chart[i].name;
    Expr p1 = canonicalize(total_derivative(g.etas[i - 1], x, jets) -
                           dep(jet(u, 1)) * dxi);
    Expr p2 = canonicalize(total_derivative(p1, x, jets) -
                           dep(jet(u, 2)) * dxi);
    pf.phi1.push_back(p1);
    pf.phi2.push_back(p2);
  }
  return pf;
}

std::vector<Expr> determining_residual(const Generator& g,
                                       const ReducedSystem& rs) {
  if (g.chart.size() != 3 || g.chart[0].name != rs.independent ||
      g.chart[1].name != "u1" || g.chart[2].name != "u2")
    throw SymmetryError("chart mismatch: generator " + g.name +
                        " is not on (" + rs.independent + ", u1, u2)");
  if (g.is_complex())
    throw SymmetryError("generator " + g.name +
                        " is complex; check its real and imaginary parts");

  Expr w2 = reduced_omega_sq(rs);
  Expr u1 = dep("u1");
  std::vector<Expr> F = {dep("u1''") + w2 * u1, dep("u2'")};
  ProlongedField pf = prolong2(g);

  Bindings shell{{"u1''", canonicalize(-w2 * u1)},
                 {"u1'''", canonicalize(-w2 * dep("u1'"))},
                 {"u2'", Expr(0)},
                 {"u2''", Expr(0)},
                 {"u2'''", Expr(0)}};
  std::vector<Expr> out;
  for (const auto& f : F) {
    std::vector<Expr> terms{g.xi * differentiate(f, rs.independent)};
    for (std::size_t i = 1; i < g.chart.size(); ++i) {
      const std::string& u = g.chart[i].name;
      terms.push_back(g.etas[i - 1] * differentiate(f, u));
      terms.push_back(pf.phi1[i - 1] * differentiate(f, jet(u, 1)));
      terms.push_back(pf.phi2[i - 1] * differentiate(f, jet(u, 2)));
    }
    out.push_back(substitute(sum(terms), shell));
  }
  return out;
}

bool is_symmetry(const Generator& g, const ReducedSystem& rs) {
  auto zero = [](const std::vector<Expr>& v) {
    return std::all_of(v.begin(), v.end(),
                       [](const Expr& e) { return e.is_zero(); });
  };
  if (!g.is_complex()) return zero(determining_residual(g, rs));
  return zero(determining_residual(g.real_part(), rs)) &&
         zero(determining_residual(g.imag_part(), rs));
}

std::vector<Generator> reduced_catalog(const ReducedSystem& rs) {
  if (!rs.linearizable)
    throw SymmetryError("reduced system is not linear; no catalog");
  Expr w2 = reduced_omega_sq(rs);
  if (w2.is_constant() && !(Rational(0) < w2.value()))
    throw SymmetryError("oscillator frequency squared must be positive");

  std::vector<Symbol> chart = {Symbol{rs.independent, SymbolRole::Independent},
                               Symbol{"u1", SymbolRole::Dependent},
                               Symbol{"u2", SymbolRole::Dependent}};
  Expr x = sym(rs.independent, SymbolRole::Independent);
  Expr u = dep("u1");
  Expr w = sqrt(w2);
  Expr s1 = sin(w * x), c1 = cos(w * x);
  Expr s2 = sin(Expr(2) * w * x), c2 = cos(Expr(2) * w * x);
  auto G = [&](const char* name, Expr xi, Expr eta1, Expr eta2 = Expr(0)) {
    return make_generator(name, chart, std::move(xi), {eta1, eta2});
  };
  return {
      G("translation", Expr(1), Expr(0)),
      G("scaling", Expr(0), u),
      G("shift_sin", Expr(0), s1),
      G("shift_cos", Expr(0), c1),
      G("projective_sin", s2, w * u * c2),
      G("projective_cos", c2, -(w * u * s2)),
      G("mixed_cos", u * c1, -(w * u * u * s1)),
      G("mixed_sin", u * s1, w * u * u * c1),
      G("conservation_shift",
        -(x * differentiate(w, "u2") / w), Expr(0), Expr(1)),
  };
}

int coefficient_rank(const std::vector<Generator>& gens, unsigned seed,
                     int points) {
  std::vector<Generator> rows;
  for (const auto& g : gens) {
    if (g.is_complex()) {
      rows.push_back(g.real_part());
      rows.push_back(g.imag_part());
    } else {
      rows.push_back(g);
    }
  }
  if (rows.empty()) return 0;
  const std::size_t width = rows.front().chart.size();
  std::vector<std::string> params;
  for (const auto& g : rows) {
    auto add = [&](const Expr& e) {
      for (const auto& s : free_symbols(e)) {
        bool in_chart = std::any_of(g.chart.begin(), g.chart.end(),
                                    [&](const Symbol& c) { return c.name == s; });
        if (!in_chart && std::find(params.begin(), params.end(), s) ==
                             params.end())
          params.push_back(s);
      }
    };
    add(g.xi);
    for (const auto& e : g.etas) add(e);
  }
  // Integrals along the motion are sampled as independent values.
  std::vector<std::string> integrals;
  for (const auto& g : rows) {
    collect_path_integrals(g.xi, integrals);
    for (const auto& e : g.etas) collect_path_integrals(e, integrals);
  }

  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> param_dist(0.2, 0.9);
  std::uniform_real_distribution<double> point_dist(0.5, 2.0);
  Eigen::MatrixXd M(static_cast<Eigen::Index>(rows.size()),
                    static_cast<Eigen::Index>(width * points));
  for (int attempt = 0; attempt < 100; ++attempt) {
    Env env;
    for (const auto& p : params) env[p] = param_dist(rng);
    bool ok = true;
    for (int k = 0; k < points && ok; ++k) {
      for (const auto& c : rows.front().chart) env[c.name] = point_dist(rng);
      for (const auto& k : integrals) env[k] = point_dist(rng);
      for (std::size_t i = 0; i < rows.size() && ok; ++i) {
        try {
          M(static_cast<Eigen::Index>(i), k * static_cast<int>(width)) =
              eval_numeric(rows[i].xi, env);
          for (std::size_t j = 0; j < rows[i].etas.size(); ++j)
            M(static_cast<Eigen::Index>(i),
              k * static_cast<int>(width) + static_cast<int>(j) + 1) =
                eval_numeric(rows[i].etas[j], env);
        } catch (const NumericError&) {
          ok = false;
        }
      }
    }
    if (!ok) continue;
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(M);
    qr.setThreshold(1e-10);
    return static_cast<int>(qr.rank());
  }
  throw SymmetryError("no sample point with finite generator coefficients");
}

std::vector<Generator> micz_catalog(const ProblemSpec& spec) {
  if (spec.family != Family::MICZ && spec.family != Family::Kepler)
    throw SymmetryError("the Λ catalog exists for micz and kepler only");
  if (spec.family == Family::MICZ && !spec.special_case())
    throw SymmetryError("the Λ catalog needs the special case 2ν = −λ²");
  Expr mu = spec.mu;
  Expr lambda = spec.family == Family::MICZ ? spec.lambda : Expr(0);
  Expr L = par("L");
  Expr lam2 = lambda * lambda;
  Expr L1sq = L * L + lam2;
  Expr L1 = sqrt(L1sq);
  Expr r = dep("r");
  Expr t = sym(names::t, SymbolRole::Independent);

  std::vector<Generator> out;
  Expr c = Expr(4) * mu * lam2 * r / L1sq;
  out.push_back(make_generator(
      "Λ1", trphi_chart(), Expr(-3) * t + time_integral(c),
      {Expr(-2) * r + Expr(2) * mu * lam2 * r * r / L1sq, Expr(0)}));
  add_common_entries(out, mu, L1);
  return out;
}

std::vector<Generator> kepler_catalog(const Expr& mu) {
  Expr L = par("L");
  Expr r = dep("r"), phi = dep("phi"), rd = dep("r_dot");
  Expr t = sym(names::t, SymbolRole::Independent);
  auto chart = trphi_chart();
  std::vector<Generator> out;
  out.push_back(make_generator("Λ1", chart, Expr(-3) * t,
                               {Expr(-2) * r, Expr(0)}));
  out.push_back(make_generator("Λ2", chart, Expr(0), {Expr(0), Expr(1)}));
  out.push_back(make_generator(
      "Λ3", chart, Expr(2) * mu * time_integral(r) - Expr(2) * L * L * t,
      {mu * r - L * L, Expr(0)}));
  for (int s : {1, -1}) {
    std::string pm = s > 0 ? "+" : "-";
    Expr sn = Expr(s) * sin(phi);
    Generator g = make_generator(
        "Λ4" + pm, chart, Expr(2) * time_integral(r * cos(phi)),
        {r * r * cos(phi), Expr(0)});
    g.xi_im = canonicalize(Expr(2) * time_integral(r * sn));
    g.etas_im = {canonicalize(r * r * sn), Expr(0)};
    out.push_back(g);
  }
  for (int s : {1, -1}) {
    std::string pm = s > 0 ? "+" : "-";
    Expr a = mu * r + Expr(3) * L * L;
    Expr c2 = cos(Expr(2) * phi), s2 = Expr(s) * sin(Expr(2) * phi);
    Generator g = make_generator(
        "Λ6" + pm, chart, Expr(2) * time_integral(a * cos(phi)),
        {r * a * c2, L * L * c2});
    g.xi_im = canonicalize(Expr(2) * time_integral(a * Expr(s) * sin(phi)));
    g.etas_im = {canonicalize(r * a * s2), canonicalize(L * L * s2)};
    out.push_back(g);
  }
  for (int s : {1, -1}) {
    std::string pm = s > 0 ? "+" : "-";
    // f = 2ṙL³ ± i r(μ − L/r)(μ + L/r) = P ± iQ; f·e^{±iφ} = (P cos φ − Q sin φ)
    // ± i(P sin φ + Q cos φ).
    Expr Pf = Expr(2) * rd * L * L * L;
    Expr Q = r * (mu - L / r) * (mu + L / r);
    Expr m = mu - L / r;
    Generator g = make_generator(
        "Λ8" + pm, chart,
        Expr(2) * time_integral(Pf * cos(phi) - Q * sin(phi)),
        {r * Pf, L * L * m * cos(phi)});
    Expr sgn = Expr(s);
    g.xi_im = canonicalize(sgn * Expr(2) *
                           time_integral(Pf * sin(phi) + Q * cos(phi)));
    g.etas_im = {canonicalize(sgn * r * Q),
                 canonicalize(sgn * L * L * m * sin(phi))};
    out.push_back(g);
  }
  for (auto& g : out) g.nonlocal = has_integral(g);
  return out;
}

Generator back_transform(const Generator& g, const ProblemSpec& spec) {
  if (g.chart.size() != 3 || g.chart[0].name != names::t ||
      g.chart[1].name != names::r || g.chart[2].name != "phi")
    throw SymmetryError("chart mismatch: back_transform needs (t, r, phi), "
                        "generator " + g.name);
  Expr mu = spec.mu;
  Expr lambda = spec.family == Family::MICZ ? spec.lambda : Expr(0);
  Expr r = dep("r"), phid = dep("phi_dot");
  Expr u1 = dep("u1"), u2 = dep("u2");
  Expr P2 = u2 * u2 + lambda * lambda;
  Expr u = u1 + mu / P2;
  Bindings to_reduced{{"r", pow(u, Rational(-1))},
                      {"phi_dot", u2 * u * u},
                      {"r_dot", -(u2 * dep("u1'"))},
                      {"L", u2}};
  JetChain jets{{"r", "r_dot"},
                {"phi", "phi_dot"},
                {"r_dot", "r_ddot"},
                {"phi_dot", "phi_ddot"}};
  auto Dt = [&](const Expr& e) { return total_derivative(e, names::t, jets); };

  struct Out {
    Expr sigma, eta1, Sigma;
  };
  auto transform = [&](const Expr& xt, const Expr& xr, const Expr& xp) {
    Expr Sigma = Expr(2) * xr * r * phid + r * r * (Dt(xp) - phid * Dt(xt));
    Expr eta1 = -xr / (r * r) +
                Expr(2) * mu * u2 * pow(P2, Rational(-2)) * Sigma;
    return Out{substitute(xp, to_reduced), substitute(eta1, to_reduced),
               substitute(Sigma, to_reduced)};
  };

  std::vector<Symbol> chart = {Symbol{"phi", SymbolRole::Independent},
                               Symbol{"u1", SymbolRole::Dependent},
                               Symbol{"u2", SymbolRole::Dependent}};
  Out re = transform(g.xi, g.etas[0], g.etas[1]);
  Generator w = make_generator(g.name, chart, re.sigma, {re.eta1, re.Sigma});
  if (g.is_complex()) {
    Out im = transform(*g.xi_im, g.etas_im[0], g.etas_im[1]);
    if (!(im.sigma.is_zero() && im.eta1.is_zero() && im.Sigma.is_zero())) {
      w.xi_im = im.sigma;
      w.etas_im = {im.eta1, im.Sigma};
    }
  }
  w.nonlocal = has_integral(w);
  return w;
}

std::string status_name(BackTransformStatus s) {
  switch (s) {
    case BackTransformStatus::Symmetry:
      return "symmetry";
    case BackTransformStatus::NotPointSymmetry:
      return "not_point_symmetry";
    case BackTransformStatus::Uncheckable:
      return "uncheckable";
  }
  return "unknown";
}

std::vector<BackTransformCheck> check_back_transforms(
    const std::vector<Generator>& catalog, const ProblemSpec& spec,
    const ReducedSystem& rs) {
  static const std::vector<std::string> foreign = {
      "t", "r", "r_dot", "r_ddot", "phi_dot", "phi_ddot", "S"};
  std::vector<BackTransformCheck> out;
  for (const auto& g : catalog) {
    BackTransformCheck c;
    c.original = g;
    c.reduced = back_transform(g, spec);
    std::vector<Generator> parts = {c.reduced.is_complex()
                                        ? c.reduced.real_part()
                                        : c.reduced};
    if (c.reduced.is_complex()) parts.push_back(c.reduced.imag_part());
    bool checkable = !c.reduced.nonlocal;
    for (const auto& p : parts) {
      for (const Expr* e : {&p.xi, &p.etas[0], &p.etas[1]})
        for (const auto& s : free_symbols(*e))
          if (std::find(foreign.begin(), foreign.end(), s) != foreign.end())
            checkable = false;
    }
    if (!checkable) {
      c.status = BackTransformStatus::Uncheckable;
    } else {
      bool zero = true;
      for (const auto& p : parts) {
        for (auto& e : determining_residual(p, rs)) {
          zero = zero && e.is_zero();
          c.residual.push_back(e);
        }
      }
      if (!zero) zero = numerically_zero(c.residual, 17);
      c.status = zero ? BackTransformStatus::Symmetry
                      : BackTransformStatus::NotPointSymmetry;
    }
    out.push_back(std::move(c));
  }
  return out;
}

}  // namespace symreduce
