#include "symreduce/reduce.hpp"

#include <algorithm>

namespace symreduce {

namespace {

Expr dep(const std::string& n) { return sym(n, SymbolRole::Dependent); }
Expr par(const std::string& n) { return sym(n, SymbolRole::Parameter); }
Expr prime(const std::string& n) { return dep(n + "'"); }
Expr prime2(const std::string& n) { return dep(n + "''"); }
Expr inv(const Expr& e, std::int64_t k = 1) { return pow(e, Rational(-k)); }

void expect(std::vector<TraceEntry>& trace, const std::string& label,
            const Expr& got, const Expr& want) {
  trace.push_back({label, canonicalize(got)});
  if (!equals(got, want))
    throw ReductionError(label, "expected " + to_infix(want) + ", got " +
                                    to_infix(canonicalize(got)));
}

void require_nucci_family(const ProblemSpec& spec) {
  if (spec.family != Family::Kepler && spec.family != Family::KeplerDrag)
    throw ReductionError("w_system", "the w-variable pipeline handles kepler "
                                     "and kepler_drag only, not " +
                                         family_name(spec.family));
}

JetChain second_order_jets(const std::string& v) {
  return {{v, v + "'"}, {v + "'", v + "''"}};
}

}  // namespace

const Expr& WSystem::rhs(const std::string& w) const {
  for (const auto& [name, e] : equations)
    if (name == w) return e;
  throw ReductionError("w_system", "no equation for " + w);
}

Expr ReducedSystem::u2_in_phase() const {
  return substitute(u2_def, phase_map);
}

Expr ReducedSystem::u1_in_phase() const {
  Expr e = substitute(u1_def, {{u2_symbol, u2_def}});
  return substitute(e, phase_map);
}

WSystem nucci_w_system(const ProblemSpec& spec) {
  require_nucci_family(spec);
  Bindings shell = on_shell(spec);
  Bindings to_w{{"r", dep("w1")},
                {"theta", dep("w2")},
                {"r_dot", dep("w3")},
                {"theta_dot", dep("w4")}};
  WSystem ws;
  ws.spec = spec;
  ws.equations = {
      {"w1", dep("w3")},
      {"w2", dep("w4")},
      {"w3", substitute(shell.at("r_ddot"), to_w)},
      {"w4", substitute(shell.at("theta_ddot"), to_w)},
  };
  return ws;
}

AngleSystem change_independent(const WSystem& ws) {
  AngleSystem out;
  out.spec = ws.spec;
  out.independent = "y";
  Expr w4 = dep("w4");
  for (const char* w : {"w1", "w3", "w4"})
    out.equations.push_back(canonicalize(prime(w) - ws.rhs(w) / w4));
  out.validity_conditions.push_back("w4 != 0");
  return out;
}

ReducedSystem nucci_eliminate(const AngleSystem& eqs, const ProblemSpec& spec) {
  require_nucci_family(spec);
  if (eqs.equations.size() != 3)
    throw ReductionError("angle_form", "expected three first-order equations");

  const bool drag = spec.family == Family::KeplerDrag;
  Expr w1 = dep("w1"), w3 = dep("w3"), w4 = dep("w4"), y = dep("y");
  Expr w1p = prime("w1"), w1pp = prime2("w1"), w4p = prime("w4");
  Expr mu = spec.mu;
  Expr alpha = drag ? spec.alpha : Expr(0);
  Expr beta = par("beta");
  Expr u2 = par("u2");
  Expr B = alpha * y + beta;

  ReducedSystem rs;
  rs.family = spec.family;
  rs.pipeline = "nucci";
  rs.independent = "y";
  rs.dependent = "w1";
  rs.angle = "theta";
  rs.phase_map = {{"w1", dep("r")},
                  {"w3", dep("r_dot")},
                  {"w4", dep("theta_dot")},
                  {"y", dep("theta")}};
  auto& trace = rs.trace;

  Expr eq1 = eqs.equations[0], eq3 = eqs.equations[1], eq4 = eqs.equations[2];
  trace.push_back({"angle_form.w1", eq1});
  trace.push_back({"angle_form.w3", eq3});
  trace.push_back({"angle_form.w4", eq4});
  Expr rhs3 = solve_linear(eq3, "w3'");
  Expr rhs4 = solve_linear(eq4, "w4'");

  Expr w3_sol = solve_linear(eq1, "w3");
  expect(trace, "eliminate_w3", w3_sol, w4 * w1p);

  Expr w4_rate = substitute(rhs4, {{"w3", w3_sol}});
  expect(trace, "w4_equation", w4_rate,
         Expr(-2) * w1p * w4 / w1 - alpha * inv(w1, 2));

  JetChain jets{{"w1", "w1'"}, {"w1'", "w1''"}, {"w4", "w4'"}};
  Expr second =
      total_derivative(w3_sol, "y", jets) - substitute(rhs3, {{"w3", w3_sol}});
  expect(trace, "w1_second_order", second,
         w1pp * w4 + w1p * w4p - w1 * w4 + alpha * w1p * inv(w1, 2) +
             mu * inv(w1 * w1 * w4));
  Expr second_no_w4p = substitute(second, {{"w4'", w4_rate}});
  expect(trace, "w1_second_order.no_w4_rate", second_no_w4p,
         w4 * w1pp - Expr(2) * w4 * w1p * w1p / w1 - w1 * w4 +
             mu * inv(w1 * w1 * w4));

  Expr exact = substitute(total_derivative(w1 * w1 * w4, "y", jets),
                          {{"w4'", w4_rate}});
  expect(trace, "exact_derivative", exact, -alpha);

  Expr u2_def = drag ? w1 * w1 * w4 + B : w1 * w1 * w4;
  rs.u2_def = canonicalize(u2_def);
  expect(trace, "u2_definition",
         substitute(total_derivative(u2_def, "y", jets), {{"w4'", w4_rate}}),
         Expr(0));

  // On the motion u2 is the constant u2 (Kepler) or 0 once β is fixed by the
  // initial state (drag).
  Expr w4_sol = drag ? -B * inv(w1, 2) : u2 * inv(w1, 2);
  trace.push_back({"eliminate_w4", canonicalize(w4_sol)});
  Expr z = inv(w1);
  Expr zpp = total_derivative(total_derivative(z, "y", jets), "y", jets);
  Expr reciprocal;
  if (drag) {
    reciprocal = substitute(second_no_w4p, {{"w4", w4_sol}});
    expect(trace, "reciprocal_form", reciprocal,
           B * (zpp + z - mu * inv(B, 2)));
  } else {
    reciprocal = substitute(u2 * second_no_w4p, {{"w4", w4_sol}});
    expect(trace, "reciprocal_form", reciprocal,
           u2 * u2 * (w1pp * inv(w1, 2) - Expr(2) * w1p * w1p * inv(w1, 3)) -
               u2 * u2 / w1 + mu);
    expect(trace, "reciprocal_form.z", reciprocal, mu - u2 * u2 * (zpp + z));
  }
  rs.equation = reciprocal;

  Expr u1_def;
  if (drag) {
    Expr s = sym("s", SymbolRole::Bound);
    rs.particular =
        integral(mu * sin(y - s) * inv(alpha * s + beta, 2), "s", Expr(0), y);
    rs.particular = canonicalize(rs.particular);
    u1_def = z - rs.particular;
    rs.constants = {{"beta", canonicalize(-(dep("r") * dep("r") *
                                                 dep("theta_dot") +
                                             alpha * dep("theta")))}};
  } else {
    rs.particular = canonicalize(mu * inv(u2, 2));
    u1_def = mu - u2 * u2 / w1;
  }
  rs.u1_def = canonicalize(u1_def);
  trace.push_back({"u1_definition", rs.u1_def});
  rs.omega_sq = Expr(1);
  rs.forcing = Expr(0);

  Expr res = reduced_residual(rs);
  expect(trace, "reduced_pair", res, Expr(0));
  return rs;
}

ReducedSystem reduce_nucci(const ProblemSpec& spec) {
  return nucci_eliminate(change_independent(nucci_w_system(spec)), spec);
}

Expr reduced_residual(const ReducedSystem& rs) {
  const std::string& v = rs.dependent;
  JetChain jets = second_order_jets(v);
  Expr d2 = total_derivative(total_derivative(rs.u1_def, rs.independent, jets),
                             rs.independent, jets);
  Expr vpp = solve_linear(rs.equation, v + "''");
  Expr omega_sq = rs.angle_omega_sq ? Expr(1) : rs.omega_sq;
  return substitute(d2 + omega_sq * rs.u1_def, {{v + "''", vpp}});
}

ReducedSystem reduce_direct(const ProblemSpec& spec) {
  spec.validate();
  const std::string ang = spec.angle();
  const std::string ang_dot = names::dot(ang);
  const bool micz = spec.family == Family::MICZ;

  Expr u = dep("u"), up = prime("u"), upp = prime2("u");
  Expr r = dep("r");
  Expr L = par("L");
  Expr S = micz ? par(names::cone_sine) : Expr(1);

  ReducedSystem rs;
  rs.family = spec.family;
  rs.pipeline = "direct";
  rs.independent = ang;
  rs.dependent = "u";
  rs.angle = ang;
  rs.phase_map = {{"u", inv(r)}};
  auto& trace = rs.trace;

  // L = S r² anglė in u-variables, and its rate along the motion.
  Expr L_phase = canonicalize(S * r * r * dep(ang_dot));
  trace.push_back({"angular_momentum", L_phase});
  Bindings to_u{{"r", inv(u)},
                {"r_dot", -L * up / S},
                {ang_dot, L * u * u / S}};
  Expr L_rate = substitute(time_derivative_on_shell(L_phase, spec), to_u);
  trace.push_back({"angular_momentum_rate", L_rate});

  Expr r_ddot = -L_rate * up / S - L * L * u * u * upp / (S * S);
  to_u[names::r_ddot] = r_ddot;
  Expr radial = substitute(equations_of_motion(spec).radial, to_u);
  trace.push_back({"substituted_radial", radial});
  Expr N = canonicalize(radial * (-(S * S)) * inv(L * L * u * u));
  trace.push_back({"normalized", N});

  switch (spec.family) {
    case Family::Kepler:
    case Family::PowerLaw:
      rs.u2_symbol = "L";
      rs.u2_def = L_phase;
      break;
    case Family::KeplerDrag: {
      rs.u2_symbol = "L0";
      rs.u2_def = canonicalize(L_phase + spec.alpha * dep("theta"));
      N = substitute(N, {{"L", par("L0") - spec.alpha * dep("theta")}});
      trace.push_back({"drag_momentum", N});
      break;
    }
    case Family::ConeDrag: {
      rs.u2_symbol = "A";
      Expr g = *spec.g;
      rs.u2_def = canonicalize(L_phase * pow(g * pow(r, Rational(3)),
                                             Rational(-1, 2)));
      N = substitute(N, {{"L", par("A") * sqrt(g) * pow(u, Rational(-3, 2))}});
      trace.push_back({"cone_momentum", N});
      break;
    }
    case Family::MICZ: {
      rs.u2_symbol = "L";
      rs.u2_def = L_phase;
      N = substitute(N, {{names::cone_sine,
                          L * pow(L * L + spec.lambda * spec.lambda,
                                  Rational(-1, 2))}});
      trace.push_back({"cone_sine", N});
      break;
    }
  }
  rs.equation = N;

  if (!equals(differentiate(N, "u''"), Expr(1)))
    throw ReductionError("linear_form", "normalized equation is not monic in "
                                        "u''");
  Expr rest = canonicalize(N - upp);
  if (depends_on(rest, "u'"))
    throw ReductionError("linear_form", "first derivative survives: " +
                                            to_infix(rest));
  Expr omega_sq = differentiate(rest, "u");
  if (depends_on(omega_sq, "u")) {
    rs.linearizable = false;
    rs.omega_sq = omega_sq;
    trace.push_back({"nonlinear_form", N});
    return rs;
  }
  Expr K = canonicalize(-substitute(rest, {{"u", Expr(0)}}));
  trace.push_back({"linear_form", canonicalize(upp + omega_sq * u - K)});

  if (micz && !spec.special_case()) {
    // Ω² as read from the reduction, and the printed S²(L² − 2ν) reading.
    Expr cone_s2 = L * L * inv(L * L + spec.lambda * spec.lambda);
    rs.omega_candidates = {
        {"printed", canonicalize(cone_s2 * (L * L - Expr(2) * spec.nu))},
        {"derived", omega_sq}};
    Expr w2 = canonicalize(omega_sq);
    if (w2.is_constant() && !(Rational(0) < w2.value()))
      throw ReductionError("rescaled_angle",
                           "oscillator frequency squared is not positive");
    rs.angle_omega_sq = omega_sq;
    rs.independent = "x";
    rs.omega_sq = Expr(1);
    rs.forcing = canonicalize(K / omega_sq);
    rs.equation = canonicalize(upp + u - rs.forcing);
    trace.push_back({"rescaled_angle", rs.equation});
    rs.particular = rs.forcing;
  } else {
    rs.omega_sq = omega_sq;
    rs.forcing = K;
    const bool drag = spec.family == Family::KeplerDrag;
    if (!drag && !depends_on(K, ang)) {
      rs.particular = canonicalize(K / omega_sq);
    } else if (equals(omega_sq, Expr(1))) {
      Expr eta = sym("eta", SymbolRole::Bound);
      Expr K_eta = substitute(K, {{ang, eta}});
      rs.particular = canonicalize(
          integral(sin(dep(ang) - eta) * K_eta, "eta", Expr(0), dep(ang)));
    } else {
      throw ReductionError("particular_solution",
                           "angle-dependent forcing with non-unit frequency");
    }
  }
  rs.u1_def = canonicalize(u - rs.particular);
  trace.push_back({"u1_definition", rs.u1_def});
  trace.push_back({"u2_definition", rs.u2_def});
  expect(trace, "reduced_pair", reduced_residual(rs), Expr(0));
  return rs;
}

Expr particular_solution(const ProblemSpec& spec) {
  bool ok = spec.family == Family::Kepler ||
            spec.family == Family::KeplerDrag ||
            spec.family == Family::ConeDrag ||
            (spec.family == Family::MICZ && spec.special_case());
  if (!ok)
    throw ReductionError("particular_solution",
                         "no particular solution for " +
                             family_name(spec.family));
  return reduce_direct(spec).particular;
}

Expr cone_sine_on_shell(const ProblemSpec& spec) {
  Expr r = dep("r"), phid = dep("phi_dot");
  return canonicalize(sqrt(Expr(1) - spec.lambda * spec.lambda *
                                         pow(r, Rational(-4)) *
                                         pow(phid, Rational(-2))));
}

std::vector<Expr> residual_in_original_variables(const ReducedSystem& rs,
                                                 const ProblemSpec& spec) {
  const std::string ang_dot = names::dot(rs.angle);
  Expr u2 = rs.u2_in_phase();
  Expr u1 = substitute(rs.u1_in_phase(), rs.constants);
  Expr omega_sq = substitute(rs.omega_sq, {{rs.u2_symbol, u2}});
  Expr scale = dep(ang_dot);
  if (rs.angle_omega_sq)
    scale = scale * sqrt(substitute(*rs.angle_omega_sq, {{rs.u2_symbol, u2}}));
  auto d_angle = [&](const Expr& e) {
    return canonicalize(time_derivative_on_shell(e, spec) / scale);
  };
  Expr r1 = d_angle(d_angle(u1)) + omega_sq * u1;
  Expr r2 = d_angle(substitute(u2, rs.constants));
  if (spec.family == Family::MICZ) {
    Bindings cone{{names::cone_sine, cone_sine_on_shell(spec)}};
    r1 = substitute(r1, cone);
    r2 = substitute(r2, cone);
  }
  return {canonicalize(r1), canonicalize(r2)};
}

}  // namespace symreduce
