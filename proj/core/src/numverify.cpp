#include "symreduce/numverify.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
// Boost 1.74's pchip calls isnan unqualified.
using std::isnan;
#include <boost/math/interpolators/pchip.hpp>
#include <boost/math/interpolators/quintic_hermite.hpp>
#include <boost/math/tools/minima.hpp>
#include <numbers>

namespace symreduce {

using boost::math::interpolators::pchip;
using boost::math::interpolators::quintic_hermite;

struct DenseOutput {
  quintic_hermite<std::vector<double>> r;
  quintic_hermite<std::vector<double>> angle;
};

namespace {

double numeric(const Expr& e, const std::string& what) {
  try {
    return eval_numeric(e, {});
  } catch (const NumericError&) {
    throw NumericsError("parameter " + what + " must be numeric, got " +
                        to_infix(e));
  }
}

using State = std::array<double, 4>;  // r, r_dot, angle, angle_dot

struct Dynamics {
  Family family = Family::Kepler;
  double mu = 1, alpha = 0, nu = 0, s2 = 1;
  Expr g, gdot;

  State rhs(double t, const State& y) const {
    const double r = y[0], rd = y[1], ad = y[3];
    double rdd = 0, add = 0;
    switch (family) {
      case Family::Kepler:
        rdd = r * ad * ad - mu / (r * r);
        add = -2 * rd * ad / r;
        break;
      case Family::KeplerDrag:
        rdd = r * ad * ad - alpha * rd / (r * r) - mu / (r * r);
        add = -2 * rd * ad / r - alpha * ad / (r * r);
        break;
      case Family::PowerLaw:
        rdd = r * ad * ad - mu * std::pow(r, alpha + 1);
        add = -2 * rd * ad / r;
        break;
      case Family::ConeDrag: {
        Env env{{names::t, t}};
        double gv = eval_numeric(g, env);
        double F = eval_numeric(gdot, env) / (2 * gv) + 1.5 * rd / r;
        rdd = r * ad * ad + F * rd - mu * gv * r;
        add = -2 * rd * ad / r + F * ad;
        break;
      }
      case Family::MICZ:
        rdd = r * s2 * ad * ad - mu / (r * r) - 2 * nu / (r * r * r);
        add = -2 * rd * ad / r;
        break;
    }
    return {rd, rdd, ad, add};
  }
};

Dynamics make_dynamics(const ProblemSpec& spec, const OrbitState& s0) {
  spec.validate();
  Dynamics d;
  d.family = spec.family;
  d.mu = numeric(spec.mu, "mu");
  switch (spec.family) {
    case Family::KeplerDrag:
    case Family::PowerLaw:
      d.alpha = numeric(spec.alpha, "alpha");
      break;
    case Family::ConeDrag:
      d.g = canonicalize(*spec.g);
      d.gdot = differentiate(d.g, names::t);
      break;
    case Family::MICZ: {
      d.nu = numeric(spec.nu, "nu");
      double lambda = numeric(spec.lambda, "lambda");
      double k = s0.r * s0.r * s0.angle_dot;
      if (std::abs(k) <= std::abs(lambda))
        throw NumericsError(
            "initial state is off the cone of motion: |r^2 phi_dot| must "
            "exceed |lambda|");
      d.s2 = 1 - lambda * lambda / (k * k);
      break;
    }
    case Family::Kepler:
      break;
  }
  return d;
}

State axpy(const State& y, double h,
           std::initializer_list<std::pair<double, const State*>> terms) {
  State out = y;
  for (const auto& [c, k] : terms)
    for (std::size_t i = 0; i < 4; ++i) out[i] += h * c * (*k)[i];
  return out;
}

void check_finite(const State& y, double t) {
  for (double v : y)
    if (!std::isfinite(v))
      throw NumericsError("non-finite state at t = " + std::to_string(t));
}

}  // namespace

OrbitState Trajectory::at(double t) const {
  if (!dense) throw NumericsError("trajectory has no dense output");
  t = std::clamp(t, t_begin(), t_end());
  OrbitState s;
  s.t = t;
  s.r = dense->r(t);
  s.r_dot = dense->r.prime(t);
  s.angle = dense->angle(t);
  s.angle_dot = dense->angle.prime(t);
  return s;
}

Trajectory integrate_orbit(const ProblemSpec& spec, const OrbitState& s0,
                           double t_end, const IntegratorOptions& opts) {
  if (!(opts.tol > 0)) throw NumericsError("tolerance must be positive");
  if (!(s0.r > opts.r_min))
    throw NumericsError("initial radius must exceed r_min");
  if (!(t_end > s0.t)) throw NumericsError("t_end must exceed the initial time");
  Dynamics dyn = make_dynamics(spec, s0);

  Trajectory traj;
  traj.spec = spec;
  traj.options = opts;
  traj.cone_sine = std::sqrt(dyn.s2);

  // Dormand-Prince 5(4) tableau.
  constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  constexpr double a21 = 1.0 / 5;
  constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                   a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33,
                   a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                   a65 = -5103.0 / 18656;
  constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                   b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                   e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

  std::vector<double> ts, rs, rds, rdds, as, ads, adds;
  double t = s0.t;
  State y{s0.r, s0.r_dot, s0.angle, s0.angle_dot};
  State k1 = dyn.rhs(t, y);
  auto record = [&](double tt, const State& yy, const State& kk) {
    ts.push_back(tt);
    rs.push_back(yy[0]);
    rds.push_back(yy[1]);
    rdds.push_back(kk[1]);
    as.push_back(yy[2]);
    ads.push_back(yy[3]);
    adds.push_back(kk[3]);
    traj.samples.push_back({tt, yy[0], yy[1], yy[2], yy[3]});
  };
  record(t, y, k1);

  double h = std::min({opts.h_max, 1e-3, t_end - t});
  double err_prev = 1e-4;
  for (std::size_t step = 0; t < t_end; ++step) {
    if (step >= opts.max_steps) throw NumericsError("step limit reached");
    if (h < 1e-14 * std::max(1.0, std::abs(t)))
      throw NumericsError("step size underflow at t = " + std::to_string(t));
    h = std::min(h, t_end - t);

    State k2 = dyn.rhs(t + c2 * h, axpy(y, h, {{a21, &k1}}));
    State k3 = dyn.rhs(t + c3 * h, axpy(y, h, {{a31, &k1}, {a32, &k2}}));
    State k4 = dyn.rhs(t + c4 * h,
                       axpy(y, h, {{a41, &k1}, {a42, &k2}, {a43, &k3}}));
    State k5 = dyn.rhs(
        t + c5 * h,
        axpy(y, h, {{a51, &k1}, {a52, &k2}, {a53, &k3}, {a54, &k4}}));
    State k6 = dyn.rhs(t + h, axpy(y, h,
                                   {{a61, &k1},
                                    {a62, &k2},
                                    {a63, &k3},
                                    {a64, &k4},
                                    {a65, &k5}}));
    State y_new = axpy(
        y, h, {{b1, &k1}, {b3, &k3}, {b4, &k4}, {b5, &k5}, {b6, &k6}});
    State k7 = dyn.rhs(t + h, y_new);

    double err = 0;
    for (std::size_t i = 0; i < 4; ++i) {
      double e = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] +
                      e6 * k6[i] + e7 * k7[i]);
      double sc = opts.tol * (1 + std::max(std::abs(y[i]), std::abs(y_new[i])));
      err = std::max(err, std::abs(e) / sc);
    }
    if (!std::isfinite(err)) {
      h *= 0.25;
      continue;
    }
    if (err <= 1.0) {
      t += h;
      y = y_new;
      k1 = k7;
      check_finite(y, t);
      record(t, y, k1);
      if (y[0] < opts.r_min) {
        traj.singular = true;
        traj.stop_reason = "r below r_min at t = " + std::to_string(t);
        break;
      }
      double fac = 0.9 * std::pow(std::max(err, 1e-10), -0.7 / 5) *
                   std::pow(err_prev, 0.4 / 5);
      h *= std::clamp(fac, 0.2, 5.0);
      err_prev = std::max(err, 1e-4);
    } else {
      h *= std::clamp(0.9 * std::pow(err, -1.0 / 5), 0.1, 0.9);
    }
    h = std::min(h, opts.h_max);
  }

  if (ts.size() >= 2) {
    auto t2 = ts;
    auto t3 = ts;
    traj.dense = std::make_shared<DenseOutput>(DenseOutput{
        quintic_hermite<std::vector<double>>(std::move(t2), std::move(rs),
                                             std::move(rds), std::move(rdds)),
        quintic_hermite<std::vector<double>>(std::move(t3), std::move(as),
                                             std::move(ads),
                                             std::move(adds))});
  }
  return traj;
}

Env phase_env(const Trajectory& traj, const OrbitState& s) {
  const std::string ang = traj.spec.angle();
  Env env{{names::t, s.t},
          {names::r, s.r},
          {names::r_dot, s.r_dot},
          {ang, s.angle},
          {names::dot(ang), s.angle_dot}};
  if (traj.spec.family == Family::MICZ) env[names::cone_sine] = traj.cone_sine;
  return env;
}

double conserved_drift(const Trajectory& traj, const ConservedQuantity& q) {
  if (traj.samples.empty()) throw NumericsError("empty trajectory");
  double q0 = eval_numeric(q.expression, phase_env(traj, traj.samples.front()));
  double scale = std::max(1.0, std::abs(q0));
  double drift = 0;
  for (const auto& s : traj.samples)
    drift = std::max(drift,
                     std::abs(eval_numeric(q.expression, phase_env(traj, s)) -
                              q0) / scale);
  return drift;
}

namespace {

// Phase env plus the reduction's integration constants (fixed by the
// initial state) and its u₂ symbol.
struct ReducedEvaluator {
  const Trajectory& traj;
  const ReducedSystem& rs;
  Expr u1, u2;
  Env constants;

  ReducedEvaluator(const Trajectory& tr, const ReducedSystem& r)
      : traj(tr), rs(r), u1(r.u1_in_phase()), u2(r.u2_in_phase()) {
    Env env0 = phase_env(traj, traj.samples.front());
    for (const auto& [name, e] : rs.constants)
      constants[name] = eval_numeric(e, env0);
  }

  Env env(const OrbitState& s) const {
    Env e = phase_env(traj, s);
    for (const auto& [k, v] : constants) e[k] = v;
    e[rs.u2_symbol] = eval_numeric(u2, e);
    return e;
  }
};

void require_monotone(const Trajectory& traj) {
  for (const auto& s : traj.samples)
    if (std::abs(s.angle_dot) < 1e-12)
      throw NumericsError("u2 vanishes: the angular rate is zero");
  for (std::size_t i = 1; i < traj.samples.size(); ++i)
    if (!(traj.samples[i].angle > traj.samples[i - 1].angle))
      throw NumericsError("angle is not monotone along the trajectory");
}

}  // namespace

AngleSamples sample_by_angle(const Trajectory& traj, const ReducedSystem& rs,
                             std::size_t n, double angle_begin,
                             double angle_end) {
  require_monotone(traj);
  if (n < 2) throw NumericsError("need at least two samples");
  const auto& sm = traj.samples;
  if (angle_begin < sm.front().angle || angle_end > sm.back().angle)
    throw NumericsError("angle range outside the trajectory");

  std::vector<double> a, t;
  for (const auto& s : sm) {
    a.push_back(s.angle);
    t.push_back(s.t);
  }
  pchip<std::vector<double>> t_of_angle(std::move(a), std::move(t));
  ReducedEvaluator ev(traj, rs);

  AngleSamples out;
  for (std::size_t k = 0; k < n; ++k) {
    double target = angle_begin + (angle_end - angle_begin) *
                                      static_cast<double>(k) /
                                      static_cast<double>(n - 1);
    double tk = t_of_angle(target);
    OrbitState s = traj.at(tk);
    for (int it = 0; it < 4; ++it) {
      tk -= (s.angle - target) / s.angle_dot;
      s = traj.at(tk);
    }
    Env env = ev.env(s);
    out.angle.push_back(target);
    out.t.push_back(tk);
    out.u1.push_back(eval_numeric(ev.u1, env));
    out.u2.push_back(env.at(rs.u2_symbol));
  }
  return out;
}

double angle_frequency_sq(const Trajectory& traj, const ReducedSystem& rs) {
  ReducedEvaluator ev(traj, rs);
  Env env = ev.env(traj.samples.front());
  return eval_numeric(rs.angle_omega_sq ? *rs.angle_omega_sq : rs.omega_sq,
                      env);
}

namespace {

OscillatorFit fit_oscillator(const std::vector<double>& x,
                             const std::vector<double>& u, double omega) {
  const auto n = static_cast<Eigen::Index>(x.size());
  Eigen::MatrixXd A(n, 3);
  Eigen::VectorXd b(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    A(i, 0) = std::cos(omega * x[static_cast<std::size_t>(i)]);
    A(i, 1) = std::sin(omega * x[static_cast<std::size_t>(i)]);
    A(i, 2) = 1.0;
    b(i) = u[static_cast<std::size_t>(i)];
  }
  Eigen::Vector3d c = A.colPivHouseholderQr().solve(b);
  OscillatorFit fit{omega, c(0), c(1), c(2), 0.0};
  fit.residual = (A * c - b).cwiseAbs().maxCoeff();
  return fit;
}

void require_u2_nonzero(const AngleSamples& s, const ReducedSystem& rs) {
  if (rs.pipeline != "direct") return;
  for (double v : s.u2)
    if (std::abs(v) < 1e-8)
      throw NumericsError("u2 vanishes along the trajectory");
}

}  // namespace

OscillatorFit oscillator_residual(const Trajectory& traj,
                                  const ReducedSystem& rs) {
  if (!rs.linearizable)
    throw NumericsError("reduced system is not a linear oscillator");
  double w2 = angle_frequency_sq(traj, rs);
  if (!(w2 > 0))
    throw NumericsError("oscillator frequency squared is not positive");
  const auto& sm = traj.samples;
  auto s = sample_by_angle(traj, rs, 4000, sm.front().angle,
                           sm.back().angle);
  require_u2_nonzero(s, rs);
  return fit_oscillator(s.angle, s.u1, std::sqrt(w2));
}

double measure_frequency(const Trajectory& traj, const ReducedSystem& rs) {
  const auto& sm = traj.samples;
  auto s = sample_by_angle(traj, rs, 8000, sm.front().angle, sm.back().angle);
  const std::vector<double>& u = s.u1;

  std::vector<double> peaks;
  for (std::size_t i = 1; i + 1 < u.size(); ++i)
    if (u[i] > u[i - 1] && u[i] >= u[i + 1]) peaks.push_back(s.angle[i]);

  auto cost = [&](double w) { return fit_oscillator(s.angle, u, w).residual; };
  double lo, hi;
  if (peaks.size() >= 2) {
    double w0 = 2 * std::numbers::pi * static_cast<double>(peaks.size() - 1) /
                (peaks.back() - peaks.front());
    lo = 0.8 * w0;
    hi = 1.2 * w0;
  } else {
    double best = 0.05, best_cost = cost(best);
    for (double w = 0.05; w <= 5.0; w += 0.01)
      if (double c = cost(w); c < best_cost) {
        best = w;
        best_cost = c;
      }
    lo = std::max(1e-3, best - 0.02);
    hi = best + 0.02;
  }
  auto [w, c] = boost::math::tools::brent_find_minima(cost, lo, hi, 50);
  (void)c;
  return w;
}

FrequencyVerdict estimate_frequency(const Trajectory& traj,
                                    const ReducedSystem& rs, double rel_tol) {
  FrequencyVerdict v;
  v.measured = measure_frequency(traj, rs);
  ReducedEvaluator ev(traj, rs);
  Env env = ev.env(traj.samples.front());
  auto add = [&](const std::string& name, const Expr& w2e) {
    double w2 = eval_numeric(w2e, env);
    double w = w2 > 0 ? std::sqrt(w2) : std::nan("");
    v.candidates.emplace_back(name, w);
    v.matches.push_back(std::isfinite(w) &&
                        std::abs(v.measured - w) <= rel_tol * w);
  };
  if (rs.omega_candidates.empty())
    add("reduced", rs.angle_omega_sq ? *rs.angle_omega_sq : rs.omega_sq);
  for (const auto& c : rs.omega_candidates) add(c.name, c.omega_sq);
  if (std::count(v.matches.begin(), v.matches.end(), true) == 1) {
    auto i = std::find(v.matches.begin(), v.matches.end(), true) -
             v.matches.begin();
    v.selected = v.candidates[static_cast<std::size_t>(i)].first;
  }
  return v;
}

DefectResult symmetry_defect(const Trajectory& traj, const ReducedSystem& rs,
                             const Generator& g, double eps, double h) {
  if (g.is_complex())
    throw NumericsError("complex generator: measure its parts separately");
  if (g.chart.size() != 3 || g.chart[0].name != rs.independent)
    throw NumericsError("generator " + g.name + " is not on the reduced chart");
  if (!rs.linearizable)
    throw NumericsError("reduced system is not a linear oscillator");

  // x = scale · angle; scale = Ω when the chart rescales the angle.
  double scale = 1.0;
  if (rs.angle_omega_sq) scale = std::sqrt(angle_frequency_sq(traj, rs));
  const double a0 = traj.samples.front().angle + 0.05;
  const double avail = (traj.samples.back().angle - 0.05 - a0) * scale;
  const double span = std::min(2 * std::numbers::pi, avail);
  if (span < 50 * h) throw NumericsError("trajectory too short for defects");
  const auto n = static_cast<std::size_t>(span / h) + 1;
  auto s = sample_by_angle(traj, rs, n, a0, a0 + h * static_cast<double>(n - 1) / scale);
  require_u2_nonzero(s, rs);
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = s.angle[i] * scale;

  Expr w2e = rs.angle_omega_sq ? Expr(1) : rs.omega_sq;
  ReducedEvaluator ev(traj, rs);
  Env base = ev.constants;

  std::vector<double> xi(n), eta1(n), eta2(n);
  for (std::size_t i = 0; i < n; ++i) {
    Env env = base;
    env[rs.independent] = x[i];
    env["u1"] = s.u1[i];
    env["u2"] = s.u2[i];
    env[rs.u2_symbol] = s.u2[i];
    xi[i] = eval_numeric(g.xi, env);
    eta1[i] = eval_numeric(g.etas[0], env);
    eta2[i] = eval_numeric(g.etas[1], env);
  }

  // Defect residuals of the curve s ↦ (X, U, V) on the interior points.
  auto residuals = [&](double e) {
    std::vector<double> X(n), U(n), V(n);
    for (std::size_t i = 0; i < n; ++i) {
      X[i] = x[i] + e * xi[i];
      U[i] = s.u1[i] + e * eta1[i];
      V[i] = s.u2[i] + e * eta2[i];
    }
    std::vector<double> dX(n, 0), Up(n, 0), Vp(n, 0);
    for (std::size_t i = 1; i + 1 < n; ++i) {
      dX[i] = (X[i + 1] - X[i - 1]) / (2 * h);
      Up[i] = (U[i + 1] - U[i - 1]) / (2 * h) / dX[i];
      Vp[i] = (V[i + 1] - V[i - 1]) / (2 * h) / dX[i];
    }
    std::vector<std::array<double, 2>> out(n, {0, 0});
    for (std::size_t i = 2; i + 2 < n; ++i) {
      double Upp = (Up[i + 1] - Up[i - 1]) / (2 * h) / dX[i];
      Env env = base;
      env[rs.u2_symbol] = V[i];
      double w2 = eval_numeric(w2e, env);
      out[i] = {Upp + w2 * U[i], Vp[i]};
    }
    return out;
  };

  auto r0 = residuals(0);
  auto defect = [&](double e) {
    auto r = residuals(e);
    double d = 0;
    for (std::size_t i = 2; i + 2 < n; ++i)
      d = std::max({d, std::abs(r[i][0] - r0[i][0]),
                    std::abs(r[i][1] - r0[i][1])});
    return d;
  };

  constexpr double floor = 1e-9;
  DefectResult out;
  out.defect = defect(eps);
  out.defect_half = defect(eps / 2);
  out.uninformative = out.defect < floor && out.defect_half < floor;
  out.ratio = out.defect_half > 0 ? out.defect / out.defect_half
                                  : std::nan("");
  out.accepted = !out.uninformative && out.ratio >= 3.5 && out.ratio <= 4.5;
  return out;
}

double particular_residual(const ReducedSystem& rs, const Env& params,
                           std::size_t n, double span, double h) {
  if (n == 0 || !(span > 0) || !(h > 0))
    throw NumericsError("particular_residual: bad sampling");
  Env env = params;
  const std::string& x = rs.independent;
  auto at = [&](const Expr& e, double v) {
    env[x] = v;
    return eval_numeric(e, env, 1e-13);
  };
  double worst = 0;
  for (std::size_t i = 1; i <= n; ++i) {
    double th = span * static_cast<double>(i) / static_cast<double>(n);
    double d2 = (-at(rs.particular, th + 2 * h) + 16 * at(rs.particular, th + h) -
                 30 * at(rs.particular, th) + 16 * at(rs.particular, th - h) -
                 at(rs.particular, th - 2 * h)) /
                (12 * h * h);
    double res = d2 + at(rs.omega_sq, th) * at(rs.particular, th) -
                 at(rs.forcing, th);
    worst = std::max(worst, std::abs(res));
  }
  return worst;
}

OrbitState standard_initial_state(const ProblemSpec&) {
  return OrbitState{0.0, 1.0, 0.0, 0.0, 1.2};
}

}  // namespace symreduce
