#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "symreduce/problems.hpp"
#include "symreduce/reduce.hpp"
#include "symreduce/symmetry.hpp"

namespace symreduce {

class NumericsError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct OrbitState {
  double t = 0.0;
  double r = 1.0;
  double r_dot = 0.0;
  double angle = 0.0;
  double angle_dot = 1.0;
};

struct IntegratorOptions {
  double tol = 1e-10;
  double r_min = 1e-6;
  double h_max = 0.1;
  std::size_t max_steps = 2'000'000;
};

struct DenseOutput;

/// Accepted integrator steps. `at` interpolates between samples with
/// quintic Hermite polynomials built from positions, rates and accelerations.
struct Trajectory {
  std::vector<OrbitState> samples;
  std::shared_ptr<const DenseOutput> dense;
  ProblemSpec spec;
  IntegratorOptions options;
  double cone_sine = 1.0;  // MICZ only, fixed by the initial state
  bool singular = false;
  std::string stop_reason;

  OrbitState at(double t) const;
  double t_begin() const { return samples.front().t; }
  double t_end() const { return samples.back().t; }
};

/// Dormand-Prince 5(4) with PI step control. Parameters of `spec` must be
/// numeric. Stops early with `singular` set when r drops below r_min.
Trajectory integrate_orbit(const ProblemSpec& spec, const OrbitState& s0,
                           double t_end, const IntegratorOptions& opts = {});

/// Phase-space bindings of a state: r, r_dot, the angle and its rate, t, and
/// S for MICZ.
Env phase_env(const Trajectory& traj, const OrbitState& s);

/// max |q(s) − q(s₀)| / max(1, |q(s₀)|) over the samples.
double conserved_drift(const Trajectory& traj, const ConservedQuantity& q);

/// u₁ and u₂ of `rs` sampled at `n` equally spaced angles of a trajectory
/// whose angle increases monotonically.
struct AngleSamples {
  std::vector<double> angle;
  std::vector<double> t;
  std::vector<double> u1;
  std::vector<double> u2;
};
AngleSamples sample_by_angle(const Trajectory& traj, const ReducedSystem& rs,
                             std::size_t n, double angle_begin,
                             double angle_end);

/// Ω² of the reduced system in the angle variable, at the trajectory's u₂.
double angle_frequency_sq(const Trajectory& traj, const ReducedSystem& rs);

struct OscillatorFit {
  double omega = 0.0;
  double a = 0.0, b = 0.0, k = 0.0;
  double residual = 0.0;  // max pointwise |u₁ − fit|
};

/// Least-squares fit of A cos Ωθ + B sin Ωθ + K to u₁ resampled on a
/// uniform angle grid, with Ω from the reduced system.
OscillatorFit oscillator_residual(const Trajectory& traj,
                                  const ReducedSystem& rs);

/// Frequency of u₁ in the angle, by peak spacing refined with Brent's
/// method on the fit residual. Unlike oscillator_residual, Ω is measured,
/// not taken from the reduced system.
double measure_frequency(const Trajectory& traj, const ReducedSystem& rs);

struct FrequencyVerdict {
  double measured = 0.0;
  std::vector<std::pair<std::string, double>> candidates;  // name, predicted
  std::vector<bool> matches;
  std::optional<std::string> selected;  // set iff exactly one matches
};

/// Compares the measured frequency with each Ω² reading recorded in the
/// reduced system (a single reading when there is no ambiguity).
FrequencyVerdict estimate_frequency(const Trajectory& traj,
                                    const ReducedSystem& rs,
                                    double rel_tol = 1e-4);

struct DefectResult {
  double defect = 0.0;       // at ε
  double defect_half = 0.0;  // at ε/2
  double ratio = 0.0;
  bool uninformative = false;  // both defects at the numerical floor
  bool accepted = false;       // ratio in [3.5, 4.5]
};

/// Applies x → x + εξ, uᵢ → uᵢ + εηᵢ to the reduced solution sampled on a
/// grid of spacing h and measures the reduced-equation defect of the
/// transformed curve with centred differences. The defect of the
/// untransformed curve is subtracted pointwise.
DefectResult symmetry_defect(const Trajectory& traj, const ReducedSystem& rs,
                             const Generator& g, double eps,
                             double h = 1e-3);

/// max |v″ + Ω²v − f| for the particular solution v and forcing f of `rs`
/// at n angles in [span/n, span], with v″ from a five-point stencil of step
/// h. `params` binds every parameter of v, including the integration
/// constants.
double particular_residual(const ReducedSystem& rs, const Env& params,
                           std::size_t n = 50, double span = 6.0,
                           double h = 1e-2);

/// Defaults used by the acceptance checks and the CLI when a config gives
/// no initial state: r = 1, ṙ = 0, angle 0, angular rate 1.2.
OrbitState standard_initial_state(const ProblemSpec& spec);

}  // namespace symreduce
