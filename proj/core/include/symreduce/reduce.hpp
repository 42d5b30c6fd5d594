#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "symreduce/expr.hpp"
#include "symreduce/problems.hpp"

namespace symreduce {

/// Raised when an elimination step does not produce the expected form, or a
/// family is outside a pipeline's reach. `step` names the trace label.
class ReductionError : public std::runtime_error {
 public:
  ReductionError(std::string step, const std::string& what)
      : std::runtime_error(step + ": " + what), step_(std::move(step)) {}
  const std::string& step() const { return step_; }

 private:
  std::string step_;
};

struct TraceEntry {
  std::string label;
  Expr expr;
};

/// First-order system in w1 = r, w2 = θ, w3 = ṙ, w4 = θ̇; each rhs is dwᵢ/dt.
struct WSystem {
  std::vector<std::pair<std::string, Expr>> equations;
  std::string ignorable = "w2";
  ProblemSpec spec;

  const Expr& rhs(const std::string& w) const;
};

/// dwᵢ/dy = ẇᵢ/w₄ for i ∈ {1, 3, 4}, written as `wᵢ' − rhs` (= 0).
struct AngleSystem {
  std::vector<Expr> equations;
  std::string independent = "y";
  std::vector<std::string> validity_conditions;
  ProblemSpec spec;
};

/// Candidate readings for a frequency whose printed form is ambiguous.
struct OmegaCandidate {
  std::string name;
  Expr omega_sq;
};

/// The pair u₁″ + Ω²u₁ = 0, u₂′ = 0 with the definitions of u₁ and u₂.
///
/// `u1_def` is written in the pipeline's own variables (u, or w1 and y), the
/// conserved quantity symbol `u2_symbol` and parameters. `phase_map` sends
/// those variables to phase-space symbols, `u2_def` gives the conserved
/// quantity in the same variables, and `constants` gives the integration
/// constants as functions of the phase point they are fixed at.
struct ReducedSystem {
  Family family = Family::Kepler;
  std::string pipeline;  // "nucci" or "direct"
  std::string independent;
  std::string dependent;  // u, or w1 for the Nucci chart
  std::string angle;  // phase-space angle behind the independent variable
  Expr omega_sq = Expr(1);
  Expr forcing = Expr(0);
  Expr u1_def;
  Expr u2_def;
  std::string u2_symbol = "u2";
  Expr particular;
  Bindings phase_map;
  Bindings constants;
  bool linearizable = true;
  Expr equation;  // normalized second-order equation for u (= 0)
  // MICZ with general ν: the independent variable is x = Ωφ.
  std::optional<Expr> angle_omega_sq;
  std::vector<OmegaCandidate> omega_candidates;
  std::vector<TraceEntry> trace;

  /// u₁ as a function of phase-space symbols and constant parameters.
  Expr u1_in_phase() const;
  Expr u2_in_phase() const;
};

WSystem nucci_w_system(const ProblemSpec& spec);
AngleSystem change_independent(const WSystem& ws);
ReducedSystem nucci_eliminate(const AngleSystem& eqs, const ProblemSpec& spec);
ReducedSystem reduce_nucci(const ProblemSpec& spec);

ReducedSystem reduce_direct(const ProblemSpec& spec);
Expr particular_solution(const ProblemSpec& spec);

/// u₁″ + Ω²u₁ evaluated with the reduced chart's own equation, canonical.
/// Zero for every successful reduction.
Expr reduced_residual(const ReducedSystem& rs);

/// The same residual computed in the original variables: u₁ and u₂ are
/// written in (r, ṙ, angle, anglė), angle derivatives become time
/// derivatives divided by the angular velocity, and second time derivatives
/// are replaced from the equations of motion. Returns [u₁″ + Ω²u₁, u₂′].
std::vector<Expr> residual_in_original_variables(const ReducedSystem& rs,
                                                 const ProblemSpec& spec);

/// MICZ cone constraint S = (1 − λ²r⁻⁴φ̇⁻²)^{1/2}, the form of
/// S² = L²/(L² + λ²) with L = r²Sφ̇.
Expr cone_sine_on_shell(const ProblemSpec& spec);

}  // namespace symreduce
