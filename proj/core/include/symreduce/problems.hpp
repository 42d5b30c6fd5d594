#pragma once

#include <optional>
#include <string>
#include <vector>

#include "symreduce/expr.hpp"

namespace symreduce {

class ProblemError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Family { Kepler, KeplerDrag, PowerLaw, ConeDrag, MICZ };

/// Config spelling: kepler, kepler_drag, power_law, cone_drag, micz.
std::string family_name(Family f);
std::optional<Family> parse_family(std::string_view name);

/// Problem family plus parameters. Parameters are expressions so that the
/// symbolic pipelines can run with them left free; numeric checks bind them.
///
/// `alpha` is the drag coefficient for KeplerDrag and the force-law exponent
/// for PowerLaw (where it must be an exact rational). `g` is a positive
/// function of t, ConeDrag only.
struct ProblemSpec {
  Family family = Family::Kepler;
  Expr mu = Expr::symbol("mu");
  Expr alpha = Expr(0);
  Expr lambda = Expr(0);
  Expr nu = Expr(0);
  std::optional<Expr> g;

  static ProblemSpec kepler(Expr mu = Expr::symbol("mu"));
  static ProblemSpec kepler_drag(Expr mu = Expr::symbol("mu"),
                                 Expr alpha = Expr::symbol("alpha"));
  static ProblemSpec power_law(Expr mu, Rational exponent);
  static ProblemSpec cone_drag(Expr mu, Expr g);
  static ProblemSpec micz(Expr mu = Expr::symbol("mu"),
                          Expr lambda = Expr::symbol("lambda"),
                          std::optional<Expr> nu = std::nullopt);

  /// 2ν = −λ², decided exactly.
  bool special_case() const;
  /// Throws ProblemError on a malformed spec.
  void validate() const;
  /// Name of the angle of motion: theta, or phi for MICZ.
  std::string angle() const;
};

/// Radial and transverse equations, each as an expression equal to zero.
struct ComponentEquations {
  Expr radial;
  Expr transverse;
  std::vector<Symbol> chart;  // t, r, angle
};

struct ConservedQuantity {
  std::string name;
  Expr expression;
};

// Phase-space symbol names shared by the modules.
namespace names {
inline constexpr const char* t = "t";
inline constexpr const char* r = "r";
inline constexpr const char* r_dot = "r_dot";
inline constexpr const char* r_ddot = "r_ddot";
inline constexpr const char* cone_sine = "S";
std::string dot(const std::string& v);
std::string ddot(const std::string& v);
}  // namespace names

ComponentEquations equations_of_motion(const ProblemSpec& spec);
std::vector<ConservedQuantity> conserved_quantities(const ProblemSpec& spec);

/// Time jets r → r_dot → r_ddot and angle → angle_dot → angle_ddot.
JetChain time_jets(const ProblemSpec& spec);

/// r_ddot and angle_ddot solved from the equations of motion.
Bindings on_shell(const ProblemSpec& spec);

/// Total time derivative along the motion, with second derivatives
/// eliminated.
Expr time_derivative_on_shell(const Expr& e, const ProblemSpec& spec);

}  // namespace symreduce
