#pragma once

#include <optional>
#include <string>
#include <vector>

#include "symreduce/expr.hpp"
#include "symreduce/problems.hpp"
#include "symreduce/reduce.hpp"

namespace symreduce {

class SymmetryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Vector field ξ∂ₓ + Σ ηᵢ∂ᵤᵢ over `chart` = (x, u₁, …).
///
/// Entries built from e^{±iφ} carry an imaginary part (`xi_im`, `etas_im`);
/// the field is a symmetry iff both its real and imaginary parts are.
struct Generator {
  std::string name;
  std::vector<Symbol> chart;
  Expr xi;
  std::vector<Expr> etas;
  std::optional<Expr> xi_im;
  std::vector<Expr> etas_im;
  bool nonlocal = false;

  bool is_complex() const { return xi_im.has_value(); }
  Generator real_part() const;
  Generator imag_part() const;
};

Generator make_generator(std::string name, std::vector<Symbol> chart, Expr xi,
                         std::vector<Expr> etas);

struct ProlongedField {
  Generator base;
  std::vector<Expr> phi1;
  std::vector<Expr> phi2;
};

/// Jet symbols for a dependent variable u: u', u'', u'''.
std::string jet(const std::string& u, int order);

ProlongedField prolong2(const Generator& g);

/// Ω² of the reduced chart with the constant of motion written as u₂.
Expr reduced_omega_sq(const ReducedSystem& rs);

/// Residuals of pr⁽²⁾g applied to u₁″ + Ω²u₁ and u₂′ on the solutions of
/// the reduced pair. Both zero iff g is a point symmetry. Real fields only;
/// use is_symmetry for complex ones.
std::vector<Expr> determining_residual(const Generator& g,
                                       const ReducedSystem& rs);
bool is_symmetry(const Generator& g, const ReducedSystem& rs);

/// Eight point symmetries of u₁″ + Ω²u₁ = 0 plus the shift of u₂, which
/// rescales x when Ω depends on u₂.
std::vector<Generator> reduced_catalog(const ReducedSystem& rs);

/// Rank of the coefficient vectors of `gens` sampled at `points` random
/// chart points (parameters also drawn at random). Complex fields contribute
/// their real and imaginary parts.
int coefficient_rank(const std::vector<Generator>& gens, unsigned seed,
                     int points = 5);

/// Generators Λ₁, Λ₂, Λ₃, Λ₄±, Λ₆±, Λ₈± on the chart (t, r, φ), with
/// L₁ = (L² + λ²)^{1/2}. Time integrals run along the motion.
std::vector<Generator> micz_catalog(const ProblemSpec& spec);

/// The Kepler representation the MICZ catalog is obtained from, written
/// with L in place of L₁.
std::vector<Generator> kepler_catalog(const Expr& mu);

/// (t, r, φ) field → (φ, u₁, u₂) field with u₂ = r²φ̇ and
/// u₁ = 1/r − μ/(u₂² + λ²). The constant L is identified with u₂.
Generator back_transform(const Generator& g, const ProblemSpec& spec);

enum class BackTransformStatus { Symmetry, NotPointSymmetry, Uncheckable };

struct BackTransformCheck {
  Generator original;
  Generator reduced;
  BackTransformStatus status = BackTransformStatus::Uncheckable;
  std::vector<Expr> residual;  // real part, then imaginary part if complex
};

std::string status_name(BackTransformStatus s);

/// Back-transforms every catalog entry and checks it on the reduced system.
std::vector<BackTransformCheck> check_back_transforms(
    const std::vector<Generator>& catalog, const ProblemSpec& spec,
    const ReducedSystem& rs);

}  // namespace symreduce
