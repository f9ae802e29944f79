#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "qvolterra/types.hpp"

namespace qvolterra {

/// Normal-ordered monomial key: one (creation power, annihilation power) pair
/// per mode.  Comparison is lexicographic by mode index then (p, q), which
/// fixes a deterministic iteration order for matrix assembly.
using MonomialKey = std::vector<std::pair<int, int>>;

/// A single normal-ordered monomial with its scalar coefficient.
struct BosonMonomial {
  MonomialKey powers;
  Complex coeff{1.0, 0.0};
};

int monomial_degree(const MonomialKey& key);

/// Human-readable rendering, e.g. "a†^2 a b" (identity renders as "1").
std::string monomial_to_string(const MonomialKey& key);

/// Finite complex-linear combination of normal-ordered monomials on a fixed
/// number of modes.  Immutable value semantics; coefficients below 1e-14 are
/// pruned on normalization so the zero polynomial has an empty term map.
class OperatorPoly {
 public:
  explicit OperatorPoly(int modes) : modes_(modes) {}

  static OperatorPoly zero(int modes) { return OperatorPoly(modes); }
  static OperatorPoly identity(int modes);
  /// Single monomial c * prod_m (a_m†)^p (a_m)^q.
  static OperatorPoly monomial(MonomialKey key, Complex c = Complex{1.0, 0.0});
  /// Convenience builders for one annihilation/creation operator on a mode.
  static OperatorPoly annihilator(int modes, int mode);
  static OperatorPoly creator(int modes, int mode);

  int modes() const { return modes_; }
  const std::map<MonomialKey, Complex>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  int degree() const;

  /// Coefficient of a monomial (zero if absent).
  Complex coeff(const MonomialKey& key) const;

  void add_term(const MonomialKey& key, Complex c);
  OperatorPoly& operator+=(const OperatorPoly& rhs);
  OperatorPoly& operator-=(const OperatorPoly& rhs);
  OperatorPoly& operator*=(Complex s);

  friend OperatorPoly operator+(OperatorPoly a, const OperatorPoly& b) { return a += b; }
  friend OperatorPoly operator-(OperatorPoly a, const OperatorPoly& b) { return a -= b; }
  friend OperatorPoly operator*(Complex s, OperatorPoly p) { return p *= s; }
  friend OperatorPoly operator*(OperatorPoly p, Complex s) { return p *= s; }

  /// Hermitian adjoint: conjugates coefficients and swaps (p, q) per mode.
  OperatorPoly dagger() const;

  /// Drops terms with |coefficient| < eps.
  void prune(double eps = kCoeffPrune);

  /// True if p equals this polynomial coefficient-wise to tol.
  bool approx_equal(const OperatorPoly& p, double tol = 1e-12) const;

  std::string to_string() const;

 private:
  int modes_;
  std::map<MonomialKey, Complex> terms_;
};

/// Product of two polynomials rewritten into normal order via
/// [a_j, a_k†] = δ_jk.  Exact integer combinatorics on the coefficients.
OperatorPoly normal_order_product(const OperatorPoly& a, const OperatorPoly& b);

/// commutator(a, b) = normal_order_product(a, b) − normal_order_product(b, a).
OperatorPoly commutator(const OperatorPoly& a, const OperatorPoly& b);

/// Deterministic part of the Heisenberg evolution of X under Hamiltonian H and
/// coupling operators Ls:
///   drift(X) = i[H, X] + Σ_j ( L_j† X L_j − ½{L_j† L_j, X} ).
OperatorPoly heisenberg_generator(const OperatorPoly& X, const OperatorPoly& H,
                                  const std::vector<OperatorPoly>& Ls);

/// Coefficient polynomials of the input-field terms in the Heisenberg
/// equation: `minus` multiplies the incoming-field amplitude and `plus` its
/// conjugate.
struct InputCoupling {
  OperatorPoly minus;  ///< [L†, X]
  OperatorPoly plus;   ///< [X, L]
};
InputCoupling input_coupling(const OperatorPoly& X, const OperatorPoly& L);

}  // namespace qvolterra
