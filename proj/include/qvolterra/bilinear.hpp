#pragma once

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

#include "qvolterra/algebra.hpp"
#include "qvolterra/types.hpp"

namespace qvolterra {

using Eigen::MatrixXcd;
using Eigen::VectorXcd;

/// Static-plus-dynamic description of a linear component: scattering matrix S,
/// coupling matrix C (ports × internal modes), and Hermitian frequency matrix
/// Omega.  The internal drift is A = −C†C/2 − iΩ.
struct LinearModel {
  MatrixXcd S;
  MatrixXcd C;
  MatrixXcd Omega;

  int ports() const { return static_cast<int>(S.rows()); }
  int internal_modes() const { return static_cast<int>(C.cols()); }
  MatrixXcd drift() const;
};

/// Component description: Hamiltonian and coupling polynomials split into
/// linear and nonlinear parts, scattering matrix, nonlinearity scale, and the
/// maximum monomial degree kept in the moment basis.
struct ModelSpec {
  int modes = 1;
  OperatorPoly H_linear{1};
  OperatorPoly H_nonlinear{1};
  std::vector<OperatorPoly> L_linear;
  std::vector<OperatorPoly> L_nonlinear;
  double mu = 0.0;
  MatrixXcd S;
  int truncation_degree = 3;

  int ports() const { return static_cast<int>(L_linear.size()); }
  OperatorPoly hamiltonian() const;
  OperatorPoly coupling(int port) const;
  /// Throws std::invalid_argument when structural invariants are violated
  /// (H not Hermitian, degree bounds, S not unitary).
  void validate() const;
};

/// Truncated moment system  ẋ = A x + Σ_j (B⁻_j β_j + B⁺_j β_j*) x  with
/// output readout rows; basis[0] is the identity monomial, so row 0 of every
/// matrix is zero and x0[0] = 1.
struct BilinearSystem {
  std::vector<MonomialKey> basis;
  MatrixXcd A;
  std::vector<MatrixXcd> B_minus;
  std::vector<MatrixXcd> B_plus;
  MatrixXcd readout;  ///< ports × n; row j is L_j expanded in the basis
  MatrixXcd S;
  VectorXcd x0;
  double mu = 0.0;

  int size() const { return static_cast<int>(basis.size()); }
  int ports() const { return static_cast<int>(readout.rows()); }
  /// Index of a monomial in the basis, or -1 when absent.
  int index_of(const MonomialKey& key) const;
};

/// Initial internal state for moment evaluation: vacuum, or a coherent state
/// with one amplitude per mode.
struct InitialState {
  static InitialState vacuum() { return {}; }
  static InitialState coherent(VectorXcd alpha_) {
    InitialState s;
    s.alpha = std::move(alpha_);
    return s;
  }
  std::optional<VectorXcd> alpha;  ///< empty = vacuum
};

/// Builds the truncated bilinear moment system for a component.  The basis is
/// the closure of the coupling monomials (plus identity) under the Heisenberg
/// generator and the input-coupling maps, truncated at spec.truncation_degree;
/// monomials above the truncation degree are discarded.  Throws
/// TruncationOverflow when the closure exceeds basis_cap.
BilinearSystem build_bilinear(const ModelSpec& spec,
                              const InitialState& init = InitialState::vacuum(),
                              int basis_cap = 4096);

// ---- component factories -------------------------------------------------

/// Single-mode cavity with a quartic self-interaction:
/// H = ωa·a†a + χ·a†²a², L = √γ·a.
ModelSpec kerr_cavity(double omega_a, double chi, double gamma);

/// Two-mode cavity/oscillator pair with parametric cross coupling:
/// H = ωa·a†a + ωb·b†b + g·a†a(b + b†), ports L = (√γa·a, √γb·b).
ModelSpec optomech(double omega_a, double omega_b, double g, double gamma_a, double gamma_b);

/// One-port cavity as a LinearModel: S = [1], C = [√γ], Ω = [ω].
LinearModel cavity(double omega, double gamma);

/// Static mean-field amplifier block: S = [√G], no internal dynamics.
/// Requires power gain G ≥ 1.
LinearModel amplifier(double G);

/// Static beam splitter with the given unitary scattering matrix.
LinearModel beam_splitter(const MatrixXcd& S);
/// Two-port rotation-angle convenience form.
LinearModel beam_splitter(double theta);

/// Embeds a LinearModel into moment form with basis (1, a_1, …, a_r):
/// drift block −C†C/2 − iΩ, input columns −C†S, readout C.
BilinearSystem linear_component(const LinearModel& model);

}  // namespace qvolterra
