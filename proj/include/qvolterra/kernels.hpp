#pragma once

#include <span>
#include <vector>

#include "qvolterra/bilinear.hpp"
#include "qvolterra/types.hpp"

namespace qvolterra {

/// Conjugation sign of an input or output line: Minus tags the field amplitude
/// itself, Plus its conjugate.
enum class PortSign { Minus, Plus };

inline PortSign flip(PortSign s) { return s == PortSign::Minus ? PortSign::Plus : PortSign::Minus; }

struct SignedPort {
  int port = 0;
  PortSign sign = PortSign::Minus;
  friend bool operator==(const SignedPort&, const SignedPort&) = default;
  friend auto operator<=>(const SignedPort&, const SignedPort&) = default;
};

/// Identifies one kernel: output line (port, sign) and the ordered input lines
/// (τ₁ first, adjacent to the readout).
struct KernelSignature {
  int out_port = 0;
  PortSign out_sign = PortSign::Minus;
  std::vector<SignedPort> inputs;

  int order() const { return static_cast<int>(inputs.size()); }
  /// Signature with every sign (output and inputs) conjugated.
  KernelSignature conjugated() const;
  std::string to_string() const;
  friend bool operator==(const KernelSignature&, const KernelSignature&) = default;
  friend auto operator<=>(const KernelSignature&, const KernelSignature&) = default;
};

/// Convenience constructor for single-port systems: the string lists the
/// input signs in τ order (e.g. "-+-"); the output line is given separately
/// and defaults to (port 0, Minus).
KernelSignature make_signature(const std::string& input_signs, PortSign out_sign = PortSign::Minus,
                               int out_port = 0);

/// One separable exponential term c·∏ₖ exp(−λₖ τₖ).
struct ExpTerm {
  Complex coeff;
  std::vector<Complex> rates;
};

/// Order-n kernel as a finite sum of separable exponential terms on τₖ ≥ 0.
struct ExpSumKernel {
  KernelSignature signature;
  std::vector<ExpTerm> terms;

  int order() const { return signature.order(); }
  Complex eval(std::span<const double> taus) const;
  bool empty() const { return terms.empty(); }
  /// Conjugate kernel with the conjugated signature.
  ExpSumKernel conjugated() const;
};

/// Dense matrix exponential e^{A} by Padé-13 scaling and squaring.
MatrixXcd expm_dense(const MatrixXcd& A);

/// e^{At}·v.  Throws ExpmOverflow when ‖At‖₁ exceeds norm_cap.
VectorXcd expm_action(const MatrixXcd& A, double t, const VectorXcd& v, double norm_cap = 100.0);

/// Pointwise kernel value via the matrix-exponential chain
///   readout_row · e^{Aτ₁} B^{(s₁)}_{p₁} e^{Aτ₂} ⋯ B^{(sₙ)}_{pₙ} x0
/// for output sign Minus; output sign Plus is the complex conjugate of the
/// sign-flipped chain.
Complex eval_kernel(const BilinearSystem& sys, const KernelSignature& sig,
                    std::span<const double> taus);

/// Expands the chain through the eigendecomposition A = VΛV⁻¹ into separable
/// exponential terms.  Terms below 1e-13·max|coeff| are pruned; terms with
/// identical rate tuples are merged.  Throws DefectiveDrift when the
/// eigenvector condition number exceeds cond_cap.
ExpSumKernel symbolic_kernel(const BilinearSystem& sys, const KernelSignature& sig,
                             double cond_cap = 1e8);

/// All signatures of the given order whose symbolic kernel is nonempty.
std::vector<KernelSignature> nonzero_signatures(const BilinearSystem& sys, int order,
                                                double cond_cap = 1e8);

// ---- closed-form reference kernels --------------------------------------

struct KerrParams {
  double omega_a;
  double chi;
  double gamma;
};

struct OptomechParams {
  double omega_a;
  double omega_b;
  double g;
  double gamma_a;
  double gamma_b;
};

/// Hand-tabulated closed-form weak-nonlinearity kernels for the Kerr cavity
/// (order 1 and four tabulated order-3 signatures), kept verbatim as an
/// independent reference route.  Returns an empty kernel for signatures the
/// tabulation does not list.
ExpSumKernel closed_form_kerr(int order, const KernelSignature& sig, const KerrParams& p);

/// Hand-tabulated closed-form order-3 kernels for the optomechanical
/// transducer (the two tabulated signatures with output sign Minus), stated
/// for the regime ω_a ≫ ω_b, γ_a ≫ γ_b.
ExpSumKernel closed_form_optomech(int order, const KernelSignature& sig, const OptomechParams& p);

}  // namespace qvolterra
