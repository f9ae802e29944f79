#pragma once

#include <map>
#include <span>

#include "qvolterra/kernels.hpp"

namespace qvolterra {

/// Frequency-domain form of an exponential-sum kernel:
///   χ(ω₁…ω_n) = constant + Σ coeff·∏ₖ 1/(λₖ + iΩₖ),  Ωₖ = ωₖ + ωₖ₊₁ + … + ω_n.
/// The constant carries the static feedthrough contribution (order 1 only).
struct RationalSusceptibility {
  KernelSignature signature;
  std::vector<ExpTerm> terms;
  Complex constant{0.0, 0.0};

  int order() const { return signature.order(); }
  Complex eval(std::span<const double> omegas) const;
};

/// Transfer matrix of a linear component at Laplace variable s:
///   Ξ(s) = S − C(sI − A)⁻¹C†S with A = −C†C/2 − iΩ.
/// Throws SingularResolvent when s is an eigenvalue of A.
MatrixXcd linear_transfer(const LinearModel& model, Complex s);

/// Closed-form frequency transform of a decaying exponential-sum kernel.
/// Throws NonDecayingKernel when any rate has a nonpositive real part.
RationalSusceptibility fourier_kernel(const ExpSumKernel& k);

/// Per-order, per-signature susceptibilities of a component, plus the
/// constant feedthrough matrix.  Order-1 entries on matching sign pairs carry
/// the feedthrough constant (so their evaluation is the full first-order
/// input-output coefficient).
struct SusceptibilitySet {
  int ports = 1;
  MatrixXcd feedthrough;
  std::map<int, std::map<KernelSignature, RationalSusceptibility>> orders;

  const RationalSusceptibility* find(const KernelSignature& sig) const;
  int max_order() const;
};

/// Assembles every nonzero signature up to max_order from symbolic kernels.
SusceptibilitySet susceptibility_set(const BilinearSystem& sys, int max_order);

/// Susceptibility set of a static/linear component (internal dynamics allowed)
/// built from its transfer function; used by composition shortcuts.
SusceptibilitySet susceptibility_set(const LinearModel& model);

}  // namespace qvolterra
