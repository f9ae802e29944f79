#include "qvolterra/spectra.hpp"

#include <Eigen/LU>

#include <limits>

#include "qvolterra/kernels.hpp"

namespace qvolterra {

Complex RationalSusceptibility::eval(std::span<const double> omegas) const {
  if (static_cast<int>(omegas.size()) != order()) {
    throw PortMismatch("frequency tuple length does not match susceptibility order");
  }
  const int n = order();
  // Running suffix sums: the k-th pole is shifted by ω_k + ω_{k+1} + … + ω_n.
  std::vector<double> suffix(n);
  double acc = 0.0;
  for (int k = n - 1; k >= 0; --k) {
    acc += omegas[k];
    suffix[k] = acc;
  }
  Complex value = constant;
  for (const auto& term : terms) {
    Complex prod = term.coeff;
    for (int k = 0; k < n; ++k) {
      prod /= term.rates[k] + I * suffix[k];
    }
    value += prod;
  }
  return value;
}

MatrixXcd linear_transfer(const LinearModel& model, Complex s) {
  const int r = model.internal_modes();
  if (r == 0) return model.S;
  const MatrixXcd A = model.drift();
  MatrixXcd shifted = s * MatrixXcd::Identity(r, r) - A;
  Eigen::FullPivLU<MatrixXcd> lu(shifted);
  // The relative rank test cannot flag a uniformly tiny matrix (the largest
  // pivot always passes against itself), so gate on the smallest pivot
  // against the drift's own scale.
  double scale = 1.0;
  for (int j = 0; j < r; ++j) scale = std::max(scale, A.col(j).cwiseAbs().sum());
  double min_pivot = std::numeric_limits<double>::infinity();
  for (int j = 0; j < r; ++j) min_pivot = std::min(min_pivot, std::abs(lu.matrixLU()(j, j)));
  if (min_pivot <= 1e-12 * scale) {
    throw SingularResolvent("transfer function evaluated at a pole of the resolvent");
  }
  return model.S - model.C * lu.solve(model.C.adjoint() * model.S);
}

RationalSusceptibility fourier_kernel(const ExpSumKernel& kernel) {
  RationalSusceptibility chi;
  chi.signature = kernel.signature;
  chi.constant = Complex(0.0, 0.0);
  chi.terms.reserve(kernel.terms.size());
  for (const auto& term : kernel.terms) {
    for (const Complex& rate : term.rates) {
      if (rate.real() <= 0.0) {
        throw NonDecayingKernel("kernel has a non-decaying exponential; half-line transform diverges");
      }
    }
    chi.terms.push_back(term);
  }
  return chi;
}

const RationalSusceptibility* SusceptibilitySet::find(const KernelSignature& sig) const {
  auto order_it = orders.find(sig.order());
  if (order_it == orders.end()) return nullptr;
  auto it = order_it->second.find(sig);
  if (it == order_it->second.end()) return nullptr;
  return &it->second;
}

int SusceptibilitySet::max_order() const {
  int m = 0;
  for (const auto& [order, entries] : orders) {
    if (!entries.empty()) m = std::max(m, order);
  }
  return m;
}

SusceptibilitySet susceptibility_set(const BilinearSystem& sys, int max_order) {
  if (max_order < 1) throw PortMismatch("susceptibility expansion needs max_order >= 1");
  SusceptibilitySet set;
  set.ports = sys.ports();
  set.feedthrough = sys.S;
  for (int order = 1; order <= max_order; ++order) {
    std::map<KernelSignature, RationalSusceptibility> entries;
    for (const auto& sig : nonzero_signatures(sys, order)) {
      ExpSumKernel kernel = symbolic_kernel(sys, sig);
      if (kernel.empty()) continue;
      entries.emplace(sig, fourier_kernel(kernel));
    }
    if (order == 1) {
      // Instantaneous scattering contributes a frequency-independent part on
      // sign-preserving first-order entries.
      for (int out = 0; out < sys.ports(); ++out) {
        for (int in = 0; in < sys.ports(); ++in) {
          const Complex s = sys.S(out, in);
          if (std::abs(s) < kCoeffPrune) continue;
          for (PortSign sign : {PortSign::Minus, PortSign::Plus}) {
            KernelSignature sig;
            sig.out_port = out;
            sig.out_sign = sign;
            sig.inputs = {SignedPort{in, sign}};
            const Complex value = sign == PortSign::Minus ? s : std::conj(s);
            auto it = entries.find(sig);
            if (it == entries.end()) {
              RationalSusceptibility chi;
              chi.signature = sig;
              chi.constant = value;
              entries.emplace(sig, std::move(chi));
            } else {
              it->second.constant += value;
            }
          }
        }
      }
    }
    if (!entries.empty()) set.orders.emplace(order, std::move(entries));
  }
  return set;
}

SusceptibilitySet susceptibility_set(const LinearModel& model) {
  SusceptibilitySet set;
  set.ports = model.ports();
  set.feedthrough = model.S;
  std::map<KernelSignature, RationalSusceptibility> entries;
  const int r = model.internal_modes();
  const int m = model.ports();

  std::vector<ExpTerm> empty_terms;
  // Resolvent part: −C (sI − A)⁻¹ C†S expanded over the drift eigenbasis.
  MatrixXcd left, right;  // left = C·V, right = V⁻¹·C†S
  VectorXcd lambda;
  if (r > 0) {
    const MatrixXcd A = model.drift();
    Eigen::ComplexEigenSolver<MatrixXcd> es(A);
    if (es.info() != Eigen::Success) {
      throw DefectiveDrift("eigendecomposition of the drift matrix failed");
    }
    const MatrixXcd V = es.eigenvectors();
    Eigen::FullPivLU<MatrixXcd> lu(V);
    lu.setThreshold(1e-12);
    if (!lu.isInvertible()) {
      throw DefectiveDrift("drift matrix is not diagonalizable; rational expansion unavailable");
    }
    lambda = es.eigenvalues();
    left = model.C * V;
    right = lu.solve(model.C.adjoint() * model.S);
  }

  for (int out = 0; out < m; ++out) {
    for (int in = 0; in < m; ++in) {
      for (PortSign sign : {PortSign::Minus, PortSign::Plus}) {
        RationalSusceptibility chi;
        chi.signature.out_port = out;
        chi.signature.out_sign = sign;
        chi.signature.inputs = {SignedPort{in, sign}};
        const Complex s = model.S(out, in);
        chi.constant = sign == PortSign::Minus ? s : std::conj(s);
        for (int k = 0; k < r; ++k) {
          // 1/(s − λ) written as 1/(rate + iω) with rate = −λ; the conjugate
          // line carries the conjugated coefficient and rate.
          const Complex coeff = -left(out, k) * right(k, in);
          if (std::abs(coeff) < kCoeffPrune) continue;
          ExpTerm term;
          if (sign == PortSign::Minus) {
            term.coeff = coeff;
            term.rates = {-lambda(k)};
          } else {
            term.coeff = std::conj(coeff);
            term.rates = {std::conj(-lambda(k))};
          }
          chi.terms.push_back(std::move(term));
        }
        if (std::abs(chi.constant) < kCoeffPrune && chi.terms.empty()) continue;
        entries.emplace(chi.signature, std::move(chi));
      }
    }
  }
  if (!entries.empty()) set.orders.emplace(1, std::move(entries));
  return set;
}

}  // namespace qvolterra
