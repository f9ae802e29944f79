#include "qvolterra/kernels.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

namespace qvolterra {

KernelSignature KernelSignature::conjugated() const {
  KernelSignature out = *this;
  out.out_sign = flip(out.out_sign);
  for (auto& in : out.inputs) in.sign = flip(in.sign);
  return out;
}

std::string KernelSignature::to_string() const {
  std::ostringstream os;
  os << "out" << out_port << (out_sign == PortSign::Minus ? '-' : '+') << ":";
  for (const auto& in : inputs) os << in.port << (in.sign == PortSign::Minus ? '-' : '+');
  return os.str();
}

KernelSignature make_signature(const std::string& input_signs, PortSign out_sign, int out_port) {
  KernelSignature sig;
  sig.out_port = out_port;
  sig.out_sign = out_sign;
  for (char c : input_signs) {
    if (c == '-')
      sig.inputs.push_back({0, PortSign::Minus});
    else if (c == '+')
      sig.inputs.push_back({0, PortSign::Plus});
    else
      throw std::invalid_argument("signature characters must be '-' or '+'");
  }
  return sig;
}

Complex ExpSumKernel::eval(std::span<const double> taus) const {
  if (static_cast<int>(taus.size()) != order())
    throw std::invalid_argument("tau count does not match kernel order");
  Complex sum{0.0, 0.0};
  for (const ExpTerm& term : terms) {
    Complex v = term.coeff;
    for (std::size_t k = 0; k < term.rates.size(); ++k) v *= std::exp(-term.rates[k] * taus[k]);
    sum += v;
  }
  return sum;
}

ExpSumKernel ExpSumKernel::conjugated() const {
  ExpSumKernel out;
  out.signature = signature.conjugated();
  out.terms.reserve(terms.size());
  for (const ExpTerm& term : terms) {
    ExpTerm t;
    t.coeff = std::conj(term.coeff);
    t.rates.reserve(term.rates.size());
    for (Complex r : term.rates) t.rates.push_back(std::conj(r));
    out.terms.push_back(std::move(t));
  }
  return out;
}

// ---- matrix exponential --------------------------------------------------

namespace {

double one_norm(const MatrixXcd& A) {
  double best = 0.0;
  for (int j = 0; j < A.cols(); ++j) best = std::max(best, A.col(j).cwiseAbs().sum());
  return best;
}

}  // namespace

MatrixXcd expm_dense(const MatrixXcd& A) {
  // Padé-13 approximant with scaling and squaring.
  static const double b[] = {64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
                             1187353796428800.0,  129060195264000.0,   10559470521600.0,
                             670442572800.0,      33522128640.0,       1323241920.0,
                             40840800.0,          960960.0,            16380.0,
                             182.0,               1.0};
  const double theta13 = 5.371920351148152;
  const int n = static_cast<int>(A.rows());
  const double norm = one_norm(A);
  int squarings = 0;
  MatrixXcd As = A;
  if (norm > theta13) {
    squarings = static_cast<int>(std::ceil(std::log2(norm / theta13)));
    As = A / std::pow(2.0, squarings);
  }
  const MatrixXcd Id = MatrixXcd::Identity(n, n);
  const MatrixXcd A2 = As * As;
  const MatrixXcd A4 = A2 * A2;
  const MatrixXcd A6 = A4 * A2;
  const MatrixXcd U =
      As * (A6 * (b[13] * A6 + b[11] * A4 + b[9] * A2) + b[7] * A6 + b[5] * A4 + b[3] * A2 + b[1] * Id);
  const MatrixXcd V =
      A6 * (b[12] * A6 + b[10] * A4 + b[8] * A2) + b[6] * A6 + b[4] * A4 + b[2] * A2 + b[0] * Id;
  MatrixXcd R = (V - U).partialPivLu().solve(V + U);
  for (int s = 0; s < squarings; ++s) R = R * R;
  return R;
}

VectorXcd expm_action(const MatrixXcd& A, double t, const VectorXcd& v, double norm_cap) {
  if (t < 0) throw std::invalid_argument("expm_action: t must be >= 0");
  const double scaled = one_norm(A) * t;
  if (scaled > norm_cap)
    throw ExpmOverflow("expm_action: ||A t|| = " + std::to_string(scaled) + " exceeds cap " +
                       std::to_string(norm_cap));
  if (t == 0.0) return v;
  return expm_dense(A * t) * v;
}

// ---- kernel chains -------------------------------------------------------

namespace {

const MatrixXcd& input_matrix(const BilinearSystem& sys, const SignedPort& in) {
  if (in.port < 0 || in.port >= sys.ports()) throw PortMismatch("input port out of range");
  return in.sign == PortSign::Minus ? sys.B_minus[in.port] : sys.B_plus[in.port];
}

}  // namespace

Complex eval_kernel(const BilinearSystem& sys, const KernelSignature& sig,
                    std::span<const double> taus) {
  if (static_cast<int>(taus.size()) != sig.order())
    throw std::invalid_argument("tau count does not match signature order");
  if (sig.out_sign == PortSign::Plus)
    return std::conj(eval_kernel(sys, sig.conjugated(), taus));
  if (sig.out_port < 0 || sig.out_port >= sys.ports()) throw PortMismatch("output port out of range");

  VectorXcd w = sys.x0;
  for (int i = sig.order() - 1; i >= 0; --i) {
    w = input_matrix(sys, sig.inputs[i]) * w;
    w = expm_action(sys.A, taus[i], w);
  }
  return (sys.readout.row(sig.out_port) * w)(0);
}

namespace {

// Quantized rate tuple used to merge exponential terms whose rates coincide to
// ~1e-9; degenerate eigenvalue products from different paths land in the same
// bucket so cancellations actually cancel.
using RateKey = std::vector<std::pair<long long, long long>>;

RateKey rate_key(const std::vector<Complex>& rates) {
  RateKey key;
  key.reserve(rates.size());
  for (Complex r : rates)
    key.emplace_back(std::llround(r.real() * 1e9), std::llround(r.imag() * 1e9));
  return key;
}

}  // namespace

ExpSumKernel symbolic_kernel(const BilinearSystem& sys, const KernelSignature& sig,
                             double cond_cap) {
  if (sig.out_sign == PortSign::Plus) return symbolic_kernel(sys, sig.conjugated(), cond_cap).conjugated();
  if (sig.out_port < 0 || sig.out_port >= sys.ports()) throw PortMismatch("output port out of range");
  const int n = sys.size();
  const int order = sig.order();

  Eigen::ComplexEigenSolver<MatrixXcd> es(sys.A);
  if (es.info() != Eigen::Success) throw DefectiveDrift("eigendecomposition failed");
  const MatrixXcd& V = es.eigenvectors();
  {
    Eigen::JacobiSVD<MatrixXcd> svd(V);
    const double smin = svd.singularValues()(svd.singularValues().size() - 1);
    const double smax = svd.singularValues()(0);
    if (smin <= 0.0 || smax / smin > cond_cap)
      throw DefectiveDrift("drift eigenvector condition number exceeds cap");
  }
  const Eigen::PartialPivLU<MatrixXcd> Vlu(V);
  const VectorXcd lambda = es.eigenvalues();

  // Chain in the eigenbasis:
  //   readout · e^{Aτ₁} B₀ e^{Aτ₂} B₁ ⋯ Bₙ₋₁ x0
  //   = Σ r[e₁] e^{λ_{e₁}τ₁} M₀[e₁,e₂] e^{λ_{e₂}τ₂} ⋯ w[e_n]
  // with r = readout·V, M_i = V⁻¹ B_i V and w = V⁻¹ Bₙ₋₁ x0.
  const Eigen::RowVectorXcd r = sys.readout.row(sig.out_port) * V;
  std::vector<MatrixXcd> M(order > 1 ? order - 1 : 0);
  for (int i = 0; i + 1 < order; ++i) M[i] = Vlu.solve(input_matrix(sys, sig.inputs[i]).eval()) * V;
  // For order == 0 the chain degenerates to readout·x0; not a kernel, reject.
  if (order < 1) throw std::invalid_argument("kernel order must be >= 1");
  const VectorXcd w = Vlu.solve((input_matrix(sys, sig.inputs[order - 1]) * sys.x0).eval());

  std::map<RateKey, std::pair<Complex, std::vector<Complex>>> merged;
  double max_abs = 0.0;

  std::vector<int> idx(order, 0);
  // Depth-first enumeration over eigenindex tuples (e₁…e_n).
  std::vector<Complex> rates(order);
  auto recurse = [&](auto&& self, int depth, Complex acc) -> void {
    if (std::abs(acc) == 0.0) return;
    if (depth == order) {
      max_abs = std::max(max_abs, std::abs(acc));
      auto [it, inserted] = merged.emplace(rate_key(rates), std::make_pair(acc, rates));
      if (!inserted) it->second.first += acc;
      return;
    }
    for (int e = 0; e < n; ++e) {
      Complex next = acc;
      if (depth == 0)
        next *= r(e);
      else
        next *= M[depth - 1](idx[depth - 1], e);
      if (depth == order - 1) next *= w(e);
      if (std::abs(next) == 0.0) continue;
      idx[depth] = e;
      rates[depth] = -lambda(e);
      self(self, depth + 1, next);
    }
  };
  recurse(recurse, 0, Complex{1.0, 0.0});

  ExpSumKernel out;
  out.signature = sig;
  const double floor = 1e-13 * max_abs;
  for (auto& [key, term] : merged) {
    if (std::abs(term.first) < floor) continue;
    out.terms.push_back(ExpTerm{term.first, term.second});
  }
  return out;
}

std::vector<KernelSignature> nonzero_signatures(const BilinearSystem& sys, int order,
                                                double cond_cap) {
  const int m = sys.ports();
  std::vector<SignedPort> lines;
  for (int p = 0; p < m; ++p) {
    lines.push_back({p, PortSign::Minus});
    lines.push_back({p, PortSign::Plus});
  }
  std::vector<KernelSignature> found;
  std::vector<SignedPort> inputs(order);
  auto walk = [&](auto&& self, int depth, const KernelSignature& base) -> void {
    if (depth == order) {
      KernelSignature sig = base;
      sig.inputs = inputs;
      if (!symbolic_kernel(sys, sig, cond_cap).empty()) found.push_back(std::move(sig));
      return;
    }
    for (const auto& line : lines) {
      inputs[depth] = line;
      self(self, depth + 1, base);
    }
  };
  for (const auto& out : lines) {
    KernelSignature base;
    base.out_port = out.port;
    base.out_sign = out.sign;
    walk(walk, 0, base);
  }
  return found;
}

// ---- closed-form reference kernels --------------------------------------

ExpSumKernel closed_form_kerr(int order, const KernelSignature& sig, const KerrParams& p) {
  ExpSumKernel out;
  out.signature = sig;
  const double g = p.gamma, wa = p.omega_a, chi = p.chi;
  if (order == 1) {
    if (sig.order() != 1) throw std::invalid_argument("order/signature mismatch");
    if (sig.inputs[0].sign == PortSign::Minus && sig.out_sign == PortSign::Minus)
      out.terms.push_back(ExpTerm{Complex{-g, 0.0}, {Complex{g / 2.0, wa}}});
    return out;
  }
  if (order != 3 || sig.order() != 3) return out;
  // The tabulation lists four order-3 kernels under a leading ± index and two
  // displayed expressions; the expression is keyed on the trailing two input
  // signs, and the leading index is mapped permissively (either first-input
  // sign or output sign), so every tabulated variant evaluates identically.
  const Complex P = Complex{0.0, 4.0} * g * g * chi * chi / Complex{-g, chi};
  const auto s2 = sig.inputs[1].sign, s3 = sig.inputs[2].sign;
  const Complex gp{g / 2.0, wa};   // γ/2 + iωa
  const Complex gm{g / 2.0, -wa};  // γ/2 − iωa
  if (s2 == PortSign::Minus && s3 == PortSign::Plus) {
    // P·e^{−(γ/2)(τ₁+τ₃) − iωa(τ₁−τ₃) − γτ₂}(1 − e^{−γτ₁})
    out.terms.push_back(ExpTerm{P, {gp, Complex{g, 0.0}, gm}});
    out.terms.push_back(ExpTerm{-P, {gp + Complex{g, 0.0}, Complex{g, 0.0}, gm}});
  } else if (s2 == PortSign::Plus && s3 == PortSign::Minus) {
    // −P·e^{−(γ/2+iωa)(τ₁+τ₃) − γτ₂}(1 − e^{−γτ₁})
    out.terms.push_back(ExpTerm{-P, {gp, Complex{g, 0.0}, gp}});
    out.terms.push_back(ExpTerm{P, {gp + Complex{g, 0.0}, Complex{g, 0.0}, gp}});
  }
  return out;
}

ExpSumKernel closed_form_optomech(int order, const KernelSignature& sig, const OptomechParams& p) {
  ExpSumKernel out;
  out.signature = sig;
  if (order != 3 || sig.order() != 3 || sig.out_sign != PortSign::Minus) return out;
  // Tabulated signatures: all lines on the optical port with input signs
  // (−,+,−) or (−,−,+).
  for (const auto& in : sig.inputs)
    if (in.port != 0) return out;
  if (sig.out_port != 0) return out;
  const auto s1 = sig.inputs[0].sign, s2 = sig.inputs[1].sign, s3 = sig.inputs[2].sign;
  if (s1 != PortSign::Minus) return out;
  const bool mid_plus = (s2 == PortSign::Plus && s3 == PortSign::Minus);
  const bool mid_minus = (s2 == PortSign::Minus && s3 == PortSign::Plus);
  if (!mid_plus && !mid_minus) return out;

  const double ga = p.gamma_a, gb = p.gamma_b, wa = p.omega_a, wb = p.omega_b, g = p.g;
  const Complex ga_p{ga / 2.0, wa};   // γa/2 + iωa
  const Complex ga_m{ga / 2.0, -wa};  // γa/2 − iωa
  const Complex gb_m{gb / 2.0, -wb};  // γb/2 − iωb
  const Complex tail = mid_plus ? ga_p : ga_m;  // e^{−γᵃ_± τ₃} with ± from the middle sign
  const Complex P = ga * ga * g * g / ((-ga_m + ga_p) * (-gb_m + Complex{ga, 0.0}));
  // (e^{−γᵃ₋τ₁} + e^{−γᵃ₊τ₁})(e^{−γaτ₂} − e^{−γᵇ₋τ₂}) expanded into four terms.
  out.terms.push_back(ExpTerm{P, {ga_m, Complex{ga, 0.0}, tail}});
  out.terms.push_back(ExpTerm{P, {ga_p, Complex{ga, 0.0}, tail}});
  out.terms.push_back(ExpTerm{-P, {ga_m, gb_m, tail}});
  out.terms.push_back(ExpTerm{-P, {ga_p, gb_m, tail}});
  return out;
}

}  // namespace qvolterra
