#include "qvolterra/bilinear.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <set>

namespace qvolterra {

MatrixXcd LinearModel::drift() const {
  const int r = internal_modes();
  MatrixXcd A = MatrixXcd::Zero(r, r);
  if (r > 0) A = -0.5 * (C.adjoint() * C) - I * Omega;
  return A;
}

OperatorPoly ModelSpec::hamiltonian() const { return H_linear + H_nonlinear; }

OperatorPoly ModelSpec::coupling(int port) const {
  OperatorPoly L = L_linear.at(port);
  if (port < static_cast<int>(L_nonlinear.size())) L += L_nonlinear[port];
  return L;
}

void ModelSpec::validate() const {
  if (modes < 1) throw std::invalid_argument("ModelSpec: modes must be >= 1");
  if (H_linear.degree() > 2) throw std::invalid_argument("ModelSpec: H_linear must have degree <= 2");
  if (!H_linear.approx_equal(H_linear.dagger(), 1e-12) ||
      !hamiltonian().approx_equal(hamiltonian().dagger(), 1e-12))
    throw std::invalid_argument("ModelSpec: Hamiltonian must be Hermitian");
  for (const auto& L : L_linear)
    if (L.degree() > 1) throw std::invalid_argument("ModelSpec: L_linear entries must have degree <= 1");
  if (S.rows() != ports() || S.cols() != ports())
    throw std::invalid_argument("ModelSpec: S must be ports x ports");
  if (((S * S.adjoint()) - MatrixXcd::Identity(S.rows(), S.cols())).cwiseAbs().maxCoeff() > 1e-10)
    throw std::invalid_argument("ModelSpec: S must be unitary");
  int deg = 0;
  for (int j = 0; j < ports(); ++j) deg = std::max(deg, coupling(j).degree());
  if (truncation_degree < std::max(deg, 1))
    throw std::invalid_argument("ModelSpec: truncation_degree below coupling degrees");
}

int BilinearSystem::index_of(const MonomialKey& key) const {
  auto it = std::find(basis.begin(), basis.end(), key);
  return it == basis.end() ? -1 : static_cast<int>(it - basis.begin());
}

namespace {

// Basis ordering: by total degree, then by total |p − q| per mode (so
// photon-number-like monomials precede squeezing-like ones of the same
// degree), then lexicographically.  For the single-mode quartic cavity this
// yields (1, a, a†, a†a, a², a†², a†a², a†²a).
struct BasisOrder {
  bool operator()(const MonomialKey& x, const MonomialKey& y) const {
    const int dx = monomial_degree(x), dy = monomial_degree(y);
    if (dx != dy) return dx < dy;
    int ax = 0, ay = 0;
    for (const auto& [p, q] : x) ax += std::abs(p - q);
    for (const auto& [p, q] : y) ay += std::abs(p - q);
    if (ax != ay) return ax < ay;
    return x < y;
  }
};

Complex coherent_moment(const MonomialKey& key, const VectorXcd& alpha) {
  Complex m{1.0, 0.0};
  for (std::size_t i = 0; i < key.size(); ++i) {
    const auto [p, q] = key[i];
    for (int k = 0; k < p; ++k) m *= std::conj(alpha[static_cast<int>(i)]);
    for (int k = 0; k < q; ++k) m *= alpha[static_cast<int>(i)];
  }
  return m;
}

}  // namespace

BilinearSystem build_bilinear(const ModelSpec& spec, const InitialState& init, int basis_cap) {
  spec.validate();
  const int modes = spec.modes;
  const int D = spec.truncation_degree;
  const OperatorPoly H = spec.hamiltonian();
  std::vector<OperatorPoly> Ls;
  for (int j = 0; j < spec.ports(); ++j) Ls.push_back(spec.coupling(j));

  // Closure: seed with identity and every coupling monomial, then apply the
  // Heisenberg generator and input-coupling maps until no new monomial of
  // degree <= D appears.
  std::set<MonomialKey> seen;
  std::deque<MonomialKey> work;
  auto enqueue = [&](const MonomialKey& key) {
    if (monomial_degree(key) > D) return;
    if (seen.insert(key).second) {
      work.push_back(key);
      if (static_cast<int>(seen.size()) > basis_cap)
        throw TruncationOverflow("moment basis exceeds cap " + std::to_string(basis_cap) +
                                 "; truncation degree too large for this mode count");
    }
  };
  enqueue(MonomialKey(modes, {0, 0}));
  for (const auto& L : Ls)
    for (const auto& [key, c] : L.terms()) enqueue(key);

  while (!work.empty()) {
    const MonomialKey key = work.front();
    work.pop_front();
    const OperatorPoly X = OperatorPoly::monomial(key);
    const OperatorPoly drift = heisenberg_generator(X, H, Ls);
    for (const auto& [k, c] : drift.terms()) enqueue(k);
    for (const auto& L : Ls) {
      const InputCoupling cpl = input_coupling(X, L);
      for (const auto& [k, c] : cpl.minus.terms()) enqueue(k);
      for (const auto& [k, c] : cpl.plus.terms()) enqueue(k);
    }
  }

  BilinearSystem sys;
  sys.basis.assign(seen.begin(), seen.end());
  std::sort(sys.basis.begin(), sys.basis.end(), BasisOrder{});
  const int n = sys.size();
  const int m = spec.ports();

  sys.A = MatrixXcd::Zero(n, n);
  sys.B_minus.assign(m, MatrixXcd::Zero(n, n));
  sys.B_plus.assign(m, MatrixXcd::Zero(n, n));

  auto scatter = [&](const OperatorPoly& poly, MatrixXcd& M, int row) {
    for (const auto& [k, c] : poly.terms()) {
      const int col = sys.index_of(k);
      if (col >= 0) M(row, col) = c;
      // Monomials above the truncation degree are dropped; index_of cannot
      // miss a monomial of degree <= D because the closure enqueued it.
    }
  };

  for (int row = 0; row < n; ++row) {
    const OperatorPoly X = OperatorPoly::monomial(sys.basis[row]);
    scatter(heisenberg_generator(X, H, Ls), sys.A, row);
    for (int j = 0; j < m; ++j) {
      const InputCoupling cpl = input_coupling(X, Ls[j]);
      scatter(cpl.minus, sys.B_minus[j], row);
      scatter(cpl.plus, sys.B_plus[j], row);
    }
  }

  sys.readout = MatrixXcd::Zero(m, n);
  for (int j = 0; j < m; ++j)
    for (const auto& [k, c] : Ls[j].terms()) {
      const int col = sys.index_of(k);
      if (col < 0) throw std::logic_error("coupling operator not representable in basis");
      sys.readout(j, col) = c;
    }

  sys.S = spec.S;
  sys.mu = spec.mu;
  sys.x0 = VectorXcd::Zero(n);
  if (init.alpha) {
    if (init.alpha->size() != modes)
      throw std::invalid_argument("coherent initial state needs one amplitude per mode");
    for (int i = 0; i < n; ++i) sys.x0[i] = coherent_moment(sys.basis[i], *init.alpha);
  } else {
    sys.x0[0] = Complex{1.0, 0.0};
  }
  return sys;
}

ModelSpec kerr_cavity(double omega_a, double chi, double gamma) {
  if (gamma < 0) throw std::invalid_argument("kerr_cavity: gamma must be >= 0");
  ModelSpec spec;
  spec.modes = 1;
  spec.H_linear = OperatorPoly::monomial({{1, 1}}, omega_a);
  spec.H_nonlinear = OperatorPoly::zero(1);
  if (chi != 0.0) spec.H_nonlinear = OperatorPoly::monomial({{2, 2}}, chi);
  spec.L_linear = {OperatorPoly::monomial({{0, 1}}, std::sqrt(gamma))};
  spec.L_nonlinear = {OperatorPoly::zero(1)};
  spec.mu = omega_a != 0.0 ? chi / omega_a : 0.0;
  spec.S = MatrixXcd::Identity(1, 1);
  spec.truncation_degree = 3;
  return spec;
}

ModelSpec optomech(double omega_a, double omega_b, double g, double gamma_a, double gamma_b) {
  if (gamma_a < 0 || gamma_b < 0) throw std::invalid_argument("optomech: rates must be >= 0");
  ModelSpec spec;
  spec.modes = 2;
  spec.H_linear = OperatorPoly::monomial({{1, 1}, {0, 0}}, omega_a);
  spec.H_linear += OperatorPoly::monomial({{0, 0}, {1, 1}}, omega_b);
  spec.H_nonlinear = OperatorPoly::zero(2);
  if (g != 0.0) {
    spec.H_nonlinear = OperatorPoly::monomial({{1, 1}, {0, 1}}, g);
    spec.H_nonlinear += OperatorPoly::monomial({{1, 1}, {1, 0}}, g);
  }
  spec.L_linear = {OperatorPoly::monomial({{0, 1}, {0, 0}}, std::sqrt(gamma_a)),
                   OperatorPoly::monomial({{0, 0}, {0, 1}}, std::sqrt(gamma_b))};
  spec.L_nonlinear = {OperatorPoly::zero(2), OperatorPoly::zero(2)};
  spec.mu = omega_b != 0.0 ? g / omega_b : 0.0;
  spec.S = MatrixXcd::Identity(2, 2);
  spec.truncation_degree = 3;
  return spec;
}

LinearModel cavity(double omega, double gamma) {
  if (gamma < 0) throw std::invalid_argument("cavity: gamma must be >= 0");
  LinearModel m;
  m.S = MatrixXcd::Identity(1, 1);
  m.C = MatrixXcd::Constant(1, 1, Complex{std::sqrt(gamma), 0.0});
  m.Omega = MatrixXcd::Constant(1, 1, Complex{omega, 0.0});
  return m;
}

LinearModel amplifier(double G) {
  if (G < 1.0) throw std::invalid_argument("amplifier: power gain must be >= 1");
  LinearModel m;
  m.S = MatrixXcd::Constant(1, 1, Complex{std::sqrt(G), 0.0});
  m.C = MatrixXcd::Zero(1, 0);
  m.Omega = MatrixXcd::Zero(0, 0);
  return m;
}

LinearModel beam_splitter(const MatrixXcd& S) {
  if (((S * S.adjoint()) - MatrixXcd::Identity(S.rows(), S.cols())).cwiseAbs().maxCoeff() > 1e-10)
    throw std::invalid_argument("beam_splitter: scattering matrix must be unitary");
  LinearModel m;
  m.S = S;
  m.C = MatrixXcd::Zero(S.rows(), 0);
  m.Omega = MatrixXcd::Zero(0, 0);
  return m;
}

LinearModel beam_splitter(double theta) {
  MatrixXcd S(2, 2);
  S << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
  return beam_splitter(S);
}

BilinearSystem linear_component(const LinearModel& model) {
  const int r = model.internal_modes();
  const int m = model.ports();
  const int n = r + 1;
  BilinearSystem sys;
  sys.basis.reserve(n);
  sys.basis.push_back(MonomialKey(std::max(r, 1), {0, 0}));
  for (int i = 0; i < r; ++i) {
    MonomialKey key(r, {0, 0});
    key[i] = {0, 1};
    sys.basis.push_back(key);
  }
  sys.A = MatrixXcd::Zero(n, n);
  if (r > 0) sys.A.block(1, 1, r, r) = model.drift();
  const MatrixXcd in_cols = r > 0 ? MatrixXcd(-(model.C.adjoint() * model.S)) : MatrixXcd::Zero(0, m);
  sys.B_minus.assign(m, MatrixXcd::Zero(n, n));
  sys.B_plus.assign(m, MatrixXcd::Zero(n, n));
  for (int j = 0; j < m; ++j)
    for (int i = 0; i < r; ++i) sys.B_minus[j](1 + i, 0) = in_cols(i, j);
  sys.readout = MatrixXcd::Zero(m, n);
  if (r > 0) sys.readout.block(0, 1, m, r) = model.C;
  sys.S = model.S;
  sys.mu = 0.0;
  sys.x0 = VectorXcd::Zero(n);
  sys.x0[0] = Complex{1.0, 0.0};
  return sys;
}

}  // namespace qvolterra
