#include "qvolterra/fock.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

#include "qvolterra/kernels.hpp"

namespace qvolterra {

namespace {

/// Single-mode matrix of (a†)^p a^q at the given dimension.
MatrixXcd ladder_matrix(int p, int q, int dim) {
  MatrixXcd M = MatrixXcd::Zero(dim, dim);
  for (int n = q; n < dim; ++n) {
    const int mid = n - q;
    const int row = mid + p;
    if (row >= dim) continue;
    double value = 1.0;
    for (int k = 0; k < q; ++k) value *= std::sqrt(static_cast<double>(n - k));
    for (int k = 0; k < p; ++k) value *= std::sqrt(static_cast<double>(mid + k + 1));
    M(row, n) = value;
  }
  return M;
}

MatrixXcd kron(const MatrixXcd& A, const MatrixXcd& B) {
  MatrixXcd K(A.rows() * B.rows(), A.cols() * B.cols());
  for (int i = 0; i < A.rows(); ++i) {
    for (int j = 0; j < A.cols(); ++j) {
      K.block(i * B.rows(), j * B.cols(), B.rows(), B.cols()) = A(i, j) * B;
    }
  }
  return K;
}

MatrixXcd annihilator_matrix(int dim) { return ladder_matrix(0, 1, dim); }

/// Population of configurations with any mode at its top level.
double top_level_population(const MatrixXcd& rho, const std::vector<int>& dims) {
  double pop = 0.0;
  const int total = static_cast<int>(rho.rows());
  for (int idx = 0; idx < total; ++idx) {
    int rem = idx;
    bool top = false;
    for (int m = static_cast<int>(dims.size()) - 1; m >= 0; --m) {
      const int level = rem % dims[m];
      rem /= dims[m];
      if (level == dims[m] - 1) top = true;
    }
    if (top) pop += rho(idx, idx).real();
  }
  return pop;
}

}  // namespace

MatrixXcd operator_matrix(const OperatorPoly& poly, const std::vector<int>& dims) {
  if (static_cast<int>(dims.size()) != poly.modes()) {
    throw std::invalid_argument("operator_matrix: one truncation dimension per mode required");
  }
  int total = 1;
  for (int d : dims) {
    if (d < 1) throw std::invalid_argument("operator_matrix: dimensions must be >= 1");
    total *= d;
  }
  MatrixXcd M = MatrixXcd::Zero(total, total);
  for (const auto& [key, coeff] : poly.terms()) {
    MatrixXcd term = MatrixXcd::Identity(1, 1);
    for (std::size_t m = 0; m < key.size(); ++m) {
      term = kron(term, ladder_matrix(key[m].first, key[m].second, dims[m]));
    }
    M += coeff * term;
  }
  return M;
}

void FockDensity::validate(double herm_tol, double trace_tol, double psd_tol) const {
  if (rho.rows() != dim() || rho.cols() != dim()) {
    throw std::invalid_argument("FockDensity: matrix dimension does not match level count");
  }
  if ((rho - rho.adjoint()).cwiseAbs().maxCoeff() > herm_tol) {
    throw std::invalid_argument("FockDensity: matrix is not Hermitian");
  }
  if (std::abs(rho.trace().real() - 1.0) > trace_tol || std::abs(rho.trace().imag()) > trace_tol) {
    throw std::invalid_argument("FockDensity: trace differs from 1");
  }
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(rho);
  if (es.eigenvalues().minCoeff() < -psd_tol) {
    throw std::invalid_argument("FockDensity: matrix has a negative eigenvalue");
  }
}

FockDensity FockDensity::vacuum(int levels) { return fock(0, levels); }

FockDensity FockDensity::fock(int n, int levels) {
  VectorXcd psi = VectorXcd::Zero(levels + 1);
  psi(n) = 1.0;
  return pure(psi);
}

FockDensity FockDensity::coherent(Complex alpha, int levels) {
  VectorXcd psi(levels + 1);
  Complex amp = 1.0;
  psi(0) = 1.0;
  for (int n = 1; n <= levels; ++n) {
    amp *= alpha / std::sqrt(static_cast<double>(n));
    psi(n) = amp;
  }
  psi.normalize();
  return pure(psi);
}

FockDensity FockDensity::pure(const VectorXcd& psi) {
  FockDensity d;
  d.levels = static_cast<int>(psi.size()) - 1;
  VectorXcd v = psi.normalized();
  d.rho = v * v.adjoint();
  return d;
}

LindbladTrajectory lindblad_integrate(const ModelSpec& spec, const DriveSignal& drive, int levels,
                                      const std::vector<double>& t_grid,
                                      const LindbladOptions& opts) {
  if (levels < 2) throw std::invalid_argument("lindblad_integrate: need at least levels >= 2");
  if (opts.dt <= 0.0) throw std::invalid_argument("lindblad_integrate: dt must be positive");
  spec.validate();
  const std::vector<int> dims(spec.modes, levels + 1);
  const int total = static_cast<int>(std::pow(levels + 1, spec.modes) + 0.5);

  const MatrixXcd H = operator_matrix(spec.hamiltonian(), dims);
  std::vector<MatrixXcd> Ls, LdL;
  for (int j = 0; j < spec.ports(); ++j) {
    Ls.push_back(operator_matrix(spec.coupling(j), dims));
    LdL.push_back(Ls.back().adjoint() * Ls.back());
  }
  const MatrixXcd L0 = Ls.at(0);
  const MatrixXcd L0d = L0.adjoint();
  const MatrixXcd A0 = operator_matrix(OperatorPoly::annihilator(spec.modes, 0), dims);

  auto rhs = [&](const MatrixXcd& rho, Complex beta, MatrixXcd& out) {
    MatrixXcd Ht = H + I * (std::conj(beta) * L0 - beta * L0d);
    out = -I * (Ht * rho - rho * Ht);
    for (std::size_t j = 0; j < Ls.size(); ++j) {
      out += Ls[j] * rho * Ls[j].adjoint();
      out -= 0.5 * (LdL[j] * rho + rho * LdL[j]);
    }
  };

  MatrixXcd rho = MatrixXcd::Zero(total, total);
  rho(0, 0) = 1.0;

  LindbladTrajectory traj;
  auto record = [&](double t) {
    traj.t.push_back(t);
    const Complex lmean = (L0 * rho).trace();
    const Complex beta = drive.at(t);
    traj.a_mean.push_back((A0 * rho).trace());
    traj.b_out.push_back(beta + lmean);
    traj.x_out.push_back(2.0 * traj.b_out.back().real() / std::sqrt(2.0));
    if (opts.store_states && spec.modes == 1) {
      FockDensity d;
      d.levels = levels;
      d.rho = rho;
      traj.states.push_back(std::move(d));
    }
  };

  const double dt = opts.dt;
  double t = 0.0;
  std::size_t next = 0;
  MatrixXcd k1(total, total), k2(total, total), k3(total, total), k4(total, total),
      tmp(total, total);
  auto aligned = [&](double a, double b) { return std::abs(a - b) < 1e-9 * std::max(1.0, b); };
  while (next < t_grid.size()) {
    if (aligned(t, t_grid[next])) {
      record(t_grid[next]);
      ++next;
      continue;
    }
    if (t > t_grid[next]) {
      throw std::invalid_argument("lindblad_integrate: grid times must be multiples of dt");
    }
    const Complex ba = drive.at(t);
    const Complex bm = drive.at(t + 0.5 * dt);
    const Complex bb = drive.at(t + dt);
    rhs(rho, ba, k1);
    tmp = rho + 0.5 * dt * k1;
    rhs(tmp, bm, k2);
    tmp = rho + 0.5 * dt * k2;
    rhs(tmp, bm, k3);
    tmp = rho + dt * k3;
    rhs(tmp, bb, k4);
    rho += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    t += dt;
    if (opts.check_leak) {
      const double leak = top_level_population(rho, dims);
      if (leak > opts.leak_tol) {
        throw TruncationLeak("top-level population exceeds tolerance; increase the truncation");
      }
    }
  }
  return traj;
}

SemiclassicalTrajectory semiclassical_response(const ModelSpec& spec, const DriveSignal& drive,
                                               const std::vector<double>& t_grid, double dt) {
  if (spec.modes != 1) {
    throw std::invalid_argument("semiclassical_response: single-mode components only");
  }
  const double omega_a = spec.H_linear.coeff({{1, 1}}).real();
  const double chi = spec.H_nonlinear.coeff({{2, 2}}).real();
  const Complex sqrt_gamma = spec.L_linear.at(0).coeff({{0, 1}});

  auto rhs = [&](Complex alpha, Complex beta) {
    return -(0.5 * std::norm(sqrt_gamma) + I * omega_a) * alpha -
           2.0 * I * chi * std::norm(alpha) * alpha - sqrt_gamma * beta;
  };

  SemiclassicalTrajectory traj;
  Complex alpha{0.0, 0.0};
  double t = 0.0;
  std::size_t next = 0;
  auto aligned = [&](double a, double b) { return std::abs(a - b) < 1e-9 * std::max(1.0, b); };
  auto record = [&](double tt) {
    traj.t.push_back(tt);
    traj.alpha.push_back(alpha);
    const Complex b = drive.at(tt) + sqrt_gamma * alpha;
    traj.b_out.push_back(b);
    traj.x_out.push_back(2.0 * b.real() / std::sqrt(2.0));
  };
  while (next < t_grid.size()) {
    if (aligned(t, t_grid[next])) {
      record(t_grid[next]);
      ++next;
      continue;
    }
    if (t > t_grid[next]) {
      throw std::invalid_argument("semiclassical_response: grid times must be multiples of dt");
    }
    const Complex k1 = rhs(alpha, drive.at(t));
    const Complex k2 = rhs(alpha + 0.5 * dt * k1, drive.at(t + 0.5 * dt));
    const Complex k3 = rhs(alpha + 0.5 * dt * k2, drive.at(t + 0.5 * dt));
    const Complex k4 = rhs(alpha + dt * k3, drive.at(t + dt));
    alpha += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    t += dt;
  }
  return traj;
}

FockDensity gaussian_reference(const FockDensity& rho_in) {
  const int dim = rho_in.dim();
  const MatrixXcd a = annihilator_matrix(dim);
  const MatrixXcd& rho = rho_in.rho;

  const Complex abar = (a * rho).trace();
  const Complex a2 = (a * a * rho).trace();
  const Complex nmean = (a.adjoint() * a * rho).trace();
  const Complex m = a2 - abar * abar;
  const double nc = nmean.real() - std::norm(abar);

  const double vxx = m.real() + nc + 0.5;
  const double vpp = -m.real() + nc + 0.5;
  const double vxp = m.imag();
  const double det = vxx * vpp - vxp * vxp;
  if (det <= 0.0 || std::sqrt(std::max(det, 0.0)) < 0.5 - 1e-6) {
    throw UnphysicalCovariance("quadrature covariance violates the uncertainty bound");
  }
  const double nu = std::sqrt(det);
  const double nth = std::max(nu - 0.5, 0.0);

  // Principal axes of the 2×2 covariance: larger variance v1 along angle θ.
  const double tr_half = 0.5 * (vxx + vpp);
  const double diff_half = 0.5 * (vxx - vpp);
  const double radius = std::sqrt(diff_half * diff_half + vxp * vxp);
  const double v1 = tr_half + radius;
  const double v2 = tr_half - radius;
  if (v2 <= 0.0) {
    throw UnphysicalCovariance("quadrature covariance is not positive definite");
  }
  const double theta = 0.5 * std::atan2(2.0 * vxp, vxx - vpp);
  const double r = 0.25 * std::log(v1 / v2);
  // Squeeze phase that puts the minor axis at θ + π/2, i.e. major axis at θ.
  const Complex xi = -r * std::exp(2.0 * I * theta);

  const MatrixXcd ad = a.adjoint();
  const MatrixXcd D = expm_dense(abar * ad - std::conj(abar) * a);
  const MatrixXcd S = expm_dense(0.5 * (std::conj(xi) * a * a - xi * ad * ad));

  VectorXcd pth(dim);
  double norm = 0.0;
  for (int n = 0; n < dim; ++n) {
    const double p = std::pow(nth / (1.0 + nth), n) / (1.0 + nth);
    pth(n) = p;
    norm += p;
  }
  MatrixXcd sigma = (pth / norm).asDiagonal();
  sigma = D * S * sigma * S.adjoint() * D.adjoint();

  FockDensity out;
  out.levels = rho_in.levels;
  out.rho = sigma;
  return out;
}

double non_gaussianity(const FockDensity& rho_in) {
  const FockDensity sigma = gaussian_reference(rho_in);
  const MatrixXcd diff = rho_in.rho - sigma.rho;
  const double num = 0.5 * (diff * diff).trace().real();
  const double den = (rho_in.rho * rho_in.rho).trace().real();
  return num / den;
}

}  // namespace qvolterra
