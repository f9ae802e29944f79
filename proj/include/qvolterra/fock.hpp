#pragma once

#include <vector>

#include "qvolterra/bilinear.hpp"
#include "qvolterra/response.hpp"

namespace qvolterra {

/// Matrix of a polynomial operator in the truncated number basis, one
/// truncation dimension per mode (tensor-product ordering: mode 0 slowest).
MatrixXcd operator_matrix(const OperatorPoly& poly, const std::vector<int>& dims);

/// Density matrix on levels 0…N of a single mode (dimension N+1).
struct FockDensity {
  int levels = 0;  ///< highest kept level N
  MatrixXcd rho;

  int dim() const { return levels + 1; }
  /// Throws std::invalid_argument when Hermiticity, unit trace, or positivity
  /// (min eigenvalue ≥ −psd_tol) fails at the given tolerances.
  void validate(double herm_tol = 1e-10, double trace_tol = 1e-8, double psd_tol = 1e-8) const;
  static FockDensity vacuum(int levels);
  static FockDensity coherent(Complex alpha, int levels);
  static FockDensity fock(int n, int levels);
  static FockDensity pure(const VectorXcd& psi);
  Complex expect(const MatrixXcd& op) const { return (op * rho).trace(); }
};

struct LindbladOptions {
  double dt = 0.01;        ///< integrator step
  bool check_leak = true;  ///< enforce the top-level population guard
  double leak_tol = 1e-6;
  bool store_states = true;  ///< keep density snapshots at grid times
};

struct LindbladTrajectory {
  std::vector<double> t;
  std::vector<Complex> a_mean;
  std::vector<Complex> b_out;  ///< β + √γ·⟨a⟩
  std::vector<double> x_out;   ///< (b_out + b_out*)/√2
  std::vector<FockDensity> states;
};

/// Master-equation integration for a driven single-mode component:
/// ρ̇ = −i[H + H_d(t), ρ] + Σ_L (LρL† − ½{L†L, ρ}),
/// H_d = i(β*(t)·L₀ − β(t)·L₀†) with L₀ the linear coupling (= √γ·a for a
/// cavity), so the output mean is β + √γ⟨a⟩.  Classical 4th-order fixed-step
/// integration; grid times must be multiples of opts.dt.  Throws
/// TruncationLeak when the top-level population exceeds opts.leak_tol while
/// the guard is enabled.
LindbladTrajectory lindblad_integrate(const ModelSpec& spec, const DriveSignal& drive, int levels,
                                      const std::vector<double>& t_grid,
                                      const LindbladOptions& opts = {});

struct SemiclassicalTrajectory {
  std::vector<double> t;
  std::vector<Complex> alpha;
  std::vector<Complex> b_out;
  std::vector<double> x_out;
};

/// Mean-field baseline for a single-mode quartic component:
/// α̇ = −(γ/2 + iωa)α − 2iχ|α|²α − √γ·β(t), output β + √γα.
SemiclassicalTrajectory semiclassical_response(const ModelSpec& spec, const DriveSignal& drive,
                                               const std::vector<double>& t_grid, double dt = 0.01);

/// Distance of ρ from the Gaussian state σ with the same first and second
/// quadrature moments: δ = tr[(ρ−σ)²/2]/tr[ρ²] ∈ [0,1].  σ is the displaced
/// squeezed thermal state reconstructed from ⟨a⟩, ⟨a²⟩, ⟨a†a⟩.  Throws
/// UnphysicalCovariance when the covariance matrix violates the uncertainty
/// bound beyond 1e-6 (a truncation artifact).
double non_gaussianity(const FockDensity& rho);

/// Moments-matched Gaussian reference state used by non_gaussianity (exposed
/// for testing).
FockDensity gaussian_reference(const FockDensity& rho);

}  // namespace qvolterra
