#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "qvolterra/kernels.hpp"

namespace qvolterra {

/// Sampled classical coherent drive amplitude β(t) on a uniform grid.  When an
/// analytic evaluator is attached it is used between samples (and at RK4
/// half-steps); otherwise values are linearly interpolated.
struct DriveSignal {
  double dt = 0.0;
  std::vector<Complex> samples;
  std::string description;
  std::function<Complex(double)> analytic;

  int size() const { return static_cast<int>(samples.size()); }
  double tmax() const { return samples.empty() ? 0.0 : dt * (size() - 1); }
  /// β(t): analytic if available, else linear interpolation, clamped to the
  /// sampled range.
  Complex at(double t) const;
  /// Constant-amplitude rotating drive β(t) = ε·e^{−iω_d t} on [0, tmax].
  static DriveSignal rotating(double eps, double omega_d, double tmax, double dt);
  /// Drive scaled by a real factor (used by scaling tests).
  DriveSignal scaled(double s) const;
};

/// Output trajectory split by Volterra order.
struct ResponseResult {
  std::vector<double> t;
  std::map<int, std::vector<Complex>> orders;  ///< per-order contributions
  std::vector<Complex> total;                  ///< feedthrough·β + Σ orders
  std::vector<double> x_out;                   ///< (total + conj total)/√2

  void finalize(Complex feedthrough, const DriveSignal& drive);
};

/// Fast path: per exponential term (c, λ₁…λ_n) the order-n contribution is a
/// cascade of first-order filters z₁' = −λ_n z₁ + u_n, z_q' = −λ_{n−q+1} z_q +
/// u_{n−q+1} z_{q−1}, y += c·z_n, where u_k(t) is β(t) on minus lines and
/// β*(t) on plus lines.  Classical 4th-order fixed-step integration on the
/// drive grid, each step split into `substeps` equal substeps.  Cost is
/// O(samples) per term.  Throws NonDecayingKernel for non-decaying rates.
ResponseResult volterra_response(const std::vector<ExpSumKernel>& kernels, Complex feedthrough,
                                 const DriveSignal& drive, int max_order, int substeps = 16);

/// Oracle path: direct summation of the nested causal convolutions over the
/// ordered simplex with trapezoidal weights on a grid refined by `refine`
/// subdivisions per drive step.  Throws GridTooLarge when the drive exceeds
/// sample_cap samples.
ResponseResult brute_force_response(const std::vector<ExpSumKernel>& kernels, Complex feedthrough,
                                    const DriveSignal& drive, int max_order, int refine = 256,
                                    int sample_cap = 128);

struct SpectrumResult {
  std::vector<double> omega;
  std::vector<double> log_magnitude;  ///< log₁₀|X|, clamped at −16
};

/// Hann-windowed one-sided DFT of the x_out quadrature over samples
/// [start, start+count).  Magnitudes are normalized by the window sum, so a
/// unit-amplitude tone reads ≈ log₁₀(1/2).  Throws SegmentTooShort below 16
/// samples.
SpectrumResult output_spectrum(const ResponseResult& result, int start, int count);

}  // namespace qvolterra
