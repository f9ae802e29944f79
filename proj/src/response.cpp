#include "qvolterra/response.hpp"

#include <algorithm>
#include <cmath>

namespace qvolterra {

namespace {

void check_decaying(const std::vector<ExpSumKernel>& kernels) {
  for (const auto& kernel : kernels) {
    for (const auto& term : kernel.terms) {
      for (const Complex& rate : term.rates) {
        if (rate.real() <= 0.0) {
          throw NonDecayingKernel("response evaluation requires decaying kernels");
        }
      }
    }
  }
}

/// Drive factor for one kernel slot: β on minus lines, β* on plus lines.
Complex slot_value(PortSign sign, Complex beta) {
  return sign == PortSign::Minus ? beta : std::conj(beta);
}

}  // namespace

Complex DriveSignal::at(double t) const {
  if (analytic) return analytic(t);
  if (samples.empty()) return Complex(0.0, 0.0);
  if (t <= 0.0) return samples.front();
  const double pos = t / dt;
  const int k = static_cast<int>(pos);
  if (k >= size() - 1) return samples.back();
  const double frac = pos - k;
  return samples[k] * (1.0 - frac) + samples[k + 1] * frac;
}

DriveSignal DriveSignal::rotating(double eps, double omega_d, double tmax, double dt) {
  DriveSignal d;
  d.dt = dt;
  const int n = static_cast<int>(std::llround(tmax / dt)) + 1;
  d.samples.reserve(n);
  for (int k = 0; k < n; ++k) {
    const double t = k * dt;
    d.samples.push_back(eps * std::exp(-I * omega_d * t));
  }
  char buf[160];
  std::snprintf(buf, sizeof(buf), "rotating drive eps=%.17g omega_d=%.17g", eps, omega_d);
  d.description = buf;
  d.analytic = [eps, omega_d](double t) { return eps * std::exp(-I * omega_d * t); };
  return d;
}

DriveSignal DriveSignal::scaled(double s) const {
  DriveSignal d = *this;
  for (auto& v : d.samples) v *= s;
  if (analytic) {
    auto base = analytic;
    d.analytic = [base, s](double t) { return s * base(t); };
  }
  return d;
}

void ResponseResult::finalize(Complex feedthrough, const DriveSignal& drive) {
  const int n = static_cast<int>(t.size());
  total.assign(n, Complex(0.0, 0.0));
  for (int k = 0; k < n; ++k) total[k] = feedthrough * drive.samples[k];
  for (const auto& [order, contrib] : orders) {
    for (int k = 0; k < n; ++k) total[k] += contrib[k];
  }
  x_out.resize(n);
  for (int k = 0; k < n; ++k) x_out[k] = 2.0 * total[k].real() / std::sqrt(2.0);
}

ResponseResult volterra_response(const std::vector<ExpSumKernel>& kernels, Complex feedthrough,
                                 const DriveSignal& drive, int max_order, int substeps) {
  check_decaying(kernels);
  if (drive.dt <= 0.0 || drive.samples.empty()) {
    throw std::invalid_argument("volterra_response: drive must have dt > 0 and samples");
  }
  if (substeps < 1) substeps = 1;
  const int nsamp = drive.size();
  ResponseResult result;
  result.t.resize(nsamp);
  for (int k = 0; k < nsamp; ++k) result.t[k] = k * drive.dt;

  for (const auto& kernel : kernels) {
    const int n = kernel.order();
    if (n < 1 || n > max_order || kernel.empty()) continue;
    auto& contrib = result.orders[n];
    if (contrib.empty()) contrib.assign(nsamp, Complex(0.0, 0.0));
    // Slot signs ordered deepest-first to match the filter cascade: stage q
    // carries rate λ_{n−q+1} and drive factor u_{n−q+1}.
    std::vector<PortSign> stage_sign(n);
    for (int q = 0; q < n; ++q) stage_sign[q] = kernel.signature.inputs[n - 1 - q].sign;
    for (const auto& term : kernel.terms) {
      std::vector<Complex> rate(n);
      for (int q = 0; q < n; ++q) rate[q] = term.rates[n - 1 - q];
      std::vector<Complex> z(n, Complex(0.0, 0.0));
      contrib[0] += term.coeff * z[n - 1];  // zero; kept for clarity of the recurrence
      const double h = drive.dt / substeps;
      auto rhs = [&](const std::vector<Complex>& state, Complex beta, std::vector<Complex>& out) {
        for (int q = 0; q < n; ++q) {
          const Complex u = slot_value(stage_sign[q], beta);
          const Complex feed = q == 0 ? u : u * state[q - 1];
          out[q] = -rate[q] * state[q] + feed;
        }
      };
      std::vector<Complex> k1(n), k2(n), k3(n), k4(n), tmp(n);
      for (int step = 1; step < nsamp; ++step) {
        double t0 = (step - 1) * drive.dt;
        for (int sub = 0; sub < substeps; ++sub) {
          const double ta = t0 + sub * h;
          const Complex ba = drive.at(ta);
          const Complex bm = drive.at(ta + 0.5 * h);
          const Complex bb = drive.at(ta + h);
          rhs(z, ba, k1);
          for (int q = 0; q < n; ++q) tmp[q] = z[q] + 0.5 * h * k1[q];
          rhs(tmp, bm, k2);
          for (int q = 0; q < n; ++q) tmp[q] = z[q] + 0.5 * h * k2[q];
          rhs(tmp, bm, k3);
          for (int q = 0; q < n; ++q) tmp[q] = z[q] + h * k3[q];
          rhs(tmp, bb, k4);
          for (int q = 0; q < n; ++q) {
            z[q] += h / 6.0 * (k1[q] + 2.0 * k2[q] + 2.0 * k3[q] + k4[q]);
          }
        }
        contrib[step] += term.coeff * z[n - 1];
      }
    }
  }
  result.finalize(feedthrough, drive);
  return result;
}

ResponseResult brute_force_response(const std::vector<ExpSumKernel>& kernels, Complex feedthrough,
                                    const DriveSignal& drive, int max_order, int refine,
                                    int sample_cap) {
  check_decaying(kernels);
  if (drive.dt <= 0.0 || drive.samples.empty()) {
    throw std::invalid_argument("brute_force_response: drive must have dt > 0 and samples");
  }
  if (drive.size() > sample_cap) {
    throw GridTooLarge("brute-force quadrature limited to small grids; reduce the sample count");
  }
  if (refine < 1) refine = 1;
  const int nsamp = drive.size();
  const int nfine = (nsamp - 1) * refine + 1;
  const double h = drive.dt / refine;

  ResponseResult result;
  result.t.resize(nsamp);
  for (int k = 0; k < nsamp; ++k) result.t[k] = k * drive.dt;

  // Drive on the refined grid.
  std::vector<Complex> beta(nfine);
  for (int j = 0; j < nfine; ++j) beta[j] = drive.at(j * h);

  for (const auto& kernel : kernels) {
    const int n = kernel.order();
    if (n < 1 || n > max_order || kernel.empty()) continue;
    auto& contrib = result.orders[n];
    if (contrib.empty()) contrib.assign(nsamp, Complex(0.0, 0.0));
    for (const auto& term : kernel.terms) {
      // Iterated causal convolutions, innermost slot first.  Each stage is the
      // composite-trapezoid evaluation of g(s) = ∫₀^s e^{−λ(s−σ)} f(σ) dσ via
      // the exact one-step propagator, which reproduces the ordered-simplex
      // product-trapezoid sum term by term.
      std::vector<Complex> inner(nfine, Complex(1.0, 0.0));
      for (int slot = n - 1; slot >= 0; --slot) {
        const Complex lambda = term.rates[slot];
        const Complex prop = std::exp(-lambda * h);
        std::vector<Complex> f(nfine);
        for (int j = 0; j < nfine; ++j) {
          f[j] = slot_value(kernel.signature.inputs[slot].sign, beta[j]) * inner[j];
        }
        std::vector<Complex> g(nfine, Complex(0.0, 0.0));
        for (int j = 1; j < nfine; ++j) {
          g[j] = prop * g[j - 1] + 0.5 * h * (prop * f[j - 1] + f[j]);
        }
        inner = std::move(g);
      }
      for (int k = 0; k < nsamp; ++k) contrib[k] += term.coeff * inner[k * refine];
    }
  }
  result.finalize(feedthrough, drive);
  return result;
}

SpectrumResult output_spectrum(const ResponseResult& result, int start, int count) {
  if (count < 16) throw SegmentTooShort("spectrum segment needs at least 16 samples");
  if (start < 0 || start + count > static_cast<int>(result.x_out.size())) {
    throw std::invalid_argument("output_spectrum: segment outside the trajectory");
  }
  const double dt = result.t.size() > 1 ? result.t[1] - result.t[0] : 1.0;
  std::vector<double> w(count), xw(count);
  double wsum = 0.0;
  for (int j = 0; j < count; ++j) {
    w[j] = 0.5 * (1.0 - std::cos(2.0 * M_PI * j / (count - 1)));
    wsum += w[j];
    xw[j] = result.x_out[start + j] * w[j];
  }
  SpectrumResult spec;
  const int nbins = count / 2 + 1;
  spec.omega.resize(nbins);
  spec.log_magnitude.resize(nbins);
  for (int b = 0; b < nbins; ++b) {
    Complex acc(0.0, 0.0);
    for (int j = 0; j < count; ++j) {
      acc += xw[j] * std::exp(-I * (2.0 * M_PI * b * j / count));
    }
    spec.omega[b] = 2.0 * M_PI * b / (count * dt);
    const double mag = std::abs(acc) / wsum;
    spec.log_magnitude[b] = mag > 1e-16 ? std::max(std::log10(mag), -16.0) : -16.0;
  }
  return spec;
}

}  // namespace qvolterra
