#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <random>

#include "qvolterra/response.hpp"

using namespace qvolterra;

namespace {

ExpSumKernel order1_cavity_kernel(double wa, double g) {
  ExpSumKernel k;
  k.signature = make_signature("-");
  k.terms.push_back(ExpTerm{Complex(-g, 0.0), {Complex(g / 2.0, wa)}});
  return k;
}

DriveSignal harmonic_drive(std::span<const Complex> amps, std::span<const double> freqs,
                           double tmax, double dt) {
  DriveSignal d;
  d.dt = dt;
  const std::vector<Complex> a(amps.begin(), amps.end());
  const std::vector<double> f(freqs.begin(), freqs.end());
  auto fn = [a, f](double t) {
    Complex v{0.0, 0.0};
    for (std::size_t k = 0; k < a.size(); ++k) v += a[k] * std::exp(-I * f[k] * t);
    return v;
  };
  const int n = static_cast<int>(std::round(tmax / dt)) + 1;
  for (int j = 0; j < n; ++j) d.samples.push_back(fn(j * dt));
  d.analytic = fn;
  d.description = "harmonic";
  return d;
}

double rel_l2(const std::vector<Complex>& a, const std::vector<Complex>& b) {
  double num = 0.0, den = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    num += std::norm(a[j] - b[j]);
    den += std::norm(b[j]);
  }
  return std::sqrt(num / std::max(den, 1e-300));
}

}  // namespace

TEST_CASE("drive helpers") {
  const DriveSignal d = DriveSignal::rotating(0.25, 1.3, 10.0, 0.1);
  CHECK(d.size() == 101);
  CHECK(std::abs(d.tmax() - 10.0) <= 1e-12);
  CHECK(std::abs(d.at(0.0) - Complex(0.25, 0.0)) <= 1e-15);
  // between samples the analytic evaluator is exact
  CHECK(std::abs(d.at(0.333) - 0.25 * std::exp(-I * 1.3 * 0.333)) <= 1e-15);
  const DriveSignal d2 = d.scaled(2.0);
  CHECK(std::abs(d2.at(0.333) - 2.0 * d.at(0.333)) <= 1e-15);
  CHECK(std::abs(d2.samples[7] - 2.0 * d.samples[7]) <= 1e-15);
}

TEST_CASE("cascade path equals the convolution oracle on random instances") {
  std::mt19937 rng(2026);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  auto uni = [&](double lo, double hi) { return lo + (hi - lo) * u01(rng); };

  double worst = 0.0;
  for (int inst = 0; inst < 20; ++inst) {
    std::vector<ExpSumKernel> kernels;
    const int n_kernels = 1 + static_cast<int>(rng() % 3);
    int total_terms = 0;
    for (int kk = 0; kk < n_kernels; ++kk) {
      const int order = 1 + static_cast<int>(rng() % 3);
      std::string signs;
      for (int q = 0; q < order; ++q) signs += (rng() % 2 ? '+' : '-');
      ExpSumKernel k;
      k.signature = make_signature(signs);
      const int n_terms = 1 + static_cast<int>(rng() % 2);
      for (int tt = 0; tt < n_terms && total_terms < 5; ++tt, ++total_terms) {
        ExpTerm term;
        term.coeff = Complex(uni(-1.0, 1.0), uni(-1.0, 1.0));
        for (int q = 0; q < order; ++q)
          term.rates.push_back(Complex(uni(0.2, 1.0), uni(-1.0, 1.0)));
        k.terms.push_back(std::move(term));
      }
      if (!k.terms.empty()) kernels.push_back(std::move(k));
    }
    const std::array<Complex, 2> amps = {Complex(uni(-0.5, 0.5), uni(-0.5, 0.5)),
                                         Complex(uni(-0.5, 0.5), uni(-0.5, 0.5))};
    const std::array<double, 2> freqs = {uni(-1.5, 1.5), uni(-1.5, 1.5)};
    const DriveSignal drive = harmonic_drive(amps, freqs, 63 * 0.12, 0.12);  // 64 samples
    REQUIRE(drive.size() == 64);
    const Complex feed(uni(-1.0, 1.0), uni(-1.0, 1.0));

    const ResponseResult fast = volterra_response(kernels, feed, drive, 3);
    const ResponseResult slow = brute_force_response(kernels, feed, drive, 3);
    const double err = rel_l2(fast.total, slow.total);
    worst = std::max(worst, err);
    CHECK(err <= 1e-6);
  }
  MESSAGE("worst relative L2 over 20 instances: ", worst);
}

TEST_CASE("oracle recurrence equals a literal nested trapezoid sum") {
  // One order-3 term, drive grid used directly (refine = 1): the oracle must
  // reproduce, to rounding, the O(N^2)-per-level iterated trapezoid
  // convolution computed here in the most naive way.
  ExpSumKernel k;
  k.signature = make_signature("-+-");
  const Complex c(0.7, -0.3);
  const std::array<Complex, 3> lam = {Complex(0.4, 0.9), Complex(0.8, -0.5), Complex(0.3, 0.2)};
  k.terms.push_back(ExpTerm{c, {lam[0], lam[1], lam[2]}});

  const double dt = 0.25;
  const int N = 17;
  const std::array<Complex, 1> amps = {Complex(0.4, 0.2)};
  const std::array<double, 1> freqs = {0.9};
  const DriveSignal drive = harmonic_drive(amps, freqs, (N - 1) * dt, dt);
  REQUIRE(drive.size() == N);

  const ResponseResult got = brute_force_response({k}, Complex(0.0, 0.0), drive, 3, 1);

  // u_k[i]: drive (minus lines) or conjugate (plus lines) at t_i, slot k.
  std::vector<std::vector<Complex>> u(3, std::vector<Complex>(N));
  for (int i = 0; i < N; ++i) {
    const Complex b = drive.samples[i];
    u[0][i] = b;             // slot 1, sign -
    u[1][i] = std::conj(b);  // slot 2, sign +
    u[2][i] = b;             // slot 3, sign -
  }
  auto trapconv = [&](Complex lambda, const std::vector<Complex>& f) {
    std::vector<Complex> g(N, Complex(0.0, 0.0));
    for (int j = 1; j < N; ++j) {
      Complex s = 0.5 * std::exp(-lambda * (j * dt)) * f[0] + 0.5 * f[j];
      for (int i = 1; i < j; ++i) s += std::exp(-lambda * ((j - i) * dt)) * f[i];
      g[j] = s * dt;
    }
    return g;
  };
  // innermost level carries the last slot's rate and drive
  const std::vector<Complex> A1 = trapconv(lam[2], u[2]);
  std::vector<Complex> f2(N);
  for (int i = 0; i < N; ++i) f2[i] = u[1][i] * A1[i];
  const std::vector<Complex> A2 = trapconv(lam[1], f2);
  std::vector<Complex> f3(N);
  for (int i = 0; i < N; ++i) f3[i] = u[0][i] * A2[i];
  const std::vector<Complex> A3 = trapconv(lam[0], f3);

  const auto& y3 = got.orders.at(3);
  for (int j = 0; j < N; ++j) {
    CHECK(std::abs(y3[j] - c * A3[j]) <= 1e-13);
  }
}

TEST_CASE("resonant drive reflects with a pi phase in steady state") {
  const double wa = 1.0, g = 1.0, eps = 0.2;
  const std::vector<ExpSumKernel> kernels = {order1_cavity_kernel(wa, g)};
  const DriveSignal drive = DriveSignal::rotating(eps, wa, 40.0, 0.05);
  const ResponseResult res = volterra_response(kernels, Complex(1.0, 0.0), drive, 1);
  const int last = static_cast<int>(res.t.size()) - 1;
  for (int j = last - 20; j <= last; ++j) {
    CHECK(std::abs(res.total[j] + drive.samples[j]) <= 1e-7);
  }
}

TEST_CASE("first-order output matches the driven-mode closed form") {
  const double wa = 1.0, g = 0.4, eps = 0.3, wd = 0.6;
  const std::vector<ExpSumKernel> kernels = {order1_cavity_kernel(wa, g)};
  const DriveSignal drive = DriveSignal::rotating(eps, wd, 30.0, 0.05);
  const ResponseResult res = volterra_response(kernels, Complex(1.0, 0.0), drive, 1);
  const Complex pole(g / 2.0, wa - wd);
  for (std::size_t j = 0; j < res.t.size(); j += 7) {
    const double t = res.t[j];
    const Complex alpha =
        -std::sqrt(g) * eps / pole * (std::exp(-I * wd * t) - std::exp(-(g / 2.0 + I * wa) * t));
    const Complex expect = drive.at(t) + std::sqrt(g) * alpha;
    CHECK(std::abs(res.total[j] - expect) <= 1e-8);
  }
}

TEST_CASE("order-n contributions scale as the n-th drive power") {
  const BilinearSystem sys = build_bilinear(kerr_cavity(1.0, 0.01, 0.2));
  std::vector<ExpSumKernel> kernels = {symbolic_kernel(sys, make_signature("-"))};
  for (const char* s : {"-+-", "--+", "+--"}) kernels.push_back(symbolic_kernel(sys, make_signature(s)));
  const DriveSignal drive = DriveSignal::rotating(0.1, 0.9, 12.0, 0.1);
  const ResponseResult r1 = volterra_response(kernels, Complex(1.0, 0.0), drive, 3);
  const ResponseResult r2 = volterra_response(kernels, Complex(1.0, 0.0), drive.scaled(2.0), 3);
  for (int n : {1, 3}) {
    const auto& a = r1.orders.at(n);
    const auto& b = r2.orders.at(n);
    double peak = 0.0;
    for (const Complex& v : a) peak = std::max(peak, std::abs(v));
    REQUIRE(peak > 0.0);
    const double s = std::pow(2.0, n);
    for (std::size_t j = 0; j < a.size(); ++j) {
      CHECK(std::abs(b[j] - s * a[j]) <= 1e-10 * s * peak);
    }
  }
}

TEST_CASE("response is additive over the kernel list") {
  const BilinearSystem sys = build_bilinear(kerr_cavity(1.0, 0.01, 0.2));
  const ExpSumKernel ka = symbolic_kernel(sys, make_signature("-+-"));
  const ExpSumKernel kb = symbolic_kernel(sys, make_signature("--+"));
  const DriveSignal drive = DriveSignal::rotating(0.4, 1.1, 8.0, 0.1);
  const ResponseResult rab = volterra_response({ka, kb}, Complex(0.0, 0.0), drive, 3);
  const ResponseResult ra = volterra_response({ka}, Complex(0.0, 0.0), drive, 3);
  const ResponseResult rb = volterra_response({kb}, Complex(0.0, 0.0), drive, 3);
  for (std::size_t j = 0; j < rab.t.size(); ++j) {
    CHECK(std::abs(rab.orders.at(3)[j] - ra.orders.at(3)[j] - rb.orders.at(3)[j]) <= 1e-12);
  }
}

TEST_CASE("zero drive and empty kernel list") {
  const std::vector<ExpSumKernel> kernels = {order1_cavity_kernel(1.0, 0.3)};
  DriveSignal zero;
  zero.dt = 0.1;
  zero.samples.assign(41, Complex(0.0, 0.0));
  const ResponseResult rz = volterra_response(kernels, Complex(1.0, 0.0), zero, 3);
  for (const Complex& v : rz.total) CHECK(std::abs(v) == 0.0);

  const DriveSignal drive = DriveSignal::rotating(0.3, 0.8, 5.0, 0.1);
  const ResponseResult rf = volterra_response({}, Complex(0.6, -0.2), drive, 3);
  for (std::size_t j = 0; j < rf.t.size(); ++j) {
    CHECK(std::abs(rf.total[j] - Complex(0.6, -0.2) * drive.samples[j]) <= 1e-15);
    CHECK(std::abs(rf.x_out[j] - std::sqrt(2.0) * rf.total[j].real()) <= 1e-14);
  }
}

TEST_CASE("spectrum finds the driven tone") {
  ResponseResult res;
  const double dt = 0.05, w0 = 1.3;
  const int N = 512;
  for (int j = 0; j < N; ++j) {
    res.t.push_back(j * dt);
    res.x_out.push_back(std::cos(w0 * j * dt));
    res.total.push_back(Complex(res.x_out[j] / std::sqrt(2.0), 0.0));
  }
  const SpectrumResult spec = output_spectrum(res, 0, N);
  REQUIRE(spec.omega.size() == spec.log_magnitude.size());
  std::size_t peak = 0;
  for (std::size_t b = 1; b < spec.omega.size(); ++b)
    if (spec.log_magnitude[b] > spec.log_magnitude[peak]) peak = b;
  const double bin = 2.0 * M_PI / (N * dt);
  CHECK(std::abs(spec.omega[peak] - w0) <= bin);
  // Hann-normalized tone reads about half amplitude (scalloping allowed).
  CHECK(spec.log_magnitude[peak] >= std::log10(0.25));
  CHECK(spec.log_magnitude[peak] <= std::log10(0.75));
  CHECK_THROWS_AS(output_spectrum(res, 0, 8), SegmentTooShort);
}

TEST_CASE("response guard paths") {
  const DriveSignal big = DriveSignal::rotating(0.1, 1.0, 20.0, 0.1);  // 201 samples
  CHECK_THROWS_AS(brute_force_response({order1_cavity_kernel(1.0, 0.3)}, Complex(1.0, 0.0), big, 1),
                  GridTooLarge);
  ExpSumKernel marginal;
  marginal.signature = make_signature("-");
  marginal.terms.push_back(ExpTerm{Complex(1.0, 0.0), {Complex(0.0, 1.0)}});
  const DriveSignal drive = DriveSignal::rotating(0.1, 1.0, 5.0, 0.1);
  CHECK_THROWS_AS(volterra_response({marginal}, Complex(1.0, 0.0), drive, 1), NonDecayingKernel);
}
