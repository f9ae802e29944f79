#include "qvolterra/algebra.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace qvolterra {

int monomial_degree(const MonomialKey& key) {
  int d = 0;
  for (const auto& [p, q] : key) d += p + q;
  return d;
}

std::string monomial_to_string(const MonomialKey& key) {
  static const char* names = "abcdefgh";
  std::ostringstream os;
  bool any = false;
  for (std::size_t m = 0; m < key.size(); ++m) {
    const auto [p, q] = key[m];
    const char name = m < 8 ? names[m] : '?';
    if (p > 0) {
      if (any) os << ' ';
      os << name << "†";
      if (p > 1) os << '^' << p;
      any = true;
    }
    if (q > 0) {
      if (any) os << ' ';
      os << name;
      if (q > 1) os << '^' << q;
      any = true;
    }
  }
  if (!any) return "1";
  return os.str();
}

OperatorPoly OperatorPoly::identity(int modes) {
  OperatorPoly p(modes);
  p.add_term(MonomialKey(modes, {0, 0}), Complex{1.0, 0.0});
  return p;
}

OperatorPoly OperatorPoly::monomial(MonomialKey key, Complex c) {
  OperatorPoly p(static_cast<int>(key.size()));
  p.add_term(std::move(key), c);
  return p;
}

OperatorPoly OperatorPoly::annihilator(int modes, int mode) {
  MonomialKey key(modes, {0, 0});
  key[mode] = {0, 1};
  return monomial(std::move(key));
}

OperatorPoly OperatorPoly::creator(int modes, int mode) {
  MonomialKey key(modes, {0, 0});
  key[mode] = {1, 0};
  return monomial(std::move(key));
}

int OperatorPoly::degree() const {
  int d = 0;
  for (const auto& [key, c] : terms_) d = std::max(d, monomial_degree(key));
  return d;
}

Complex OperatorPoly::coeff(const MonomialKey& key) const {
  auto it = terms_.find(key);
  return it == terms_.end() ? Complex{0.0, 0.0} : it->second;
}

void OperatorPoly::add_term(const MonomialKey& key, Complex c) {
  auto [it, inserted] = terms_.emplace(key, c);
  if (!inserted) it->second += c;
  if (std::abs(it->second) < kCoeffPrune) terms_.erase(it);
}

OperatorPoly& OperatorPoly::operator+=(const OperatorPoly& rhs) {
  for (const auto& [key, c] : rhs.terms_) add_term(key, c);
  return *this;
}

OperatorPoly& OperatorPoly::operator-=(const OperatorPoly& rhs) {
  for (const auto& [key, c] : rhs.terms_) add_term(key, -c);
  return *this;
}

OperatorPoly& OperatorPoly::operator*=(Complex s) {
  if (std::abs(s) < kCoeffPrune) {
    terms_.clear();
    return *this;
  }
  for (auto& [key, c] : terms_) c *= s;
  return *this;
}

OperatorPoly OperatorPoly::dagger() const {
  OperatorPoly out(modes_);
  for (const auto& [key, c] : terms_) {
    MonomialKey flipped = key;
    for (auto& [p, q] : flipped) std::swap(p, q);
    out.add_term(flipped, std::conj(c));
  }
  return out;
}

void OperatorPoly::prune(double eps) {
  for (auto it = terms_.begin(); it != terms_.end();) {
    if (std::abs(it->second) < eps)
      it = terms_.erase(it);
    else
      ++it;
  }
}

bool OperatorPoly::approx_equal(const OperatorPoly& p, double tol) const {
  if (modes_ != p.modes_) return false;
  for (const auto& [key, c] : terms_)
    if (std::abs(c - p.coeff(key)) > tol) return false;
  for (const auto& [key, c] : p.terms_)
    if (std::abs(c - coeff(key)) > tol) return false;
  return true;
}

std::string OperatorPoly::to_string() const {
  if (terms_.empty()) return "0";
  std::ostringstream os;
  bool first = true;
  for (const auto& [key, c] : terms_) {
    if (!first) os << " + ";
    os << "(" << c.real() << (c.imag() < 0 ? "" : "+") << c.imag() << "i)";
    if (monomial_degree(key) > 0) os << "·" << monomial_to_string(key);
    first = false;
  }
  return os.str();
}

namespace {

double binom(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  double r = 1.0;
  for (int i = 0; i < k; ++i) r = r * static_cast<double>(n - i) / static_cast<double>(i + 1);
  return r;
}

double factorial(int n) {
  double r = 1.0;
  for (int i = 2; i <= n; ++i) r *= static_cast<double>(i);
  return r;
}

// Per-mode reordering of (a†^p1 a^q1)(a†^p2 a^q2):
//   a^q a†^p = Σ_k C(q,k) C(p,k) k!  a†^(p−k) a^(q−k)
// so each mode contributes a sum over contraction count k.  Modes commute, so
// the multi-mode product is the cartesian combination of per-mode sums.
void expand_product(const MonomialKey& lhs, const MonomialKey& rhs, Complex coeff,
                    std::size_t mode, MonomialKey& acc, OperatorPoly& out) {
  if (mode == lhs.size()) {
    out.add_term(acc, coeff);
    return;
  }
  const auto [p1, q1] = lhs[mode];
  const auto [p2, q2] = rhs[mode];
  const int kmax = std::min(q1, p2);
  for (int k = 0; k <= kmax; ++k) {
    const double w = binom(q1, k) * binom(p2, k) * factorial(k);
    acc[mode] = {p1 + p2 - k, q1 + q2 - k};
    expand_product(lhs, rhs, coeff * w, mode + 1, acc, out);
  }
  acc[mode] = {0, 0};
}

}  // namespace

OperatorPoly normal_order_product(const OperatorPoly& a, const OperatorPoly& b) {
  OperatorPoly out(a.modes());
  MonomialKey acc(a.modes(), {0, 0});
  for (const auto& [ka, ca] : a.terms())
    for (const auto& [kb, cb] : b.terms()) expand_product(ka, kb, ca * cb, 0, acc, out);
  out.prune();
  return out;
}

OperatorPoly commutator(const OperatorPoly& a, const OperatorPoly& b) {
  OperatorPoly out = normal_order_product(a, b);
  out -= normal_order_product(b, a);
  out.prune();
  return out;
}

OperatorPoly heisenberg_generator(const OperatorPoly& X, const OperatorPoly& H,
                                  const std::vector<OperatorPoly>& Ls) {
  OperatorPoly out = I * commutator(H, X);
  for (const OperatorPoly& L : Ls) {
    const OperatorPoly Ld = L.dagger();
    out += normal_order_product(normal_order_product(Ld, X), L);
    const OperatorPoly LdL = normal_order_product(Ld, L);
    out -= Complex{0.5, 0.0} * (normal_order_product(LdL, X) + normal_order_product(X, LdL));
  }
  out.prune();
  return out;
}

InputCoupling input_coupling(const OperatorPoly& X, const OperatorPoly& L) {
  return InputCoupling{commutator(L.dagger(), X), commutator(X, L)};
}

}  // namespace qvolterra
