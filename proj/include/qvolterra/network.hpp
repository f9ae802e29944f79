#pragma once

#include <functional>
#include <map>
#include <memory>
#include <string>

#include "qvolterra/spectra.hpp"

namespace qvolterra {

/// One susceptibility of a (possibly composed) system as an evaluation tree:
/// a signature plus a closure evaluating it at a frequency tuple.
struct NetSusceptibility {
  KernelSignature signature;
  std::function<Complex(std::span<const double>)> fn;

  Complex eval(std::span<const double> omegas) const { return fn(omegas); }
};

/// Susceptibility family of a component or composed network.  Leaf components
/// wrap rational susceptibilities; composed entries evaluate the series
/// composition lazily (they are never re-expanded into rational terms).
struct ComposedSet {
  int ports = 1;
  MatrixXcd feedthrough;
  std::map<int, std::map<KernelSignature, NetSusceptibility>> orders;

  const NetSusceptibility* find(const KernelSignature& sig) const;
  int max_order() const;
  bool is_linear() const { return max_order() <= 1; }
};

/// Wraps a component's rational susceptibility set into evaluation-tree form.
ComposedSet lift(const SusceptibilitySet& set);

/// Side-by-side composition: block-diagonal feedthrough, entries re-indexed;
/// signatures mixing the two halves are absent (zero).
ComposedSet concatenate(const ComposedSet& c1, const ComposedSet& c2);

/// Series composition (upstream output feeds downstream input): sums over
/// chain length r, groupings of the n inputs into r consecutive blocks, and
/// junction (port, sign) assignments; the downstream susceptibility is
/// evaluated at the per-block frequency sums.  Throws PortMismatch when the
/// junction port counts differ.
ComposedSet series(const ComposedSet& downstream, const ComposedSet& upstream, int max_order);

/// Shortcut for a linear upstream stage: χ(ω₁…ω_n) = χ_nl(ω₁…ω_n)·∏ᵢ G¹(ωᵢ),
/// implemented independently of series() so the two can cross-validate.
/// Throws NotLinear when `lin` has entries above order 1.
ComposedSet series_linear_first(const ComposedSet& nl, const ComposedSet& lin, int max_order);

/// Shortcut for a linear downstream stage: χ(ω₁…ω_n) = G²(Σωᵢ)·χ_nl(ω₁…ω_n).
ComposedSet series_linear_second(const ComposedSet& lin, const ComposedSet& nl, int max_order);

/// Composition expression tree.
struct NetworkExpr {
  enum class Kind { Leaf, Series, Concat };
  Kind kind = Kind::Leaf;
  std::string name;  ///< leaf component id
  std::unique_ptr<NetworkExpr> first;   ///< Series: downstream; Concat: left
  std::unique_ptr<NetworkExpr> second;  ///< Series: upstream; Concat: right

  static NetworkExpr leaf(std::string id);
  static NetworkExpr series_of(NetworkExpr downstream, NetworkExpr upstream);
  static NetworkExpr concat_of(NetworkExpr left, NetworkExpr right);
  NetworkExpr clone() const;
};

/// Folds the expression tree over the component table.  Throws
/// UnknownComponent for unresolved leaf ids.
ComposedSet evaluate_network(const NetworkExpr& expr,
                             const std::map<std::string, ComposedSet>& components, int max_order);

}  // namespace qvolterra
