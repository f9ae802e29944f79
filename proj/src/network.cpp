#include "qvolterra/network.hpp"

#include <algorithm>

namespace qvolterra {

namespace {

using EvalFn = std::function<Complex(std::span<const double>)>;

/// One contribution to a composed susceptibility: a downstream factor
/// evaluated at per-block frequency sums times one upstream factor per block.
struct SeriesTerm {
  EvalFn down;
  std::vector<EvalFn> ups;
  std::vector<int> alpha;  ///< block sizes; alpha.size() == ups.size()
};

Complex eval_series_terms(const std::vector<SeriesTerm>& terms, std::span<const double> w) {
  Complex total{0.0, 0.0};
  std::vector<double> block_sums;
  for (const auto& term : terms) {
    const int r = static_cast<int>(term.alpha.size());
    block_sums.assign(r, 0.0);
    Complex prod{1.0, 0.0};
    int pos = 0;
    for (int q = 0; q < r; ++q) {
      const int len = term.alpha[q];
      double s = 0.0;
      for (int i = 0; i < len; ++i) s += w[pos + i];
      block_sums[q] = s;
      prod *= term.ups[q](w.subspan(pos, len));
      pos += len;
    }
    prod *= term.down(block_sums);
    total += prod;
  }
  return total;
}

void compositions_rec(int n, int r, std::vector<int>& cur, std::vector<std::vector<int>>& out) {
  if (r == 1) {
    cur.push_back(n);
    out.push_back(cur);
    cur.pop_back();
    return;
  }
  for (int first = 1; first <= n - (r - 1); ++first) {
    cur.push_back(first);
    compositions_rec(n - first, r - 1, cur, out);
    cur.pop_back();
  }
}

/// All orderings of n into r positive blocks.
std::vector<std::vector<int>> compositions(int n, int r) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur;
  if (r >= 1 && r <= n) compositions_rec(n, r, cur, out);
  return out;
}

/// Enumerates signed-port tuples of the given length over `ports` ports.
void input_tuples_rec(int ports, int length, std::vector<SignedPort>& cur,
                      std::vector<std::vector<SignedPort>>& out) {
  if (static_cast<int>(cur.size()) == length) {
    out.push_back(cur);
    return;
  }
  for (int p = 0; p < ports; ++p) {
    for (PortSign s : {PortSign::Minus, PortSign::Plus}) {
      cur.push_back(SignedPort{p, s});
      input_tuples_rec(ports, length, cur, out);
      cur.pop_back();
    }
  }
}

std::vector<std::vector<SignedPort>> input_tuples(int ports, int length) {
  std::vector<std::vector<SignedPort>> out;
  std::vector<SignedPort> cur;
  input_tuples_rec(ports, length, cur, out);
  return out;
}

void add_entry(ComposedSet& set, KernelSignature sig, EvalFn fn) {
  NetSusceptibility e;
  e.signature = sig;
  e.fn = std::move(fn);
  set.orders[sig.order()].emplace(std::move(sig), std::move(e));
}

}  // namespace

const NetSusceptibility* ComposedSet::find(const KernelSignature& sig) const {
  auto order_it = orders.find(sig.order());
  if (order_it == orders.end()) return nullptr;
  auto it = order_it->second.find(sig);
  if (it == order_it->second.end()) return nullptr;
  return &it->second;
}

int ComposedSet::max_order() const {
  int m = 0;
  for (const auto& [order, entries] : orders) {
    if (!entries.empty()) m = std::max(m, order);
  }
  return m;
}

ComposedSet lift(const SusceptibilitySet& set) {
  ComposedSet out;
  out.ports = set.ports;
  out.feedthrough = set.feedthrough;
  for (const auto& [order, entries] : set.orders) {
    for (const auto& [sig, chi] : entries) {
      add_entry(out, sig, [chi](std::span<const double> w) { return chi.eval(w); });
    }
  }
  return out;
}

ComposedSet concatenate(const ComposedSet& c1, const ComposedSet& c2) {
  ComposedSet out;
  const int m1 = c1.ports;
  const int m2 = c2.ports;
  out.ports = m1 + m2;
  out.feedthrough = MatrixXcd::Zero(out.ports, out.ports);
  if (c1.feedthrough.size() > 0) out.feedthrough.topLeftCorner(m1, m1) = c1.feedthrough;
  if (c2.feedthrough.size() > 0) out.feedthrough.bottomRightCorner(m2, m2) = c2.feedthrough;
  for (const auto& [order, entries] : c1.orders) {
    for (const auto& [sig, e] : entries) add_entry(out, sig, e.fn);
  }
  for (const auto& [order, entries] : c2.orders) {
    for (const auto& [sig, e] : entries) {
      KernelSignature shifted = sig;
      shifted.out_port += m1;
      for (auto& in : shifted.inputs) in.port += m1;
      add_entry(out, shifted, e.fn);
    }
  }
  return out;
}

ComposedSet series(const ComposedSet& downstream, const ComposedSet& upstream, int max_order) {
  if (downstream.ports != upstream.ports) {
    throw PortMismatch("series junction: port counts differ");
  }
  if (max_order < 1) throw PortMismatch("series: max_order must be >= 1");
  const int m = downstream.ports;
  ComposedSet out;
  out.ports = m;
  if (downstream.feedthrough.size() > 0 && upstream.feedthrough.size() > 0) {
    out.feedthrough = downstream.feedthrough * upstream.feedthrough;
  }
  for (int n = 1; n <= max_order; ++n) {
    const auto tuples = input_tuples(m, n);
    for (int out_port = 0; out_port < m; ++out_port) {
      for (PortSign out_sign : {PortSign::Minus, PortSign::Plus}) {
        for (const auto& inputs : tuples) {
          std::vector<SeriesTerm> terms;
          for (int r = 1; r <= n; ++r) {
            auto dit = downstream.orders.find(r);
            if (dit == downstream.orders.end()) continue;
            const auto comps = compositions(n, r);
            for (const auto& [dsig, dsus] : dit->second) {
              if (dsig.out_port != out_port || dsig.out_sign != out_sign) continue;
              for (const auto& alpha : comps) {
                SeriesTerm term;
                term.down = dsus.fn;
                term.alpha = alpha;
                bool ok = true;
                int pos = 0;
                for (int q = 0; q < r && ok; ++q) {
                  KernelSignature usig;
                  usig.out_port = dsig.inputs[q].port;
                  usig.out_sign = dsig.inputs[q].sign;
                  usig.inputs.assign(inputs.begin() + pos, inputs.begin() + pos + alpha[q]);
                  const NetSusceptibility* up_entry = upstream.find(usig);
                  if (up_entry == nullptr) {
                    ok = false;
                  } else {
                    term.ups.push_back(up_entry->fn);
                  }
                  pos += alpha[q];
                }
                if (ok) terms.push_back(std::move(term));
              }
            }
          }
          if (terms.empty()) continue;
          KernelSignature sig;
          sig.out_port = out_port;
          sig.out_sign = out_sign;
          sig.inputs = inputs;
          add_entry(out, sig, [terms = std::move(terms)](std::span<const double> w) {
            return eval_series_terms(terms, w);
          });
        }
      }
    }
  }
  return out;
}

ComposedSet series_linear_first(const ComposedSet& nl, const ComposedSet& lin, int max_order) {
  if (nl.ports != lin.ports) throw PortMismatch("series junction: port counts differ");
  if (!lin.is_linear()) throw NotLinear("per-input factorization needs a linear upstream stage");
  ComposedSet out;
  out.ports = nl.ports;
  if (nl.feedthrough.size() > 0 && lin.feedthrough.size() > 0) {
    out.feedthrough = nl.feedthrough * lin.feedthrough;
  }
  // Per target signature, a list of (nl factor, per-slot linear factors).
  std::map<KernelSignature, std::vector<SeriesTerm>> targets;
  auto lin_order1 = lin.orders.find(1);
  for (const auto& [order, entries] : nl.orders) {
    if (order > max_order || lin_order1 == lin.orders.end()) continue;
    for (const auto& [nsig, nsus] : entries) {
      const int n = order;
      // Cartesian product over slots of the linear entries feeding each line.
      std::vector<std::vector<const NetSusceptibility*>> per_slot(n);
      bool feasible = true;
      for (int i = 0; i < n && feasible; ++i) {
        for (const auto& [lsig, lsus] : lin_order1->second) {
          if (lsig.out_port == nsig.inputs[i].port && lsig.out_sign == nsig.inputs[i].sign) {
            per_slot[i].push_back(&lsus);
          }
        }
        if (per_slot[i].empty()) feasible = false;
      }
      if (!feasible) continue;
      std::vector<int> choice(n, 0);
      while (true) {
        SeriesTerm term;
        term.down = nsus.fn;
        term.alpha.assign(n, 1);
        KernelSignature sig;
        sig.out_port = nsig.out_port;
        sig.out_sign = nsig.out_sign;
        for (int i = 0; i < n; ++i) {
          const NetSusceptibility* pick = per_slot[i][choice[i]];
          term.ups.push_back(pick->fn);
          sig.inputs.push_back(pick->signature.inputs[0]);
        }
        targets[sig].push_back(std::move(term));
        int i = n - 1;
        while (i >= 0 && ++choice[i] == static_cast<int>(per_slot[i].size())) {
          choice[i] = 0;
          --i;
        }
        if (i < 0) break;
      }
    }
  }
  for (auto& [sig, terms] : targets) {
    add_entry(out, sig, [terms = std::move(terms)](std::span<const double> w) {
      return eval_series_terms(terms, w);
    });
  }
  return out;
}

ComposedSet series_linear_second(const ComposedSet& lin, const ComposedSet& nl, int max_order) {
  if (nl.ports != lin.ports) throw PortMismatch("series junction: port counts differ");
  if (!lin.is_linear()) throw NotLinear("whole-output factorization needs a linear downstream stage");
  ComposedSet out;
  out.ports = nl.ports;
  if (nl.feedthrough.size() > 0 && lin.feedthrough.size() > 0) {
    out.feedthrough = lin.feedthrough * nl.feedthrough;
  }
  std::map<KernelSignature, std::vector<SeriesTerm>> targets;
  auto lin_order1 = lin.orders.find(1);
  if (lin_order1 != lin.orders.end()) {
    for (const auto& [order, entries] : nl.orders) {
      if (order > max_order) continue;
      for (const auto& [nsig, nsus] : entries) {
        for (const auto& [lsig, lsus] : lin_order1->second) {
          if (lsig.inputs[0].port != nsig.out_port || lsig.inputs[0].sign != nsig.out_sign) {
            continue;
          }
          SeriesTerm term;
          // The n input frequencies form one block, so the linear factor sees
          // their sum and the inner stage keeps the full tuple.
          term.down = lsus.fn;
          term.alpha = {order};
          term.ups = {nsus.fn};
          KernelSignature sig;
          sig.out_port = lsig.out_port;
          sig.out_sign = lsig.out_sign;
          sig.inputs = nsig.inputs;
          targets[sig].push_back(std::move(term));
        }
      }
    }
  }
  for (auto& [sig, terms] : targets) {
    add_entry(out, sig, [terms = std::move(terms)](std::span<const double> w) {
      return eval_series_terms(terms, w);
    });
  }
  return out;
}

NetworkExpr NetworkExpr::leaf(std::string id) {
  NetworkExpr e;
  e.kind = Kind::Leaf;
  e.name = std::move(id);
  return e;
}

NetworkExpr NetworkExpr::series_of(NetworkExpr downstream, NetworkExpr upstream) {
  NetworkExpr e;
  e.kind = Kind::Series;
  e.first = std::make_unique<NetworkExpr>(std::move(downstream));
  e.second = std::make_unique<NetworkExpr>(std::move(upstream));
  return e;
}

NetworkExpr NetworkExpr::concat_of(NetworkExpr left, NetworkExpr right) {
  NetworkExpr e;
  e.kind = Kind::Concat;
  e.first = std::make_unique<NetworkExpr>(std::move(left));
  e.second = std::make_unique<NetworkExpr>(std::move(right));
  return e;
}

NetworkExpr NetworkExpr::clone() const {
  NetworkExpr e;
  e.kind = kind;
  e.name = name;
  if (first) e.first = std::make_unique<NetworkExpr>(first->clone());
  if (second) e.second = std::make_unique<NetworkExpr>(second->clone());
  return e;
}

ComposedSet evaluate_network(const NetworkExpr& expr,
                             const std::map<std::string, ComposedSet>& components, int max_order) {
  switch (expr.kind) {
    case NetworkExpr::Kind::Leaf: {
      auto it = components.find(expr.name);
      if (it == components.end()) {
        throw UnknownComponent("network references undefined component '" + expr.name + "'");
      }
      return it->second;
    }
    case NetworkExpr::Kind::Series:
      return series(evaluate_network(*expr.first, components, max_order),
                    evaluate_network(*expr.second, components, max_order), max_order);
    case NetworkExpr::Kind::Concat:
      return concatenate(evaluate_network(*expr.first, components, max_order),
                         evaluate_network(*expr.second, components, max_order));
  }
  throw std::logic_error("unreachable network expression kind");
}

}  // namespace qvolterra
