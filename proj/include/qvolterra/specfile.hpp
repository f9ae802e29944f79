#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qvolterra/network.hpp"

namespace qvolterra {

/// One `[component <name>]` block: type tag plus its numeric parameters.
struct ComponentDef {
  std::string name;
  std::string type;
  std::map<std::string, double> params;
  int line = 0;  ///< header line, for error reporting

  double param(const std::string& key) const { return params.at(key); }
};

/// Parsed spec file: named component blocks plus an optional network block.
struct SpecFile {
  std::vector<ComponentDef> components;
  std::optional<NetworkExpr> network;
  std::vector<std::string> chain_order;  ///< leaf names, first stage first

  const ComponentDef* find(const std::string& name) const;
};

/// Line-oriented parser.  Grammar: `[component <name>]` / `[network]` section
/// headers; `key = value` lines; `#` starts a comment; network lines
/// `chain = a -> b -> c` (left = first stage) or `parallel = a | b`.
/// Component types and their exact parameter sets:
///   kerr_cavity(omega_a, chi, gamma), linear_cavity(omega, gamma),
///   optomech(omega_a, omega_b, g, gamma_a, gamma_b), amplifier(gain),
///   beam_splitter(theta).
/// Unknown sections, keys, or parameters are errors (strict parsing);
/// all errors carry the offending line number.
SpecFile parse_spec(const std::string& text);

/// Susceptibility family for a parsed component (bilinear route for the
/// nonlinear types, transfer-function route for the static/linear ones).
ComposedSet component_susceptibilities(const ComponentDef& def, int max_order);

/// ModelSpec for the component types with internal dynamics
/// (kerr_cavity, linear_cavity, optomech); throws std::invalid_argument for
/// the static types (amplifier, beam_splitter).
ModelSpec component_model(const ComponentDef& def);

}  // namespace qvolterra
