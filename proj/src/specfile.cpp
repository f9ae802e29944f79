#include "qvolterra/specfile.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <sstream>

namespace qvolterra {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::vector<std::string> split_on(const std::string& s, const std::string& sep) {
  std::vector<std::string> parts;
  std::size_t pos = 0;
  while (true) {
    const std::size_t next = s.find(sep, pos);
    if (next == std::string::npos) {
      parts.push_back(trim(s.substr(pos)));
      break;
    }
    parts.push_back(trim(s.substr(pos, next - pos)));
    pos = next + sep.size();
  }
  return parts;
}

bool valid_name(const std::string& s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') return false;
  }
  return true;
}

double parse_number(int line, const std::string& key, const std::string& value) {
  char* end = nullptr;
  const double v = std::strtod(value.c_str(), &end);
  if (end == value.c_str() || *end != '\0' || !std::isfinite(v)) {
    throw SpecParseError(line, "parameter '" + key + "' is not a finite number: '" + value + "'");
  }
  return v;
}

const std::map<std::string, std::vector<std::string>>& type_schemas() {
  static const std::map<std::string, std::vector<std::string>> schemas = {
      {"kerr_cavity", {"omega_a", "chi", "gamma"}},
      {"linear_cavity", {"omega", "gamma"}},
      {"optomech", {"omega_a", "omega_b", "g", "gamma_a", "gamma_b"}},
      {"amplifier", {"gain"}},
      {"beam_splitter", {"theta"}},
  };
  return schemas;
}

struct RawSection {
  bool is_network = false;
  std::string name;
  int line = 0;
  std::vector<std::tuple<int, std::string, std::string>> entries;  // line, key, value
};

ComponentDef resolve_component(const RawSection& sec) {
  ComponentDef def;
  def.name = sec.name;
  def.line = sec.line;
  std::map<std::string, std::pair<int, std::string>> raw;
  for (const auto& [line, key, value] : sec.entries) {
    if (raw.count(key)) throw SpecParseError(line, "duplicate key '" + key + "'");
    raw.emplace(key, std::make_pair(line, value));
  }
  auto type_it = raw.find("type");
  if (type_it == raw.end()) {
    throw MissingParameter(sec.line, "component '" + sec.name + "' has no 'type' key");
  }
  def.type = type_it->second.second;
  const auto& schemas = type_schemas();
  auto schema_it = schemas.find(def.type);
  if (schema_it == schemas.end()) {
    throw UnknownComponentType(type_it->second.first,
                               "unknown component type '" + def.type + "'");
  }
  raw.erase(type_it);
  for (const std::string& key : schema_it->second) {
    auto it = raw.find(key);
    if (it == raw.end()) {
      throw MissingParameter(sec.line, "component '" + sec.name + "' (type " + def.type +
                                           ") is missing parameter '" + key + "'");
    }
    def.params[key] = parse_number(it->second.first, key, it->second.second);
    raw.erase(it);
  }
  if (!raw.empty()) {
    const auto& [line, value] = raw.begin()->second;
    throw SpecParseError(line, "unknown key '" + raw.begin()->first + "' for component type '" +
                                   def.type + "'");
  }
  return def;
}

}  // namespace

const ComponentDef* SpecFile::find(const std::string& name) const {
  for (const auto& c : components) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

SpecFile parse_spec(const std::string& text) {
  std::vector<RawSection> sections;
  RawSection* current = nullptr;
  std::istringstream in(text);
  std::string raw_line;
  int lineno = 0;
  while (std::getline(in, raw_line)) {
    ++lineno;
    const std::size_t hash = raw_line.find('#');
    std::string line = trim(hash == std::string::npos ? raw_line : raw_line.substr(0, hash));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw SpecParseError(lineno, "unterminated section header");
      const std::string inner = trim(line.substr(1, line.size() - 2));
      RawSection sec;
      sec.line = lineno;
      if (inner == "network") {
        sec.is_network = true;
      } else if (inner.rfind("component", 0) == 0) {
        const std::string name = trim(inner.substr(9));
        if (!valid_name(name)) {
          throw SpecParseError(lineno, "component name must be alphanumeric/underscore");
        }
        sec.name = name;
      } else {
        throw SpecParseError(lineno, "unknown section '" + inner + "'");
      }
      sections.push_back(std::move(sec));
      current = &sections.back();
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw SpecParseError(lineno, "expected 'key = value'");
    }
    if (current == nullptr) {
      throw SpecParseError(lineno, "key/value line outside any section");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) {
      throw SpecParseError(lineno, "expected 'key = value'");
    }
    current->entries.emplace_back(lineno, key, value);
  }

  SpecFile spec;
  const RawSection* network_section = nullptr;
  for (const auto& sec : sections) {
    if (sec.is_network) {
      if (network_section != nullptr) {
        throw SpecParseError(sec.line, "multiple [network] sections");
      }
      network_section = &sec;
      continue;
    }
    if (spec.find(sec.name) != nullptr) {
      throw DuplicateName(sec.line, "component '" + sec.name + "' defined twice");
    }
    spec.components.push_back(resolve_component(sec));
  }

  if (network_section != nullptr) {
    if (network_section->entries.size() != 1) {
      throw SpecParseError(network_section->line,
                          "[network] must contain exactly one 'chain' or 'parallel' line");
    }
    const auto& [line, key, value] = network_section->entries.front();
    std::vector<std::string> names;
    if (key == "chain") {
      names = split_on(value, "->");
    } else if (key == "parallel") {
      names = split_on(value, "|");
    } else {
      throw SpecParseError(line, "unknown network key '" + key + "'");
    }
    if (names.size() < 1 || std::any_of(names.begin(), names.end(),
                                        [](const std::string& n) { return !valid_name(n); })) {
      throw SpecParseError(line, "malformed component list in network expression");
    }
    for (const auto& name : names) {
      if (spec.find(name) == nullptr) {
        throw SpecParseError(line, "network references undefined component '" + name + "'");
      }
    }
    spec.chain_order = names;
    if (key == "chain") {
      // Left = first stage: each later name becomes the downstream factor.
      NetworkExpr expr = NetworkExpr::leaf(names.front());
      for (std::size_t i = 1; i < names.size(); ++i) {
        expr = NetworkExpr::series_of(NetworkExpr::leaf(names[i]), std::move(expr));
      }
      spec.network = std::move(expr);
    } else {
      NetworkExpr expr = NetworkExpr::leaf(names.front());
      for (std::size_t i = 1; i < names.size(); ++i) {
        expr = NetworkExpr::concat_of(std::move(expr), NetworkExpr::leaf(names[i]));
      }
      spec.network = std::move(expr);
    }
  } else if (spec.components.size() == 1) {
    spec.chain_order = {spec.components.front().name};
    spec.network = NetworkExpr::leaf(spec.components.front().name);
  }
  return spec;
}

ModelSpec component_model(const ComponentDef& def) {
  if (def.type == "kerr_cavity") {
    return kerr_cavity(def.param("omega_a"), def.param("chi"), def.param("gamma"));
  }
  if (def.type == "linear_cavity") {
    return kerr_cavity(def.param("omega"), 0.0, def.param("gamma"));
  }
  if (def.type == "optomech") {
    return optomech(def.param("omega_a"), def.param("omega_b"), def.param("g"),
                    def.param("gamma_a"), def.param("gamma_b"));
  }
  throw std::invalid_argument("component type '" + def.type + "' has no internal-dynamics model");
}

ComposedSet component_susceptibilities(const ComponentDef& def, int max_order) {
  if (def.type == "amplifier") {
    return lift(susceptibility_set(amplifier(def.param("gain"))));
  }
  if (def.type == "beam_splitter") {
    return lift(susceptibility_set(beam_splitter(def.param("theta"))));
  }
  if (def.type == "linear_cavity") {
    return lift(susceptibility_set(cavity(def.param("omega"), def.param("gamma"))));
  }
  const BilinearSystem sys = build_bilinear(component_model(def));
  return lift(susceptibility_set(sys, max_order));
}

}  // namespace qvolterra
