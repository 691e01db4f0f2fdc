#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "qsfrac/audit.hpp"
#include "qsfrac/energy.hpp"
#include "qsfrac/evolution.hpp"
#include "qsfrac/mesh.hpp"

namespace qsfrac {

/// Run configuration: flat `dotted.key = value` text with `#` comments and a
/// mandatory `version = 1`. Every key has a default except `version`.
class RunConfig {
 public:
  RunConfig();  // all defaults, version 1

  static RunConfig parse(const std::string& text);
  static RunConfig load(const std::string& path);

  /// Replaces one key; the value is validated and normalized immediately.
  void set(const std::string& key, const std::string& value);
  const std::string& get(const std::string& key) const;
  bool has(const std::string& key) const;

  /// Canonical text: every key, sorted, values normalized.
  std::string effective_text() const;
  /// FNV-1a of the canonical text without output.* keys.
  std::uint64_t hash() const;

  Mesh build_mesh() const;
  EnergyModel build_model(const Mesh& mesh) const;
  TimeGrid build_grid() const;
  SearchStrategy strategy() const;
  EvolutionOptions evolution_options() const;
  AuditTolerances tolerances() const;
  CrackSet initial_crack(const Mesh& mesh) const;

  /// Sets time.knots from a step size that must divide time.T.
  void set_step(double dt);

  double number(const std::string& key) const;
  int integer(const std::string& key) const;
  bool boolean(const std::string& key) const;

  static const std::vector<std::string>& known_keys();

 private:
  std::map<std::string, std::string> values_;
};

/// Parses "t:v, t:v, ..." (empty: zero table).
LoadTable parse_load_table(const std::string& key, const std::string& text);
std::string format_double(double v);

}  // namespace qsfrac
