#pragma once

#include <string>
#include <vector>

#include "qsfrac/config.hpp"

namespace qsfrac {

/// A small named instance used by tests, the acceptance suite and the CLI.
struct CorpusInstance {
  std::string name;
  std::string summary;
  std::string config_text;

  RunConfig config() const { return RunConfig::parse(config_text); }
};

/// Every instance has at most 12 crackable edges and runs at 64 knots by default.
const std::vector<CorpusInstance>& corpus();
/// Throws ConfigError for an unknown name.
const CorpusInstance& corpus_instance(const std::string& name);

}  // namespace qsfrac
