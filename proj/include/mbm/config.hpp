#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "mbm/experiments.hpp"

namespace mbm {

/// Malformed or unknown configuration content; the message starts with "file:line:".
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A value in the configuration format: string, number, boolean or number list.
struct ConfigValue {
  std::variant<std::string, double, bool, std::vector<double>> data;
  int line = 0;
};

/// section -> key -> value, as read from the file.
using ConfigTable = std::map<std::string, std::map<std::string, ConfigValue>>;

/// Parses the sectioned key-value format documented in docs/config_schema.md.
/// `source` is used in error messages only.
ConfigTable parse_config_text(const std::string& text, const std::string& source = "<string>");

struct AppConfig {
  ExperimentConfig experiment;
  std::filesystem::path output_dir = ".";
  std::set<std::string> sections;

  bool has_section(const std::string& name) const { return sections.count(name) > 0; }
};

/// Builds an AppConfig; the hurst section is mandatory, other sections fall
/// back to their defaults. ConfigError on unknown keys, wrong types or a
/// missing hurst section; std::domain_error on out-of-range family parameters.
AppConfig build_config(const ConfigTable& table, const std::string& source = "<string>");

AppConfig load_config(const std::filesystem::path& path);

HurstFunction make_hurst(const std::map<std::string, ConfigValue>& section, const std::string& source);
ConvexPayoff make_payoff(const std::map<std::string, ConfigValue>& section, const std::string& source);

}  // namespace mbm
