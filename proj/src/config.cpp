#include "mbm/config.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>

namespace mbm {
namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

[[noreturn]] void fail(const std::string& source, int line, const std::string& what) {
  throw ConfigError(source + ":" + std::to_string(line) + ": " + what);
}

bool is_key(const std::string& k) {
  if (k.empty()) return false;
  for (char c : k) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-')) return false;
  }
  return true;
}

// Removes a trailing comment, ignoring '#' inside strings.
std::string strip_comment(const std::string& line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') quoted = !quoted;
    if (line[i] == '#' && !quoted) return line.substr(0, i);
  }
  return line;
}

double parse_number(const std::string& text, const std::string& source, int line) {
  std::string t;
  for (char c : text) {
    if (c != '_') t.push_back(c);
  }
  if (t == "inf" || t == "+inf") return std::numeric_limits<double>::infinity();
  double v = 0.0;
  const char* begin = t.data() + (t.size() > 1 && t[0] == '+' ? 1 : 0);
  const auto [ptr, ec] = std::from_chars(begin, t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty()) fail(source, line, "invalid value '" + text + "'");
  return v;
}

// Splits on commas outside strings and brackets.
std::vector<std::string> split_top(const std::string& s) {
  std::vector<std::string> parts;
  std::string cur;
  int depth = 0;
  bool quoted = false;
  for (char c : s) {
    if (c == '"') quoted = !quoted;
    if (!quoted && (c == '[' || c == '{')) ++depth;
    if (!quoted && (c == ']' || c == '}')) --depth;
    if (c == ',' && depth == 0 && !quoted) {
      parts.push_back(trim(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!trim(cur).empty() || !parts.empty()) parts.push_back(trim(cur));
  return parts;
}

ConfigValue parse_scalar_or_list(const std::string& text, const std::string& source, int line) {
  ConfigValue v;
  v.line = line;
  if (text.empty()) fail(source, line, "missing value");
  if (text.front() == '"') {
    if (text.size() < 2 || text.back() != '"' || text.find('"', 1) != text.size() - 1) {
      fail(source, line, "unterminated string " + text);
    }
    v.data = text.substr(1, text.size() - 2);
  } else if (text == "true" || text == "false") {
    v.data = text == "true";
  } else if (text.front() == '[') {
    if (text.back() != ']') fail(source, line, "unterminated list " + text);
    std::vector<double> items;
    for (const auto& item : split_top(text.substr(1, text.size() - 2))) {
      if (item.empty()) fail(source, line, "empty list element");
      items.push_back(parse_number(item, source, line));
    }
    v.data = items;
  } else {
    v.data = parse_number(text, source, line);
  }
  return v;
}

const std::set<std::string> kSections = {"hurst", "payoff", "simulator", "experiment", "output"};

void insert(ConfigTable& table, const std::string& section, const std::string& key, ConfigValue value,
            const std::string& source, int line) {
  auto& entries = table[section];
  if (entries.count(key)) fail(source, line, "duplicate key '" + key + "' in [" + section + "]");
  entries.emplace(key, std::move(value));
}

}  // namespace

ConfigTable parse_config_text(const std::string& text, const std::string& source) {
  ConfigTable table;
  std::istringstream in(text);
  std::string raw;
  std::string section;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const std::string s = trim(strip_comment(raw));
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') fail(source, line, "malformed section header " + s);
      section = trim(s.substr(1, s.size() - 2));
      if (!kSections.count(section)) fail(source, line, "unknown section [" + section + "]");
      if (table.count(section)) fail(source, line, "duplicate section [" + section + "]");
      table[section];
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) fail(source, line, "expected 'key = value', got '" + s + "'");
    const std::string key = trim(s.substr(0, eq));
    const std::string value = trim(s.substr(eq + 1));
    if (!is_key(key)) fail(source, line, "invalid key '" + key + "'");
    if (!value.empty() && value.front() == '{') {
      // Inline table: only allowed at top level, where it stands for a section.
      if (!section.empty()) fail(source, line, "inline table not allowed inside [" + section + "]");
      if (value.back() != '}') fail(source, line, "unterminated inline table");
      if (!kSections.count(key)) fail(source, line, "unknown section '" + key + "'");
      if (table.count(key)) fail(source, line, "duplicate section '" + key + "'");
      table[key];
      for (const auto& item : split_top(value.substr(1, value.size() - 2))) {
        const auto ieq = item.find('=');
        if (ieq == std::string::npos) fail(source, line, "expected 'key = value' in inline table, got '" + item + "'");
        const std::string ikey = trim(item.substr(0, ieq));
        if (!is_key(ikey)) fail(source, line, "invalid key '" + ikey + "'");
        insert(table, key, ikey, parse_scalar_or_list(trim(item.substr(ieq + 1)), source, line), source, line);
      }
      continue;
    }
    if (section.empty()) fail(source, line, "key '" + key + "' outside of any section");
    insert(table, section, key, parse_scalar_or_list(value, source, line), source, line);
  }
  return table;
}

namespace {

using Section = std::map<std::string, ConfigValue>;

void check_keys(const Section& section, const std::string& name, const std::set<std::string>& allowed,
                const std::string& source) {
  for (const auto& [key, value] : section) {
    if (!allowed.count(key)) fail(source, value.line, "unknown key '" + key + "' in [" + name + "]");
  }
}

double get_number(const Section& s, const std::string& key, double fallback, const std::string& source) {
  const auto it = s.find(key);
  if (it == s.end()) return fallback;
  if (const double* v = std::get_if<double>(&it->second.data)) return *v;
  fail(source, it->second.line, "key '" + key + "' must be a number");
}

double require_number(const Section& s, const std::string& key, const std::string& section,
                      const std::string& source) {
  if (!s.count(key)) throw ConfigError(source + ": missing key '" + key + "' in [" + section + "]");
  return get_number(s, key, 0.0, source);
}

int get_int(const Section& s, const std::string& key, int fallback, const std::string& source) {
  const double v = get_number(s, key, fallback, source);
  if (v != std::floor(v) || std::abs(v) > 2e9) fail(source, s.at(key).line, "key '" + key + "' must be an integer");
  return static_cast<int>(v);
}

std::string get_string(const Section& s, const std::string& key, const std::string& fallback,
                       const std::string& source) {
  const auto it = s.find(key);
  if (it == s.end()) return fallback;
  if (const std::string* v = std::get_if<std::string>(&it->second.data)) return *v;
  fail(source, it->second.line, "key '" + key + "' must be a string");
}

}  // namespace

HurstFunction make_hurst(const Section& s, const std::string& source) {
  const std::string family = get_string(s, "family", "", source);
  const std::set<std::string> declared = {"alpha", "holder_constant", "h_min", "h_max"};
  auto with = [&](std::set<std::string> keys) {
    keys.insert("family");
    keys.insert(declared.begin(), declared.end());
    return keys;
  };
  std::optional<HurstFunction> h;
  if (family == "constant") {
    check_keys(s, "hurst", with({"h"}), source);
    h = HurstFunction::constant(require_number(s, "h", "hurst", source));
  } else if (family == "affine") {
    check_keys(s, "hurst", with({"h0", "h1"}), source);
    h = HurstFunction::affine(require_number(s, "h0", "hurst", source), require_number(s, "h1", "hurst", source));
  } else if (family == "sin") {
    check_keys(s, "hurst", with({"h0", "h1", "phase"}), source);
    h = HurstFunction::sinusoidal(require_number(s, "h0", "hurst", source), require_number(s, "h1", "hurst", source),
                                  get_number(s, "phase", 0.0, source));
  } else if (family == "logistic") {
    check_keys(s, "hurst", with({"lo", "hi", "rate", "midpoint"}), source);
    h = HurstFunction::logistic(require_number(s, "lo", "hurst", source), require_number(s, "hi", "hurst", source),
                                require_number(s, "rate", "hurst", source), get_number(s, "midpoint", 0.5, source));
  } else {
    const int line = s.count("family") ? s.at("family").line : 0;
    if (line == 0) throw ConfigError(source + ": missing key 'family' in [hurst]");
    fail(source, line, "unknown hurst family '" + family + "' (constant, affine, sin, logistic)");
  }
  // Declared data may be overridden, e.g. to model a weaker Hölder exponent.
  if (s.count("alpha") || s.count("holder_constant") || s.count("h_min") || s.count("h_max")) {
    const HurstFunction base = *h;
    h = HurstFunction(base.family(), base.parameters(), [base](double t) { return base(t); },
                      get_number(s, "alpha", base.alpha(), source),
                      get_number(s, "holder_constant", base.holder_constant(), source),
                      get_number(s, "h_min", base.h_min(), source), get_number(s, "h_max", base.h_max(), source));
  }
  return *h;
}

ConvexPayoff make_payoff(const Section& s, const std::string& source) {
  const std::string kind = get_string(s, "kind", "call", source);
  if (kind == "call") {
    check_keys(s, "payoff", {"kind", "a"}, source);
    return make_call_payoff(get_number(s, "a", 0.0, source));
  }
  if (kind == "abs") {
    check_keys(s, "payoff", {"kind", "a"}, source);
    return make_abs_payoff(get_number(s, "a", 0.0, source));
  }
  if (kind == "quadratic") {
    check_keys(s, "payoff", {"kind", "support"}, source);
    return make_quadratic_payoff(get_number(s, "support", 8.0, source));
  }
  const int line = s.count("kind") ? s.at("kind").line : 0;
  fail(source, line, "unknown payoff kind '" + kind + "' (call, abs, quadratic)");
}

AppConfig build_config(const ConfigTable& table, const std::string& source) {
  AppConfig app;
  for (const auto& [name, entries] : table) app.sections.insert(name);
  if (!table.count("hurst")) throw ConfigError(source + ": missing [hurst] section");
  ExperimentConfig& e = app.experiment;
  e.hurst = make_hurst(table.at("hurst"), source);
  if (table.count("payoff")) e.payoff = make_payoff(table.at("payoff"), source);
  if (table.count("simulator")) {
    const Section& s = table.at("simulator");
    check_keys(s, "simulator", {"kind", "oversample", "truncation"}, source);
    const std::string kind = get_string(s, "kind", std::string(to_string(e.simulator)), source);
    try {
      e.simulator = parse_simulator(kind);
    } catch (const std::invalid_argument& err) {
      fail(source, s.at("kind").line, err.what());
    }
    e.oversample = get_int(s, "oversample", e.oversample, source);
    e.truncation = get_number(s, "truncation", e.truncation, source);
  }
  if (table.count("experiment")) {
    const Section& s = table.at("experiment");
    check_keys(s, "experiment",
               {"n_grid", "replications", "seed", "delta_htilde", "slope_tol", "const_tol", "theoretical_slope"},
               source);
    if (const auto it = s.find("n_grid"); it != s.end()) {
      const auto* list = std::get_if<std::vector<double>>(&it->second.data);
      if (!list) fail(source, it->second.line, "n_grid must be a list of integers");
      e.n_grid.clear();
      for (double v : *list) {
        if (v != std::floor(v) || v < 0 || v > 1e6) fail(source, it->second.line, "n_grid entries must be integers");
        e.n_grid.push_back(static_cast<int>(v));
      }
    }
    e.replications = get_int(s, "replications", e.replications, source);
    if (const auto it = s.find("seed"); it != s.end()) {
      const double v = get_number(s, "seed", 0.0, source);
      if (v < 0 || v != std::floor(v) || v >= 9007199254740992.0) {
        fail(source, it->second.line, "seed must be a nonnegative integer below 2^53");
      }
      e.master_seed = static_cast<std::uint64_t>(v);
    }
    e.delta_htilde = get_number(s, "delta_htilde", e.delta_htilde, source);
    e.slope_tol = get_number(s, "slope_tol", e.slope_tol, source);
    e.const_tol = get_number(s, "const_tol", e.const_tol, source);
    if (s.count("theoretical_slope")) e.theoretical_slope_override = get_number(s, "theoretical_slope", 0.0, source);
  }
  if (table.count("output")) {
    const Section& s = table.at("output");
    check_keys(s, "output", {"dir"}, source);
    app.output_dir = get_string(s, "dir", ".", source);
  }
  try {
    validate_config(e);
  } catch (const std::invalid_argument& err) {
    throw ConfigError(source + ": " + err.what());
  }
  return app;
}

AppConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string() + ": cannot open file");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return build_config(parse_config_text(buffer.str(), path.string()), path.string());
}

}  // namespace mbm
