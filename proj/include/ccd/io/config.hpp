#pragma once

// Flat key=value run configuration.
//
//   # comment
//   omega1_mhz = 40
//   variant = refined
//
// Every subcommand owns a fixed key set with typed defaults. Unknown keys and
// malformed values raise ConfigError; a key without a default that a run
// needs raises MissingField. Values are stored as canonical text so the
// resolved map can be echoed verbatim.

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace ccd::io {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class MissingField : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ValueType { real, integer, unsigned64, boolean, choice };

struct KeySpec {
  std::string key;
  ValueType type = ValueType::real;
  std::optional<std::string> fallback;  ///< nullopt: required when used
  std::vector<std::string> choices;     ///< for ValueType::choice
  std::string help;
};

/// Locale-independent shortest round-trip text of a double.
std::string format_number(double v);
double parse_real(const std::string& text);
std::int64_t parse_integer(const std::string& text);
std::uint64_t parse_unsigned(const std::string& text);
bool parse_bool(const std::string& text);

class Config {
 public:
  Config() = default;
  Config(std::string name, std::vector<KeySpec> schema);

  const std::string& name() const { return name_; }
  const std::vector<KeySpec>& schema() const { return schema_; }
  bool known(const std::string& key) const;
  const KeySpec& spec(const std::string& key) const;

  /// Validates and stores; throws ConfigError for unknown keys or bad values.
  void set(const std::string& key, const std::string& value);
  void set(const std::string& key, double value) { set(key, format_number(value)); }
  void unset(const std::string& key);
  /// Changes the default of a key (used by presets that derive values).
  void set_default(const std::string& key, const std::string& value);

  void parse(const std::string& text, const std::string& origin = "config");
  void load_file(const std::string& path);

  bool has(const std::string& key) const;
  /// true when the key was given explicitly (file or flag).
  bool explicit_value(const std::string& key) const { return values_.count(key) > 0; }
  std::string text(const std::string& key) const;
  double real(const std::string& key) const;
  std::int64_t integer(const std::string& key) const;
  std::uint64_t unsigned64(const std::string& key) const;
  bool boolean(const std::string& key) const;

  /// Resolved view in schema order; nullopt for unset required keys.
  std::vector<std::pair<std::string, std::optional<std::string>>> resolved() const;

 private:
  std::string name_;
  std::vector<KeySpec> schema_;
  std::map<std::string, std::string> values_;
};

}  // namespace ccd::io
