#include "ccd/io/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace ccd::io {
namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return {};
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

template <class T>
bool parse_whole(const std::string& text, T& out) {
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (first != last && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last && first != last;
}

}  // namespace

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) throw std::runtime_error("format_number: conversion failed");
  return std::string(buf, ptr);
}

double parse_real(const std::string& text) {
  double v = 0.0;
  if (!parse_whole(trim(text), v) || !std::isfinite(v)) throw ConfigError("not a finite number: '" + text + "'");
  return v;
}

std::int64_t parse_integer(const std::string& text) {
  std::int64_t v = 0;
  if (!parse_whole(trim(text), v)) throw ConfigError("not an integer: '" + text + "'");
  return v;
}

std::uint64_t parse_unsigned(const std::string& text) {
  std::uint64_t v = 0;
  const std::string t = trim(text);
  if (t.empty() || t[0] == '-' || !parse_whole(t, v)) throw ConfigError("not an unsigned 64-bit integer: '" + text + "'");
  return v;
}

bool parse_bool(const std::string& text) {
  std::string t = trim(text);
  std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return std::tolower(c); });
  if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
  if (t == "false" || t == "0" || t == "no" || t == "off") return false;
  throw ConfigError("not a boolean: '" + text + "'");
}

Config::Config(std::string name, std::vector<KeySpec> schema) : name_(std::move(name)), schema_(std::move(schema)) {}

bool Config::known(const std::string& key) const {
  return std::any_of(schema_.begin(), schema_.end(), [&](const KeySpec& s) { return s.key == key; });
}

const KeySpec& Config::spec(const std::string& key) const {
  for (const auto& s : schema_)
    if (s.key == key) return s;
  throw ConfigError("unknown key '" + key + "' for " + name_);
}

namespace {

std::string canonical(const KeySpec& s, const std::string& raw) {
  const std::string v = trim(raw);
  switch (s.type) {
    case ValueType::real:
      return format_number(parse_real(v));
    case ValueType::integer:
      return std::to_string(parse_integer(v));
    case ValueType::unsigned64:
      return std::to_string(parse_unsigned(v));
    case ValueType::boolean:
      return parse_bool(v) ? "true" : "false";
    case ValueType::choice:
      if (std::find(s.choices.begin(), s.choices.end(), v) == s.choices.end()) {
        std::string all;
        for (const auto& c : s.choices) all += (all.empty() ? "" : ", ") + c;
        throw ConfigError("bad value '" + v + "' for " + s.key + " (expected one of: " + all + ")");
      }
      return v;
  }
  return v;
}

}  // namespace

void Config::set(const std::string& key, const std::string& value) {
  const KeySpec& s = spec(key);
  try {
    values_[key] = canonical(s, value);
  } catch (const ConfigError& e) {
    throw ConfigError(key + ": " + e.what());
  }
}

void Config::unset(const std::string& key) {
  spec(key);
  values_.erase(key);
}

void Config::set_default(const std::string& key, const std::string& value) {
  for (auto& s : schema_)
    if (s.key == key) {
      s.fallback = canonical(s, value);
      return;
    }
  throw ConfigError("unknown key '" + key + "' for " + name_);
}

void Config::parse(const std::string& text, const std::string& origin) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key");
    try {
      set(key, value);
    } catch (const ConfigError& e) {
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
}

void Config::load_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot read config file '" + path + "'");
  std::ostringstream os;
  os << f.rdbuf();
  parse(os.str(), path);
}

bool Config::has(const std::string& key) const {
  return values_.count(key) > 0 || spec(key).fallback.has_value();
}

std::string Config::text(const std::string& key) const {
  const auto it = values_.find(key);
  if (it != values_.end()) return it->second;
  const KeySpec& s = spec(key);
  if (!s.fallback) throw MissingField("required field '" + key + "' is not set (" + name_ + ")");
  return *s.fallback;
}

double Config::real(const std::string& key) const { return parse_real(text(key)); }
std::int64_t Config::integer(const std::string& key) const { return parse_integer(text(key)); }
std::uint64_t Config::unsigned64(const std::string& key) const { return parse_unsigned(text(key)); }
bool Config::boolean(const std::string& key) const { return parse_bool(text(key)); }

std::vector<std::pair<std::string, std::optional<std::string>>> Config::resolved() const {
  std::vector<std::pair<std::string, std::optional<std::string>>> out;
  for (const auto& s : schema_) {
    const auto it = values_.find(s.key);
    if (it != values_.end())
      out.emplace_back(s.key, it->second);
    else
      out.emplace_back(s.key, s.fallback);
  }
  return out;
}

}  // namespace ccd::io
