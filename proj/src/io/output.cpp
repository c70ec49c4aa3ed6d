#include "ccd/io/output.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <stdexcept>

#ifndef CCD_VERSION
#define CCD_VERSION "0.0.0"
#endif

namespace ccd::io {

void Table::add(std::string column, std::vector<double> values) {
  if (!data.empty() && values.size() != data.front().size())
    throw std::invalid_argument("table '" + name + "': column '" + column + "' has the wrong length");
  columns.push_back(std::move(column));
  data.push_back(std::move(values));
}

void write_csv(std::ostream& os, const Table& t) {
  if (t.columns.size() != t.data.size()) throw std::invalid_argument("table '" + t.name + "': header/column mismatch");
  for (std::size_t c = 0; c < t.columns.size(); ++c) os << (c ? "," : "") << t.columns[c];
  os << '\n';
  for (std::size_t r = 0; r < t.rows(); ++r) {
    for (std::size_t c = 0; c < t.data.size(); ++c) os << (c ? "," : "") << format_number(t.data[c][r]);
    os << '\n';
  }
}

void write_csv_file(const std::string& path, const Table& t) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write '" + path + "'");
  write_csv(f, t);
  if (!f) throw std::runtime_error("write failed for '" + path + "'");
}

void write_json_file(const std::string& path, const Json& j) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write '" + path + "'");
  f << j.dump(2) << '\n';
  if (!f) throw std::runtime_error("write failed for '" + path + "'");
}

Json number(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

Json config_echo(const Config& c) {
  Json j = Json::object();
  for (const auto& [key, value] : c.resolved()) {
    if (!value) {
      j[key] = nullptr;
      continue;
    }
    switch (c.spec(key).type) {
      case ValueType::real:
        j[key] = parse_real(*value);
        break;
      case ValueType::integer:
        j[key] = parse_integer(*value);
        break;
      case ValueType::unsigned64:
        j[key] = parse_unsigned(*value);
        break;
      case ValueType::boolean:
        j[key] = parse_bool(*value);
        break;
      case ValueType::choice:
        j[key] = *value;
        break;
    }
  }
  return j;
}

Json RunManifest::to_json() const {
  Json j;
  j["subcommand"] = subcommand;
  j["tool_version"] = version;
  j["master_seed"] = seed;
  j["started_utc"] = started_utc;
  j["finished_utc"] = finished_utc;
  j["command_line"] = command_line;
  j["config"] = config;
  j["outputs"] = outputs;
  return j;
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string tool_version() { return CCD_VERSION; }

}  // namespace ccd::io
