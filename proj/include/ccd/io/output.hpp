#pragma once

// CSV tables, JSON summaries and the run manifest.

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "ccd/io/config.hpp"
#include "json.hpp"

namespace ccd::io {

using Json = nlohmann::ordered_json;

/// Column-major table; the first column is time_us unless a different
/// first header is given.
struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> data;

  void add(std::string column, std::vector<double> values);
  std::size_t rows() const { return data.empty() ? 0 : data.front().size(); }
};

/// Header row, then one row per sample; numbers via format_number.
void write_csv(std::ostream& os, const Table& t);
void write_csv_file(const std::string& path, const Table& t);
void write_json_file(const std::string& path, const Json& j);

/// JSON number, or null for values that are not finite.
Json number(double v);
Json config_echo(const Config& c);

struct RunManifest {
  std::string subcommand;
  Json config;
  std::uint64_t seed = 0;
  std::string version;
  std::string started_utc, finished_utc;
  std::vector<std::string> outputs;
  std::vector<std::string> command_line;

  Json to_json() const;
};

std::string utc_timestamp();
std::string tool_version();

}  // namespace ccd::io
