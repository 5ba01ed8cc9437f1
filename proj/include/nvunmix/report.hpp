#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "nvunmix/errors.hpp"

namespace nvunmix {

/// Provenance record written next to every CLI output.
struct RunReport {
  struct Input {
    std::string path;
    std::string hash;
  };

  std::string command;
  std::vector<Input> inputs;
  nlohmann::json parameters = nlohmann::json::object();
  std::vector<std::string> outputs;
  nlohmann::json diagnostics = nlohmann::json::object();
  std::vector<std::string> warnings;
  std::string timestamp;

  /// Records path with its content hash.
  void add_input(const std::filesystem::path& path);
  void add_output(const std::filesystem::path& path);
  void add_warnings(const Warnings& w);

  nlohmann::json to_json() const;
  static RunReport from_json(const nlohmann::json& j);
};

/// UTC time as ISO 8601, e.g. 2024-01-31T12:00:00Z.
std::string utc_timestamp();

/// Writes the report, merging `extra` into the top level. Fails with
/// IoError if a listed output does not exist.
void write_report(const RunReport& report, const std::filesystem::path& path,
                  const nlohmann::json& extra = nlohmann::json::object());

/// Human-readable summary; numbers rounded to 6 significant digits.
std::string pretty_print(const nlohmann::json& report);

}  // namespace nvunmix
