#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace ordbayes {

/// Provenance record written into every run directory (manifest.json).
/// The resolved argument list omits the program name and output location,
/// so a run can be replayed against a fresh directory.
struct RunManifest {
  std::string subcommand;
  std::vector<std::string> resolved_args; // without --out
  nlohmann::json config;

  struct Input {
    std::string path;
    std::string sha256;
    std::uintmax_t bytes = 0;
  };
  std::vector<Input> inputs;
  std::vector<std::string> outputs; // file names relative to the run directory
  double duration_ms = 0.0;

  nlohmann::json to_json() const;
  static RunManifest from_json(const nlohmann::json& j);
  static RunManifest load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;

  void add_input(const std::filesystem::path& path);
};

} // namespace ordbayes
