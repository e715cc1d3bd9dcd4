#include "ordbayes/manifest.hpp"

#include <fstream>

#include "ordbayes/digest.hpp"
#include "ordbayes/errors.hpp"

namespace ordbayes {

nlohmann::json RunManifest::to_json() const {
  nlohmann::json j;
  j["subcommand"] = subcommand;
  j["resolved_args"] = resolved_args;
  j["config"] = config;
  j["inputs"] = nlohmann::json::array();
  for (const auto& input : inputs) {
    j["inputs"].push_back({{"path", input.path},
                           {"sha256", input.sha256},
                           {"bytes", input.bytes}});
  }
  j["outputs"] = outputs;
  j["duration_ms"] = duration_ms;
  return j;
}

RunManifest RunManifest::from_json(const nlohmann::json& j) {
  RunManifest m;
  m.subcommand = j.at("subcommand").get<std::string>();
  m.resolved_args = j.at("resolved_args").get<std::vector<std::string>>();
  m.config = j.at("config");
  for (const auto& ji : j.at("inputs")) {
    Input input;
    input.path = ji.at("path").get<std::string>();
    input.sha256 = ji.at("sha256").get<std::string>();
    input.bytes = ji.at("bytes").get<std::uintmax_t>();
    m.inputs.push_back(std::move(input));
  }
  m.outputs = j.at("outputs").get<std::vector<std::string>>();
  m.duration_ms = j.at("duration_ms").get<double>();
  return m;
}

RunManifest RunManifest::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("manifest: cannot open file: " + path.string());
  nlohmann::json j;
  try {
    in >> j;
    return from_json(j);
  } catch (const nlohmann::json::exception& e) {
    throw DataError("manifest: bad JSON in " + path.string() + ": " + e.what());
  }
}

void RunManifest::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("manifest: cannot write file: " + path.string());
  out << to_json().dump(2) << '\n';
}

void RunManifest::add_input(const std::filesystem::path& path) {
  Input input;
  input.path = path.string();
  input.sha256 = sha256_file(path);
  input.bytes = std::filesystem::file_size(path);
  inputs.push_back(std::move(input));
}

} // namespace ordbayes
