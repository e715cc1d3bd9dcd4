#pragma once

#include <atomic>
#include <filesystem>
#include <fstream>
#include <string>

#include "ordbayes/codebook.hpp"
#include "ordbayes/survey_data.hpp"

namespace testutil {

/// Scratch directory removed on destruction.
struct TempDir {
  std::filesystem::path path;

  TempDir() {
    static std::atomic<int> counter{0};
    path = std::filesystem::temp_directory_path() /
           ("ordbayes_test_" + std::to_string(counter.fetch_add(1)) + "_" +
            std::to_string(
                std::hash<std::string>{}(ORDBAYES_DATA_DIR) & 0xFFFF));
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::filesystem::path file(const std::string& name) const {
    return path / name;
  }
};

inline void write_file(const std::filesystem::path& path,
                       const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
}

inline ordbayes::ItemDef item4(const std::string& abbr) {
  ordbayes::ItemDef def;
  def.abbr = abbr;
  def.section = ordbayes::Section::gender_roles;
  def.n_categories = 4;
  def.category_labels = {"fully disagree", "disagree", "agree", "fully agree"};
  return def;
}

/// Two 4-category items (MRC, CHI) plus a binary covariate G.
inline ordbayes::Codebook small_codebook() {
  std::vector<ordbayes::ItemDef> items = {item4("MRC"), item4("CHI")};
  std::vector<ordbayes::CovariateDef> covariates = {
      {"G", ordbayes::CovariateKind::binary, {"female", "male"}}};
  return ordbayes::Codebook(std::move(items), std::move(covariates));
}

inline std::filesystem::path data_dir() { return ORDBAYES_DATA_DIR; }

} // namespace testutil
