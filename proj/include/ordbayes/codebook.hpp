#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace ordbayes {

/// Questionnaire sections of the demo instrument.
enum class Section {
  gender_roles,
  sexual_violence,
  relationship_dynamics,
  toxic_behaviors,
};

std::string_view to_string(Section s);
Section section_from_string(std::string_view s);

enum class CovariateKind { binary, categorical, numeric };

std::string_view to_string(CovariateKind k);
CovariateKind covariate_kind_from_string(std::string_view s);

/// One ordinal survey item: short identifier, section, and its ordered
/// response categories (1-based in the data files).
struct ItemDef {
  std::string abbr;
  Section section = Section::gender_roles;
  int n_categories = 4;
  std::vector<std::string> category_labels;
};

struct CovariateDef {
  std::string name;
  CovariateKind kind = CovariateKind::categorical;
  std::vector<std::string> levels; // empty for numeric

  std::optional<int> level_index(std::string_view label) const;
};

/// Immutable description of a survey instrument: ordered items plus
/// respondent covariates. Validated on construction.
class Codebook {
public:
  Codebook() = default;
  Codebook(std::vector<ItemDef> items, std::vector<CovariateDef> covariates);

  static Codebook from_json(const nlohmann::json& j);
  static Codebook load(const std::filesystem::path& path);
  nlohmann::json to_json() const;

  const std::vector<ItemDef>& items() const { return items_; }
  const std::vector<CovariateDef>& covariates() const { return covariates_; }
  int n_items() const { return static_cast<int>(items_.size()); }
  int n_covariates() const { return static_cast<int>(covariates_.size()); }

  std::optional<int> find_item(std::string_view abbr) const;
  std::optional<int> find_covariate(std::string_view name) const;

  /// Lookup that throws DataError naming the unknown identifier.
  int item_index(std::string_view abbr) const;
  int covariate_index(std::string_view name) const;

  bool operator==(const Codebook& other) const;

private:
  void validate() const;

  std::vector<ItemDef> items_;
  std::vector<CovariateDef> covariates_;
};

} // namespace ordbayes
