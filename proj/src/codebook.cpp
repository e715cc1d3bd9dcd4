#include "ordbayes/codebook.hpp"

#include <fstream>
#include <unordered_set>

#include "ordbayes/errors.hpp"

namespace ordbayes {

std::string_view to_string(Section s) {
  switch (s) {
    case Section::gender_roles: return "gender_roles";
    case Section::sexual_violence: return "sexual_violence";
    case Section::relationship_dynamics: return "relationship_dynamics";
    case Section::toxic_behaviors: return "toxic_behaviors";
  }
  return "gender_roles";
}

Section section_from_string(std::string_view s) {
  if (s == "gender_roles") return Section::gender_roles;
  if (s == "sexual_violence") return Section::sexual_violence;
  if (s == "relationship_dynamics") return Section::relationship_dynamics;
  if (s == "toxic_behaviors") return Section::toxic_behaviors;
  throw DataError("codebook: unknown section: " + std::string(s));
}

std::string_view to_string(CovariateKind k) {
  switch (k) {
    case CovariateKind::binary: return "binary";
    case CovariateKind::categorical: return "categorical";
    case CovariateKind::numeric: return "numeric";
  }
  return "categorical";
}

CovariateKind covariate_kind_from_string(std::string_view s) {
  if (s == "binary") return CovariateKind::binary;
  if (s == "categorical") return CovariateKind::categorical;
  if (s == "numeric") return CovariateKind::numeric;
  throw DataError("codebook: unknown covariate kind: " + std::string(s));
}

std::optional<int> CovariateDef::level_index(std::string_view label) const {
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (levels[i] == label) return static_cast<int>(i);
  }
  return std::nullopt;
}

Codebook::Codebook(std::vector<ItemDef> items,
                   std::vector<CovariateDef> covariates)
    : items_(std::move(items)), covariates_(std::move(covariates)) {
  validate();
}

void Codebook::validate() const {
  std::unordered_set<std::string> names;
  for (const auto& item : items_) {
    if (item.abbr.empty()) throw DataError("codebook: empty item abbreviation");
    if (!names.insert(item.abbr).second)
      throw DataError("codebook: duplicate identifier: " + item.abbr);
    if (item.n_categories < 2)
      throw DataError("codebook: item " + item.abbr +
                      " needs at least 2 categories");
    if (static_cast<int>(item.category_labels.size()) != item.n_categories)
      throw DataError("codebook: item " + item.abbr +
                      " has a category label count that does not match "
                      "n_categories");
  }
  for (const auto& cov : covariates_) {
    if (cov.name.empty()) throw DataError("codebook: empty covariate name");
    if (!names.insert(cov.name).second)
      throw DataError("codebook: duplicate identifier: " + cov.name);
    switch (cov.kind) {
      case CovariateKind::binary:
        if (cov.levels.size() != 2)
          throw DataError("codebook: binary covariate " + cov.name +
                          " must declare exactly 2 levels");
        break;
      case CovariateKind::categorical:
        if (cov.levels.size() < 2)
          throw DataError("codebook: categorical covariate " + cov.name +
                          " must declare at least 2 levels");
        break;
      case CovariateKind::numeric:
        if (!cov.levels.empty())
          throw DataError("codebook: numeric covariate " + cov.name +
                          " must not declare levels");
        break;
    }
  }
}

Codebook Codebook::from_json(const nlohmann::json& j) {
  std::vector<ItemDef> items;
  for (const auto& ji : j.at("items")) {
    ItemDef item;
    item.abbr = ji.at("abbr").get<std::string>();
    item.section = section_from_string(ji.at("section").get<std::string>());
    item.n_categories = ji.at("n_categories").get<int>();
    item.category_labels =
        ji.at("category_labels").get<std::vector<std::string>>();
    items.push_back(std::move(item));
  }
  std::vector<CovariateDef> covariates;
  for (const auto& jc : j.at("covariates")) {
    CovariateDef cov;
    cov.name = jc.at("name").get<std::string>();
    cov.kind = covariate_kind_from_string(jc.at("kind").get<std::string>());
    if (jc.contains("levels"))
      cov.levels = jc.at("levels").get<std::vector<std::string>>();
    covariates.push_back(std::move(cov));
  }
  return Codebook(std::move(items), std::move(covariates));
}

Codebook Codebook::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("codebook: cannot open file: " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("codebook: invalid JSON in " + path.string() + ": " +
                    e.what());
  }
  try {
    return from_json(j);
  } catch (const nlohmann::json::exception& e) {
    throw DataError("codebook: bad schema in " + path.string() + ": " +
                    e.what());
  }
}

nlohmann::json Codebook::to_json() const {
  nlohmann::json j;
  j["items"] = nlohmann::json::array();
  for (const auto& item : items_) {
    j["items"].push_back({{"abbr", item.abbr},
                          {"section", std::string(to_string(item.section))},
                          {"n_categories", item.n_categories},
                          {"category_labels", item.category_labels}});
  }
  j["covariates"] = nlohmann::json::array();
  for (const auto& cov : covariates_) {
    nlohmann::json jc = {{"name", cov.name},
                         {"kind", std::string(to_string(cov.kind))}};
    if (cov.kind != CovariateKind::numeric) jc["levels"] = cov.levels;
    j["covariates"].push_back(std::move(jc));
  }
  return j;
}

std::optional<int> Codebook::find_item(std::string_view abbr) const {
  for (std::size_t i = 0; i < items_.size(); ++i) {
    if (items_[i].abbr == abbr) return static_cast<int>(i);
  }
  return std::nullopt;
}

std::optional<int> Codebook::find_covariate(std::string_view name) const {
  for (std::size_t i = 0; i < covariates_.size(); ++i) {
    if (covariates_[i].name == name) return static_cast<int>(i);
  }
  return std::nullopt;
}

int Codebook::item_index(std::string_view abbr) const {
  if (auto idx = find_item(abbr)) return *idx;
  throw DataError("unknown item: " + std::string(abbr));
}

int Codebook::covariate_index(std::string_view name) const {
  if (auto idx = find_covariate(name)) return *idx;
  throw DataError("unknown covariate: " + std::string(name));
}

bool Codebook::operator==(const Codebook& other) const {
  if (items_.size() != other.items_.size() ||
      covariates_.size() != other.covariates_.size())
    return false;
  for (std::size_t i = 0; i < items_.size(); ++i) {
    const auto& a = items_[i];
    const auto& b = other.items_[i];
    if (a.abbr != b.abbr || a.section != b.section ||
        a.n_categories != b.n_categories ||
        a.category_labels != b.category_labels)
      return false;
  }
  for (std::size_t i = 0; i < covariates_.size(); ++i) {
    const auto& a = covariates_[i];
    const auto& b = other.covariates_[i];
    if (a.name != b.name || a.kind != b.kind || a.levels != b.levels)
      return false;
  }
  return true;
}

} // namespace ordbayes
