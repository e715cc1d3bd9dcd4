#include "ordbayes/survey_data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <unordered_map>

#include "ordbayes/csv.hpp"
#include "ordbayes/errors.hpp"
#include "ordbayes/format.hpp"

namespace ordbayes {

namespace {

std::optional<int> parse_int(std::string_view s) {
  int value = 0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last) return std::nullopt;
  return value;
}

std::optional<double> parse_double(std::string_view s) {
  double value = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last) return std::nullopt;
  return value;
}

} // namespace

SurveyDataset::SurveyDataset(Codebook codebook, Eigen::MatrixXi responses,
                             Eigen::MatrixXd covariates)
    : codebook_(std::move(codebook)),
      responses_(std::move(responses)),
      covariates_(std::move(covariates)) {
  if (responses_.cols() != codebook_.n_items())
    throw DataError("dataset: response column count does not match codebook");
  if (covariates_.cols() != codebook_.n_covariates())
    throw DataError("dataset: covariate column count does not match codebook");
  if (responses_.rows() != covariates_.rows())
    throw DataError("dataset: response and covariate row counts differ");
  for (int j = 0; j < responses_.cols(); ++j) {
    const int h = codebook_.items()[j].n_categories;
    for (int i = 0; i < responses_.rows(); ++i) {
      const int r = responses_(i, j);
      if (r != kMissingResponse && (r < 1 || r > h))
        throw DataError("dataset: response out of range at row " +
                        fmt_int(i + 1) + ", item " +
                        codebook_.items()[j].abbr + ": " + fmt_int(r));
    }
  }
}

std::string SurveyDataset::covariate_label(int row, int cov) const {
  if (covariate_missing(row, cov)) return {};
  const auto& def = codebook_.covariates()[cov];
  const double v = covariates_(row, cov);
  if (def.kind == CovariateKind::numeric) return fmt_g17(v);
  const auto idx = static_cast<std::size_t>(v);
  return def.levels[idx];
}

bool SurveyDataset::operator==(const SurveyDataset& other) const {
  if (!(codebook_ == other.codebook_)) return false;
  if (responses_.rows() != other.responses_.rows() ||
      responses_.cols() != other.responses_.cols())
    return false;
  if (responses_ != other.responses_) return false;
  for (int i = 0; i < covariates_.rows(); ++i) {
    for (int k = 0; k < covariates_.cols(); ++k) {
      const double a = covariates_(i, k);
      const double b = other.covariates_(i, k);
      if (std::isnan(a) != std::isnan(b)) return false;
      if (!std::isnan(a) && a != b) return false;
    }
  }
  return true;
}

nlohmann::json CleaningReport::to_json() const {
  return {{"rows_in", rows_in},
          {"rows_out", rows_out},
          {"dropped_all_missing", dropped_all_missing},
          {"dropped_any_missing", dropped_any_missing},
          {"dropped_straightline", dropped_straightline},
          {"empty_output", empty_output}};
}

SurveyDataset load_csv(const std::filesystem::path& path,
                       const Codebook& codebook) {
  if (!std::filesystem::exists(path))
    throw DataError("missing file: " + path.string());
  const csv::Table table = csv::read_file(path);

  // Map header columns onto codebook identifiers, order-insensitive.
  std::unordered_map<std::string, int> header_pos;
  for (std::size_t c = 0; c < table.header.size(); ++c) {
    if (!header_pos.emplace(table.header[c], static_cast<int>(c)).second)
      throw DataError("header mismatch: duplicate column '" +
                      table.header[c] + "' in " + path.string());
  }

  std::vector<std::string> absent;
  std::vector<int> item_cols(codebook.n_items());
  std::vector<int> cov_cols(codebook.n_covariates());
  for (int j = 0; j < codebook.n_items(); ++j) {
    auto it = header_pos.find(codebook.items()[j].abbr);
    if (it == header_pos.end()) {
      absent.push_back(codebook.items()[j].abbr);
    } else {
      item_cols[j] = it->second;
    }
  }
  for (int k = 0; k < codebook.n_covariates(); ++k) {
    auto it = header_pos.find(codebook.covariates()[k].name);
    if (it == header_pos.end()) {
      absent.push_back(codebook.covariates()[k].name);
    } else {
      cov_cols[k] = it->second;
    }
  }
  std::vector<std::string> extra;
  for (const auto& name : table.header) {
    if (!codebook.find_item(name) && !codebook.find_covariate(name))
      extra.push_back(name);
  }
  if (!absent.empty() || !extra.empty()) {
    std::string msg = "header mismatch in " + path.string() + ":";
    if (!absent.empty()) {
      msg += " absent columns:";
      for (const auto& a : absent) msg += " " + a;
      msg += ";";
    }
    if (!extra.empty()) {
      msg += " extra columns:";
      for (const auto& e : extra) msg += " " + e;
    }
    throw DataError(msg);
  }

  const int n = static_cast<int>(table.rows.size());
  Eigen::MatrixXi responses(n, codebook.n_items());
  Eigen::MatrixXd covariates(n, codebook.n_covariates());
  const double nan = std::numeric_limits<double>::quiet_NaN();

  for (int i = 0; i < n; ++i) {
    const auto& row = table.rows[i];
    if (row.size() != table.header.size())
      throw DataError("csv: row " + fmt_int(i + 1) + " has " +
                      fmt_int(static_cast<std::int64_t>(row.size())) +
                      " fields, expected " +
                      fmt_int(static_cast<std::int64_t>(table.header.size())));
    for (int j = 0; j < codebook.n_items(); ++j) {
      const std::string& cell = row[item_cols[j]];
      if (cell.empty()) {
        responses(i, j) = kMissingResponse;
        continue;
      }
      const auto value = parse_int(cell);
      if (!value) {
        responses(i, j) = kMissingResponse;
        continue;
      }
      const int h = codebook.items()[j].n_categories;
      if (*value < 1 || *value > h)
        throw DataError("value out of range at row " + fmt_int(i + 1) +
                        ", column " + codebook.items()[j].abbr + ": " + cell);
      responses(i, j) = *value;
    }
    for (int k = 0; k < codebook.n_covariates(); ++k) {
      const std::string& cell = row[cov_cols[k]];
      const auto& def = codebook.covariates()[k];
      if (cell.empty()) {
        covariates(i, k) = nan;
        continue;
      }
      if (def.kind == CovariateKind::numeric) {
        const auto value = parse_double(cell);
        if (!value)
          throw DataError("value out of range at row " + fmt_int(i + 1) +
                          ", column " + def.name + ": " + cell);
        covariates(i, k) = *value;
      } else {
        const auto idx = def.level_index(cell);
        if (!idx)
          throw DataError("value out of range at row " + fmt_int(i + 1) +
                          ", column " + def.name + ": " + cell);
        covariates(i, k) = static_cast<double>(*idx);
      }
    }
  }
  return SurveyDataset(codebook, std::move(responses), std::move(covariates));
}

void write_csv(const SurveyDataset& ds, const std::filesystem::path& path) {
  csv::Writer out(path);
  std::vector<std::string> fields;
  for (const auto& item : ds.codebook().items()) fields.push_back(item.abbr);
  for (const auto& cov : ds.codebook().covariates()) fields.push_back(cov.name);
  out.row(fields);

  for (int i = 0; i < ds.n(); ++i) {
    fields.clear();
    for (int j = 0; j < ds.n_items(); ++j) {
      fields.push_back(ds.response_missing(i, j)
                           ? std::string{}
                           : fmt_int(ds.responses()(i, j)));
    }
    for (int k = 0; k < ds.n_covariates(); ++k) {
      fields.push_back(ds.covariate_label(i, k));
    }
    out.row(fields);
  }
}

namespace {

bool is_straightline(const Eigen::MatrixXi& responses, int row, int n_items,
                     double threshold, std::vector<int>& counts) {
  std::fill(counts.begin(), counts.end(), 0);
  int non_missing = 0;
  int max_count = 0;
  for (int j = 0; j < n_items; ++j) {
    const int r = responses(row, j);
    if (r == kMissingResponse) continue;
    ++non_missing;
    const int c = ++counts[static_cast<std::size_t>(r)];
    max_count = std::max(max_count, c);
  }
  if (non_missing < 2) return false;
  return static_cast<double>(max_count) >=
         threshold * static_cast<double>(non_missing);
}

SurveyDataset take_rows(const SurveyDataset& ds, const std::vector<int>& rows,
                        Codebook codebook, const std::vector<int>& item_cols) {
  Eigen::MatrixXi responses(static_cast<int>(rows.size()),
                            static_cast<int>(item_cols.size()));
  Eigen::MatrixXd covariates(static_cast<int>(rows.size()),
                             ds.n_covariates());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < item_cols.size(); ++j)
      responses(static_cast<int>(i), static_cast<int>(j)) =
          ds.responses()(rows[i], item_cols[j]);
    covariates.row(static_cast<int>(i)) = ds.covariates().row(rows[i]);
  }
  return SurveyDataset(std::move(codebook), std::move(responses),
                       std::move(covariates));
}

} // namespace

std::pair<SurveyDataset, CleaningReport> clean(const SurveyDataset& ds,
                                               const CleaningPolicy& policy) {
  if (policy.straightline_threshold &&
      (*policy.straightline_threshold <= 0.0 ||
       *policy.straightline_threshold > 1.0))
    throw ConfigError("cleaning: straight-lining threshold must be in (0, 1]");

  CleaningReport report;
  report.rows_in = ds.n();

  int max_categories = 0;
  for (const auto& item : ds.codebook().items())
    max_categories = std::max(max_categories, item.n_categories);
  std::vector<int> counts(static_cast<std::size_t>(max_categories) + 1, 0);

  std::vector<int> keep;
  keep.reserve(ds.n());
  const int m = ds.n_items();
  for (int i = 0; i < ds.n(); ++i) {
    int missing = 0;
    for (int j = 0; j < m; ++j) {
      if (ds.response_missing(i, j)) ++missing;
    }
    if (policy.drop_all_missing && m > 0 && missing == m) {
      ++report.dropped_all_missing;
      continue;
    }
    if (policy.drop_any_missing && missing > 0) {
      ++report.dropped_any_missing;
      continue;
    }
    if (policy.straightline_threshold &&
        is_straightline(ds.responses(), i, m, *policy.straightline_threshold,
                        counts)) {
      ++report.dropped_straightline;
      continue;
    }
    keep.push_back(i);
  }

  report.rows_out = static_cast<std::int64_t>(keep.size());
  report.empty_output = keep.empty();

  std::vector<int> all_items(ds.n_items());
  for (int j = 0; j < ds.n_items(); ++j) all_items[j] = j;
  return {take_rows(ds, keep, ds.codebook(), all_items), report};
}

SurveyDataset subset(const SurveyDataset& ds,
                     const std::vector<std::string>& items,
                     const std::vector<CovariateCondition>& filter) {
  std::vector<int> item_cols;
  if (items.empty()) {
    item_cols.resize(ds.n_items());
    for (int j = 0; j < ds.n_items(); ++j) item_cols[j] = j;
  } else {
    for (const auto& abbr : items) {
      const int j = ds.codebook().item_index(abbr);
      if (std::find(item_cols.begin(), item_cols.end(), j) != item_cols.end())
        throw DataError("duplicate item in selection: " + abbr);
      item_cols.push_back(j);
    }
  }

  // Resolve filter conditions up front so bad names fail fast.
  struct Condition {
    int cov;
    double value;
  };
  std::vector<Condition> conditions;
  for (const auto& cond : filter) {
    const int k = ds.codebook().covariate_index(cond.name);
    const auto& def = ds.codebook().covariates()[k];
    if (def.kind == CovariateKind::numeric) {
      double v = 0.0;
      const char* first = cond.level.data();
      const char* last = cond.level.data() + cond.level.size();
      auto [ptr, ec] = std::from_chars(first, last, v);
      if (ec != std::errc{} || ptr != last)
        throw DataError("filter: bad numeric value for " + cond.name + ": " +
                        cond.level);
      conditions.push_back({k, v});
    } else {
      const auto idx = def.level_index(cond.level);
      if (!idx)
        throw DataError("filter: unknown level for " + cond.name + ": " +
                        cond.level);
      conditions.push_back({k, static_cast<double>(*idx)});
    }
  }

  std::vector<int> keep;
  for (int i = 0; i < ds.n(); ++i) {
    bool ok = true;
    for (const auto& c : conditions) {
      const double v = ds.covariates()(i, c.cov);
      if (std::isnan(v) || v != c.value) {
        ok = false;
        break;
      }
    }
    if (ok) keep.push_back(i);
  }

  std::vector<ItemDef> kept_items;
  for (int j : item_cols) kept_items.push_back(ds.codebook().items()[j]);
  Codebook pruned(std::move(kept_items), ds.codebook().covariates());
  return take_rows(ds, keep, std::move(pruned), item_cols);
}

Eigen::MatrixXd encode_covariates(const SurveyDataset& ds,
                                  const std::vector<std::string>& names,
                                  bool center_numeric) {
  Eigen::MatrixXd design(ds.n(), static_cast<int>(names.size()));
  for (std::size_t c = 0; c < names.size(); ++c) {
    const int k = ds.codebook().covariate_index(names[c]);
    const auto& def = ds.codebook().covariates()[k];
    if (def.kind == CovariateKind::categorical)
      throw DataError("covariate " + def.name +
                      " is categorical; model encoding supports binary and "
                      "numeric covariates");
    for (int i = 0; i < ds.n(); ++i) {
      if (ds.covariate_missing(i, k))
        throw DataError("covariate " + def.name + " is missing at row " +
                        fmt_int(i + 1) + "; clean to complete cases first");
      design(i, static_cast<int>(c)) = ds.covariates()(i, k);
    }
    if (def.kind == CovariateKind::numeric && center_numeric && ds.n() > 0) {
      const double m = design.col(static_cast<int>(c)).mean();
      design.col(static_cast<int>(c)).array() -= m;
    }
  }
  return design;
}

} // namespace ordbayes
