#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "ordbayes/codebook.hpp"

namespace ordbayes {

/// Marker for a missing item response; valid responses are 1..H.
inline constexpr int kMissingResponse = 0;

/// Respondent-by-item matrix of ordinal responses plus typed covariates.
/// Immutable after construction; safe to share across threads.
///
/// Responses are stored 1-based (1..H per item) with kMissingResponse for
/// blanks. Covariate cells hold the 0-based level index for binary and
/// categorical covariates, the raw value for numeric ones, and NaN for
/// missing entries.
class SurveyDataset {
public:
  SurveyDataset(Codebook codebook, Eigen::MatrixXi responses,
                Eigen::MatrixXd covariates);

  int n() const { return static_cast<int>(responses_.rows()); }
  int n_items() const { return static_cast<int>(responses_.cols()); }
  int n_covariates() const { return static_cast<int>(covariates_.cols()); }

  const Codebook& codebook() const { return codebook_; }
  const Eigen::MatrixXi& responses() const { return responses_; }
  const Eigen::MatrixXd& covariates() const { return covariates_; }

  bool response_missing(int row, int item) const {
    return responses_(row, item) == kMissingResponse;
  }
  bool covariate_missing(int row, int cov) const {
    return std::isnan(covariates_(row, cov));
  }

  /// Label of covariate cell (row, cov); numeric values are formatted with
  /// 17 significant digits, missing cells give an empty string.
  std::string covariate_label(int row, int cov) const;

  bool operator==(const SurveyDataset& other) const;

private:
  Codebook codebook_;
  Eigen::MatrixXi responses_;
  Eigen::MatrixXd covariates_;
};

/// Row-filtering rules applied by clean(). Rules are applied in the order
/// all-missing, any-missing, straight-lining; a dropped row is counted
/// against the first rule it violates.
struct CleaningPolicy {
  bool drop_all_missing = false;
  bool drop_any_missing = false;
  /// Drop rows whose modal response covers at least this fraction of their
  /// non-missing item responses. Rows with fewer than 2 non-missing
  /// responses are never flagged. Must lie in (0, 1] when set.
  std::optional<double> straightline_threshold;
};

struct CleaningReport {
  std::int64_t rows_in = 0;
  std::int64_t rows_out = 0;
  std::int64_t dropped_all_missing = 0;
  std::int64_t dropped_any_missing = 0;
  std::int64_t dropped_straightline = 0;
  bool empty_output = false;

  nlohmann::json to_json() const;
};

/// Equality condition on one covariate; levels are matched by label for
/// binary/categorical covariates and by numeric value for numeric ones.
struct CovariateCondition {
  std::string name;
  std::string level;
};

/// Parse a UTF-8 CSV whose header matches the codebook's item abbreviations
/// and covariate names (any column order). Blank or unparseable item cells
/// become the missing marker; responses outside 1..H raise DataError naming
/// the offending cell.
SurveyDataset load_csv(const std::filesystem::path& path,
                       const Codebook& codebook);

/// Lossless complement of load_csv: canonical column order (items, then
/// covariates), missing cells written blank, numerics with 17 digits.
void write_csv(const SurveyDataset& ds, const std::filesystem::path& path);

std::pair<SurveyDataset, CleaningReport> clean(const SurveyDataset& ds,
                                               const CleaningPolicy& policy);

/// Project onto the requested items (empty list keeps all, in codebook
/// order) and keep only rows satisfying every filter condition.
SurveyDataset subset(const SurveyDataset& ds,
                     const std::vector<std::string>& items,
                     const std::vector<CovariateCondition>& filter = {});

/// Model-matrix encoding of selected covariates: binary as 0/1 by level
/// order, numeric centered at the sample mean when requested. Categorical
/// covariates and missing cells raise DataError.
Eigen::MatrixXd encode_covariates(const SurveyDataset& ds,
                                  const std::vector<std::string>& names,
                                  bool center_numeric = true);

} // namespace ordbayes
