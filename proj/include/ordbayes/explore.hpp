#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "ordbayes/survey_data.hpp"

namespace ordbayes {

/// Exact pooled median of integer scores: an integer (den = 1) or the
/// midpoint of the two central order statistics (den = 2).
struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;

  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  bool operator==(const Rational&) const = default;
};

struct MedianTestResult {
  Rational pooled_median;
  std::vector<std::string> group_labels; // sorted lexicographically
  Eigen::MatrixXi contingency;           // 2 x k: row 0 counts <= median, row 1 counts > median
  double chi_square = 0.0;
  int df = 0;
  double p_value = 1.0;
  /// Set when one classification row is empty (no variation around the
  /// pooled median); chi_square is 0 and p_value is 1 in that case.
  bool degenerate = false;
};

/// Mood's median test on parallel score/group lists. Scores equal to
/// kMissingResponse are dropped together with their labels. Observations
/// tied with the pooled median count as "<= median". No continuity
/// correction is applied. Throws DataError when fewer than 2 groups remain
/// or a named group is empty after missing removal.
MedianTestResult mood_median_test(const std::vector<int>& scores,
                                  const std::vector<std::string>& groups);

enum class Stars { none, one, two, three };

std::string_view to_string(Stars s);

/// Significance stars: *** for p < 0.001, ** for p < 0.01, * for p < 0.05.
/// Throws ConfigError outside [0, 1].
Stars significance_stars(double p);

/// Category distribution of one item for one group of respondents.
/// low_split / high_split are the shares strictly below / above the scale
/// midpoint (H + 1) / 2; for even H they partition the non-missing mass.
struct LikertSummary {
  std::string item;
  std::string group_by; // empty when ungrouped
  std::string level;    // "all" when ungrouped
  int count = 0;        // non-missing responses
  std::vector<double> proportions; // length H, sums to 1 when count > 0
  double low_split = 0.0;
  double high_split = 0.0;
};

/// One summary per level of `by` (or a single overall summary). Grouping by
/// a numeric covariate is rejected.
std::vector<LikertSummary> likert_summary(
    const SurveyDataset& ds, std::string_view item,
    const std::optional<std::string>& by = std::nullopt);

} // namespace ordbayes
