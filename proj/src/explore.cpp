#include "ordbayes/explore.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "ordbayes/errors.hpp"
#include "ordbayes/stats.hpp"

namespace ordbayes {

MedianTestResult mood_median_test(const std::vector<int>& scores,
                                  const std::vector<std::string>& groups) {
  if (scores.size() != groups.size())
    throw ConfigError("mood_median_test: scores and groups differ in length");

  // Ordered group -> observed scores; keep empty groups visible so the
  // precondition can be reported precisely.
  std::map<std::string, std::vector<int>> by_group;
  for (std::size_t i = 0; i < scores.size(); ++i) by_group[groups[i]];
  std::vector<int> pooled;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (scores[i] == kMissingResponse) continue;
    by_group[groups[i]].push_back(scores[i]);
    pooled.push_back(scores[i]);
  }
  for (const auto& [label, values] : by_group) {
    if (values.empty())
      throw DataError("mood_median_test: group '" + label +
                      "' is empty after missing removal");
  }
  if (by_group.size() < 2)
    throw DataError("mood_median_test: need at least 2 groups");

  std::sort(pooled.begin(), pooled.end());
  const std::size_t n = pooled.size();
  Rational median;
  if (n % 2 == 1) {
    median = {pooled[n / 2], 1};
  } else {
    median = {static_cast<std::int64_t>(pooled[n / 2 - 1]) + pooled[n / 2], 2};
  }

  MedianTestResult result;
  result.pooled_median = median;
  const int k = static_cast<int>(by_group.size());
  result.contingency = Eigen::MatrixXi::Zero(2, k);
  int col = 0;
  for (const auto& [label, values] : by_group) {
    result.group_labels.push_back(label);
    for (int v : values) {
      // score <= median, exact on integers: 2v <= num (den 2) or v <= num.
      const bool low = static_cast<std::int64_t>(v) * median.den <= median.num;
      result.contingency(low ? 0 : 1, col) += 1;
    }
    ++col;
  }
  result.df = k - 1;

  const Eigen::VectorXi row_totals = result.contingency.rowwise().sum();
  if (row_totals(0) == 0 || row_totals(1) == 0) {
    result.degenerate = true;
    result.chi_square = 0.0;
    result.p_value = 1.0;
    return result;
  }

  const Eigen::VectorXi col_totals = result.contingency.colwise().sum();
  const double total = static_cast<double>(n);
  double chi2 = 0.0;
  for (int r = 0; r < 2; ++r) {
    for (int c = 0; c < k; ++c) {
      const double expected = row_totals(r) * static_cast<double>(col_totals(c)) / total;
      const double diff = result.contingency(r, c) - expected;
      chi2 += diff * diff / expected;
    }
  }
  result.chi_square = chi2;
  result.p_value = chi_square_survival(chi2, static_cast<double>(result.df));
  return result;
}

std::string_view to_string(Stars s) {
  switch (s) {
    case Stars::none: return "";
    case Stars::one: return "*";
    case Stars::two: return "**";
    case Stars::three: return "***";
  }
  return "";
}

Stars significance_stars(double p) {
  if (!(p >= 0.0 && p <= 1.0))
    throw ConfigError("significance_stars: p-value outside [0, 1]");
  if (p < 0.001) return Stars::three;
  if (p < 0.01) return Stars::two;
  if (p < 0.05) return Stars::one;
  return Stars::none;
}

namespace {

LikertSummary summarize_group(const SurveyDataset& ds, int item_idx,
                              std::string group_by, std::string level,
                              const std::vector<int>& rows) {
  const int h = ds.codebook().items()[item_idx].n_categories;
  LikertSummary s;
  s.item = ds.codebook().items()[item_idx].abbr;
  s.group_by = std::move(group_by);
  s.level = std::move(level);
  s.proportions.assign(h, 0.0);

  std::vector<int> counts(h, 0);
  for (int i : rows) {
    const int r = ds.responses()(i, item_idx);
    if (r == kMissingResponse) continue;
    ++counts[r - 1];
    ++s.count;
  }
  if (s.count == 0) return s;

  const double midpoint = (h + 1) / 2.0;
  for (int c = 0; c < h; ++c) {
    s.proportions[c] = counts[c] / static_cast<double>(s.count);
    if (c + 1 < midpoint) s.low_split += s.proportions[c];
    if (c + 1 > midpoint) s.high_split += s.proportions[c];
  }
  return s;
}

} // namespace

std::vector<LikertSummary> likert_summary(const SurveyDataset& ds,
                                          std::string_view item,
                                          const std::optional<std::string>& by) {
  const int item_idx = ds.codebook().item_index(item);

  std::vector<LikertSummary> out;
  if (!by) {
    std::vector<int> rows(ds.n());
    for (int i = 0; i < ds.n(); ++i) rows[i] = i;
    out.push_back(summarize_group(ds, item_idx, "", "all", rows));
    return out;
  }

  const int cov = ds.codebook().covariate_index(*by);
  const auto& def = ds.codebook().covariates()[cov];
  if (def.kind == CovariateKind::numeric)
    throw DataError("likert_summary: cannot group by numeric covariate " +
                    def.name);

  for (std::size_t lvl = 0; lvl < def.levels.size(); ++lvl) {
    std::vector<int> rows;
    for (int i = 0; i < ds.n(); ++i) {
      if (ds.covariate_missing(i, cov)) continue;
      if (static_cast<std::size_t>(ds.covariates()(i, cov)) == lvl)
        rows.push_back(i);
    }
    out.push_back(
        summarize_group(ds, item_idx, *by, def.levels[lvl], rows));
  }
  return out;
}

} // namespace ordbayes
