#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "ordbayes/grm.hpp"
#include "ordbayes/mrf.hpp"
#include "ordbayes/rng.hpp"
#include "ordbayes/survey_data.hpp"

namespace ordbayes {

// Synthetic-data generators and the brute-force joint oracle used to verify
// both samplers. Everything here is deterministic given the spec seed.

/// Covariate generator for graded-response simulations. Binary and
/// categorical covariates draw a level from `probs`; numeric covariates
/// draw N(mean, sd²). The drawn design value (level index or raw numeric)
/// enters the latent regression with coefficient `alpha`.
struct SimCovariate {
  CovariateDef def;
  std::vector<double> probs;
  double mean = 0.0;
  double sd = 1.0;
  double alpha = 0.0;
};

struct GrmSimItem {
  std::string abbr;
  Section section = Section::gender_roles;
  std::vector<std::string> category_labels; // optional; defaults to "1".."H"
  double beta = 0.0;
  double gamma = 1.0;
};

struct GrmSimSpec {
  std::uint64_t seed = 1;
  int n = 0;
  std::vector<GrmSimItem> items;
  Eigen::VectorXd delta; // H-1 offsets, delta(0) == 0, strictly increasing
  std::vector<SimCovariate> covariates;

  static GrmSimSpec from_json(const nlohmann::json& j);
  void validate() const;
};

struct GrmSimResult {
  SurveyDataset data;
  GrmParams truth;        // includes the drawn latent traits
  Eigen::MatrixXd design; // covariate values as used in the latent regression
};

/// Draw θ_i ~ N(x_iᵀα, 1) and each response from the category
/// probabilities. Draw order: per row, covariates then θ, then all items.
GrmSimResult gen_grm(const GrmSimSpec& spec);

/// Single categorical draw from the graded-response category probabilities
/// by inverse transform; consumes one uniform.
int sample_grm_category(Rng& rng, double theta, double gamma, double beta,
                        const Eigen::VectorXd& delta);

/// Exact joint distribution over all configurations; refuses instances with
/// more than kMrfEnumerationCap configurations.
inline constexpr std::int64_t kMrfEnumerationCap = 1'000'000;

class MrfJointTable {
public:
  MrfJointTable(std::vector<int> n_levels, std::vector<double> probs);

  const std::vector<int>& n_levels() const { return n_levels_; }
  const std::vector<double>& probs() const { return probs_; }

  std::int64_t size() const { return static_cast<std::int64_t>(probs_.size()); }
  std::int64_t index(const Eigen::VectorXi& config) const;
  Eigen::VectorXi config_at(std::int64_t index) const;
  double prob(const Eigen::VectorXi& config) const;

  /// Conditional distribution of one variable given the rest, derived by
  /// marginalizing the exact joint.
  Eigen::VectorXd conditional(const Eigen::VectorXi& config, int var) const;

private:
  std::vector<int> n_levels_;
  std::vector<std::int64_t> strides_;
  std::vector<double> probs_;
};

MrfJointTable enumerate_mrf_joint(const MrfState& state);

struct GibbsOptions {
  int burn_in_sweeps = 1000;
  int spacing_sweeps = 10;
  bool force_gibbs = false; // skip the exact-sampling path (tests)
};

/// n rows from the MRF: exact inverse-transform sampling when the joint
/// table fits under the enumeration cap, otherwise a single Gibbs chain
/// with the documented burn-in and spacing. 0-based categories.
Eigen::MatrixXi gen_mrf(const MrfState& state, int n, std::uint64_t seed,
                        const GibbsOptions& options = {});

struct MrfSimSpec {
  std::uint64_t seed = 1;
  int n = 0;
  MrfState state;
  std::vector<std::string> names; // optional node names
  GibbsOptions gibbs;

  MrfSimSpec() : state(std::vector<int>{2, 2}) {}
  static MrfSimSpec from_json(const nlohmann::json& j);
};

/// Wrap a simulated MRF sample as a survey dataset (responses shifted to
/// 1-based categories, no covariates).
SurveyDataset mrf_sample_to_dataset(const Eigen::MatrixXi& sample,
                                    const std::vector<int>& n_levels,
                                    const std::vector<std::string>& names);

} // namespace ordbayes
