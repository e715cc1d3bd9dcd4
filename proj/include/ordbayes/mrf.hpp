#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "ordbayes/mcmc.hpp"

namespace ordbayes {

// Ordinal Markov random field over p variables with categories 0..m_i.
//
// Joint density (up to normalization):
//   p(x) ∝ exp( Σ_i μ_{i,x_i} + Σ_{i<j} θ_ij x_i x_j )
// with μ_{i,0} = 0 as reference. This linear-by-linear pairwise form is the
// single modeling assumption everything below builds on: the full
// conditional of variable i depends on the rest of the configuration only
// through the rest score s_i = Σ_{j≠i} θ_ij x_j, and estimation replaces
// the intractable joint likelihood with the product of these conditionals
// (pseudolikelihood).

/// Interaction matrix, edge indicators and per-variable category thresholds.
/// Invariants: theta and gamma_adj symmetric with zero diagonal, and
/// gamma_adj(i, j) == 0 implies theta(i, j) == 0 exactly.
struct MrfState {
  explicit MrfState(std::vector<int> n_levels);

  int n_vars() const { return static_cast<int>(n_levels_.size()); }
  const std::vector<int>& n_levels() const { return n_levels_; }

  Eigen::MatrixXd theta;
  Eigen::MatrixXi gamma_adj;
  /// thresholds[i] has n_levels[i] - 1 entries, for categories 1..m_i.
  std::vector<Eigen::VectorXd> thresholds;

  void set_edge(int i, int j, double weight);
  void validate() const;

private:
  std::vector<int> n_levels_;
};

/// Spike-and-slab edge prior plus a diffuse normal prior on thresholds.
struct MrfPrior {
  double slab_scale = 2.5;     // Cauchy scale of the slab component
  double inclusion_prob = 0.5; // Bernoulli prior on each edge indicator
  double threshold_sd = 10.0;  // normal prior sd on each μ_{i,c}

  void validate() const;
};

/// log p(x_i = category | x_{-i}) under the linear-by-linear conditional.
double conditional_logprob(const MrfState& state, const Eigen::VectorXi& x,
                           int var, int category);

/// Sum of conditional log-probabilities over all cells of a complete
/// 0-based data matrix.
double pseudo_loglik(const MrfState& state, const Eigen::MatrixXi& data);

/// Inclusion Bayes factor from posterior and prior inclusion probabilities:
/// BF10 = [q/(1-q)] / [r/(1-r)]. Returns +infinity when q == 1. Throws
/// ConfigError when r is 0 or 1.
double inclusion_bf10(double posterior_inclusion, double prior_inclusion);

/// Same quantity computed from draw counts, which keeps the posterior odds
/// exact when the inclusion probability is a ratio of small integers.
double inclusion_bf10_counts(std::int64_t included, std::int64_t excluded,
                             double prior_inclusion);

struct MrfDraw {
  Eigen::VectorXd theta_upper; // upper triangle, row-major (i < j)
  Eigen::VectorXi adj_upper;
  Eigen::VectorXd thresholds_flat;
};

struct MrfPosterior {
  static constexpr double kBf10Cap = 1e6;

  std::vector<int> n_levels;
  std::vector<std::string> node_names;
  MrfPrior prior;
  McmcConfig config;

  std::vector<MrfDraw> draws; // post burn-in, thinned

  Eigen::MatrixXd inclusion_prob;
  /// Capped at kBf10Cap when no retained draw excludes the edge; the
  /// bf_saturated entry records the cap.
  Eigen::MatrixXd bf10;
  Eigen::MatrixXi bf_saturated;
  /// Edge-weight summaries conditional on inclusion (zero for edges never
  /// included); theta_mean_all averages over all draws including zeros.
  Eigen::MatrixXd theta_mean;
  Eigen::MatrixXd theta_mean_all;
  Eigen::MatrixXd theta_ci_low;
  Eigen::MatrixXd theta_ci_high;

  int upper_index(int i, int j) const; // position of pair (i<j) in the flat layout
};

/// Derive the summary matrices from the retained draws (called by fit_mrf;
/// exposed for tests that assemble posteriors by hand).
void summarize_mrf_posterior(MrfPosterior& post);

/// Metropolis-within-Gibbs sampler for the pseudoposterior over (Θ, 𝒢, μ).
/// Each sweep updates every threshold and every included edge weight by
/// adaptive random-walk Metropolis and proposes a birth/death move for every
/// edge indicator jointly with its weight (birth draws the weight from the
/// slab, so slab density and proposal density cancel in the acceptance
/// ratio). Deterministic given config.seed.
MrfPosterior fit_mrf(const Eigen::MatrixXi& data,
                     const std::vector<int>& n_levels, const MrfPrior& prior,
                     const McmcConfig& config,
                     std::vector<std::string> node_names = {});

inline McmcConfig mrf_default_config(std::uint64_t seed = 1) {
  McmcConfig c;
  c.iterations = 20000;
  c.burn_in = 5000;
  c.thin = 1;
  c.chains = 1;
  c.seed = seed;
  return c;
}

struct EdgeRecord {
  int a = 0;
  int b = 0;
  std::string name_a;
  std::string name_b;
  double inclusion_prob = 0.0;
  double bf10 = 0.0;
  bool bf_saturated = false;
  double theta_mean = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  int sign = 0;            // sign of the conditional posterior mean
  bool conclusive = false; // bf10 >= threshold
};

struct EdgeReport {
  std::vector<std::string> nodes;
  double bf_threshold = 10.0;
  std::vector<EdgeRecord> edges; // inclusion probability >= 0.5, (a,b) ordered
};

/// Median-probability graph: edges with posterior inclusion probability of
/// at least 0.5; retained edges with BF10 below the threshold are flagged
/// inconclusive (rendered dashed in DOT output).
EdgeReport median_probability_graph(const MrfPosterior& post,
                                    double bf_threshold = 10.0);

/// Graphviz DOT text for the median-probability graph, with sign and weight
/// attributes per edge and dashed style for inconclusive edges.
std::string to_dot(const EdgeReport& report);

} // namespace ordbayes
