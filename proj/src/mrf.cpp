#include "ordbayes/mrf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ordbayes/errors.hpp"
#include "ordbayes/format.hpp"
#include "ordbayes/rng.hpp"
#include "ordbayes/stats.hpp"

namespace ordbayes {

MrfState::MrfState(std::vector<int> n_levels) : n_levels_(std::move(n_levels)) {
  const int p = n_vars();
  if (p < 1) throw ConfigError("mrf: need at least one variable");
  for (int levels : n_levels_) {
    if (levels < 2)
      throw ConfigError("mrf: every variable needs at least 2 categories");
  }
  theta = Eigen::MatrixXd::Zero(p, p);
  gamma_adj = Eigen::MatrixXi::Zero(p, p);
  thresholds.resize(p);
  for (int i = 0; i < p; ++i)
    thresholds[i] = Eigen::VectorXd::Zero(n_levels_[i] - 1);
}

void MrfState::set_edge(int i, int j, double weight) {
  if (i == j) throw ConfigError("mrf: no self edges");
  theta(i, j) = weight;
  theta(j, i) = weight;
  const int indicator = weight != 0.0 ? 1 : 0;
  gamma_adj(i, j) = indicator;
  gamma_adj(j, i) = indicator;
}

void MrfState::validate() const {
  const int p = n_vars();
  if (theta.rows() != p || theta.cols() != p || gamma_adj.rows() != p ||
      gamma_adj.cols() != p)
    throw ConfigError("mrf: matrix dimensions do not match variable count");
  for (int i = 0; i < p; ++i) {
    if (theta(i, i) != 0.0 || gamma_adj(i, i) != 0)
      throw ConfigError("mrf: diagonal must be zero");
    if (static_cast<int>(thresholds[i].size()) != n_levels_[i] - 1)
      throw ConfigError("mrf: threshold vector length mismatch at variable " +
                        fmt_int(i));
    for (int j = 0; j < p; ++j) {
      if (theta(i, j) != theta(j, i) || gamma_adj(i, j) != gamma_adj(j, i))
        throw ConfigError("mrf: theta and gamma_adj must be symmetric");
      if (gamma_adj(i, j) == 0 && theta(i, j) != 0.0)
        throw ConfigError("mrf: excluded edge has nonzero weight");
    }
  }
}

void MrfPrior::validate() const {
  if (slab_scale <= 0.0) throw ConfigError("mrf prior: slab scale must be positive");
  if (!(inclusion_prob > 0.0 && inclusion_prob < 1.0))
    throw ConfigError("mrf prior: inclusion probability must lie inside (0, 1)");
  if (threshold_sd <= 0.0)
    throw ConfigError("mrf prior: threshold prior sd must be positive");
}

namespace {

// logsumexp over categories c = 0..m of (mu_{c} + c * rest), mu_0 = 0.
double lse_categories(double rest, const Eigen::VectorXd& mu) {
  const int m = static_cast<int>(mu.size());
  double max_l = 0.0;
  for (int c = 1; c <= m; ++c) {
    const double l = mu(c - 1) + c * rest;
    if (l > max_l) max_l = l;
  }
  double sum = std::exp(-max_l);
  for (int c = 1; c <= m; ++c) sum += std::exp(mu(c - 1) + c * rest - max_l);
  return max_l + std::log(sum);
}

void check_data(const Eigen::MatrixXi& data, const std::vector<int>& n_levels) {
  if (data.cols() != static_cast<int>(n_levels.size()))
    throw DataError("mrf: data column count does not match variable count");
  for (int j = 0; j < data.cols(); ++j) {
    for (int i = 0; i < data.rows(); ++i) {
      const int v = data(i, j);
      if (v < 0 || v >= n_levels[j])
        throw DataError("mrf: incomplete or out-of-range cell at row " +
                        fmt_int(i + 1) + ", variable " + fmt_int(j) + ": " +
                        fmt_int(v));
    }
  }
}

} // namespace

double conditional_logprob(const MrfState& state, const Eigen::VectorXi& x,
                           int var, int category) {
  const int p = state.n_vars();
  if (var < 0 || var >= p)
    throw ConfigError("conditional_logprob: variable index out of range");
  if (x.size() != p)
    throw ConfigError("conditional_logprob: configuration length mismatch");
  const int m = state.n_levels()[var] - 1;
  if (category < 0 || category > m)
    throw ConfigError("conditional_logprob: category out of range");
  for (int j = 0; j < p; ++j) {
    if (x(j) < 0 || x(j) >= state.n_levels()[j])
      throw ConfigError("conditional_logprob: configuration out of range");
  }

  double rest = 0.0;
  for (int j = 0; j < p; ++j) {
    if (j != var) rest += state.theta(var, j) * x(j);
  }
  const Eigen::VectorXd& mu = state.thresholds[var];
  const double numerator =
      category == 0 ? 0.0 : mu(category - 1) + category * rest;
  return numerator - lse_categories(rest, mu);
}

double pseudo_loglik(const MrfState& state, const Eigen::MatrixXi& data) {
  check_data(data, state.n_levels());
  const int p = state.n_vars();
  const int n = static_cast<int>(data.rows());

  const Eigen::MatrixXd xd = data.cast<double>();
  const Eigen::MatrixXd rest = xd * state.theta; // rest(r, i) excludes theta_ii = 0

  double total = 0.0;
  for (int i = 0; i < p; ++i) {
    const Eigen::VectorXd& mu = state.thresholds[i];
    for (int r = 0; r < n; ++r) {
      const int c = data(r, i);
      const double numerator = c == 0 ? 0.0 : mu(c - 1) + c * rest(r, i);
      total += numerator - lse_categories(rest(r, i), mu);
    }
  }
  return total;
}

double inclusion_bf10(double posterior_inclusion, double prior_inclusion) {
  if (!(posterior_inclusion >= 0.0 && posterior_inclusion <= 1.0))
    throw ConfigError("inclusion_bf10: posterior inclusion outside [0, 1]");
  if (!(prior_inclusion > 0.0 && prior_inclusion < 1.0))
    throw ConfigError("inclusion_bf10: prior inclusion must lie inside (0, 1)");
  if (posterior_inclusion == 1.0)
    return std::numeric_limits<double>::infinity();
  const double posterior_odds = posterior_inclusion / (1.0 - posterior_inclusion);
  const double prior_odds = prior_inclusion / (1.0 - prior_inclusion);
  return posterior_odds / prior_odds;
}

double inclusion_bf10_counts(std::int64_t included, std::int64_t excluded,
                             double prior_inclusion) {
  if (included < 0 || excluded < 0 || included + excluded == 0)
    throw ConfigError("inclusion_bf10_counts: invalid draw counts");
  if (!(prior_inclusion > 0.0 && prior_inclusion < 1.0))
    throw ConfigError("inclusion_bf10_counts: prior inclusion must lie inside (0, 1)");
  if (excluded == 0) return std::numeric_limits<double>::infinity();
  const double posterior_odds =
      static_cast<double>(included) / static_cast<double>(excluded);
  return posterior_odds * ((1.0 - prior_inclusion) / prior_inclusion);
}

int MrfPosterior::upper_index(int i, int j) const {
  const int p = static_cast<int>(n_levels.size());
  return i * (2 * p - i - 1) / 2 + (j - i - 1);
}

void summarize_mrf_posterior(MrfPosterior& post) {
  const int p = static_cast<int>(post.n_levels.size());
  const auto n_draws = static_cast<std::int64_t>(post.draws.size());
  post.inclusion_prob = Eigen::MatrixXd::Zero(p, p);
  post.bf10 = Eigen::MatrixXd::Zero(p, p);
  post.bf_saturated = Eigen::MatrixXi::Zero(p, p);
  post.theta_mean = Eigen::MatrixXd::Zero(p, p);
  post.theta_mean_all = Eigen::MatrixXd::Zero(p, p);
  post.theta_ci_low = Eigen::MatrixXd::Zero(p, p);
  post.theta_ci_high = Eigen::MatrixXd::Zero(p, p);
  if (n_draws == 0) return;

  std::vector<double> included_weights;
  for (int i = 0; i < p - 1; ++i) {
    for (int j = i + 1; j < p; ++j) {
      const int idx = post.upper_index(i, j);
      std::int64_t included = 0;
      double sum_all = 0.0;
      included_weights.clear();
      for (const auto& draw : post.draws) {
        const double w = draw.theta_upper(idx);
        sum_all += w;
        if (draw.adj_upper(idx) == 1) {
          ++included;
          included_weights.push_back(w);
        }
      }
      const double q =
          static_cast<double>(included) / static_cast<double>(n_draws);
      double bf = inclusion_bf10_counts(included, n_draws - included,
                                        post.prior.inclusion_prob);
      const bool saturated = std::isinf(bf);
      if (saturated) bf = MrfPosterior::kBf10Cap;

      double cond_mean = 0.0, lo = 0.0, hi = 0.0;
      if (included > 0) {
        double s = 0.0;
        for (double w : included_weights) s += w;
        cond_mean = s / static_cast<double>(included);
        lo = quantile(included_weights, 0.025);
        hi = quantile(included_weights, 0.975);
      }

      auto set_sym = [&](Eigen::MatrixXd& mat, double v) {
        mat(i, j) = v;
        mat(j, i) = v;
      };
      set_sym(post.inclusion_prob, q);
      set_sym(post.bf10, bf);
      post.bf_saturated(i, j) = saturated ? 1 : 0;
      post.bf_saturated(j, i) = post.bf_saturated(i, j);
      set_sym(post.theta_mean, cond_mean);
      set_sym(post.theta_mean_all, sum_all / static_cast<double>(n_draws));
      set_sym(post.theta_ci_low, lo);
      set_sym(post.theta_ci_high, hi);
    }
  }
}

namespace {

// Single-chain Metropolis-within-Gibbs sampler state. Maintains, per row r
// and variable i, the rest score rest(r,i) = Σ_j θ_ij x_rj and the cached
// log normalizer lse(r,i) of the conditional, so each proposal costs one
// pass over the affected column(s) only.
class MrfSampler {
public:
  MrfSampler(const Eigen::MatrixXi& data, const std::vector<int>& n_levels,
             const MrfPrior& prior, const McmcConfig& config)
      : data_(data),
        xd_(data.cast<double>()),
        prior_(prior),
        config_(config),
        state_(n_levels),
        p_(static_cast<int>(n_levels.size())),
        n_(static_cast<int>(data.rows())),
        rng_(Rng::substream(config.seed, 0)) {
    rest_ = Eigen::MatrixXd::Zero(n_, p_);
    lse_ = Eigen::MatrixXd::Zero(n_, p_);
    cand_i_.resize(n_);
    cand_j_.resize(n_);
    for (int i = 0; i < p_; ++i) {
      refresh_lse_col(state_.thresholds[i], rest_.col(i), lse_.col(i));
    }
    xtx_ = (xd_.transpose() * xd_);

    cat_counts_.resize(p_);
    thr_scales_.resize(p_);
    for (int i = 0; i < p_; ++i) {
      const int m = n_levels[i] - 1;
      cat_counts_[i].assign(m, 0);
      for (int r = 0; r < n_; ++r) {
        const int c = data_(r, i);
        if (c >= 1) ++cat_counts_[i][c - 1];
      }
      thr_scales_[i].assign(m, AdaptiveScale(0.5));
    }
    edge_scales_.assign(static_cast<std::size_t>(p_) * p_, AdaptiveScale(0.5));
  }

  MrfPosterior run() {
    MrfPosterior post;
    post.n_levels = state_.n_levels();
    post.prior = prior_;
    post.config = config_;
    post.draws.reserve(config_.retained_per_chain());

    for (int sweep = 1; sweep <= config_.iterations; ++sweep) {
      const bool adapting = sweep <= config_.burn_in;
      update_thresholds(sweep, adapting);
      update_included_edges(sweep, adapting);
      update_indicators();
      if (config_.keep(sweep)) record(post);
    }
    summarize_mrf_posterior(post);
    return post;
  }

private:
  template <typename RestCol, typename Out>
  void refresh_lse_col(const Eigen::VectorXd& mu, const RestCol& rest,
                       Out&& out) const {
    for (int r = 0; r < n_; ++r) out(r) = lse_categories(rest(r), mu);
  }

  void update_thresholds(int sweep, bool adapting) {
    for (int i = 0; i < p_; ++i) {
      Eigen::VectorXd mu = state_.thresholds[i];
      const int m = static_cast<int>(mu.size());
      for (int c = 1; c <= m; ++c) {
        const double current = mu(c - 1);
        const double proposal =
            current + thr_scales_[i][c - 1].scale() * rng_.normal();
        mu(c - 1) = proposal;
        refresh_lse_col(mu, rest_.col(i), cand_i_);

        const double sd2 = prior_.threshold_sd * prior_.threshold_sd;
        double log_accept =
            -0.5 * (proposal * proposal - current * current) / sd2;
        log_accept += (proposal - current) * cat_counts_[i][c - 1];
        log_accept += (lse_.col(i) - cand_i_).sum();
        if (!std::isfinite(log_accept))
          throw NumericalError("mrf: non-finite threshold acceptance ratio");

        if (rng_.log_uniform() < log_accept) {
          state_.thresholds[i](c - 1) = proposal;
          lse_.col(i) = cand_i_;
        } else {
          mu(c - 1) = current;
        }
        if (adapting)
          thr_scales_[i][c - 1].adapt(accept_prob_from_log(log_accept), sweep);
      }
    }
  }

  // Log pseudolikelihood change when theta_ij moves from its current value
  // to `proposal`; fills cand_i_/cand_j_ with the implied log normalizers.
  double edge_log_ratio(int i, int j, double current, double proposal) {
    const double delta = proposal - current;
    double log_ratio = 2.0 * delta * xtx_(i, j);
    refresh_lse_col(state_.thresholds[i],
                    (rest_.col(i) + delta * xd_.col(j)).eval(), cand_i_);
    refresh_lse_col(state_.thresholds[j],
                    (rest_.col(j) + delta * xd_.col(i)).eval(), cand_j_);
    log_ratio += (lse_.col(i) - cand_i_).sum();
    log_ratio += (lse_.col(j) - cand_j_).sum();
    return log_ratio;
  }

  void apply_edge_change(int i, int j, double current, double proposal) {
    const double delta = proposal - current;
    state_.theta(i, j) = proposal;
    state_.theta(j, i) = proposal;
    rest_.col(i) += delta * xd_.col(j);
    rest_.col(j) += delta * xd_.col(i);
    lse_.col(i) = cand_i_;
    lse_.col(j) = cand_j_;
  }

  static double log_cauchy(double x, double scale) {
    const double z = x / scale;
    return -std::log1p(z * z); // constants cancel in ratios
  }

  void update_included_edges(int sweep, bool adapting) {
    for (int i = 0; i < p_ - 1; ++i) {
      for (int j = i + 1; j < p_; ++j) {
        if (state_.gamma_adj(i, j) != 1) continue;
        AdaptiveScale& scale = edge_scales_[static_cast<std::size_t>(i) * p_ + j];
        const double current = state_.theta(i, j);
        const double proposal = current + scale.scale() * rng_.normal();

        double log_accept = edge_log_ratio(i, j, current, proposal);
        log_accept += log_cauchy(proposal, prior_.slab_scale) -
                      log_cauchy(current, prior_.slab_scale);
        if (!std::isfinite(log_accept))
          throw NumericalError("mrf: non-finite edge acceptance ratio");

        if (rng_.log_uniform() < log_accept)
          apply_edge_change(i, j, current, proposal);
        if (adapting) scale.adapt(accept_prob_from_log(log_accept), sweep);
      }
    }
  }

  // Birth/death move per edge. A birth draws the weight from the slab, so
  // slab density and proposal density cancel and the acceptance ratio is the
  // pseudolikelihood ratio times the prior inclusion odds.
  void update_indicators() {
    const double log_odds =
        std::log(prior_.inclusion_prob) - std::log1p(-prior_.inclusion_prob);
    for (int i = 0; i < p_ - 1; ++i) {
      for (int j = i + 1; j < p_; ++j) {
        const bool excluded = state_.gamma_adj(i, j) == 0;
        const double current = state_.theta(i, j);
        const double proposal = excluded ? rng_.cauchy(0.0, prior_.slab_scale) : 0.0;

        double log_accept = edge_log_ratio(i, j, current, proposal);
        log_accept += excluded ? log_odds : -log_odds;
        if (!std::isfinite(log_accept))
          throw NumericalError("mrf: non-finite indicator acceptance ratio");

        if (rng_.log_uniform() < log_accept) {
          const int indicator = excluded ? 1 : 0;
          state_.gamma_adj(i, j) = indicator;
          state_.gamma_adj(j, i) = indicator;
          apply_edge_change(i, j, current, proposal);
        }
      }
    }
  }

  void record(MrfPosterior& post) {
    MrfDraw draw;
    const int n_pairs = p_ * (p_ - 1) / 2;
    draw.theta_upper.resize(n_pairs);
    draw.adj_upper.resize(n_pairs);
    int idx = 0;
    for (int i = 0; i < p_ - 1; ++i) {
      for (int j = i + 1; j < p_; ++j, ++idx) {
        draw.theta_upper(idx) = state_.theta(i, j);
        draw.adj_upper(idx) = state_.gamma_adj(i, j);
      }
    }
    int total_thresholds = 0;
    for (int i = 0; i < p_; ++i)
      total_thresholds += static_cast<int>(state_.thresholds[i].size());
    draw.thresholds_flat.resize(total_thresholds);
    int offset = 0;
    for (int i = 0; i < p_; ++i) {
      const int m = static_cast<int>(state_.thresholds[i].size());
      draw.thresholds_flat.segment(offset, m) = state_.thresholds[i];
      offset += m;
    }
    post.draws.push_back(std::move(draw));
  }

  const Eigen::MatrixXi& data_;
  Eigen::MatrixXd xd_;
  MrfPrior prior_;
  McmcConfig config_;
  MrfState state_;
  int p_;
  int n_;
  Rng rng_;

  Eigen::MatrixXd rest_;
  Eigen::MatrixXd lse_;
  Eigen::MatrixXd xtx_;
  Eigen::VectorXd cand_i_;
  Eigen::VectorXd cand_j_;
  std::vector<std::vector<int>> cat_counts_;
  std::vector<std::vector<AdaptiveScale>> thr_scales_;
  std::vector<AdaptiveScale> edge_scales_;
};

} // namespace

MrfPosterior fit_mrf(const Eigen::MatrixXi& data,
                     const std::vector<int>& n_levels, const MrfPrior& prior,
                     const McmcConfig& config,
                     std::vector<std::string> node_names) {
  prior.validate();
  config.validate();
  if (config.chains != 1)
    throw ConfigError("mrf: the sampler runs a single chain");
  if (n_levels.size() < 2) throw ConfigError("mrf: need at least 2 variables");
  check_data(data, n_levels);
  if (data.rows() < 1) throw DataError("mrf: need at least one data row");
  if (!node_names.empty() && node_names.size() != n_levels.size())
    throw ConfigError("mrf: node name count mismatch");
  if (node_names.empty()) {
    for (std::size_t i = 0; i < n_levels.size(); ++i)
      node_names.push_back("V" + fmt_int(static_cast<std::int64_t>(i + 1)));
  }

  MrfSampler sampler(data, n_levels, prior, config);
  MrfPosterior post = sampler.run();
  post.node_names = std::move(node_names);
  return post;
}

EdgeReport median_probability_graph(const MrfPosterior& post,
                                    double bf_threshold) {
  if (!(bf_threshold > 0.0))
    throw ConfigError("median_probability_graph: threshold must be positive");
  EdgeReport report;
  report.nodes = post.node_names;
  report.bf_threshold = bf_threshold;
  const int p = static_cast<int>(post.n_levels.size());
  for (int i = 0; i < p - 1; ++i) {
    for (int j = i + 1; j < p; ++j) {
      if (post.inclusion_prob(i, j) < 0.5) continue;
      EdgeRecord edge;
      edge.a = i;
      edge.b = j;
      edge.name_a = post.node_names[i];
      edge.name_b = post.node_names[j];
      edge.inclusion_prob = post.inclusion_prob(i, j);
      edge.bf10 = post.bf10(i, j);
      edge.bf_saturated = post.bf_saturated(i, j) != 0;
      edge.theta_mean = post.theta_mean(i, j);
      edge.ci_low = post.theta_ci_low(i, j);
      edge.ci_high = post.theta_ci_high(i, j);
      edge.sign = edge.theta_mean > 0.0 ? 1 : (edge.theta_mean < 0.0 ? -1 : 0);
      edge.conclusive = edge.bf10 >= bf_threshold;
      report.edges.push_back(std::move(edge));
    }
  }
  return report;
}

namespace {

std::string dot_quote(const std::string& name) {
  std::string out = "\"";
  for (char c : name) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

} // namespace

std::string to_dot(const EdgeReport& report) {
  std::string out = "graph network {\n";
  for (const auto& node : report.nodes) {
    out += "  " + dot_quote(node) + ";\n";
  }
  for (const auto& edge : report.edges) {
    out += "  " + dot_quote(edge.name_a) + " -- " + dot_quote(edge.name_b);
    out += " [weight=" + fmt_g17(edge.theta_mean);
    out += ", sign=\"";
    out += edge.sign >= 0 ? "+" : "-";
    out += "\", style=";
    out += edge.conclusive ? "solid" : "dashed";
    out += ", color=";
    out += edge.sign >= 0 ? "blue" : "red";
    out += "];\n";
  }
  out += "}\n";
  return out;
}

} // namespace ordbayes
