#include "ordbayes/grm.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>

#include "ordbayes/errors.hpp"
#include "ordbayes/format.hpp"
#include "ordbayes/rng.hpp"
#include "ordbayes/stats.hpp"

namespace ordbayes {

void GrmParams::validate() const {
  if (beta.size() != log_gamma.size())
    throw ConfigError("grm: beta and log_gamma must have equal length");
  if (delta.size() < 1)
    throw ConfigError("grm: need at least 2 response categories");
  if (delta(0) != 0.0)
    throw ConfigError("grm: delta is anchored at 0 for the first cutpoint");
  for (int h = 1; h < delta.size(); ++h) {
    if (!(delta(h) > delta(h - 1)))
      throw ConfigError("grm: category offsets must be strictly increasing");
  }
}

GrmPrior GrmPrior::from_hyper(double value, Convention convention) {
  if (value <= 0.0) throw ConfigError("grm prior: hyperparameter must be positive");
  GrmPrior prior;
  const double sd = convention == Convention::precision
                        ? 1.0 / std::sqrt(value)
                        : std::sqrt(value);
  prior.sd_item = sd;
  prior.sd_delta = sd;
  prior.sd_alpha = sd;
  return prior;
}

void GrmPrior::validate() const {
  if (sigma2_theta <= 0.0)
    throw ConfigError("grm prior: sigma2_theta must be positive");
  if (sd_item <= 0.0 || sd_delta <= 0.0 || sd_alpha <= 0.0)
    throw ConfigError("grm prior: standard deviations must be positive");
}

double cumulative_prob(double theta, double gamma, double beta_jh) {
  if (!(gamma > 0.0))
    throw ConfigError("grm: discrimination must be positive");
  return logistic(gamma * (theta - beta_jh));
}

namespace {

// Clamp keeps log() finite when a category probability underflows; the
// sampler then simply rejects moves into that region.
constexpr double kTinyProb = 1e-300;

void check_delta(const Eigen::VectorXd& delta) {
  if (delta.size() < 1)
    throw ConfigError("grm: need at least 2 response categories");
  for (int h = 1; h < delta.size(); ++h) {
    if (!(delta(h) > delta(h - 1)))
      throw ConfigError("grm: category offsets must be strictly increasing");
  }
}

// P(Y = category) without revalidating delta; category is 1-based.
double category_prob_unchecked(double theta, double gamma, double beta_j,
                               const Eigen::VectorXd& delta, int category) {
  const int h_max = static_cast<int>(delta.size()) + 1;
  const double upper =
      category == 1
          ? 1.0
          : logistic(gamma * (theta - (beta_j + delta(category - 2))));
  const double lower =
      category == h_max
          ? 0.0
          : logistic(gamma * (theta - (beta_j + delta(category - 1))));
  return upper - lower;
}

} // namespace

double category_prob(double theta, double gamma, double beta_j,
                     const Eigen::VectorXd& delta, int category) {
  if (!(gamma > 0.0))
    throw ConfigError("grm: discrimination must be positive");
  check_delta(delta);
  const int h_max = static_cast<int>(delta.size()) + 1;
  if (category < 1 || category > h_max)
    throw ConfigError("grm: category out of range: " + fmt_int(category));
  return category_prob_unchecked(theta, gamma, beta_j, delta, category);
}

double grm_loglik(const GrmParams& params, const Eigen::MatrixXi& data) {
  params.validate();
  const int n = static_cast<int>(data.rows());
  const int m = static_cast<int>(data.cols());
  if (params.theta.size() != n || params.beta.size() != m)
    throw ConfigError("grm: parameter dimensions do not match the data");
  const int h_max = params.n_categories();
  double total = 0.0;
  for (int j = 0; j < m; ++j) {
    const double gamma = params.gamma(j);
    for (int i = 0; i < n; ++i) {
      const int y = data(i, j);
      if (y < 1 || y > h_max)
        throw DataError("grm: incomplete or out-of-range cell at row " +
                        fmt_int(i + 1) + ", item " + fmt_int(j + 1) + ": " +
                        fmt_int(y));
      const double p = category_prob_unchecked(params.theta(i), gamma,
                                               params.beta(j), params.delta, y);
      total += std::log(std::max(p, kTinyProb));
    }
  }
  return total;
}

GelmanRubinResult gelman_rubin(const std::vector<std::vector<double>>& chains) {
  if (chains.size() < 2)
    throw ConfigError("gelman_rubin: need at least 2 chains");
  const std::size_t n_d = chains.front().size();
  if (n_d < 2) throw ConfigError("gelman_rubin: need at least 2 draws per chain");
  for (const auto& chain : chains) {
    if (chain.size() != n_d)
      throw ConfigError("gelman_rubin: chains must have equal lengths");
  }

  std::vector<double> chain_means;
  double w = 0.0;
  for (const auto& chain : chains) {
    chain_means.push_back(mean(chain));
    w += sample_variance(chain);
  }
  w /= static_cast<double>(chains.size());
  const double b = static_cast<double>(n_d) * sample_variance(chain_means);

  GelmanRubinResult result;
  if (w == 0.0) {
    result.degenerate = true;
    result.rhat = std::numeric_limits<double>::quiet_NaN();
    return result;
  }
  const double nd = static_cast<double>(n_d);
  result.rhat = std::sqrt(((nd - 1.0) / nd * w + b / nd) / w);
  return result;
}

namespace {

// One chain of the sampler. Caches per-cell log-likelihoods so each
// single-site proposal touches only its own row, column, or category band.
class GrmChain {
public:
  GrmChain(const Eigen::MatrixXi& data, int n_categories,
           const Eigen::MatrixXd& covariates, const GrmPrior& prior,
           const McmcConfig& config, int chain_index)
      : data_(data),
        x_(covariates),
        prior_(prior),
        config_(config),
        n_(static_cast<int>(data.rows())),
        m_(static_cast<int>(data.cols())),
        h_(n_categories),
        k_(static_cast<int>(covariates.cols())),
        rng_(Rng::substream(config.seed, static_cast<std::uint64_t>(chain_index))) {
    // Deterministic start inside the valid region.
    params_.theta = Eigen::VectorXd::Zero(n_);
    params_.beta = Eigen::VectorXd::Zero(m_);
    params_.log_gamma = Eigen::VectorXd::Zero(m_);
    params_.delta = Eigen::VectorXd::LinSpaced(h_ - 1, 0.0, h_ - 2.0);
    if (h_ == 2) params_.delta = Eigen::VectorXd::Zero(1);
    params_.alpha = Eigen::VectorXd::Zero(k_);

    resid_ = params_.theta - x_ * params_.alpha;

    cells_by_category_.resize(h_ + 1);
    for (int j = 0; j < m_; ++j) {
      for (int i = 0; i < n_; ++i)
        cells_by_category_[data_(i, j)].push_back({i, j});
    }

    cll_ = Eigen::MatrixXd::Zero(n_, m_);
    for (int j = 0; j < m_; ++j) {
      for (int i = 0; i < n_; ++i) cll_(i, j) = cell_ll(i, j, params_);
    }

    row_buffer_.resize(m_);

    theta_scales_.assign(n_, AdaptiveScale(1.0));
    item_scales_.assign(m_, AdaptiveScale(0.25));
    delta_scales_.assign(std::max(0, h_ - 2), AdaptiveScale(0.25));
    alpha_scales_.assign(k_, AdaptiveScale(0.25));
  }

  std::vector<GrmDraw> run() {
    std::vector<GrmDraw> draws;
    draws.reserve(config_.retained_per_chain());
    for (int sweep = 1; sweep <= config_.iterations; ++sweep) {
      const bool adapting = sweep <= config_.burn_in;
      update_thetas(sweep, adapting);
      update_items(sweep, adapting);
      update_deltas(sweep, adapting);
      update_alphas(sweep, adapting);
      if (config_.keep(sweep))
        draws.push_back({params_.theta, params_.beta, params_.log_gamma,
                         params_.delta, params_.alpha});
    }
    return draws;
  }

private:
  double cell_ll(int i, int j, const GrmParams& params) const {
    const double p =
        category_prob_unchecked(params.theta(i), std::exp(params.log_gamma(j)),
                                params.beta(j), params.delta, data_(i, j));
    return std::log(std::max(p, kTinyProb));
  }

  void check_finite(double log_accept) const {
    if (!std::isfinite(log_accept) && !(log_accept < 0.0))
      throw NumericalError("grm: non-finite acceptance ratio");
  }

  void update_thetas(int sweep, bool adapting) {
    GrmParams cand = params_;
    for (int i = 0; i < n_; ++i) {
      const double current = params_.theta(i);
      const double proposal = current + theta_scales_[i].scale() * rng_.normal();
      cand.theta(i) = proposal;

      double log_accept = 0.0;
      for (int j = 0; j < m_; ++j) {
        row_buffer_[j] = cell_ll(i, j, cand);
        log_accept += row_buffer_[j] - cll_(i, j);
      }
      // Latent regression prior: θ_i ~ N(x_iᵀα, σ²_θ); the residual vector
      // tracks θ - Xα, so the prior mean is θ_i - resid_i.
      const double mu = current - resid_(i);
      log_accept += -0.5 * ((proposal - mu) * (proposal - mu) -
                            (current - mu) * (current - mu)) /
                    prior_.sigma2_theta;
      check_finite(log_accept);

      if (rng_.log_uniform() < log_accept) {
        params_.theta(i) = proposal;
        resid_(i) += proposal - current;
        for (int j = 0; j < m_; ++j) cll_(i, j) = row_buffer_[j];
      } else {
        cand.theta(i) = current;
      }
      if (adapting)
        theta_scales_[i].adapt(accept_prob_from_log(log_accept), sweep);
    }
  }

  void update_items(int sweep, bool adapting) {
    GrmParams cand = params_;
    Eigen::VectorXd col_buffer(n_);
    for (int j = 0; j < m_; ++j) {
      const double beta_cur = params_.beta(j);
      const double lg_cur = params_.log_gamma(j);
      const double scale = item_scales_[j].scale();
      const double beta_prop = beta_cur + scale * rng_.normal();
      const double lg_prop = lg_cur + scale * rng_.normal();
      cand.beta(j) = beta_prop;
      cand.log_gamma(j) = lg_prop;

      double log_accept = 0.0;
      for (int i = 0; i < n_; ++i) {
        col_buffer(i) = cell_ll(i, j, cand);
        log_accept += col_buffer(i) - cll_(i, j);
      }
      const double sd2 = prior_.sd_item * prior_.sd_item;
      log_accept += -0.5 * (beta_prop * beta_prop - beta_cur * beta_cur) / sd2;
      log_accept += -0.5 * (lg_prop * lg_prop - lg_cur * lg_cur) / sd2;
      check_finite(log_accept);

      if (rng_.log_uniform() < log_accept) {
        params_.beta(j) = beta_prop;
        params_.log_gamma(j) = lg_prop;
        cll_.col(j) = col_buffer;
      } else {
        cand.beta(j) = beta_cur;
        cand.log_gamma(j) = lg_cur;
      }
      if (adapting)
        item_scales_[j].adapt(accept_prob_from_log(log_accept), sweep);
    }
  }

  void update_deltas(int sweep, bool adapting) {
    // Free offsets are indices 1..H-2; index 0 stays anchored at zero.
    // Moving delta(k) changes the cutpoint between categories k+1 and k+2,
    // so only cells observed in those two categories contribute.
    GrmParams cand = params_;
    for (int k = 1; k <= h_ - 2; ++k) {
      const double current = params_.delta(k);
      const double proposal =
          current + delta_scales_[k - 1].scale() * rng_.normal();

      const double lower = params_.delta(k - 1);
      const double upper =
          k + 1 < h_ - 1 ? params_.delta(k + 1)
                         : std::numeric_limits<double>::infinity();
      if (!(proposal > lower && proposal < upper)) {
        if (adapting) delta_scales_[k - 1].adapt(0.0, sweep);
        continue;
      }
      cand.delta(k) = proposal;

      double log_accept = 0.0;
      cell_buffer_.clear();
      for (int cat = k + 1; cat <= k + 2; ++cat) {
        for (const auto& [i, j] : cells_by_category_[cat]) {
          const double ll = cell_ll(i, j, cand);
          cell_buffer_.push_back(ll);
          log_accept += ll - cll_(i, j);
        }
      }
      const double sd2 = prior_.sd_delta * prior_.sd_delta;
      log_accept += -0.5 * (proposal * proposal - current * current) / sd2;
      check_finite(log_accept);

      if (rng_.log_uniform() < log_accept) {
        params_.delta(k) = proposal;
        std::size_t pos = 0;
        for (int cat = k + 1; cat <= k + 2; ++cat) {
          for (const auto& [i, j] : cells_by_category_[cat])
            cll_(i, j) = cell_buffer_[pos++];
        }
      } else {
        cand.delta(k) = current;
      }
      if (adapting)
        delta_scales_[k - 1].adapt(accept_prob_from_log(log_accept), sweep);
    }
  }

  void update_alphas(int sweep, bool adapting) {
    for (int k = 0; k < k_; ++k) {
      const double current = params_.alpha(k);
      const double proposal = current + alpha_scales_[k].scale() * rng_.normal();
      const double delta = proposal - current;

      // Only the latent-regression likelihood and the α prior move.
      double log_accept = 0.0;
      for (int i = 0; i < n_; ++i) {
        const double r_new = resid_(i) - delta * x_(i, k);
        log_accept += -0.5 * (r_new * r_new - resid_(i) * resid_(i)) /
                      prior_.sigma2_theta;
      }
      const double sd2 = prior_.sd_alpha * prior_.sd_alpha;
      log_accept += -0.5 * (proposal * proposal - current * current) / sd2;
      check_finite(log_accept);

      if (rng_.log_uniform() < log_accept) {
        params_.alpha(k) = proposal;
        resid_ -= delta * x_.col(k);
      }
      if (adapting)
        alpha_scales_[k].adapt(accept_prob_from_log(log_accept), sweep);
    }
  }

  const Eigen::MatrixXi& data_;
  const Eigen::MatrixXd& x_;
  GrmPrior prior_;
  McmcConfig config_;
  int n_, m_, h_, k_;
  Rng rng_;

  GrmParams params_;
  Eigen::VectorXd resid_; // θ - Xα
  Eigen::MatrixXd cll_;   // cached per-cell log-likelihood
  std::vector<std::vector<std::pair<int, int>>> cells_by_category_;
  std::vector<double> row_buffer_;
  std::vector<double> cell_buffer_;

  std::vector<AdaptiveScale> theta_scales_;
  std::vector<AdaptiveScale> item_scales_;
  std::vector<AdaptiveScale> delta_scales_;
  std::vector<AdaptiveScale> alpha_scales_;
};

} // namespace

GrmPosterior fit_grm(const Eigen::MatrixXi& data, int n_categories,
                     const Eigen::MatrixXd& covariates, const GrmPrior& prior,
                     const McmcConfig& config,
                     std::vector<std::string> item_names,
                     std::vector<std::string> covariate_names) {
  prior.validate();
  config.validate();
  if (n_categories < 2)
    throw ConfigError("grm: need at least 2 response categories");
  if (data.cols() < 1) throw ConfigError("grm: need at least one item");
  if (covariates.rows() != data.rows())
    throw DataError("grm: covariate row count does not match the data");
  for (int j = 0; j < data.cols(); ++j) {
    for (int i = 0; i < data.rows(); ++i) {
      const int y = data(i, j);
      if (y < 1 || y > n_categories)
        throw DataError("grm: incomplete or out-of-range cell at row " +
                        fmt_int(i + 1) + ", item " + fmt_int(j + 1) + ": " +
                        fmt_int(y));
    }
  }
  if (!item_names.empty() &&
      item_names.size() != static_cast<std::size_t>(data.cols()))
    throw ConfigError("grm: item name count mismatch");
  if (!covariate_names.empty() &&
      covariate_names.size() != static_cast<std::size_t>(covariates.cols()))
    throw ConfigError("grm: covariate name count mismatch");
  if (item_names.empty()) {
    for (int j = 0; j < data.cols(); ++j)
      item_names.push_back("I" + fmt_int(j + 1));
  }
  if (covariate_names.empty()) {
    for (int k = 0; k < covariates.cols(); ++k)
      covariate_names.push_back("X" + fmt_int(k + 1));
  }

  GrmPosterior post;
  post.config = config;
  post.prior = prior;
  post.n = static_cast<int>(data.rows());
  post.n_items = static_cast<int>(data.cols());
  post.n_categories = n_categories;
  post.n_covariates = static_cast<int>(covariates.cols());
  post.item_names = std::move(item_names);
  post.covariate_names = std::move(covariate_names);

  std::vector<std::future<std::vector<GrmDraw>>> futures;
  for (int c = 0; c < config.chains; ++c) {
    futures.push_back(std::async(std::launch::async, [&, c] {
      GrmChain chain(data, n_categories, covariates, prior, config, c);
      return chain.run();
    }));
  }
  for (auto& f : futures) post.chains.push_back(f.get());
  return post;
}

namespace {

// Apply a scalar extractor across chains; used for summaries and R-hat.
template <typename F>
std::vector<std::vector<double>> per_chain_scalars(const GrmPosterior& post,
                                                   F&& extract) {
  std::vector<std::vector<double>> out;
  for (const auto& chain : post.chains) {
    std::vector<double> values;
    values.reserve(chain.size());
    for (const auto& draw : chain) values.push_back(extract(draw));
    out.push_back(std::move(values));
  }
  return out;
}

template <typename F>
ScalarSummary summarize_scalar(const GrmPosterior& post, std::string name,
                               F&& extract) {
  const auto chains = per_chain_scalars(post, extract);
  std::vector<double> pooled;
  for (const auto& chain : chains)
    pooled.insert(pooled.end(), chain.begin(), chain.end());

  ScalarSummary s;
  s.name = std::move(name);
  s.mean = mean(pooled);
  s.sd = std::sqrt(sample_variance(pooled));
  s.ci_low = quantile(pooled, 0.025);
  s.ci_high = quantile(pooled, 0.975);
  if (chains.size() >= 2 && chains.front().size() >= 2) {
    const auto gr = gelman_rubin(chains);
    s.rhat = gr.rhat;
    s.rhat_degenerate = gr.degenerate;
  } else {
    s.rhat = std::numeric_limits<double>::quiet_NaN();
    s.rhat_degenerate = true;
  }
  return s;
}

} // namespace

std::vector<ScalarSummary> summarize(const GrmPosterior& post) {
  if (post.chains.empty() || post.chains.front().empty())
    throw ConfigError("grm: posterior has no draws");
  std::vector<ScalarSummary> out;
  for (int k = 0; k < post.n_covariates; ++k) {
    out.push_back(summarize_scalar(
        post, "alpha[" + post.covariate_names[k] + "]",
        [k](const GrmDraw& d) { return d.alpha(k); }));
  }
  for (int j = 0; j < post.n_items; ++j) {
    out.push_back(summarize_scalar(
        post, "beta[" + post.item_names[j] + "]",
        [j](const GrmDraw& d) { return d.beta(j); }));
  }
  for (int j = 0; j < post.n_items; ++j) {
    out.push_back(summarize_scalar(
        post, "gamma[" + post.item_names[j] + "]",
        [j](const GrmDraw& d) { return std::exp(d.log_gamma(j)); }));
  }
  for (int h = 1; h <= post.n_categories - 2; ++h) {
    out.push_back(summarize_scalar(
        post, "delta[" + fmt_int(h + 1) + "]",
        [h](const GrmDraw& d) { return d.delta(h); }));
  }
  for (int i = 0; i < post.n; ++i) {
    out.push_back(summarize_scalar(
        post, "theta[" + fmt_int(i + 1) + "]",
        [i](const GrmDraw& d) { return d.theta(i); }));
  }
  return out;
}

std::vector<DiscriminationRank> rank_discrimination(const GrmPosterior& post) {
  if (post.chains.empty() || post.chains.front().empty())
    throw ConfigError("grm: posterior has no draws");
  std::vector<DiscriminationRank> ranks;
  std::vector<double> pooled;
  for (int j = 0; j < post.n_items; ++j) {
    pooled.clear();
    for (const auto& chain : post.chains) {
      for (const auto& draw : chain) pooled.push_back(std::exp(draw.log_gamma(j)));
    }
    DiscriminationRank r;
    r.item = j;
    r.name = post.item_names[j];
    r.gamma_mean = mean(pooled);
    r.ci_low = quantile(pooled, 0.025);
    r.ci_high = quantile(pooled, 0.975);
    ranks.push_back(std::move(r));
  }
  std::stable_sort(ranks.begin(), ranks.end(),
                   [](const DiscriminationRank& a, const DiscriminationRank& b) {
                     if (a.gamma_mean != b.gamma_mean)
                       return a.gamma_mean > b.gamma_mean;
                     return a.item < b.item;
                   });
  return ranks;
}

std::vector<CovariateEffect> covariate_effects(const GrmPosterior& post) {
  if (post.chains.empty() || post.chains.front().empty())
    throw ConfigError("grm: posterior has no draws");
  std::vector<CovariateEffect> effects;
  std::vector<double> pooled;
  for (int k = 0; k < post.n_covariates; ++k) {
    pooled.clear();
    std::int64_t positive = 0;
    for (const auto& chain : post.chains) {
      for (const auto& draw : chain) {
        pooled.push_back(draw.alpha(k));
        if (draw.alpha(k) > 0.0) ++positive;
      }
    }
    CovariateEffect e;
    e.index = k;
    e.name = post.covariate_names[k];
    e.mean = mean(pooled);
    e.sd = std::sqrt(sample_variance(pooled));
    e.ci_low = quantile(pooled, 0.025);
    e.ci_high = quantile(pooled, 0.975);
    e.prob_positive =
        static_cast<double>(positive) / static_cast<double>(pooled.size());
    effects.push_back(std::move(e));
  }
  return effects;
}

} // namespace ordbayes
