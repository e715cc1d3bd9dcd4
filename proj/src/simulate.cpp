#include "ordbayes/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ordbayes/errors.hpp"
#include "ordbayes/format.hpp"

namespace ordbayes {

void GrmSimSpec::validate() const {
  if (n < 0) throw ConfigError("sim: n must be nonnegative");
  if (items.empty()) throw ConfigError("sim: need at least one item");
  if (delta.size() < 1) throw ConfigError("sim: need at least 2 categories");
  if (delta(0) != 0.0)
    throw ConfigError("sim: delta is anchored at 0 for the first cutpoint");
  for (int h = 1; h < delta.size(); ++h) {
    if (!(delta(h) > delta(h - 1)))
      throw ConfigError("sim: delta must be strictly increasing");
  }
  for (const auto& item : items) {
    if (!(item.gamma > 0.0))
      throw ConfigError("sim: item " + item.abbr +
                        " needs positive discrimination");
  }
  for (const auto& cov : covariates) {
    if (cov.def.kind == CovariateKind::numeric) {
      if (cov.sd < 0.0) throw ConfigError("sim: negative sd for " + cov.def.name);
      continue;
    }
    if (cov.probs.size() != cov.def.levels.size())
      throw ConfigError("sim: level probabilities for " + cov.def.name +
                        " do not match the declared levels");
    double total = 0.0;
    for (double p : cov.probs) {
      if (p < 0.0) throw ConfigError("sim: negative probability for " + cov.def.name);
      total += p;
    }
    if (std::abs(total - 1.0) > 1e-9)
      throw ConfigError("sim: level probabilities for " + cov.def.name +
                        " must sum to 1");
  }
}

GrmSimSpec GrmSimSpec::from_json(const nlohmann::json& j) {
  GrmSimSpec spec;
  spec.seed = j.at("seed").get<std::uint64_t>();
  spec.n = j.at("n").get<int>();
  const auto delta = j.at("delta").get<std::vector<double>>();
  spec.delta = Eigen::Map<const Eigen::VectorXd>(delta.data(),
                                                 static_cast<int>(delta.size()));
  for (const auto& ji : j.at("items")) {
    GrmSimItem item;
    item.abbr = ji.at("abbr").get<std::string>();
    if (ji.contains("section"))
      item.section = section_from_string(ji.at("section").get<std::string>());
    if (ji.contains("category_labels"))
      item.category_labels =
          ji.at("category_labels").get<std::vector<std::string>>();
    item.beta = ji.at("beta").get<double>();
    item.gamma = ji.at("gamma").get<double>();
    spec.items.push_back(std::move(item));
  }
  if (j.contains("covariates")) {
    for (const auto& jc : j.at("covariates")) {
      SimCovariate cov;
      cov.def.name = jc.at("name").get<std::string>();
      cov.def.kind = covariate_kind_from_string(jc.at("kind").get<std::string>());
      if (jc.contains("levels"))
        cov.def.levels = jc.at("levels").get<std::vector<std::string>>();
      if (jc.contains("probs"))
        cov.probs = jc.at("probs").get<std::vector<double>>();
      if (jc.contains("mean")) cov.mean = jc.at("mean").get<double>();
      if (jc.contains("sd")) cov.sd = jc.at("sd").get<double>();
      if (jc.contains("alpha")) cov.alpha = jc.at("alpha").get<double>();
      spec.covariates.push_back(std::move(cov));
    }
  }
  spec.validate();
  return spec;
}

int sample_grm_category(Rng& rng, double theta, double gamma, double beta,
                        const Eigen::VectorXd& delta) {
  const int h_max = static_cast<int>(delta.size()) + 1;
  const double u = rng.uniform();
  double cumulative = 0.0;
  for (int h = 1; h < h_max; ++h) {
    cumulative += category_prob(theta, gamma, beta, delta, h);
    if (u < cumulative) return h;
  }
  return h_max;
}

GrmSimResult gen_grm(const GrmSimSpec& spec) {
  spec.validate();
  const int n = spec.n;
  const int m = static_cast<int>(spec.items.size());
  const int k = static_cast<int>(spec.covariates.size());
  const int h = static_cast<int>(spec.delta.size()) + 1;

  std::vector<ItemDef> item_defs;
  for (const auto& item : spec.items) {
    ItemDef def;
    def.abbr = item.abbr;
    def.section = item.section;
    def.n_categories = h;
    def.category_labels = item.category_labels;
    if (def.category_labels.empty()) {
      for (int c = 1; c <= h; ++c) def.category_labels.push_back(fmt_int(c));
    }
    item_defs.push_back(std::move(def));
  }
  std::vector<CovariateDef> cov_defs;
  for (const auto& cov : spec.covariates) cov_defs.push_back(cov.def);
  Codebook codebook(std::move(item_defs), std::move(cov_defs));

  Eigen::MatrixXi responses(n, m);
  Eigen::MatrixXd covariates(n, k);
  Eigen::MatrixXd design(n, k);

  GrmParams truth;
  truth.theta.resize(n);
  truth.beta.resize(m);
  truth.log_gamma.resize(m);
  for (int j = 0; j < m; ++j) {
    truth.beta(j) = spec.items[j].beta;
    truth.log_gamma(j) = std::log(spec.items[j].gamma);
  }
  truth.delta = spec.delta;
  truth.alpha.resize(k);
  for (int c = 0; c < k; ++c) truth.alpha(c) = spec.covariates[c].alpha;

  Rng rng = Rng::substream(spec.seed, 0);
  for (int i = 0; i < n; ++i) {
    double xa = 0.0;
    for (int c = 0; c < k; ++c) {
      const auto& cov = spec.covariates[c];
      double value;
      if (cov.def.kind == CovariateKind::numeric) {
        value = rng.normal(cov.mean, cov.sd);
      } else {
        const double u = rng.uniform();
        double cumulative = 0.0;
        int level = static_cast<int>(cov.probs.size()) - 1;
        for (std::size_t l = 0; l < cov.probs.size(); ++l) {
          cumulative += cov.probs[l];
          if (u < cumulative) {
            level = static_cast<int>(l);
            break;
          }
        }
        value = static_cast<double>(level);
      }
      covariates(i, c) = value;
      design(i, c) = value;
      xa += value * cov.alpha;
    }
    truth.theta(i) = rng.normal(xa, 1.0);
    for (int j = 0; j < m; ++j) {
      responses(i, j) = sample_grm_category(rng, truth.theta(i),
                                            spec.items[j].gamma,
                                            spec.items[j].beta, spec.delta);
    }
  }

  return {SurveyDataset(std::move(codebook), std::move(responses),
                        std::move(covariates)),
          std::move(truth), std::move(design)};
}

MrfJointTable::MrfJointTable(std::vector<int> n_levels,
                             std::vector<double> probs)
    : n_levels_(std::move(n_levels)), probs_(std::move(probs)) {
  strides_.resize(n_levels_.size());
  std::int64_t stride = 1;
  // Last variable varies fastest.
  for (int i = static_cast<int>(n_levels_.size()) - 1; i >= 0; --i) {
    strides_[i] = stride;
    stride *= n_levels_[i];
  }
  if (stride != static_cast<std::int64_t>(probs_.size()))
    throw ConfigError("mrf joint table: probability count mismatch");
}

std::int64_t MrfJointTable::index(const Eigen::VectorXi& config) const {
  if (config.size() != static_cast<int>(n_levels_.size()))
    throw ConfigError("mrf joint table: configuration length mismatch");
  std::int64_t idx = 0;
  for (int i = 0; i < config.size(); ++i) {
    if (config(i) < 0 || config(i) >= n_levels_[i])
      throw ConfigError("mrf joint table: configuration out of range");
    idx += strides_[i] * config(i);
  }
  return idx;
}

Eigen::VectorXi MrfJointTable::config_at(std::int64_t index) const {
  Eigen::VectorXi config(static_cast<int>(n_levels_.size()));
  for (std::size_t i = 0; i < n_levels_.size(); ++i) {
    config(static_cast<int>(i)) = static_cast<int>(index / strides_[i]) % n_levels_[i];
  }
  return config;
}

double MrfJointTable::prob(const Eigen::VectorXi& config) const {
  return probs_[static_cast<std::size_t>(index(config))];
}

Eigen::VectorXd MrfJointTable::conditional(const Eigen::VectorXi& config,
                                           int var) const {
  if (var < 0 || var >= static_cast<int>(n_levels_.size()))
    throw ConfigError("mrf joint table: variable index out of range");
  Eigen::VectorXi probe = config;
  Eigen::VectorXd weights(n_levels_[var]);
  for (int c = 0; c < n_levels_[var]; ++c) {
    probe(var) = c;
    weights(c) = prob(probe);
  }
  const double total = weights.sum();
  if (total <= 0.0)
    throw NumericalError("mrf joint table: zero conditional mass");
  return weights / total;
}

MrfJointTable enumerate_mrf_joint(const MrfState& state) {
  state.validate();
  const int p = state.n_vars();
  std::int64_t count = 1;
  for (int levels : state.n_levels()) {
    count *= levels;
    if (count > kMrfEnumerationCap)
      throw ConfigError("mrf enumeration: more than " +
                        fmt_int(kMrfEnumerationCap) + " configurations");
  }

  // Unnormalized log weights via an odometer over configurations, then a
  // single log-sum-exp normalization.
  std::vector<double> log_weights(static_cast<std::size_t>(count));
  Eigen::VectorXi config = Eigen::VectorXi::Zero(p);
  double max_lw = -std::numeric_limits<double>::infinity();
  for (std::int64_t idx = 0; idx < count; ++idx) {
    double lw = 0.0;
    for (int i = 0; i < p; ++i) {
      const int c = config(i);
      if (c >= 1) lw += state.thresholds[i](c - 1);
      for (int j = i + 1; j < p; ++j) lw += state.theta(i, j) * c * config(j);
    }
    log_weights[static_cast<std::size_t>(idx)] = lw;
    max_lw = std::max(max_lw, lw);
    // Advance the odometer; last variable fastest to match index().
    for (int i = p - 1; i >= 0; --i) {
      if (++config(i) < state.n_levels()[i]) break;
      config(i) = 0;
    }
  }

  double sum = 0.0;
  for (double lw : log_weights) sum += std::exp(lw - max_lw);
  const double log_norm = max_lw + std::log(sum);
  std::vector<double> probs(log_weights.size());
  for (std::size_t i = 0; i < log_weights.size(); ++i)
    probs[i] = std::exp(log_weights[i] - log_norm);
  return MrfJointTable(state.n_levels(), std::move(probs));
}

namespace {

Eigen::MatrixXi gen_mrf_exact(const MrfState& state, int n, Rng& rng) {
  const MrfJointTable table = enumerate_mrf_joint(state);
  std::vector<double> cumulative(table.probs().size());
  std::partial_sum(table.probs().begin(), table.probs().end(),
                   cumulative.begin());

  Eigen::MatrixXi sample(n, state.n_vars());
  for (int r = 0; r < n; ++r) {
    const double u = rng.uniform();
    const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    const auto idx = static_cast<std::int64_t>(
        std::min<std::ptrdiff_t>(it - cumulative.begin(),
                                 static_cast<std::ptrdiff_t>(cumulative.size()) - 1));
    sample.row(r) = table.config_at(idx).transpose();
  }
  return sample;
}

void gibbs_sweep(const MrfState& state, Eigen::VectorXi& x, Rng& rng) {
  const int p = state.n_vars();
  for (int i = 0; i < p; ++i) {
    double rest = 0.0;
    for (int j = 0; j < p; ++j) {
      if (j != i) rest += state.theta(i, j) * x(j);
    }
    const Eigen::VectorXd& mu = state.thresholds[i];
    const int m = static_cast<int>(mu.size());
    double max_l = 0.0;
    for (int c = 1; c <= m; ++c)
      max_l = std::max(max_l, mu(c - 1) + c * rest);
    double total = std::exp(-max_l);
    std::vector<double> cumulative(m + 1);
    cumulative[0] = total;
    for (int c = 1; c <= m; ++c) {
      total += std::exp(mu(c - 1) + c * rest - max_l);
      cumulative[c] = total;
    }
    const double u = rng.uniform() * total;
    int category = 0;
    while (category < m && u > cumulative[category]) ++category;
    x(i) = category;
  }
}

Eigen::MatrixXi gen_mrf_gibbs(const MrfState& state, int n, Rng& rng,
                              const GibbsOptions& options) {
  const int p = state.n_vars();
  Eigen::VectorXi x = Eigen::VectorXi::Zero(p);
  for (int sweep = 0; sweep < options.burn_in_sweeps; ++sweep)
    gibbs_sweep(state, x, rng);

  Eigen::MatrixXi sample(n, p);
  for (int r = 0; r < n; ++r) {
    for (int sweep = 0; sweep < options.spacing_sweeps; ++sweep)
      gibbs_sweep(state, x, rng);
    sample.row(r) = x.transpose();
  }
  return sample;
}

} // namespace

Eigen::MatrixXi gen_mrf(const MrfState& state, int n, std::uint64_t seed,
                        const GibbsOptions& options) {
  state.validate();
  if (n < 0) throw ConfigError("gen_mrf: n must be nonnegative");
  if (options.burn_in_sweeps < 0 || options.spacing_sweeps < 1)
    throw ConfigError("gen_mrf: invalid Gibbs options");

  std::int64_t count = 1;
  bool exact = !options.force_gibbs;
  for (int levels : state.n_levels()) {
    count *= levels;
    if (count > kMrfEnumerationCap) {
      exact = false;
      break;
    }
  }

  Rng rng = Rng::substream(seed, 0);
  return exact ? gen_mrf_exact(state, n, rng)
               : gen_mrf_gibbs(state, n, rng, options);
}

MrfSimSpec MrfSimSpec::from_json(const nlohmann::json& j) {
  MrfSimSpec spec;
  spec.seed = j.at("seed").get<std::uint64_t>();
  spec.n = j.at("n").get<int>();
  const auto n_levels = j.at("n_levels").get<std::vector<int>>();
  spec.state = MrfState(n_levels);
  if (j.contains("thresholds")) {
    const auto thresholds = j.at("thresholds").get<std::vector<std::vector<double>>>();
    if (thresholds.size() != n_levels.size())
      throw ConfigError("sim: thresholds count does not match n_levels");
    for (std::size_t i = 0; i < thresholds.size(); ++i) {
      if (static_cast<int>(thresholds[i].size()) != n_levels[i] - 1)
        throw ConfigError("sim: threshold length mismatch at variable " +
                          fmt_int(static_cast<std::int64_t>(i)));
      spec.state.thresholds[i] = Eigen::Map<const Eigen::VectorXd>(
          thresholds[i].data(), static_cast<int>(thresholds[i].size()));
    }
  }
  if (j.contains("edges")) {
    for (const auto& je : j.at("edges")) {
      spec.state.set_edge(je.at("a").get<int>(), je.at("b").get<int>(),
                          je.at("theta").get<double>());
    }
  }
  if (j.contains("names"))
    spec.names = j.at("names").get<std::vector<std::string>>();
  if (j.contains("gibbs")) {
    const auto& jg = j.at("gibbs");
    if (jg.contains("burn_in"))
      spec.gibbs.burn_in_sweeps = jg.at("burn_in").get<int>();
    if (jg.contains("spacing"))
      spec.gibbs.spacing_sweeps = jg.at("spacing").get<int>();
  }
  spec.state.validate();
  return spec;
}

SurveyDataset mrf_sample_to_dataset(const Eigen::MatrixXi& sample,
                                    const std::vector<int>& n_levels,
                                    const std::vector<std::string>& names) {
  if (sample.cols() != static_cast<int>(n_levels.size()))
    throw ConfigError("mrf sample: column count mismatch");
  if (!names.empty() && names.size() != n_levels.size())
    throw ConfigError("mrf sample: name count mismatch");

  std::vector<ItemDef> items;
  for (std::size_t i = 0; i < n_levels.size(); ++i) {
    ItemDef def;
    def.abbr = names.empty() ? "V" + fmt_int(static_cast<std::int64_t>(i + 1))
                             : names[i];
    def.n_categories = n_levels[i];
    for (int c = 1; c <= n_levels[i]; ++c)
      def.category_labels.push_back(fmt_int(c));
    items.push_back(std::move(def));
  }
  Codebook codebook(std::move(items), {});
  Eigen::MatrixXi responses = sample.array() + 1;
  Eigen::MatrixXd covariates(sample.rows(), 0);
  return SurveyDataset(std::move(codebook), std::move(responses),
                       std::move(covariates));
}

} // namespace ordbayes
