#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "ordbayes/errors.hpp"
#include "ordbayes/grm.hpp"
#include "ordbayes/rng.hpp"
#include "ordbayes/simulate.hpp"
#include "ordbayes/stats.hpp"

using namespace ordbayes;

namespace {

Eigen::VectorXd delta3() {
  Eigen::VectorXd d(3);
  d << 0.0, 1.0, 2.0;
  return d;
}

McmcConfig quick_config(int iterations, int burn_in, int thin, int chains,
                        std::uint64_t seed) {
  McmcConfig config;
  config.iterations = iterations;
  config.burn_in = burn_in;
  config.thin = thin;
  config.chains = chains;
  config.seed = seed;
  return config;
}

GrmSimSpec simple_spec(int n, std::uint64_t seed,
                       const std::vector<double>& gammas,
                       const std::vector<double>& betas) {
  GrmSimSpec spec;
  spec.seed = seed;
  spec.n = n;
  spec.delta = delta3();
  for (std::size_t j = 0; j < gammas.size(); ++j) {
    GrmSimItem item;
    item.abbr = "I" + std::to_string(j + 1);
    item.beta = betas[j];
    item.gamma = gammas[j];
    spec.items.push_back(std::move(item));
  }
  return spec;
}

} // namespace

TEST_SUITE("grm") {

TEST_CASE("cumulative probability basics") {
  CHECK(cumulative_prob(1.3, 2.0, 1.3) == 0.5);
  CHECK(cumulative_prob(std::log(3.0), 1.0, 0.0) ==
        doctest::Approx(0.75).epsilon(1e-12));
  double prev = 0.0;
  for (double theta = -4.0; theta <= 4.0; theta += 0.25) {
    const double p = cumulative_prob(theta, 1.7, 0.4);
    CHECK(p > prev);
    prev = p;
  }
  CHECK_THROWS_AS(cumulative_prob(0.0, 0.0, 0.0), ConfigError);
  CHECK_THROWS_AS(cumulative_prob(0.0, -1.0, 0.0), ConfigError);
}

TEST_CASE("category probabilities: binary case reduces to a 2PL") {
  Eigen::VectorXd delta(1);
  delta << 0.0;
  const double p2 = category_prob(0.7, 1.4, 0.2, delta, 2);
  CHECK(p2 == doctest::Approx(logistic(1.4 * (0.7 - 0.2))).epsilon(1e-12));
  CHECK(category_prob(0.7, 1.4, 0.2, delta, 1) ==
        doctest::Approx(1.0 - p2).epsilon(1e-12));
}

TEST_CASE("category probabilities match the worked 4-category example") {
  const Eigen::VectorXd delta = delta3();
  CHECK(category_prob(0.0, 1.0, 0.0, delta, 1) ==
        doctest::Approx(0.5).epsilon(1e-12));
  CHECK(category_prob(0.0, 1.0, 0.0, delta, 2) ==
        doctest::Approx(logistic(0.0) - logistic(-1.0)).epsilon(1e-12));
  CHECK(category_prob(0.0, 1.0, 0.0, delta, 2) ==
        doctest::Approx(0.23105857863000487).epsilon(1e-10));
  CHECK(category_prob(0.0, 1.0, 0.0, delta, 3) ==
        doctest::Approx(logistic(-1.0) - logistic(-2.0)).epsilon(1e-12));
  CHECK(category_prob(0.0, 1.0, 0.0, delta, 4) ==
        doctest::Approx(logistic(-2.0)).epsilon(1e-12));
  CHECK(category_prob(0.0, 1.0, 0.0, delta, 4) ==
        doctest::Approx(0.11920292202211755).epsilon(1e-10));
}

TEST_CASE("category probabilities normalize for random parameters") {
  Rng rng(9);
  for (int rep = 0; rep < 1000; ++rep) {
    const int h = 2 + static_cast<int>(rng.below(4));
    Eigen::VectorXd delta(h - 1);
    delta(0) = 0.0;
    for (int k = 1; k < h - 1; ++k)
      delta(k) = delta(k - 1) + 0.05 + rng.uniform();
    const double theta = rng.normal(0.0, 2.0);
    const double gamma = std::exp(rng.normal(0.0, 0.5));
    const double beta = rng.normal(0.0, 1.0);
    double total = 0.0;
    for (int cat = 1; cat <= h; ++cat) {
      const double p = category_prob(theta, gamma, beta, delta, cat);
      CHECK(p >= 0.0);
      total += p;
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("telescoping: category mass equals adjacent cumulative difference") {
  const Eigen::VectorXd delta = delta3();
  const double theta = 0.8, gamma = 1.3, beta = -0.4;
  for (int cat = 1; cat <= 4; ++cat) {
    const double upper =
        cat == 1 ? 1.0 : cumulative_prob(theta, gamma, beta + delta(cat - 2));
    const double lower =
        cat == 4 ? 0.0 : cumulative_prob(theta, gamma, beta + delta(cat - 1));
    CHECK(category_prob(theta, gamma, beta, delta, cat) ==
          doctest::Approx(upper - lower).epsilon(1e-12));
  }
}

TEST_CASE("Pr(Y >= h) is nondecreasing in theta") {
  const Eigen::VectorXd delta = delta3();
  for (int h = 2; h <= 4; ++h) {
    double prev = -1.0;
    for (double theta = -5.0; theta <= 5.0; theta += 0.5) {
      double p_ge = 0.0;
      for (int cat = h; cat <= 4; ++cat)
        p_ge += category_prob(theta, 1.2, 0.3, delta, cat);
      CHECK(p_ge >= prev - 1e-12);
      prev = p_ge;
    }
  }
}

TEST_CASE("non-monotone offsets are rejected") {
  Eigen::VectorXd bad(3);
  bad << 0.0, 1.0, 0.5;
  CHECK_THROWS_AS(category_prob(0.0, 1.0, 0.0, bad, 2), ConfigError);
  Eigen::VectorXd unanchored(2);
  unanchored << 0.5, 1.0;
  GrmParams params;
  params.theta = Eigen::VectorXd::Zero(1);
  params.beta = Eigen::VectorXd::Zero(1);
  params.log_gamma = Eigen::VectorXd::Zero(1);
  params.delta = unanchored;
  params.alpha = Eigen::VectorXd::Zero(0);
  CHECK_THROWS_AS(params.validate(), ConfigError);
  CHECK_THROWS_AS(category_prob(0.0, 1.0, 0.0, delta3(), 5), ConfigError);
}

TEST_CASE("log-likelihood composes per-cell probabilities") {
  GrmParams params;
  params.theta = Eigen::VectorXd::Zero(1);
  params.beta = Eigen::VectorXd::Zero(1);
  params.log_gamma = Eigen::VectorXd::Zero(1);
  Eigen::VectorXd delta(1);
  delta << 0.0;
  params.delta = delta;
  params.alpha = Eigen::VectorXd::Zero(0);
  Eigen::MatrixXi cell(1, 1);
  cell << 2;
  CHECK(grm_loglik(params, cell) == doctest::Approx(std::log(0.5)).epsilon(1e-12));

  // Random 3 x 2 dataset: loglik equals the sum of per-cell logs.
  Rng rng(17);
  GrmParams p2;
  p2.theta = Eigen::VectorXd::Random(3);
  p2.beta = Eigen::VectorXd::Random(2);
  p2.log_gamma = Eigen::VectorXd::Random(2);
  p2.delta = delta3();
  p2.alpha = Eigen::VectorXd::Zero(0);
  Eigen::MatrixXi data(3, 2);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 2; ++j)
      data(i, j) = 1 + static_cast<int>(rng.below(4));
  double manual = 0.0;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 2; ++j) {
      manual += std::log(category_prob(p2.theta(i), std::exp(p2.log_gamma(j)),
                                       p2.beta(j), p2.delta, data(i, j)));
    }
  }
  CHECK(grm_loglik(p2, data) == doctest::Approx(manual).epsilon(1e-12));

  Eigen::MatrixXi bad = data;
  bad(1, 1) = 5; // out of range for H = 4
  CHECK_THROWS_AS(grm_loglik(p2, bad), DataError);
}

TEST_CASE("moving a response to a lower-probability category lowers loglik") {
  GrmParams params;
  params.theta = Eigen::VectorXd::Constant(1, 2.5);
  params.beta = Eigen::VectorXd::Zero(1);
  params.log_gamma = Eigen::VectorXd::Constant(1, std::log(1.5));
  params.delta = delta3();
  params.alpha = Eigen::VectorXd::Zero(0);
  Eigen::MatrixXi high(1, 1), low(1, 1);
  high << 4;
  low << 1; // far from theta = 2.5, much less likely
  CHECK(grm_loglik(params, high) > grm_loglik(params, low));
}

TEST_CASE("log-likelihood is invariant under joint item relabeling") {
  Rng rng(23);
  GrmParams params;
  params.theta = Eigen::VectorXd::Random(6);
  params.beta = Eigen::VectorXd::Random(4);
  params.log_gamma = Eigen::VectorXd::Random(4);
  params.delta = delta3();
  params.alpha = Eigen::VectorXd::Zero(0);
  Eigen::MatrixXi data(6, 4);
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 4; ++j)
      data(i, j) = 1 + static_cast<int>(rng.below(4));

  const std::vector<int> perm = {2, 0, 3, 1};
  GrmParams permuted = params;
  Eigen::MatrixXi data_perm(6, 4);
  for (int j = 0; j < 4; ++j) {
    permuted.beta(j) = params.beta(perm[j]);
    permuted.log_gamma(j) = params.log_gamma(perm[j]);
    data_perm.col(j) = data.col(perm[j]);
  }
  CHECK(grm_loglik(params, data) ==
        doctest::Approx(grm_loglik(permuted, data_perm)).epsilon(1e-12));
}

TEST_CASE("Gelman-Rubin closed forms") {
  const auto identical = gelman_rubin({{1, 2, 3}, {1, 2, 3}});
  CHECK_FALSE(identical.degenerate);
  CHECK(identical.rhat ==
        doctest::Approx(std::sqrt(2.0 / 3.0)).epsilon(1e-12));
  CHECK(identical.rhat < 1.0);

  const auto degenerate = gelman_rubin({{0, 0, 0}, {10, 10, 10}});
  CHECK(degenerate.degenerate);

  CHECK_THROWS_AS(gelman_rubin({{1, 2, 3}}), ConfigError);
  CHECK_THROWS_AS(gelman_rubin({{1, 2}, {1, 2, 3}}), ConfigError);
  CHECK_THROWS_AS(gelman_rubin({{1}, {2}}), ConfigError);
}

TEST_CASE("default configuration follows the reference protocol") {
  const McmcConfig config = grm_default_config(1);
  CHECK(config.chains == 2);
  CHECK(config.iterations == 15000);
  CHECK(config.burn_in == 5000);
  CHECK(config.thin == 10);
  CHECK(config.retained_per_chain() * config.chains == 2000);
}

TEST_CASE("retained draw count follows the thinning arithmetic") {
  const GrmSimSpec spec = simple_spec(25, 5, {1.0, 1.2}, {0.0, 0.3});
  const GrmSimResult sim = gen_grm(spec);
  const GrmPosterior post =
      fit_grm(sim.data.responses(), 4, sim.design, GrmPrior{},
              quick_config(40, 20, 2, 2, 7));
  REQUIRE(post.chains.size() == 2);
  CHECK(post.chains[0].size() == 10);
  CHECK(post.chains[1].size() == 10);
}

TEST_CASE("identical seeds give bit-identical chains") {
  const GrmSimSpec spec = simple_spec(40, 6, {1.0, 0.8}, {0.2, -0.2});
  const GrmSimResult sim = gen_grm(spec);
  const auto config = quick_config(200, 100, 2, 2, 99);
  const GrmPosterior a =
      fit_grm(sim.data.responses(), 4, sim.design, GrmPrior{}, config);
  const GrmPosterior b =
      fit_grm(sim.data.responses(), 4, sim.design, GrmPrior{}, config);
  for (std::size_t c = 0; c < 2; ++c) {
    REQUIRE(a.chains[c].size() == b.chains[c].size());
    for (std::size_t d = 0; d < a.chains[c].size(); ++d) {
      CHECK(a.chains[c][d].theta == b.chains[c][d].theta);
      CHECK(a.chains[c][d].beta == b.chains[c][d].beta);
      CHECK(a.chains[c][d].log_gamma == b.chains[c][d].log_gamma);
      CHECK(a.chains[c][d].delta == b.chains[c][d].delta);
      CHECK(a.chains[c][d].alpha == b.chains[c][d].alpha);
    }
  }
}

TEST_CASE("with no data the sampler reproduces the alpha prior") {
  // Prior-recovery smoke test: n = 0 leaves only the priors in play.
  Eigen::MatrixXi data(0, 2);
  Eigen::MatrixXd covariates(0, 1);
  const GrmPosterior post = fit_grm(data, 4, covariates, GrmPrior{},
                                    quick_config(21000, 1000, 10, 2, 31));
  std::vector<double> alpha, beta;
  for (const auto& chain : post.chains) {
    for (const auto& draw : chain) {
      alpha.push_back(draw.alpha(0));
      beta.push_back(draw.beta(0));
      // The ordering constraint must survive prior-only sampling.
      CHECK(draw.delta(0) == 0.0);
      CHECK(draw.delta(1) > 0.0);
      CHECK(draw.delta(2) > draw.delta(1));
    }
  }
  CHECK(std::abs(mean(alpha)) < 1.0); // 10% of the prior sd
  CHECK(std::sqrt(sample_variance(alpha)) == doctest::Approx(10.0).epsilon(0.10));
  CHECK(std::abs(mean(beta)) < 1.0);
  CHECK(std::sqrt(sample_variance(beta)) == doctest::Approx(10.0).epsilon(0.10));
}

TEST_CASE("discrimination ranking recovers the simulated order") {
  const GrmSimSpec spec =
      simple_spec(1000, 44, {2.0, 0.5, 1.0}, {0.0, 0.0, 0.0});
  const GrmSimResult sim = gen_grm(spec);
  const GrmPosterior post =
      fit_grm(sim.data.responses(), 4, sim.design, GrmPrior{},
              quick_config(2500, 1000, 3, 2, 12));
  const auto ranks = rank_discrimination(post);
  REQUIRE(ranks.size() == 3);
  CHECK(ranks[0].item == 0);
  CHECK(ranks[1].item == 2);
  CHECK(ranks[2].item == 1);
  CHECK(ranks[0].gamma_mean > ranks[1].gamma_mean);
  CHECK(ranks[1].gamma_mean > ranks[2].gamma_mean);
}

TEST_CASE("equal true discriminations give overlapping intervals") {
  const GrmSimSpec spec =
      simple_spec(600, 21, {1.0, 1.0, 1.0}, {-0.3, 0.0, 0.3});
  const GrmSimResult sim = gen_grm(spec);
  const GrmPosterior post =
      fit_grm(sim.data.responses(), 4, sim.design, GrmPrior{},
              quick_config(2500, 1000, 3, 2, 15));
  const auto ranks = rank_discrimination(post);
  for (std::size_t a = 0; a < ranks.size(); ++a) {
    for (std::size_t b = a + 1; b < ranks.size(); ++b) {
      CHECK(ranks[a].ci_low <= ranks[b].ci_high);
      CHECK(ranks[b].ci_low <= ranks[a].ci_high);
    }
  }
}

TEST_CASE("single-item posterior ranks as a singleton") {
  const GrmSimSpec spec = simple_spec(60, 3, {1.1}, {0.0});
  const GrmSimResult sim = gen_grm(spec);
  const GrmPosterior post =
      fit_grm(sim.data.responses(), 4, sim.design, GrmPrior{},
              quick_config(300, 100, 2, 2, 5));
  CHECK(rank_discrimination(post).size() == 1);
}

TEST_CASE("covariate effect direction is recovered") {
  GrmSimSpec spec = simple_spec(500, 61, {1.2, 1.0, 1.4, 0.9, 1.1, 1.3},
                                {-0.5, -0.2, 0.0, 0.2, 0.5, 0.8});
  SimCovariate cov;
  cov.def = {"x1", CovariateKind::numeric, {}};
  cov.mean = 0.0;
  cov.sd = 1.0;
  cov.alpha = 1.0;
  spec.covariates.push_back(cov);
  const GrmSimResult sim = gen_grm(spec);
  const GrmPosterior post =
      fit_grm(sim.data.responses(), 4, sim.design, GrmPrior{},
              quick_config(2500, 1000, 3, 2, 77));
  const auto effects = covariate_effects(post);
  REQUIRE(effects.size() == 1);
  CHECK(effects[0].prob_positive >= 0.95);
  CHECK(effects[0].mean > 0.5);
}

TEST_CASE("null covariate intervals cover zero in most replications") {
  int covered = 0;
  const int reps = 20;
  for (int rep = 0; rep < reps; ++rep) {
    GrmSimSpec spec = simple_spec(150, 500 + rep, {1.2, 1.0, 0.9, 1.1},
                                  {-0.4, 0.0, 0.3, 0.6});
    SimCovariate cov;
    cov.def = {"x1", CovariateKind::numeric, {}};
    cov.alpha = 0.0;
    spec.covariates.push_back(cov);
    const GrmSimResult sim = gen_grm(spec);
    const GrmPosterior post =
        fit_grm(sim.data.responses(), 4, sim.design, GrmPrior{},
                quick_config(1200, 400, 2, 2, 900 + rep));
    const auto effects = covariate_effects(post);
    if (effects[0].ci_low <= 0.0 && 0.0 <= effects[0].ci_high) ++covered;
  }
  CHECK(covered >= 18); // >= 90% of 20
}

TEST_CASE("summary means equal the pooled arithmetic mean exactly") {
  const GrmSimSpec spec = simple_spec(30, 10, {1.0, 1.3}, {0.1, -0.1});
  const GrmSimResult sim = gen_grm(spec);
  const GrmPosterior post =
      fit_grm(sim.data.responses(), 4, sim.design, GrmPrior{},
              quick_config(140, 40, 2, 2, 2));
  const auto summaries = summarize(post);

  std::vector<double> beta0;
  for (const auto& chain : post.chains)
    for (const auto& draw : chain) beta0.push_back(draw.beta(0));
  double manual = 0.0;
  for (double v : beta0) manual += v;
  manual /= static_cast<double>(beta0.size());

  for (const auto& s : summaries) {
    if (s.name == "beta[I1]") CHECK(s.mean == manual);
  }
}

TEST_CASE("prior convention switch maps 0.01 onto the right scales") {
  const GrmPrior precision = GrmPrior::from_hyper(0.01, GrmPrior::Convention::precision);
  CHECK(precision.sd_item == doctest::Approx(10.0));
  CHECK(precision.sd_alpha == doctest::Approx(10.0));
  const GrmPrior variance = GrmPrior::from_hyper(0.01, GrmPrior::Convention::variance);
  CHECK(variance.sd_item == doctest::Approx(0.1));
  CHECK_THROWS_AS(GrmPrior::from_hyper(0.0), ConfigError);
}

TEST_CASE("fit rejects invalid configuration and data") {
  Eigen::MatrixXi data = Eigen::MatrixXi::Constant(5, 2, 1);
  Eigen::MatrixXd x(5, 0);
  CHECK_THROWS_AS(
      fit_grm(data, 4, x, GrmPrior{}, quick_config(100, 200, 1, 2, 1)),
      ConfigError);
  Eigen::MatrixXi bad = data;
  bad(2, 1) = 0; // missing marker leaks through
  CHECK_THROWS_AS(
      fit_grm(bad, 4, x, GrmPrior{}, quick_config(100, 50, 1, 2, 1)),
      DataError);
  Eigen::MatrixXd wrong_rows(4, 0);
  CHECK_THROWS_AS(
      fit_grm(data, 4, wrong_rows, GrmPrior{}, quick_config(100, 50, 1, 2, 1)),
      DataError);
}

} // TEST_SUITE
