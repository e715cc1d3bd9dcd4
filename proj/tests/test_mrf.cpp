#include <doctest.h>

#include <cmath>
#include <limits>

#include "helpers.hpp"
#include "ordbayes/errors.hpp"
#include "ordbayes/mrf.hpp"
#include "ordbayes/rng.hpp"
#include "ordbayes/simulate.hpp"

using namespace ordbayes;

namespace {

MrfState random_state(Rng& rng, const std::vector<int>& n_levels,
                      double edge_prob = 0.6) {
  MrfState state(n_levels);
  const int p = state.n_vars();
  for (int i = 0; i < p; ++i) {
    for (int c = 0; c < n_levels[i] - 1; ++c)
      state.thresholds[i](c) = rng.normal(0.0, 0.8);
  }
  for (int i = 0; i < p - 1; ++i) {
    for (int j = i + 1; j < p; ++j) {
      if (rng.uniform() < edge_prob) state.set_edge(i, j, rng.normal(0.0, 0.7));
    }
  }
  return state;
}

Eigen::VectorXi random_config(Rng& rng, const std::vector<int>& n_levels) {
  Eigen::VectorXi x(static_cast<int>(n_levels.size()));
  for (std::size_t i = 0; i < n_levels.size(); ++i)
    x(static_cast<int>(i)) =
        static_cast<int>(rng.below(static_cast<std::uint64_t>(n_levels[i])));
  return x;
}

McmcConfig quick_config(int iterations, int burn_in, std::uint64_t seed) {
  McmcConfig config;
  config.iterations = iterations;
  config.burn_in = burn_in;
  config.thin = 1;
  config.chains = 1;
  config.seed = seed;
  return config;
}

} // namespace

TEST_SUITE("mrf") {

TEST_CASE("conditional is uniform when all parameters vanish") {
  MrfState state({4, 4});
  const Eigen::VectorXi x = Eigen::VectorXi::Zero(2);
  for (int c = 0; c < 4; ++c) {
    CHECK(conditional_logprob(state, x, 0, c) ==
          doctest::Approx(std::log(0.25)).epsilon(1e-12));
  }
}

TEST_CASE("binary conditional matches the two-term evaluation") {
  MrfState state({2, 2});
  state.set_edge(0, 1, 1.0);
  Eigen::VectorXi x(2);
  x << 0, 1;
  const double e = std::exp(1.0);
  CHECK(std::exp(conditional_logprob(state, x, 0, 1)) ==
        doctest::Approx(e / (1.0 + e)).epsilon(1e-12));
  CHECK(std::exp(conditional_logprob(state, x, 0, 0)) ==
        doctest::Approx(1.0 / (1.0 + e)).epsilon(1e-12));
}

TEST_CASE("exponentiated conditionals normalize for random states") {
  Rng rng(123);
  for (int rep = 0; rep < 1000; ++rep) {
    const std::vector<int> n_levels = {
        2 + static_cast<int>(rng.below(3)), 2 + static_cast<int>(rng.below(3)),
        2 + static_cast<int>(rng.below(3))};
    const MrfState state = random_state(rng, n_levels);
    const Eigen::VectorXi x = random_config(rng, n_levels);
    const int var = static_cast<int>(rng.below(3));
    double total = 0.0;
    for (int c = 0; c < n_levels[var]; ++c)
      total += std::exp(conditional_logprob(state, x, var, c));
    CHECK(total == doctest::Approx(1.0).epsilon(1e-10));
  }
}

TEST_CASE("conditionals agree with the exact joint enumeration") {
  Rng rng(321);
  for (int rep = 0; rep < 20; ++rep) {
    const std::vector<int> n_levels = {4, 3, 2};
    const MrfState state = random_state(rng, n_levels);
    const MrfJointTable table = enumerate_mrf_joint(state);
    for (std::int64_t idx = 0; idx < table.size(); ++idx) {
      const Eigen::VectorXi x = table.config_at(idx);
      for (int var = 0; var < 3; ++var) {
        const Eigen::VectorXd exact = table.conditional(x, var);
        for (int c = 0; c < n_levels[var]; ++c) {
          CHECK(std::exp(conditional_logprob(state, x, var, c)) ==
                doctest::Approx(exact(c)).epsilon(1e-10));
        }
      }
    }
  }
}

TEST_CASE("conditional rejects out-of-range arguments") {
  MrfState state({4, 4});
  const Eigen::VectorXi x = Eigen::VectorXi::Zero(2);
  CHECK_THROWS_AS(conditional_logprob(state, x, 2, 0), ConfigError);
  CHECK_THROWS_AS(conditional_logprob(state, x, 0, 4), ConfigError);
  Eigen::VectorXi bad(2);
  bad << 0, 7;
  CHECK_THROWS_AS(conditional_logprob(state, bad, 0, 0), ConfigError);
}

TEST_CASE("pseudo log-likelihood: uniform case and hand computation") {
  MrfState state({4, 4, 4});
  Eigen::MatrixXi data(5, 3);
  data << 0, 1, 2, 3, 0, 1, 2, 2, 2, 1, 3, 0, 0, 0, 3;
  CHECK(pseudo_loglik(state, data) ==
        doctest::Approx(-5.0 * 3.0 * std::log(4.0)).epsilon(1e-12));

  MrfState binary({2, 2});
  binary.set_edge(0, 1, 1.0);
  Eigen::MatrixXi row(1, 2);
  row << 1, 1;
  const double e = std::exp(1.0);
  const double expected = 2.0 * std::log(e / (1.0 + e));
  CHECK(pseudo_loglik(binary, row) == doctest::Approx(expected).epsilon(1e-12));

  Eigen::MatrixXi incomplete(1, 2);
  incomplete << 1, 2; // category 2 out of range for a binary variable
  CHECK_THROWS_AS(pseudo_loglik(binary, incomplete), DataError);
}

TEST_CASE("pseudo log-likelihood is invariant under row permutation") {
  Rng rng(55);
  const std::vector<int> n_levels = {3, 4, 2};
  const MrfState state = random_state(rng, n_levels);
  Eigen::MatrixXi data(20, 3);
  for (int i = 0; i < 20; ++i)
    data.row(i) = random_config(rng, n_levels).transpose();
  const double base = pseudo_loglik(state, data);

  Eigen::MatrixXi shuffled = data;
  for (int i = 19; i > 0; --i) {
    const int j = static_cast<int>(rng.below(static_cast<std::uint64_t>(i + 1)));
    shuffled.row(i).swap(shuffled.row(j));
  }
  CHECK(pseudo_loglik(state, shuffled) == doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("inclusion Bayes factor arithmetic") {
  CHECK(inclusion_bf10(10.0 / 11.0, 0.5) == doctest::Approx(10.0).epsilon(1e-12));
  CHECK(inclusion_bf10(0.5, 0.5) == 1.0);
  CHECK(inclusion_bf10(1.0 / 3.0, 0.5) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(std::isinf(inclusion_bf10(1.0, 0.5)));
  CHECK(inclusion_bf10(0.0, 0.5) == 0.0);
  CHECK_THROWS_AS(inclusion_bf10(0.5, 0.0), ConfigError);
  CHECK_THROWS_AS(inclusion_bf10(0.5, 1.0), ConfigError);
  CHECK_THROWS_AS(inclusion_bf10(1.5, 0.5), ConfigError);

  // Count form keeps small-integer odds exact.
  CHECK(inclusion_bf10_counts(10, 1, 0.5) == 10.0);
  CHECK(inclusion_bf10_counts(1, 2, 0.5) == 0.5);
  CHECK(std::isinf(inclusion_bf10_counts(5, 0, 0.5)));
  CHECK_THROWS_AS(inclusion_bf10_counts(0, 0, 0.5), ConfigError);
}

TEST_CASE("BF01 is the reciprocal of BF10") {
  Rng rng(77);
  for (int rep = 0; rep < 100; ++rep) {
    const double q = 0.01 + 0.98 * rng.uniform();
    const double r = 0.01 + 0.98 * rng.uniform();
    const double bf10 = inclusion_bf10(q, r);
    const double bf01 = inclusion_bf10(1.0 - q, 1.0 - r);
    CHECK(bf10 * bf01 == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("median probability graph filters and flags edges") {
  // Hand-built posterior over 3 nodes and 20 draws with inclusion
  // frequencies 19/20, 12/20, and 6/20.
  MrfPosterior post;
  post.n_levels = {4, 4, 4};
  post.node_names = {"A", "B", "C"};
  post.prior = MrfPrior{};
  post.config = quick_config(40, 20, 1);
  for (int d = 0; d < 20; ++d) {
    MrfDraw draw;
    draw.theta_upper.resize(3);
    draw.adj_upper.resize(3);
    draw.thresholds_flat = Eigen::VectorXd::Zero(9);
    draw.adj_upper << (d < 19 ? 1 : 0), (d < 12 ? 1 : 0), (d < 6 ? 1 : 0);
    draw.theta_upper << (d < 19 ? 0.8 : 0.0), (d < 12 ? -0.5 : 0.0),
        (d < 6 ? 0.3 : 0.0);
    post.draws.push_back(std::move(draw));
  }
  summarize_mrf_posterior(post);

  CHECK(post.inclusion_prob(0, 1) == doctest::Approx(0.95));
  CHECK(post.bf10(0, 1) == doctest::Approx(19.0));
  CHECK(post.inclusion_prob(0, 2) == doctest::Approx(0.6));
  CHECK(post.bf10(0, 2) == doctest::Approx(1.5));
  CHECK(post.inclusion_prob(1, 2) == doctest::Approx(0.3));

  const EdgeReport report = median_probability_graph(post, 10.0);
  REQUIRE(report.edges.size() == 2);
  CHECK(report.edges[0].name_a == "A");
  CHECK(report.edges[0].name_b == "B");
  CHECK(report.edges[0].conclusive);
  CHECK(report.edges[0].sign == 1);
  CHECK(report.edges[1].name_b == "C");
  CHECK_FALSE(report.edges[1].conclusive); // BF10 = 1.5 < 10
  CHECK(report.edges[1].sign == -1);

  const std::string dot = to_dot(report);
  CHECK(dot.find("style=dashed") != std::string::npos);
  CHECK(dot.find("\"A\" -- \"B\"") != std::string::npos);
  CHECK(dot.find("sign=\"-\"") != std::string::npos);

  CHECK_THROWS_AS(median_probability_graph(post, 0.0), ConfigError);
}

TEST_CASE("median probability graph of an empty posterior is empty") {
  MrfPosterior post;
  post.n_levels = {4, 4};
  post.node_names = {"A", "B"};
  post.prior = MrfPrior{};
  post.config = quick_config(10, 5, 1);
  for (int d = 0; d < 5; ++d) {
    MrfDraw draw;
    draw.theta_upper = Eigen::VectorXd::Zero(1);
    draw.adj_upper = Eigen::VectorXi::Zero(1);
    draw.thresholds_flat = Eigen::VectorXd::Zero(6);
    post.draws.push_back(std::move(draw));
  }
  summarize_mrf_posterior(post);
  CHECK(median_probability_graph(post).edges.empty());
  CHECK(post.bf10(0, 1) == 0.0);
}

TEST_CASE("fit recovers a single strong edge") {
  // Binary nodes keep theta = 1.5 in an identifiable regime; on wide ordinal
  // scales the same weight pushes all mass into one corner configuration.
  MrfState truth({2, 2, 2, 2});
  truth.set_edge(0, 1, 1.5);
  const Eigen::MatrixXi data = gen_mrf(truth, 1000, 42);

  const MrfPosterior post = fit_mrf(data, truth.n_levels(), MrfPrior{},
                                    quick_config(3000, 1000, 5));
  CHECK(post.inclusion_prob(0, 1) > 0.9);
  for (int i = 0; i < 3; ++i) {
    for (int j = i + 1; j < 4; ++j) {
      if (i == 0 && j == 1) continue;
      CHECK(post.inclusion_prob(i, j) < 0.5);
    }
  }
  // Positive interaction recovered with a sensible interval, and the
  // conditional mean sits inside its interval for every pair.
  CHECK(post.theta_mean(0, 1) > 0.5);
  for (int i = 0; i < 3; ++i) {
    for (int j = i + 1; j < 4; ++j) {
      CHECK(post.theta_ci_low(i, j) <= post.theta_mean(i, j));
      CHECK(post.theta_mean(i, j) <= post.theta_ci_high(i, j));
    }
  }
}

TEST_CASE("default configuration follows the reference protocol") {
  const McmcConfig config = mrf_default_config(1);
  CHECK(config.iterations == 20000);
  CHECK(config.burn_in == 5000);
  CHECK(config.chains == 1);
}

TEST_CASE("independent data keeps the graph sparse") {
  MrfState truth({4, 4, 4, 4, 4});
  const Eigen::MatrixXi data = gen_mrf(truth, 1000, 13);
  const MrfPosterior post = fit_mrf(data, truth.n_levels(), MrfPrior{},
                                    quick_config(3000, 1000, 21));
  int crossed = 0;
  for (int i = 0; i < 4; ++i) {
    for (int j = i + 1; j < 5; ++j) {
      if (post.inclusion_prob(i, j) >= 0.5) ++crossed;
    }
  }
  CHECK(crossed < 2);
}

TEST_CASE("spike constraint holds in every retained draw") {
  MrfState truth({3, 3, 3});
  truth.set_edge(0, 2, 0.9);
  const Eigen::MatrixXi data = gen_mrf(truth, 200, 3);
  const MrfPosterior post = fit_mrf(data, truth.n_levels(), MrfPrior{},
                                    quick_config(400, 100, 17));
  CHECK(post.draws.size() == 300);
  for (const auto& draw : post.draws) {
    for (int e = 0; e < draw.adj_upper.size(); ++e) {
      if (draw.adj_upper(e) == 0) CHECK(draw.theta_upper(e) == 0.0);
      if (draw.theta_upper(e) != 0.0) CHECK(draw.adj_upper(e) == 1);
    }
  }
}

TEST_CASE("identical seeds reproduce the chain bit for bit") {
  MrfState truth({4, 4, 4});
  truth.set_edge(1, 2, -0.8);
  const Eigen::MatrixXi data = gen_mrf(truth, 150, 8);
  const auto config = quick_config(300, 100, 42);
  const MrfPosterior a = fit_mrf(data, truth.n_levels(), MrfPrior{}, config);
  const MrfPosterior b = fit_mrf(data, truth.n_levels(), MrfPrior{}, config);
  REQUIRE(a.draws.size() == b.draws.size());
  for (std::size_t d = 0; d < a.draws.size(); ++d) {
    CHECK(a.draws[d].theta_upper == b.draws[d].theta_upper);
    CHECK(a.draws[d].adj_upper == b.draws[d].adj_upper);
    CHECK(a.draws[d].thresholds_flat == b.draws[d].thresholds_flat);
  }

  const MrfPosterior c =
      fit_mrf(data, truth.n_levels(), MrfPrior{}, quick_config(300, 100, 43));
  bool any_different = false;
  for (std::size_t d = 0; d < a.draws.size() && !any_different; ++d)
    any_different = a.draws[d].theta_upper != c.draws[d].theta_upper;
  CHECK(any_different);
}

TEST_CASE("inclusion probabilities are stable under variable relabeling") {
  // Average over seeds, fit the permuted data, and compare the permuted
  // inclusion matrix against the direct one.
  MrfState truth({2, 2, 2, 2});
  truth.set_edge(0, 1, 1.2);
  truth.set_edge(2, 3, -1.0);
  const std::vector<int> perm = {2, 0, 3, 1}; // new column c holds old perm[c]

  Eigen::MatrixXd direct = Eigen::MatrixXd::Zero(4, 4);
  Eigen::MatrixXd permuted_back = Eigen::MatrixXd::Zero(4, 4);
  const int n_seeds = 6;
  for (int s = 0; s < n_seeds; ++s) {
    const Eigen::MatrixXi data = gen_mrf(truth, 400, 100 + s);
    Eigen::MatrixXi shuffled(data.rows(), 4);
    std::vector<int> levels(4);
    for (int c = 0; c < 4; ++c) {
      shuffled.col(c) = data.col(perm[c]);
      levels[c] = truth.n_levels()[perm[c]];
    }
    const auto config_a = quick_config(4000, 1000, 1000 + s);
    const auto config_b = quick_config(4000, 1000, 2000 + s);
    const MrfPosterior a = fit_mrf(data, truth.n_levels(), MrfPrior{}, config_a);
    const MrfPosterior b = fit_mrf(shuffled, levels, MrfPrior{}, config_b);
    direct += a.inclusion_prob / n_seeds;
    for (int i = 0; i < 4; ++i) {
      for (int j = 0; j < 4; ++j)
        permuted_back(perm[i], perm[j]) += b.inclusion_prob(i, j) / n_seeds;
    }
  }
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      CHECK(std::abs(direct(i, j) - permuted_back(i, j)) <= 0.1);
    }
  }
}

TEST_CASE("configuration errors are rejected") {
  Eigen::MatrixXi data = Eigen::MatrixXi::Zero(10, 2);
  McmcConfig bad = quick_config(100, 200, 1);
  CHECK_THROWS_AS(fit_mrf(data, {2, 2}, MrfPrior{}, bad), ConfigError);

  MrfPrior bad_prior;
  bad_prior.inclusion_prob = 1.0;
  CHECK_THROWS_AS(fit_mrf(data, {2, 2}, bad_prior, quick_config(100, 50, 1)),
                  ConfigError);

  Eigen::MatrixXi out_of_range(2, 2);
  out_of_range << 0, 0, 1, 3;
  CHECK_THROWS_AS(
      fit_mrf(out_of_range, {2, 2}, MrfPrior{}, quick_config(100, 50, 1)),
      DataError);

  CHECK_THROWS_AS(fit_mrf(data, {2}, MrfPrior{}, quick_config(100, 50, 1)),
                  ConfigError);
}

} // TEST_SUITE
