#include "ordbayes/cli.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>

#include "ordbayes/csv.hpp"
#include "ordbayes/errors.hpp"
#include "ordbayes/explore.hpp"
#include "ordbayes/format.hpp"
#include "ordbayes/grm.hpp"
#include "ordbayes/manifest.hpp"
#include "ordbayes/mrf.hpp"
#include "ordbayes/simulate.hpp"
#include "ordbayes/survey_data.hpp"

namespace ordbayes {

namespace {

namespace fs = std::filesystem;

void prepare_out_dir(const fs::path& dir, bool force) {
  if (fs::exists(dir)) {
    if (!fs::is_directory(dir))
      throw DataError("output path exists and is not a directory: " +
                      dir.string());
    if (!fs::is_empty(dir) && !force)
      throw DataError("output directory not empty (use --force): " +
                      dir.string());
  }
  fs::create_directories(dir);
}

void prepare_out_file(const fs::path& file, bool force) {
  if (fs::exists(file) && !force)
    throw DataError("output file exists (use --force): " + file.string());
  if (file.has_parent_path()) fs::create_directories(file.parent_path());
}

void write_text_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write file: " + path.string());
  out << content;
}

std::string default_out(const std::string& subcommand) {
  const char* root = std::getenv("ORDBAYES_OUT_ROOT");
  if (!root || !*root)
    throw ConfigError("--out is required (or set ORDBAYES_OUT_ROOT)");
  return (fs::path(root) / subcommand).string();
}

std::vector<std::string> resolve_items(const Codebook& codebook,
                                       const std::vector<std::string>& items) {
  if (!items.empty()) {
    for (const auto& abbr : items) codebook.item_index(abbr);
    return items;
  }
  std::vector<std::string> all;
  for (const auto& item : codebook.items()) all.push_back(item.abbr);
  return all;
}

std::vector<CovariateCondition> parse_filters(
    const std::vector<std::string>& raw) {
  std::vector<CovariateCondition> out;
  for (const auto& term : raw) {
    const auto eq = term.find('=');
    if (eq == std::string::npos || eq == 0)
      throw ConfigError("bad --filter term (expected COV=LEVEL): " + term);
    out.push_back({term.substr(0, eq), term.substr(eq + 1)});
  }
  return out;
}

// Ordinal model matrix for the network: selected items recoded to 0-based
// categories, selected covariates entering as ordinal nodes via their level
// index. Requires complete cases.
struct MrfModelData {
  Eigen::MatrixXi data;
  std::vector<int> n_levels;
  std::vector<std::string> names;
};

MrfModelData build_mrf_matrix(const SurveyDataset& ds,
                              const std::vector<std::string>& items,
                              const std::vector<std::string>& covariates) {
  MrfModelData out;
  std::vector<int> item_idx;
  for (const auto& abbr : items) {
    const int j = ds.codebook().item_index(abbr);
    item_idx.push_back(j);
    out.n_levels.push_back(ds.codebook().items()[j].n_categories);
    out.names.push_back(abbr);
  }
  std::vector<int> cov_idx;
  for (const auto& name : covariates) {
    const int k = ds.codebook().covariate_index(name);
    const auto& def = ds.codebook().covariates()[k];
    if (def.kind == CovariateKind::numeric)
      throw DataError("covariate " + name +
                      " is numeric; network nodes must be ordinal");
    cov_idx.push_back(k);
    out.n_levels.push_back(static_cast<int>(def.levels.size()));
    out.names.push_back(name);
  }

  out.data.resize(ds.n(), static_cast<int>(out.n_levels.size()));
  for (int i = 0; i < ds.n(); ++i) {
    int c = 0;
    for (int j : item_idx) {
      if (ds.response_missing(i, j))
        throw DataError("incomplete data: row " + fmt_int(i + 1) + ", item " +
                        ds.codebook().items()[j].abbr +
                        " is missing; run ingest with a completeness policy "
                        "first");
      out.data(i, c++) = ds.responses()(i, j) - 1;
    }
    for (int k : cov_idx) {
      if (ds.covariate_missing(i, k))
        throw DataError("incomplete data: row " + fmt_int(i + 1) +
                        ", covariate " + ds.codebook().covariates()[k].name +
                        " is missing");
      out.data(i, c++) = static_cast<int>(ds.covariates()(i, k));
    }
  }
  return out;
}

std::vector<std::string> summary_row(const ScalarSummary& s) {
  return {s.name,
          fmt_g17(s.mean),
          fmt_g17(s.sd),
          fmt_g17(s.ci_low),
          fmt_g17(s.ci_high),
          s.rhat_degenerate ? "nan" : fmt_g17(s.rhat)};
}

// ---------------------------------------------------------------------------
// Subcommand handlers. Each returns the list of artifact file names it wrote
// (relative to the run directory) so the caller can record them.

struct IngestOptions {
  std::string data, codebook, out;
  std::vector<std::string> items;
  std::vector<std::string> filters;
  bool drop_any_missing = false;
  bool drop_all_missing = false;
  double straightline = 0.0;
  bool straightline_set = false;
  bool force = false;
};

std::vector<std::string> run_ingest(const IngestOptions& opt,
                                    RunManifest& manifest) {
  const Codebook codebook = Codebook::load(opt.codebook);
  SurveyDataset ds = load_csv(opt.data, codebook);
  const auto items = resolve_items(codebook, opt.items);
  ds = subset(ds, items, parse_filters(opt.filters));

  CleaningPolicy policy;
  policy.drop_any_missing = opt.drop_any_missing;
  policy.drop_all_missing = opt.drop_all_missing;
  if (opt.straightline_set) policy.straightline_threshold = opt.straightline;
  auto [cleaned, report] = clean(ds, policy);

  const fs::path out_dir(opt.out);
  write_csv(cleaned, out_dir / "cleaned.csv");
  write_text_file(out_dir / "cleaning_report.json",
                  report.to_json().dump(2) + "\n");

  manifest.config["items"] = items;
  manifest.config["filters"] = opt.filters;
  manifest.config["drop_any_missing"] = opt.drop_any_missing;
  manifest.config["drop_all_missing"] = opt.drop_all_missing;
  if (opt.straightline_set)
    manifest.config["straightline_threshold"] = opt.straightline;
  return {"cleaned.csv", "cleaning_report.json"};
}

struct ExploreOptions {
  std::string data, codebook, out;
  std::vector<std::string> items;
  std::vector<std::string> by;
  bool force = false;
};

std::vector<std::string> run_explore(const ExploreOptions& opt,
                                     RunManifest& manifest) {
  const Codebook codebook = Codebook::load(opt.codebook);
  const SurveyDataset ds = load_csv(opt.data, codebook);
  const auto items = resolve_items(codebook, opt.items);
  for (const auto& name : opt.by) codebook.covariate_index(name);

  int h_max = 0;
  for (const auto& item : codebook.items())
    h_max = std::max(h_max, item.n_categories);

  csv::Writer out(fs::path(opt.out) / "explore.csv");
  std::vector<std::string> header = {"item", "group_by", "level", "n"};
  for (int c = 1; c <= h_max; ++c) header.push_back("p" + fmt_int(c));
  for (const char* name :
       {"low_split", "high_split", "chi_square", "df", "p_value", "stars",
        "degenerate"})
    header.push_back(name);
  out.row(header);

  auto write_summary = [&](const LikertSummary& s,
                           const std::optional<MedianTestResult>& test) {
    std::vector<std::string> row = {s.item, s.group_by, s.level,
                                    fmt_int(s.count)};
    for (int c = 0; c < h_max; ++c) {
      row.push_back(c < static_cast<int>(s.proportions.size())
                        ? fmt_g17(s.proportions[c])
                        : "");
    }
    row.push_back(fmt_g17(s.low_split));
    row.push_back(fmt_g17(s.high_split));
    if (test) {
      row.push_back(fmt_g17(test->chi_square));
      row.push_back(fmt_int(test->df));
      row.push_back(fmt_g17(test->p_value));
      row.push_back(std::string(to_string(significance_stars(test->p_value))));
      row.push_back(test->degenerate ? "1" : "0");
    } else {
      row.insert(row.end(), 5, "");
    }
    out.row(row);
  };

  for (const auto& abbr : items) {
    const int j = codebook.item_index(abbr);
    for (const auto& s : likert_summary(ds, abbr)) write_summary(s, {});

    for (const auto& by : opt.by) {
      const int k = codebook.covariate_index(by);
      const auto& def = codebook.covariates()[k];
      if (def.kind == CovariateKind::numeric)
        throw DataError("cannot group by numeric covariate " + by);

      // Mood's test over the levels that actually carry responses.
      std::vector<int> scores;
      std::vector<std::string> groups;
      for (int i = 0; i < ds.n(); ++i) {
        if (ds.covariate_missing(i, k) || ds.response_missing(i, j)) continue;
        scores.push_back(ds.responses()(i, j));
        groups.push_back(def.levels[static_cast<int>(ds.covariates()(i, k))]);
      }
      std::optional<MedianTestResult> test;
      std::set<std::string> distinct(groups.begin(), groups.end());
      if (distinct.size() >= 2)
        test = mood_median_test(scores, groups);
      for (const auto& s : likert_summary(ds, abbr, by)) write_summary(s, test);
    }
  }

  manifest.config["items"] = items;
  manifest.config["by"] = opt.by;
  return {"explore.csv"};
}

struct FitMrfOptions {
  std::string data, codebook, out;
  std::vector<std::string> items;
  std::vector<std::string> covariates;
  int iterations = 20000;
  int burn_in = 5000;
  int thin = 1;
  std::uint64_t seed = 1;
  double slab_scale = 2.5;
  double inclusion_prior = 0.5;
  double threshold_sd = 10.0;
  double bf_threshold = 10.0;
  bool draws = false;
  bool force = false;
};

std::vector<std::string> run_fit_mrf(const FitMrfOptions& opt,
                                     RunManifest& manifest) {
  const Codebook codebook = Codebook::load(opt.codebook);
  const SurveyDataset ds = load_csv(opt.data, codebook);
  const auto items = resolve_items(codebook, opt.items);
  const MrfModelData model = build_mrf_matrix(ds, items, opt.covariates);

  MrfPrior prior;
  prior.slab_scale = opt.slab_scale;
  prior.inclusion_prob = opt.inclusion_prior;
  prior.threshold_sd = opt.threshold_sd;

  McmcConfig config = mrf_default_config(opt.seed);
  config.iterations = opt.iterations;
  config.burn_in = opt.burn_in;
  config.thin = opt.thin;

  const MrfPosterior post =
      fit_mrf(model.data, model.n_levels, prior, config, model.names);

  const fs::path out_dir(opt.out);
  const int p = static_cast<int>(model.n_levels.size());
  {
    csv::Writer edges(out_dir / "edges.csv");
    edges.row({"node_a", "node_b", "inclusion_prob", "bf10", "bf_saturated",
               "theta_mean", "ci_low", "ci_high", "conclusive"});
    for (int i = 0; i < p - 1; ++i) {
      for (int j = i + 1; j < p; ++j) {
        const bool conclusive = post.inclusion_prob(i, j) >= 0.5 &&
                                post.bf10(i, j) >= opt.bf_threshold;
        edges.row({model.names[i], model.names[j],
                   fmt_g17(post.inclusion_prob(i, j)),
                   fmt_g17(post.bf10(i, j)),
                   post.bf_saturated(i, j) ? "1" : "0",
                   fmt_g17(post.theta_mean(i, j)),
                   fmt_g17(post.theta_ci_low(i, j)),
                   fmt_g17(post.theta_ci_high(i, j)),
                   conclusive ? "1" : "0"});
      }
    }
  }
  write_text_file(out_dir / "network.dot",
                  to_dot(median_probability_graph(post, opt.bf_threshold)));

  std::vector<std::string> outputs = {"edges.csv", "network.dot"};
  if (opt.draws) {
    csv::Writer draws(out_dir / "draws.csv");
    std::vector<std::string> header = {"draw"};
    for (int i = 0; i < p - 1; ++i) {
      for (int j = i + 1; j < p; ++j) {
        header.push_back("theta[" + model.names[i] + ":" + model.names[j] + "]");
        header.push_back("edge[" + model.names[i] + ":" + model.names[j] + "]");
      }
    }
    for (int i = 0; i < p; ++i) {
      for (int c = 1; c < model.n_levels[i]; ++c)
        header.push_back("mu[" + model.names[i] + "," + fmt_int(c) + "]");
    }
    draws.row(header);
    for (std::size_t d = 0; d < post.draws.size(); ++d) {
      std::vector<std::string> row = {fmt_int(static_cast<std::int64_t>(d + 1))};
      const auto& draw = post.draws[d];
      for (int e = 0; e < draw.theta_upper.size(); ++e) {
        row.push_back(fmt_g17(draw.theta_upper(e)));
        row.push_back(fmt_int(draw.adj_upper(e)));
      }
      for (int t = 0; t < draw.thresholds_flat.size(); ++t)
        row.push_back(fmt_g17(draw.thresholds_flat(t)));
      draws.row(row);
    }
    outputs.push_back("draws.csv");
  }

  manifest.config["items"] = items;
  manifest.config["covariates"] = opt.covariates;
  manifest.config["iterations"] = opt.iterations;
  manifest.config["burn_in"] = opt.burn_in;
  manifest.config["thin"] = opt.thin;
  manifest.config["seed"] = opt.seed;
  manifest.config["slab_scale"] = opt.slab_scale;
  manifest.config["inclusion_prior"] = opt.inclusion_prior;
  manifest.config["threshold_sd"] = opt.threshold_sd;
  manifest.config["bf_threshold"] = opt.bf_threshold;
  manifest.config["draws"] = opt.draws;
  return outputs;
}

struct FitGrmOptions {
  std::string data, codebook, out;
  std::vector<std::string> items;
  std::vector<std::string> covariates;
  int chains = 2;
  int iterations = 15000;
  int burn_in = 5000;
  int thin = 10;
  std::uint64_t seed = 1;
  std::string convention = "precision";
  bool draws = false;
  bool force = false;
};

std::vector<std::string> run_fit_grm(const FitGrmOptions& opt,
                                     RunManifest& manifest) {
  const Codebook codebook = Codebook::load(opt.codebook);
  const SurveyDataset ds = load_csv(opt.data, codebook);
  const auto items = resolve_items(codebook, opt.items);

  int h = 0;
  std::vector<int> item_idx;
  for (const auto& abbr : items) {
    const int j = codebook.item_index(abbr);
    item_idx.push_back(j);
    const int hj = codebook.items()[j].n_categories;
    if (h == 0) h = hj;
    if (hj != h)
      throw DataError(
          "graded response model requires a shared category count; item " +
          abbr + " has " + fmt_int(hj) + " categories, expected " + fmt_int(h));
  }
  Eigen::MatrixXi data(ds.n(), static_cast<int>(item_idx.size()));
  for (int i = 0; i < ds.n(); ++i) {
    for (std::size_t c = 0; c < item_idx.size(); ++c) {
      if (ds.response_missing(i, item_idx[c]))
        throw DataError("incomplete data: row " + fmt_int(i + 1) + ", item " +
                        items[c] +
                        " is missing; run ingest with a completeness policy "
                        "first");
      data(i, static_cast<int>(c)) = ds.responses()(i, item_idx[c]);
    }
  }
  const Eigen::MatrixXd design = encode_covariates(ds, opt.covariates);

  GrmPrior::Convention convention;
  if (opt.convention == "precision") {
    convention = GrmPrior::Convention::precision;
  } else if (opt.convention == "variance") {
    convention = GrmPrior::Convention::variance;
  } else {
    throw ConfigError("--precision-convention must be precision or variance");
  }
  const GrmPrior prior = GrmPrior::from_hyper(0.01, convention);

  McmcConfig config = grm_default_config(opt.seed);
  config.chains = opt.chains;
  config.iterations = opt.iterations;
  config.burn_in = opt.burn_in;
  config.thin = opt.thin;

  const GrmPosterior post =
      fit_grm(data, h, design, prior, config, items, opt.covariates);
  const auto summaries = summarize(post);
  std::map<std::string, const ScalarSummary*> by_name;
  for (const auto& s : summaries) by_name[s.name] = &s;

  const fs::path out_dir(opt.out);
  {
    csv::Writer params(out_dir / "grm_params.csv");
    params.row({"parameter", "mean", "sd", "ci_low", "ci_high", "rhat"});
    for (const auto& s : summaries) {
      if (s.name.rfind("theta[", 0) == 0) continue;
      params.row(summary_row(s));
    }
  }
  {
    csv::Writer theta(out_dir / "grm_theta.csv");
    theta.row({"respondent", "mean", "sd", "ci_low", "ci_high", "rhat"});
    for (int i = 0; i < post.n; ++i) {
      const auto& s = *by_name.at("theta[" + fmt_int(i + 1) + "]");
      theta.row({fmt_int(i + 1), fmt_g17(s.mean), fmt_g17(s.sd),
                 fmt_g17(s.ci_low), fmt_g17(s.ci_high),
                 s.rhat_degenerate ? "nan" : fmt_g17(s.rhat)});
    }
  }
  {
    csv::Writer items_out(out_dir / "grm_items.csv");
    items_out.row({"rank", "item", "gamma_mean", "gamma_ci_low",
                   "gamma_ci_high", "beta_mean", "beta_ci_low",
                   "beta_ci_high"});
    int rank = 1;
    for (const auto& r : rank_discrimination(post)) {
      const auto& beta = *by_name.at("beta[" + r.name + "]");
      items_out.row({fmt_int(rank++), r.name, fmt_g17(r.gamma_mean),
                     fmt_g17(r.ci_low), fmt_g17(r.ci_high),
                     fmt_g17(beta.mean), fmt_g17(beta.ci_low),
                     fmt_g17(beta.ci_high)});
    }
  }
  {
    csv::Writer effects(out_dir / "grm_effects.csv");
    effects.row({"covariate", "mean", "sd", "ci_low", "ci_high",
                 "prob_positive", "rhat"});
    for (const auto& e : covariate_effects(post)) {
      const auto& s = *by_name.at("alpha[" + e.name + "]");
      effects.row({e.name, fmt_g17(e.mean), fmt_g17(e.sd), fmt_g17(e.ci_low),
                   fmt_g17(e.ci_high), fmt_g17(e.prob_positive),
                   s.rhat_degenerate ? "nan" : fmt_g17(s.rhat)});
    }
  }

  std::vector<std::string> outputs = {"grm_params.csv", "grm_theta.csv",
                                      "grm_items.csv", "grm_effects.csv"};
  if (opt.draws) {
    csv::Writer draws(out_dir / "grm_draws.csv");
    std::vector<std::string> header = {"chain", "draw"};
    for (const auto& name : post.covariate_names)
      header.push_back("alpha[" + name + "]");
    for (const auto& name : post.item_names)
      header.push_back("beta[" + name + "]");
    for (const auto& name : post.item_names)
      header.push_back("log_gamma[" + name + "]");
    for (int hh = 1; hh <= post.n_categories - 2; ++hh)
      header.push_back("delta[" + fmt_int(hh + 1) + "]");
    for (int i = 0; i < post.n; ++i)
      header.push_back("theta[" + fmt_int(i + 1) + "]");
    draws.row(header);
    for (std::size_t c = 0; c < post.chains.size(); ++c) {
      for (std::size_t d = 0; d < post.chains[c].size(); ++d) {
        const auto& draw = post.chains[c][d];
        std::vector<std::string> row = {
            fmt_int(static_cast<std::int64_t>(c + 1)),
            fmt_int(static_cast<std::int64_t>(d + 1))};
        for (int k = 0; k < draw.alpha.size(); ++k)
          row.push_back(fmt_g17(draw.alpha(k)));
        for (int j = 0; j < draw.beta.size(); ++j)
          row.push_back(fmt_g17(draw.beta(j)));
        for (int j = 0; j < draw.log_gamma.size(); ++j)
          row.push_back(fmt_g17(draw.log_gamma(j)));
        for (int hh = 1; hh < draw.delta.size(); ++hh)
          row.push_back(fmt_g17(draw.delta(hh)));
        for (int i = 0; i < draw.theta.size(); ++i)
          row.push_back(fmt_g17(draw.theta(i)));
        draws.row(row);
      }
    }
    outputs.push_back("grm_draws.csv");
  }

  manifest.config["items"] = items;
  manifest.config["covariates"] = opt.covariates;
  manifest.config["chains"] = opt.chains;
  manifest.config["iterations"] = opt.iterations;
  manifest.config["burn_in"] = opt.burn_in;
  manifest.config["thin"] = opt.thin;
  manifest.config["seed"] = opt.seed;
  manifest.config["precision_convention"] = opt.convention;
  manifest.config["draws"] = opt.draws;
  return outputs;
}

struct SimulateOptions {
  std::string model, spec, out;
  bool force = false;
};

std::vector<std::string> run_simulate(const SimulateOptions& opt,
                                      RunManifest& manifest) {
  std::ifstream in(opt.spec);
  if (!in) throw DataError("missing file: " + opt.spec);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("simulate: invalid JSON in " + opt.spec + ": " + e.what());
  }

  const fs::path out_csv(opt.out);
  const fs::path dir =
      out_csv.has_parent_path() ? out_csv.parent_path() : fs::path(".");
  const std::string stem = out_csv.stem().string();
  const fs::path truth_path = dir / (stem + "_truth.json");

  nlohmann::json truth;
  if (opt.model == "grm") {
    const GrmSimSpec spec = GrmSimSpec::from_json(j);
    const GrmSimResult result = gen_grm(spec);
    write_csv(result.data, out_csv);
    truth["model"] = "grm";
    truth["theta"] = std::vector<double>(
        result.truth.theta.data(),
        result.truth.theta.data() + result.truth.theta.size());
    truth["beta"] = std::vector<double>(
        result.truth.beta.data(),
        result.truth.beta.data() + result.truth.beta.size());
    std::vector<double> gamma;
    for (int i = 0; i < result.truth.log_gamma.size(); ++i)
      gamma.push_back(std::exp(result.truth.log_gamma(i)));
    truth["gamma"] = gamma;
    truth["delta"] = std::vector<double>(
        result.truth.delta.data(),
        result.truth.delta.data() + result.truth.delta.size());
    truth["alpha"] = std::vector<double>(
        result.truth.alpha.data(),
        result.truth.alpha.data() + result.truth.alpha.size());
  } else if (opt.model == "mrf") {
    const MrfSimSpec spec = MrfSimSpec::from_json(j);
    const Eigen::MatrixXi sample =
        gen_mrf(spec.state, spec.n, spec.seed, spec.gibbs);
    const SurveyDataset ds =
        mrf_sample_to_dataset(sample, spec.state.n_levels(), spec.names);
    write_csv(ds, out_csv);
    truth["model"] = "mrf";
    truth["n_levels"] = spec.state.n_levels();
    truth["edges"] = nlohmann::json::array();
    const int p = spec.state.n_vars();
    for (int i = 0; i < p - 1; ++i) {
      for (int jj = i + 1; jj < p; ++jj) {
        if (spec.state.gamma_adj(i, jj) == 1)
          truth["edges"].push_back(
              {{"a", i}, {"b", jj}, {"theta", spec.state.theta(i, jj)}});
      }
    }
  } else {
    throw ConfigError("--model must be grm or mrf");
  }
  write_text_file(truth_path, truth.dump(2) + "\n");

  manifest.config["model"] = opt.model;
  manifest.config["spec"] = fs::absolute(opt.spec).string();
  return {out_csv.filename().string(), truth_path.filename().string()};
}

struct ReportOptions {
  std::vector<std::string> runs;
  std::string out;
  bool force = false;
};

std::vector<std::string> run_report(const ReportOptions& opt,
                                    RunManifest& manifest) {
  std::vector<fs::path> dirs(opt.runs.begin(), opt.runs.end());
  const nlohmann::json report = consolidate_report(dirs);
  const fs::path out_dir(opt.out);
  write_text_file(out_dir / "report.json", report.dump(2) + "\n");
  write_text_file(out_dir / "report.txt", render_report_text(report));
  manifest.config["runs"] = opt.runs;
  return {"report.json", "report.txt"};
}

// ---------------------------------------------------------------------------

std::vector<std::string> quote_all(std::initializer_list<std::string> args) {
  return {args};
}

} // namespace

int run(int argc, const char* const* argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args);
}

int run(const std::vector<std::string>& args) {
  CLI::App app{"Bayesian analysis of ordinal survey data: exploratory "
               "statistics, network structure learning, and graded response "
               "modeling"};
  app.require_subcommand(1);

  IngestOptions ingest;
  auto* cmd_ingest =
      app.add_subcommand("ingest", "Load, subset, and clean a response file");
  cmd_ingest->add_option("--data", ingest.data)->required();
  cmd_ingest->add_option("--codebook", ingest.codebook)->required();
  cmd_ingest->add_option("--out", ingest.out);
  cmd_ingest->add_option("--items", ingest.items)->delimiter(',');
  cmd_ingest->add_option("--filter", ingest.filters);
  cmd_ingest->add_flag("--drop-any-missing", ingest.drop_any_missing);
  cmd_ingest->add_flag("--drop-all-missing", ingest.drop_all_missing);
  cmd_ingest->add_option("--straightline", ingest.straightline);
  cmd_ingest->add_flag("--force", ingest.force);

  ExploreOptions explore;
  auto* cmd_explore = app.add_subcommand(
      "explore", "Score distributions and Mood's median tests");
  cmd_explore->add_option("--data", explore.data)->required();
  cmd_explore->add_option("--codebook", explore.codebook)->required();
  cmd_explore->add_option("--out", explore.out);
  cmd_explore->add_option("--items", explore.items)->delimiter(',');
  cmd_explore->add_option("--by", explore.by)->delimiter(',');
  cmd_explore->add_flag("--force", explore.force);

  FitMrfOptions fit_mrf_opt;
  auto* cmd_mrf = app.add_subcommand(
      "fit-mrf", "Bayesian ordinal network with spike-and-slab edge selection");
  cmd_mrf->add_option("--data", fit_mrf_opt.data)->required();
  cmd_mrf->add_option("--codebook", fit_mrf_opt.codebook)->required();
  cmd_mrf->add_option("--out", fit_mrf_opt.out);
  cmd_mrf->add_option("--items", fit_mrf_opt.items)->delimiter(',');
  cmd_mrf->add_option("--covariates", fit_mrf_opt.covariates)->delimiter(',');
  cmd_mrf->add_option("--iterations", fit_mrf_opt.iterations);
  cmd_mrf->add_option("--burnin", fit_mrf_opt.burn_in);
  cmd_mrf->add_option("--thin", fit_mrf_opt.thin);
  cmd_mrf->add_option("--seed", fit_mrf_opt.seed);
  cmd_mrf->add_option("--slab-scale", fit_mrf_opt.slab_scale);
  cmd_mrf->add_option("--inclusion-prior", fit_mrf_opt.inclusion_prior);
  cmd_mrf->add_option("--threshold-sd", fit_mrf_opt.threshold_sd);
  cmd_mrf->add_option("--bf-threshold", fit_mrf_opt.bf_threshold);
  cmd_mrf->add_flag("--draws", fit_mrf_opt.draws);
  cmd_mrf->add_flag("--force", fit_mrf_opt.force);

  FitGrmOptions fit_grm_opt;
  auto* cmd_grm = app.add_subcommand(
      "fit-grm", "Bayesian graded response model with latent regression");
  cmd_grm->add_option("--data", fit_grm_opt.data)->required();
  cmd_grm->add_option("--codebook", fit_grm_opt.codebook)->required();
  cmd_grm->add_option("--out", fit_grm_opt.out);
  cmd_grm->add_option("--items", fit_grm_opt.items)->delimiter(',');
  cmd_grm->add_option("--covariates", fit_grm_opt.covariates)->delimiter(',');
  cmd_grm->add_option("--chains", fit_grm_opt.chains);
  cmd_grm->add_option("--iterations", fit_grm_opt.iterations);
  cmd_grm->add_option("--burnin", fit_grm_opt.burn_in);
  cmd_grm->add_option("--thin", fit_grm_opt.thin);
  cmd_grm->add_option("--seed", fit_grm_opt.seed);
  cmd_grm->add_option("--precision-convention", fit_grm_opt.convention)
      ->check(CLI::IsMember({"precision", "variance"}));
  cmd_grm->add_flag("--draws", fit_grm_opt.draws);
  cmd_grm->add_flag("--force", fit_grm_opt.force);

  SimulateOptions simulate;
  auto* cmd_sim =
      app.add_subcommand("simulate", "Generate synthetic data from a spec");
  cmd_sim->add_option("--model", simulate.model)
      ->required()
      ->check(CLI::IsMember({"grm", "mrf"}));
  cmd_sim->add_option("--spec", simulate.spec)->required();
  cmd_sim->add_option("--out", simulate.out)->required();
  cmd_sim->add_flag("--force", simulate.force);

  ReportOptions report;
  auto* cmd_report = app.add_subcommand(
      "report", "Merge fit-mrf and fit-grm runs into one document");
  cmd_report->add_option("--runs", report.runs)->required();
  cmd_report->add_option("--out", report.out);
  cmd_report->add_flag("--force", report.force);

  std::vector<const char*> argv;
  argv.push_back("ordbayes");
  for (const auto& arg : args) argv.push_back(arg.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  const auto started = std::chrono::steady_clock::now();
  try {
    RunManifest manifest;
    std::vector<std::string> outputs;
    fs::path manifest_path;

    if (cmd_ingest->parsed()) {
      if (ingest.out.empty()) ingest.out = default_out("ingest");
      prepare_out_dir(ingest.out, ingest.force);
      ingest.straightline_set = cmd_ingest->count("--straightline") > 0;
      manifest.subcommand = "ingest";
      manifest.add_input(ingest.data);
      manifest.add_input(ingest.codebook);
      outputs = run_ingest(ingest, manifest);
      manifest.resolved_args = quote_all(
          {"ingest", "--data", fs::absolute(ingest.data).string(),
           "--codebook", fs::absolute(ingest.codebook).string()});
      for (const auto& item : ingest.items) {
        manifest.resolved_args.push_back("--items");
        manifest.resolved_args.push_back(item);
      }
      for (const auto& f : ingest.filters) {
        manifest.resolved_args.push_back("--filter");
        manifest.resolved_args.push_back(f);
      }
      if (ingest.drop_any_missing)
        manifest.resolved_args.push_back("--drop-any-missing");
      if (ingest.drop_all_missing)
        manifest.resolved_args.push_back("--drop-all-missing");
      if (ingest.straightline_set) {
        manifest.resolved_args.push_back("--straightline");
        manifest.resolved_args.push_back(fmt_g17(ingest.straightline));
      }
      manifest_path = fs::path(ingest.out) / "manifest.json";
    } else if (cmd_explore->parsed()) {
      if (explore.out.empty()) explore.out = default_out("explore");
      prepare_out_dir(explore.out, explore.force);
      manifest.subcommand = "explore";
      manifest.add_input(explore.data);
      manifest.add_input(explore.codebook);
      outputs = run_explore(explore, manifest);
      manifest.resolved_args = quote_all(
          {"explore", "--data", fs::absolute(explore.data).string(),
           "--codebook", fs::absolute(explore.codebook).string()});
      for (const auto& item : explore.items) {
        manifest.resolved_args.push_back("--items");
        manifest.resolved_args.push_back(item);
      }
      for (const auto& b : explore.by) {
        manifest.resolved_args.push_back("--by");
        manifest.resolved_args.push_back(b);
      }
      manifest_path = fs::path(explore.out) / "manifest.json";
    } else if (cmd_mrf->parsed()) {
      if (fit_mrf_opt.out.empty()) fit_mrf_opt.out = default_out("fit-mrf");
      prepare_out_dir(fit_mrf_opt.out, fit_mrf_opt.force);
      manifest.subcommand = "fit-mrf";
      manifest.add_input(fit_mrf_opt.data);
      manifest.add_input(fit_mrf_opt.codebook);
      outputs = run_fit_mrf(fit_mrf_opt, manifest);
      manifest.resolved_args = quote_all(
          {"fit-mrf", "--data", fs::absolute(fit_mrf_opt.data).string(),
           "--codebook", fs::absolute(fit_mrf_opt.codebook).string(),
           "--iterations", fmt_int(fit_mrf_opt.iterations), "--burnin",
           fmt_int(fit_mrf_opt.burn_in), "--thin", fmt_int(fit_mrf_opt.thin),
           "--seed", fmt_int(static_cast<std::int64_t>(fit_mrf_opt.seed)),
           "--slab-scale", fmt_g17(fit_mrf_opt.slab_scale),
           "--inclusion-prior", fmt_g17(fit_mrf_opt.inclusion_prior),
           "--threshold-sd", fmt_g17(fit_mrf_opt.threshold_sd),
           "--bf-threshold", fmt_g17(fit_mrf_opt.bf_threshold)});
      for (const auto& item :
           manifest.config["items"].get<std::vector<std::string>>()) {
        manifest.resolved_args.push_back("--items");
        manifest.resolved_args.push_back(item);
      }
      for (const auto& cov : fit_mrf_opt.covariates) {
        manifest.resolved_args.push_back("--covariates");
        manifest.resolved_args.push_back(cov);
      }
      if (fit_mrf_opt.draws) manifest.resolved_args.push_back("--draws");
      manifest_path = fs::path(fit_mrf_opt.out) / "manifest.json";
    } else if (cmd_grm->parsed()) {
      if (fit_grm_opt.out.empty()) fit_grm_opt.out = default_out("fit-grm");
      prepare_out_dir(fit_grm_opt.out, fit_grm_opt.force);
      manifest.subcommand = "fit-grm";
      manifest.add_input(fit_grm_opt.data);
      manifest.add_input(fit_grm_opt.codebook);
      outputs = run_fit_grm(fit_grm_opt, manifest);
      manifest.resolved_args = quote_all(
          {"fit-grm", "--data", fs::absolute(fit_grm_opt.data).string(),
           "--codebook", fs::absolute(fit_grm_opt.codebook).string(),
           "--chains", fmt_int(fit_grm_opt.chains), "--iterations",
           fmt_int(fit_grm_opt.iterations), "--burnin",
           fmt_int(fit_grm_opt.burn_in), "--thin", fmt_int(fit_grm_opt.thin),
           "--seed", fmt_int(static_cast<std::int64_t>(fit_grm_opt.seed)),
           "--precision-convention", fit_grm_opt.convention});
      for (const auto& item :
           manifest.config["items"].get<std::vector<std::string>>()) {
        manifest.resolved_args.push_back("--items");
        manifest.resolved_args.push_back(item);
      }
      for (const auto& cov : fit_grm_opt.covariates) {
        manifest.resolved_args.push_back("--covariates");
        manifest.resolved_args.push_back(cov);
      }
      if (fit_grm_opt.draws) manifest.resolved_args.push_back("--draws");
      manifest_path = fs::path(fit_grm_opt.out) / "manifest.json";
    } else if (cmd_sim->parsed()) {
      prepare_out_file(simulate.out, simulate.force);
      manifest.subcommand = "simulate";
      manifest.add_input(simulate.spec);
      outputs = run_simulate(simulate, manifest);
      manifest.resolved_args =
          quote_all({"simulate", "--model", simulate.model, "--spec",
                     fs::absolute(simulate.spec).string()});
      const fs::path out_csv(simulate.out);
      const fs::path dir =
          out_csv.has_parent_path() ? out_csv.parent_path() : fs::path(".");
      manifest_path = dir / (out_csv.stem().string() + "_manifest.json");
    } else if (cmd_report->parsed()) {
      if (report.out.empty()) report.out = default_out("report");
      prepare_out_dir(report.out, report.force);
      manifest.subcommand = "report";
      for (const auto& dir : report.runs)
        manifest.add_input(fs::path(dir) / "manifest.json");
      outputs = run_report(report, manifest);
      manifest.resolved_args = {"report"};
      for (const auto& dir : report.runs) {
        manifest.resolved_args.push_back("--runs");
        manifest.resolved_args.push_back(fs::absolute(dir).string());
      }
      manifest_path = fs::path(report.out) / "manifest.json";
    }

    manifest.outputs = outputs;
    const auto finished = std::chrono::steady_clock::now();
    manifest.duration_ms =
        std::chrono::duration<double, std::milli>(finished - started).count();
    manifest.save(manifest_path);
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 1;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
}

} // namespace ordbayes
