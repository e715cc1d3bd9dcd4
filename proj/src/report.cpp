#include <algorithm>
#include <map>
#include <numeric>
#include <set>

#include "ordbayes/cli.hpp"
#include "ordbayes/csv.hpp"
#include "ordbayes/errors.hpp"
#include "ordbayes/format.hpp"
#include "ordbayes/manifest.hpp"

namespace ordbayes {

namespace {

int column_of(const csv::Table& table, const std::string& name,
              const std::string& file) {
  for (std::size_t c = 0; c < table.header.size(); ++c) {
    if (table.header[c] == name) return static_cast<int>(c);
  }
  throw DataError("report: column '" + name + "' missing from " + file);
}

double to_double(const std::string& s) { return std::stod(s); }

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(n) {
    std::iota(parent.begin(), parent.end(), 0);
  }
  int find(int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void merge(int a, int b) { parent[find(a)] = find(b); }
};

nlohmann::json mrf_section(const std::filesystem::path& dir,
                           const RunManifest& manifest) {
  nlohmann::json section;
  section["present"] = true;
  section["run_dir"] = dir.string();
  const double bf_threshold = manifest.config.at("bf_threshold").get<double>();
  section["bf_threshold"] = bf_threshold;

  std::vector<std::string> nodes =
      manifest.config.at("items").get<std::vector<std::string>>();
  for (const auto& cov :
       manifest.config.at("covariates").get<std::vector<std::string>>())
    nodes.push_back(cov);
  section["nodes"] = nodes;

  std::map<std::string, int> node_index;
  for (std::size_t i = 0; i < nodes.size(); ++i)
    node_index[nodes[i]] = static_cast<int>(i);

  const auto edges_file = dir / "edges.csv";
  const csv::Table table = csv::read_file(edges_file);
  const int c_a = column_of(table, "node_a", "edges.csv");
  const int c_b = column_of(table, "node_b", "edges.csv");
  const int c_incl = column_of(table, "inclusion_prob", "edges.csv");
  const int c_bf = column_of(table, "bf10", "edges.csv");
  const int c_mean = column_of(table, "theta_mean", "edges.csv");
  const int c_lo = column_of(table, "ci_low", "edges.csv");
  const int c_hi = column_of(table, "ci_high", "edges.csv");
  const int c_conclusive = column_of(table, "conclusive", "edges.csv");

  UnionFind components(static_cast<int>(nodes.size()));
  section["edges"] = nlohmann::json::array();
  for (const auto& row : table.rows) {
    const double inclusion = to_double(row[c_incl]);
    if (inclusion < 0.5) continue;
    const bool conclusive = row[c_conclusive] == "1";
    section["edges"].push_back({{"node_a", row[c_a]},
                                {"node_b", row[c_b]},
                                {"inclusion_prob", inclusion},
                                {"bf10", to_double(row[c_bf])},
                                {"theta_mean", to_double(row[c_mean])},
                                {"ci_low", to_double(row[c_lo])},
                                {"ci_high", to_double(row[c_hi])},
                                {"conclusive", conclusive}});
    if (conclusive) {
      const auto a = node_index.find(row[c_a]);
      const auto b = node_index.find(row[c_b]);
      if (a == node_index.end() || b == node_index.end())
        throw DataError("report: edge references unknown node in " +
                        edges_file.string());
      components.merge(a->second, b->second);
    }
  }

  // Clusters: connected components of the conclusive subgraph, size >= 2,
  // largest first.
  std::map<int, std::vector<std::string>> by_root;
  for (std::size_t i = 0; i < nodes.size(); ++i)
    by_root[components.find(static_cast<int>(i))].push_back(nodes[i]);
  std::vector<std::vector<std::string>> clusters;
  std::vector<std::string> isolated;
  for (auto& [root, members] : by_root) {
    if (members.size() >= 2) {
      clusters.push_back(std::move(members));
    } else {
      isolated.push_back(members.front());
    }
  }
  std::sort(clusters.begin(), clusters.end(),
            [](const auto& a, const auto& b) {
              if (a.size() != b.size()) return a.size() > b.size();
              return a.front() < b.front();
            });
  section["clusters"] = clusters;
  section["isolated_nodes"] = isolated;
  return section;
}

nlohmann::json grm_section(const std::filesystem::path& dir,
                           const RunManifest& manifest) {
  nlohmann::json section;
  section["present"] = true;
  section["run_dir"] = dir.string();

  const auto items_file = dir / "grm_items.csv";
  const csv::Table items = csv::read_file(items_file);
  const int c_rank = column_of(items, "rank", "grm_items.csv");
  const int c_item = column_of(items, "item", "grm_items.csv");
  const int c_gamma = column_of(items, "gamma_mean", "grm_items.csv");
  const int c_glo = column_of(items, "gamma_ci_low", "grm_items.csv");
  const int c_ghi = column_of(items, "gamma_ci_high", "grm_items.csv");
  section["ranking"] = nlohmann::json::array();
  for (const auto& row : items.rows) {
    section["ranking"].push_back({{"rank", std::stoi(row[c_rank])},
                                  {"item", row[c_item]},
                                  {"gamma_mean", to_double(row[c_gamma])},
                                  {"ci_low", to_double(row[c_glo])},
                                  {"ci_high", to_double(row[c_ghi])}});
  }

  const auto effects_file = dir / "grm_effects.csv";
  const csv::Table effects = csv::read_file(effects_file);
  const int c_cov = column_of(effects, "covariate", "grm_effects.csv");
  const int c_mean = column_of(effects, "mean", "grm_effects.csv");
  const int c_lo = column_of(effects, "ci_low", "grm_effects.csv");
  const int c_hi = column_of(effects, "ci_high", "grm_effects.csv");
  const int c_pd = column_of(effects, "prob_positive", "grm_effects.csv");
  section["covariate_effects"] = nlohmann::json::array();
  for (const auto& row : effects.rows) {
    section["covariate_effects"].push_back(
        {{"covariate", row[c_cov]},
         {"mean", to_double(row[c_mean])},
         {"ci_low", to_double(row[c_lo])},
         {"ci_high", to_double(row[c_hi])},
         {"prob_positive", to_double(row[c_pd])}});
  }
  (void)manifest;
  return section;
}

} // namespace

nlohmann::json consolidate_report(
    const std::vector<std::filesystem::path>& run_dirs) {
  if (run_dirs.empty()) throw ConfigError("report: no run directories given");

  nlohmann::json report;
  report["mrf"] = {{"present", false}};
  report["grm"] = {{"present", false}};

  std::vector<std::string> reference_items;
  std::string reference_dir;

  for (const auto& dir : run_dirs) {
    const RunManifest manifest = RunManifest::load(dir / "manifest.json");
    auto items = manifest.config.at("items").get<std::vector<std::string>>();

    std::vector<std::string> sorted_items = items;
    std::sort(sorted_items.begin(), sorted_items.end());
    if (reference_items.empty()) {
      reference_items = sorted_items;
      reference_dir = dir.string();
      report["items"] = items;
    } else if (sorted_items != reference_items) {
      std::vector<std::string> diff;
      std::set_symmetric_difference(reference_items.begin(),
                                    reference_items.end(),
                                    sorted_items.begin(), sorted_items.end(),
                                    std::back_inserter(diff));
      std::string msg = "incompatible runs: item sets differ between " +
                        reference_dir + " and " + dir.string() +
                        "; symmetric difference:";
      for (const auto& d : diff) msg += " " + d;
      throw DataError(msg);
    }

    if (manifest.subcommand == "fit-mrf") {
      if (report["mrf"]["present"].get<bool>())
        throw DataError("report: more than one network run supplied");
      report["mrf"] = mrf_section(dir, manifest);
    } else if (manifest.subcommand == "fit-grm") {
      if (report["grm"]["present"].get<bool>())
        throw DataError("report: more than one graded-response run supplied");
      report["grm"] = grm_section(dir, manifest);
    } else {
      throw DataError("report: run " + dir.string() +
                      " is not a fit-mrf or fit-grm run");
    }
  }
  return report;
}

namespace {

std::string fixed(double v, int precision = 3) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", precision, v);
  return buf;
}

} // namespace

std::string render_report_text(const nlohmann::json& report) {
  std::string out;
  out += "== Item set ==\n";
  for (const auto& item : report.at("items")) {
    out += item.get<std::string>() + " ";
  }
  out += "\n\n";

  out += "== Network: median probability graph ==\n";
  if (report.at("mrf").at("present").get<bool>()) {
    const auto& mrf = report.at("mrf");
    out += "BF10 threshold: " + fixed(mrf.at("bf_threshold").get<double>(), 1) +
           "\n";
    out += "clusters (conclusive edges):\n";
    int cluster_id = 1;
    for (const auto& cluster : mrf.at("clusters")) {
      out += "  " + fmt_int(cluster_id++) + ":";
      for (const auto& node : cluster) out += " " + node.get<std::string>();
      out += "\n";
    }
    if (mrf.at("clusters").empty()) out += "  (none)\n";
    out += "edges:\n";
    for (const auto& edge : mrf.at("edges")) {
      out += "  " + edge.at("node_a").get<std::string>() + " -- " +
             edge.at("node_b").get<std::string>() +
             "  incl=" + fixed(edge.at("inclusion_prob").get<double>()) +
             "  bf10=" + fixed(edge.at("bf10").get<double>(), 2) +
             "  weight=" + fixed(edge.at("theta_mean").get<double>());
      if (!edge.at("conclusive").get<bool>()) out += "  [inconclusive]";
      out += "\n";
    }
  } else {
    out += "(absent)\n";
  }
  out += "\n== Graded response model ==\n";
  if (report.at("grm").at("present").get<bool>()) {
    const auto& grm = report.at("grm");
    out += "discrimination ranking:\n";
    for (const auto& row : grm.at("ranking")) {
      out += "  " + fmt_int(row.at("rank").get<int>()) + ". " +
             row.at("item").get<std::string>() +
             "  gamma=" + fixed(row.at("gamma_mean").get<double>()) + " [" +
             fixed(row.at("ci_low").get<double>()) + ", " +
             fixed(row.at("ci_high").get<double>()) + "]\n";
    }
    out += "covariate effects:\n";
    for (const auto& row : grm.at("covariate_effects")) {
      out += "  " + row.at("covariate").get<std::string>() +
             "  mean=" + fixed(row.at("mean").get<double>()) + " [" +
             fixed(row.at("ci_low").get<double>()) + ", " +
             fixed(row.at("ci_high").get<double>()) +
             "]  Pr(>0)=" + fixed(row.at("prob_positive").get<double>()) + "\n";
    }
  } else {
    out += "(absent)\n";
  }
  return out;
}

} // namespace ordbayes
