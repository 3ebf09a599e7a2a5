#include "modeclust/pipeline.hpp"

#include <algorithm>
#include <cmath>

#include "modeclust/errors.hpp"
#include "modeclust/forest.hpp"
#include "modeclust/noise.hpp"
#include "modeclust/select.hpp"

namespace modeclust
{
void RunConfig::validate() const
{
  SearchConfig s;
  s.alpha = alpha;
  s.m = m;
  s.max_antimodes = max_antimodes;
  s.max_candidates = candidates;
  s.stall_trees = stall_trees;
  s.threads = threads;
  s.validate();
  NoiseConfig{gamma, seed}.validate();
  LabelingConfig{epsilon}.validate();
  if (iterations < 1)
  {
    throw ConfigError("iterations must be at least 1");
  }
}

namespace
{
const char* vote_name(VoteMode v) { return v == VoteMode::max ? "max" : "runoff"; }
}  // namespace

RunResult run(const RunConfig& cfg, const DataMatrix& input, const TableSet& tables)
{
  cfg.validate();
  DataMatrix x = standardize(input);
  if (cfg.pca > 0)
  {
    x = standardize(pca_rotate(x, cfg.pca));
  }

  RunResult result;
  result.names = x.names;
  result.ledger = VoteLedger(x.rows);

  SearchConfig search;
  search.alpha = cfg.alpha;
  search.m = cfg.m;
  search.max_antimodes = cfg.max_antimodes;
  search.max_candidates = cfg.candidates;
  search.stall_trees = cfg.stall_trees;
  search.allow_repeat_coordinate = cfg.allow_repeat_coordinate;
  search.threads = cfg.threads;
  const LabelingConfig labeling{cfg.epsilon};

  for (std::size_t it = 0; it < cfg.iterations; ++it)
  {
    const DataMatrix noised = add_noise(x, {cfg.gamma, cfg.seed}, it);
    search.seed = derive_seed(cfg.seed, {0x736561726368, it});
    IterationClusters ic = cluster_matrix(noised, search, tables);
    const AnnotationBoundaries bounds = derive_boundaries(ic.log);

    std::vector<RowSet> parts = std::move(ic.selected);
    if (!ic.residual.empty())
    {
      parts.push_back(ic.residual);
    }
    std::vector<ClusterLabel> row_labels(x.rows);
    std::vector<bool> seen(x.rows, false);
    for (const auto& part : parts)
    {
      const auto labels = label_cluster(part, noised, bounds, labeling);
      for (std::size_t i = 0; i < part.size(); ++i)
      {
        if (seen[part[i]])
        {
          throw std::logic_error("row assigned to two clusters");
        }
        seen[part[i]] = true;
        row_labels[part[i]] = labels[i];
      }
    }
    if (!std::all_of(seen.begin(), seen.end(), [](bool b) { return b; }))
    {
      throw std::logic_error("iteration left rows unassigned");
    }
    result.ledger.add_iteration(row_labels);
    result.iteration_clusters.push_back(clustering_from_labels(row_labels));

    IterationSummary summary;
    summary.clusters = parts.size();
    summary.residual_rows = ic.residual.size();
    summary.candidates_per_pass = ic.candidates_per_pass;
    summary.trees_per_pass = ic.trees_per_pass;
    result.iterations.push_back(std::move(summary));
    result.iteration_partitions.push_back(std::move(parts));
  }

  result.max_labels = vote(result.ledger, VoteMode::max);
  result.runoff_labels = vote(result.ledger, VoteMode::runoff);
  result.max_clusters = clustering_from_labels(result.max_labels);
  result.runoff_clusters = clustering_from_labels(result.runoff_labels);
  return result;
}

nlohmann::json report_json(const RunConfig& cfg, const RunResult& r)
{
  nlohmann::json j;
  j["format"] = "modeclust-report";
  j["version"] = 1;
  j["config"] = {{"alpha", cfg.alpha},
                 {"m", cfg.m},
                 {"gamma", cfg.gamma},
                 {"iterations", cfg.iterations},
                 {"candidates", cfg.candidates},
                 {"seed", cfg.seed},
                 {"vote", vote_name(cfg.vote)},
                 {"max_antimodes", cfg.max_antimodes},
                 {"pca", cfg.pca},
                 {"epsilon", cfg.epsilon},
                 {"stall_trees", cfg.stall_trees},
                 {"allow_repeat_coordinate", cfg.allow_repeat_coordinate}};
  j["columns"] = r.names;
  const auto& primary = cfg.vote == VoteMode::max ? r.max_clusters : r.runoff_clusters;
  j["clusters"] = primary.empty()
                      ? 0
                      : *std::max_element(primary.begin(), primary.end()) + 1;
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t i = 0; i < r.max_labels.size(); ++i)
  {
    nlohmann::json counts = nlohmann::json::array();
    for (const auto& [key, n] : r.ledger.ranked(i))
    {
      counts.push_back({{"label", r.ledger.labels.at(key).render(r.names)},
                        {"count", n}});
    }
    rows.push_back({{"row", i},
                    {"cluster", primary[i]},
                    {"max_label", r.max_labels[i].render(r.names)},
                    {"max_cluster", r.max_clusters[i]},
                    {"runoff_label", r.runoff_labels[i].render(r.names)},
                    {"runoff_cluster", r.runoff_clusters[i]},
                    {"top_counts", counts}});
  }
  j["rows"] = rows;
  nlohmann::json its = nlohmann::json::array();
  for (const auto& s : r.iterations)
  {
    its.push_back({{"clusters", s.clusters},
                   {"residual_rows", s.residual_rows},
                   {"candidates_per_pass", s.candidates_per_pass},
                   {"trees_per_pass", s.trees_per_pass}});
  }
  j["iterations"] = its;
  return j;
}

void write_labels_csv(std::ostream& out, const RunResult& r)
{
  const auto quote = [](const std::string& s) { return '"' + s + '"'; };
  out << "row,max_cluster,max_label,runoff_cluster,runoff_label\n";
  for (std::size_t i = 0; i < r.max_labels.size(); ++i)
  {
    out << i << ',' << r.max_clusters[i] << ','
        << quote(r.max_labels[i].render(r.names)) << ',' << r.runoff_clusters[i]
        << ',' << quote(r.runoff_labels[i].render(r.names)) << '\n';
  }
}

}  // namespace modeclust
