#pragma once

#include <cstddef>
#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "modeclust/annotate.hpp"
#include "modeclust/dipstat.hpp"
#include "modeclust/matrix.hpp"

namespace modeclust
{
struct RunConfig
{
  double alpha = 0.25;
  std::size_t m = 25;
  double gamma = 4.0;
  std::size_t iterations = 1;
  std::size_t candidates = 200;
  uint64_t seed = 0;
  unsigned threads = 1;
  VoteMode vote = VoteMode::max;
  std::size_t max_antimodes = 100;
  /// Rotate onto this many principal components first; 0 disables.
  std::size_t pca = 0;
  double epsilon = 17.0;
  std::size_t stall_trees = 64;
  bool allow_repeat_coordinate = false;

  /// Library-level checks (m >= 4); the command line further requires m >= 6.
  void validate() const;
};

struct IterationSummary
{
  std::size_t clusters = 0;
  std::size_t residual_rows = 0;
  std::vector<std::size_t> candidates_per_pass;
  std::vector<std::size_t> trees_per_pass;
};

struct RunResult
{
  std::vector<std::string> names;
  VoteLedger ledger;
  std::vector<ClusterLabel> max_labels;
  std::vector<ClusterLabel> runoff_labels;
  std::vector<int> max_clusters;
  std::vector<int> runoff_clusters;
  /// Clustering produced by each single iteration.
  std::vector<std::vector<int>> iteration_clusters;
  std::vector<IterationSummary> iterations;
  /// Row sets chosen in each iteration (selected clusters, then residual).
  std::vector<std::vector<RowSet>> iteration_partitions;

  const std::vector<int>& clusters(VoteMode mode) const
  {
    return mode == VoteMode::max ? max_clusters : runoff_clusters;
  }
};

/// Standardizes once, then runs `iterations` rounds of noise, search,
/// selection and annotation, and votes over the per-row labels.
RunResult run(const RunConfig& cfg, const DataMatrix& input,
              const TableSet& tables = TableSet::bundled());

/// Report with the configuration (minus the thread count, which does not
/// affect results), per-row labels and counts, and per-iteration summaries.
nlohmann::json report_json(const RunConfig& cfg, const RunResult& result);

/// row,max_cluster,max_label,runoff_cluster,runoff_label
void write_labels_csv(std::ostream& out, const RunResult& result);

}  // namespace modeclust
