#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "modeclust/dipstat.hpp"
#include "modeclust/forest.hpp"
#include "modeclust/matrix.hpp"

namespace modeclust
{
/// Trimmed sample L-moments with symmetric trimming t: the L-scale
/// lambda_2, and the ratios lambda_3 / lambda_2 and lambda_4 / lambda_2.
struct LMoments
{
  double scale = 0.0;     // sigma
  double skewness = 0.0;  // tau
  double kurtosis = 0.0;  // phi
};

/// Requires n >= 4 + 2 * trim.
LMoments trimmed_lmoments(std::span<const double> sample, int trim = 1);

/// Trimmed (1, 1) L-moments when the sample allows it, untrimmed otherwise
/// (clusters of 4 or 5 rows).
LMoments cluster_lmoments(std::span<const double> sample);

struct ClusterScore
{
  double delta = 0.0;
  double sigma_max = 0.0, sigma_sum = 0.0;
  double tau_max = 0.0, tau_sum = 0.0;
  double phi_max = 0.0, phi_sum = 0.0;
  double sigma_nm = 0.0, sigma_ns = 0.0;
  double tau_nm = 0.0, tau_ns = 0.0;
  double phi_nm = 0.0, phi_ns = 0.0;
  double preference = 0.0;
};

/// Per-candidate summaries feeding the score: the dip p-values and the
/// L-moments of every coordinate.
struct CandidateSummary
{
  std::vector<double> pvalues;
  std::vector<LMoments> moments;
};

CandidateSummary summarize(const CandidateCluster& c, const DataMatrix& m);

/// Preference scores; normalization is relative to the maxima over this set.
/// An aggregate whose set maximum is zero normalizes to 1 for everyone.
std::vector<ClusterScore> score_candidates(
    std::span<const CandidateSummary> candidates);

/// Candidates joined when their row sets intersect.
struct OverlapGraph
{
  std::vector<std::vector<std::size_t>> adjacent;  // sorted neighbour lists

  std::size_t size() const { return adjacent.size(); }
  bool connected(std::size_t a, std::size_t b) const;
};

OverlapGraph overlap_graph(std::span<const RowSet> clusters);

/// Greedy independent set: repeatedly take the highest-weight remaining node
/// and drop its neighbours. Equal weights go to the lower node index.
std::vector<std::size_t> greedy_mwis(const OverlapGraph& g,
                                     std::span<const double> weights);

/// Result of one clustering pass sequence over a noised matrix.
struct IterationClusters
{
  /// Selected clusters in selection order.
  std::vector<RowSet> selected;
  /// Rows left over when the passes stop (possibly empty).
  RowSet residual;
  /// Cut-points from the initial search.
  CutPointLog log;
  std::vector<std::size_t> candidates_per_pass;
  std::vector<std::size_t> trees_per_pass;
};

/// Search, score and select on the remaining rows until none remain, no
/// candidate is found, or fewer than m rows remain.
IterationClusters cluster_matrix(const DataMatrix& noised, const SearchConfig& cfg,
                                 const TableSet& tables);

}  // namespace modeclust
