#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <span>
#include <unordered_map>
#include <vector>

#include "modeclust/density.hpp"
#include "modeclust/dipstat.hpp"
#include "modeclust/matrix.hpp"
#include "modeclust/rng.hpp"

namespace modeclust
{
/// Sorted row indices into the full data matrix.
using RowSet = std::vector<uint32_t>;

/// Below this many rows a multimodal coordinate is split by the sequential
/// k-dip estimate and 1-D k-medoids instead of the taut string.
inline constexpr std::size_t kTautStringMinRows = 400;

struct SearchConfig
{
  double alpha = 0.25;
  std::size_t m = 25;
  std::size_t max_antimodes = 100;
  /// Stop sampling trees once this many distinct candidates are pooled.
  std::size_t max_candidates = 200;
  /// Stop after this many consecutive trees add no new candidate.
  std::size_t stall_trees = 64;
  /// Hard cap on trees per search.
  std::size_t max_trees = 20000;
  bool allow_repeat_coordinate = false;
  uint64_t seed = 0;
  unsigned threads = 1;

  void validate() const;
};

enum class SplitVerdict
{
  unimodal,   // dip p-value above alpha
  no_split,   // dip rejects but the density shows a single mode
  split,
  terminate,  // more antimodes than max_antimodes
};

struct CoordinateSplit
{
  SplitVerdict verdict = SplitVerdict::unimodal;
  double pvalue = 1.0;
  /// Estimated mode count (k-dip path) or number of taut-string modes.
  int modes = 1;
  bool used_taut_string = false;
  std::vector<double> cutpoints;
  /// Row sets of the modal groups, left to right.
  std::vector<RowSet> children;
};

/// Splits the rows of one coordinate. Values must be distinct.
CoordinateSplit split_coordinate(const DataMatrix& m, const RowSet& rows,
                                 std::size_t coord, const SearchConfig& cfg,
                                 const TableSet& tables);

/// Dip p-value of one coordinate restricted to `rows`.
double coordinate_pvalue(const DataMatrix& m, const RowSet& rows,
                         std::size_t coord, const TableSet& tables);

struct CandidateCluster
{
  RowSet rows;
  /// Dip p-value of every coordinate within the cluster.
  std::vector<double> pvalues;

  double delta() const;
};

/// Cut-point vectors recorded while splitting, per coordinate and count.
/// Identical vectors (the same split reached in several trees) are stored
/// once.
struct CutPointLog
{
  std::vector<std::map<std::size_t, std::set<std::vector<double>>>> coords;

  explicit CutPointLog(std::size_t p = 0) : coords(p) {}
  void record(std::size_t coord, const std::vector<double>& cuts);
  void merge(const CutPointLog& other);
  bool empty() const;
  friend bool operator==(const CutPointLog&, const CutPointLog&) = default;
};

struct TreeNode
{
  RowSet rows;
  /// Coordinate split at this node, or -1 for a leaf.
  int coord = -1;
  std::vector<double> cutpoints;
  std::vector<std::size_t> children;
  enum class Kind
  {
    internal,
    candidate,  // an alpha-m-cluster
    pruned,     // fewer than m rows
    dead_end,   // no usable split, yet some coordinate is multimodal
  } kind = Kind::internal;
};

struct PartitionTree
{
  std::vector<TreeNode> nodes;  // nodes[0] is the root
  std::vector<std::size_t> leaves_of(TreeNode::Kind kind) const;
};

/// Memoized search over one (noised) matrix. Node p-values and coordinate
/// splits are computed once per (row set, coordinate) and shared across
/// trees and threads.
class ForestSearch
{
public:
  ForestSearch(const DataMatrix& m, const SearchConfig& cfg,
               const TableSet& tables);

  const std::vector<double>& pvalues(const RowSet& rows);
  const CoordinateSplit& split(const RowSet& rows, std::size_t coord);

  /// Coordinates that split `rows`, excluding those in `used`.
  std::vector<std::size_t> splittable(const RowSet& rows,
                                      const std::vector<bool>& used);

  /// Grows one tree from `rows` with the given root coordinate, choosing the
  /// coordinate at every later node uniformly among the splittable ones.
  /// Cut-points are added to `log` when it is non-null.
  PartitionTree grow_tree(const RowSet& rows, std::size_t root, Rng& rng,
                          CutPointLog* log);

  const DataMatrix& matrix() const { return m_; }
  const SearchConfig& config() const { return cfg_; }

private:
  struct Node
  {
    std::vector<double> pvalues;
    std::map<std::size_t, std::shared_ptr<const CoordinateSplit>> splits;
  };
  struct RowHash
  {
    std::size_t operator()(const RowSet& r) const noexcept;
  };

  Node& node(const RowSet& rows);

  const DataMatrix& m_;
  SearchConfig cfg_;
  const TableSet& tables_;
  std::mutex mutex_;
  std::unordered_map<RowSet, std::unique_ptr<Node>, RowHash> cache_;
};

struct ForestSample
{
  std::vector<CandidateCluster> candidates;  // distinct, in discovery order
  CutPointLog log;
  std::size_t trees = 0;
};

/// Samples whole trees until max_candidates distinct candidates are pooled,
/// stall_trees consecutive trees bring nothing new, or max_trees is reached.
/// Tree t draws from the stream (cfg.seed, stream, t); trees are merged in
/// index order, so the result does not depend on cfg.threads.
ForestSample sample_forest(ForestSearch& search, const RowSet& rows,
                           uint64_t stream);

/// Convenience overload on the full matrix.
ForestSample sample_forest(const DataMatrix& m, const SearchConfig& cfg,
                           const TableSet& tables);

RowSet all_rows(std::size_t n);

}  // namespace modeclust
